use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};

use kbq_core::acquisition::{
    ParseMode, ReleaseDescriptor, ReleaseRegistry, ReleaseSource, Snapshot, SparqlClient,
};
use kbq_core::evolution::{
    compare_releases, growth_analysis, write_completeness_csv, write_growth_csv, CompletenessMode,
    CountSeries, SeriesPoint, Strictness,
};
use kbq_core::features::{
    cardinality_features, load_annotations, observed_cardinality_labels, range_features, smote,
    string_quartiles, write_feature_matrix, FeatureRow, MaxLabel, MinLabel, SmoteParams, Task,
    CARDINALITY_FEATURE_NAMES, RANGE_FEATURE_NAMES,
};
use kbq_core::learn::{cross_validate, train, Algorithm, ClassifierSpec, Dataset, Model};
use kbq_core::profile::{
    filter_properties, profile_class_endpoint, profile_filename, profile_snapshot,
    schema_consistent_classes, ClassProfile, KBProfile, ProfileOptions,
};
use kbq_core::rdf::{Iri, TermKind};
use kbq_core::shapes::{induce_constraints, ClassSelection, PropertyInputs, ShapeDocument};

use crate::lock::OutDirLock;
use crate::{Cli, Command, Mode};

// per-stage seed streams derived from the base --seed
const SMOTE_STREAM: u64 = 0x534d_4f54_45; // "SMOTE"
const LEARN_STREAM: u64 = 0x4c45_4152_4e; // "LEARN"

struct Ctx {
    registry_path: PathBuf,
    out: PathBuf,
    seed: u64,
    mode: CompletenessMode,
    strictness: Strictness,
    class_threshold: Option<f64>,
}

impl Ctx {
    fn provenance(&self) -> String {
        format!(
            "kbq {} seed={} mode={}",
            env!("CARGO_PKG_VERSION"),
            self.seed,
            self.mode
        )
    }

    fn load_registry(&self) -> Result<ReleaseRegistry> {
        ReleaseRegistry::load(&self.registry_path)
            .with_context(|| format!("loading registry {}", self.registry_path.display()))
    }

    fn profile_path(&self, release: &str) -> PathBuf {
        self.out.join(profile_filename(release))
    }

    fn load_profile(&self, release: &str) -> Result<KBProfile> {
        let path = self.profile_path(release);
        KBProfile::load(&path).with_context(|| {
            format!(
                "missing or unreadable profile {}; run `kbq profile --release {}` first",
                path.display(),
                release
            )
        })
    }

    fn class_selection(&self) -> ClassSelection {
        match self.class_threshold {
            Some(tau) => ClassSelection::Threshold(tau),
            None => ClassSelection::MaxCoverage,
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let ctx = Ctx {
        registry_path: cli.registry,
        out: cli.out,
        seed: cli.seed,
        mode: match cli.mode {
            Mode::Raw => CompletenessMode::Raw,
            Mode::Normalized => CompletenessMode::Normalized,
        },
        strictness: if cli.strict { Strictness::Strict } else { Strictness::Weak },
        class_threshold: cli.class_threshold,
    };
    match cli.command {
        Command::Register { id, date, dump, endpoint } => register(&ctx, id, date, dump, endpoint),
        Command::Profile { release, all, classes, include_type, strict_parse } => {
            let _lock = OutDirLock::acquire(&ctx.out)?;
            profile(&ctx, release, all, classes, include_type, strict_parse)
        }
        Command::Completeness { class, prev, cur } => {
            let _lock = OutDirLock::acquire(&ctx.out)?;
            completeness(&ctx, class, prev, cur)
        }
        Command::Growth { class } => {
            let _lock = OutDirLock::acquire(&ctx.out)?;
            growth(&ctx, class)
        }
        Command::DiffSubjects { class, property, prev, cur } => {
            let _lock = OutDirLock::acquire(&ctx.out)?;
            diff_subjects(&ctx, class, property, prev, cur)
        }
        Command::Features { class, release } => {
            let _lock = OutDirLock::acquire(&ctx.out)?;
            features(&ctx, &class, &release).map(|_| ())
        }
        Command::Train {
            task,
            features,
            annotations,
            algorithm,
            folds,
            positive_class,
            no_smote,
            trees,
            knn_k,
        } => {
            let _lock = OutDirLock::acquire(&ctx.out)?;
            train_cmd(
                &ctx,
                &task,
                &features,
                &annotations,
                &algorithm,
                folds,
                positive_class,
                no_smote,
                trees,
                knn_k,
            )
        }
        Command::Induce {
            class,
            release,
            annotations,
            emit_shapes,
            algorithm,
            folds,
            no_smote,
            trees,
            knn_k,
        } => {
            let _lock = OutDirLock::acquire(&ctx.out)?;
            induce(
                &ctx,
                &class,
                &release,
                annotations.as_deref(),
                emit_shapes,
                &algorithm,
                folds,
                no_smote,
                trees,
                knn_k,
            )
        }
    }
}

fn parse_iri(s: &str) -> Result<Iri> {
    Iri::new(s).map_err(|e| anyhow!("{e}"))
}

fn register(
    ctx: &Ctx,
    id: String,
    date: String,
    dump: Option<PathBuf>,
    endpoint: Option<String>,
) -> Result<()> {
    let mut registry = if ctx.registry_path.exists() {
        ctx.load_registry()?
    } else {
        ReleaseRegistry::new()
    };
    let source = match (dump, endpoint) {
        (Some(path), None) => ReleaseSource::Dump(path),
        (None, Some(url)) => ReleaseSource::Endpoint(url),
        _ => unreachable!("clap enforces exactly one source"),
    };
    let descriptor = ReleaseDescriptor::new(&id, &date, source)?;
    registry.register(descriptor)?;
    registry.save(&ctx.registry_path)?;
    println!("registered {id} ({date}); registry now holds {} releases", registry.len());
    Ok(())
}

fn profile(
    ctx: &Ctx,
    releases: Vec<String>,
    all: bool,
    classes: Vec<String>,
    include_type: bool,
    strict_parse: bool,
) -> Result<()> {
    let registry = ctx.load_registry()?;
    let selected: Vec<&ReleaseDescriptor> = if all {
        registry.releases().iter().collect()
    } else {
        releases
            .iter()
            .map(|id| registry.require(id).map_err(anyhow::Error::from))
            .collect::<Result<_>>()?
    };
    let class_filter: Vec<Iri> =
        classes.iter().map(|c| parse_iri(c)).collect::<Result<_>>()?;
    let opts = ProfileOptions { include_type };

    for descriptor in selected {
        let profile = match &descriptor.source {
            ReleaseSource::Dump(path) => {
                let mode = if strict_parse { ParseMode::Strict } else { ParseMode::Lenient };
                let (snapshot, errors) = Snapshot::load_dump(path, &descriptor.id, mode)
                    .with_context(|| format!("loading dump for release {}", descriptor.id))?;
                for e in &errors {
                    eprintln!("kbq: warning: {}: {e}", path.display());
                }
                let filter = (!class_filter.is_empty()).then_some(class_filter.as_slice());
                profile_snapshot(&snapshot, filter, opts)
            }
            ReleaseSource::Endpoint(url) => {
                if class_filter.is_empty() {
                    bail!(
                        "release {} is endpoint-backed; profiling an endpoint needs --class",
                        descriptor.id
                    );
                }
                let client = SparqlClient::new(url.clone()).with_env_token();
                let mut kb = KBProfile::new(&descriptor.id);
                for class in &class_filter {
                    let profile = profile_class_endpoint(&client, &descriptor.id, class)
                        .with_context(|| {
                            format!("profiling {} against {}", class.as_str(), url)
                        })?;
                    kb.insert(profile);
                }
                kb
            }
        };
        let path = ctx.profile_path(&descriptor.id);
        profile.save(&path)?;
        println!("wrote {} ({} classes)", path.display(), profile.classes.len());
    }
    Ok(())
}

fn completeness(ctx: &Ctx, class: String, prev: String, cur: String) -> Result<()> {
    let prev_profile = ctx.load_profile(&prev)?;
    let cur_profile = ctx.load_profile(&cur)?;
    let both = [prev_profile, cur_profile];
    let consistent = schema_consistent_classes(&both)?;
    if !consistent.contains(&class) {
        bail!("class {class} is not present with instances in both {prev} and {cur}");
    }
    let properties = filter_properties(&both, &class)?;
    let [prev_profile, cur_profile] = both;
    let report = compare_releases(
        prev_profile.class(&class).expect("checked above"),
        cur_profile.class(&class).expect("checked above"),
        &properties,
        ctx.mode,
        ctx.strictness,
    )?;
    let path = ctx.out.join(format!(
        "completeness-{}-{prev}-{cur}.csv",
        local_name(&class)
    ));
    let file = fs::File::create(&path)?;
    write_completeness_csv(std::io::BufWriter::new(file), &report, Some(&ctx.provenance()))?;
    println!("wrote {}", path.display());
    println!("class_completeness={}", report.class_completeness);
    Ok(())
}

fn growth(ctx: &Ctx, class: String) -> Result<()> {
    let registry = ctx.load_registry()?;
    let mut points = Vec::new();
    for descriptor in registry.releases() {
        let profile = ctx.load_profile(&descriptor.id)?;
        let class_profile = profile.class(&class).ok_or_else(|| {
            anyhow!(
                "profile for release {} does not cover class {class}; \
                 re-run `kbq profile` including it",
                descriptor.id
            )
        })?;
        points.push(SeriesPoint {
            release_id: descriptor.id.clone(),
            date: descriptor.date,
            count: class_profile.entity_count,
        });
    }
    let series = CountSeries { class: class.clone(), points };
    let result = growth_analysis(&series)?;
    let path = ctx.out.join(format!("growth-{}.csv", local_name(&class)));
    let file = fs::File::create(&path)?;
    write_growth_csv(
        std::io::BufWriter::new(file),
        &[(class.clone(), result.clone())],
        Some(&ctx.provenance()),
    )?;
    println!("wrote {}", path.display());
    println!(
        "class={class} predicted={} residual={} mean_residual={} nd={} growth={}",
        result.predicted_last, result.residual_last, result.mean_abs_residual, result.nd,
        result.growth
    );
    Ok(())
}

fn diff_subjects(
    ctx: &Ctx,
    class: String,
    property: String,
    prev: String,
    cur: String,
) -> Result<()> {
    let registry = ctx.load_registry()?;
    let class_iri = parse_iri(&class)?;
    let property_iri = parse_iri(&property)?;
    let mut snapshots = Vec::new();
    for id in [&prev, &cur] {
        let descriptor = registry.require(id)?;
        let ReleaseSource::Dump(path) = &descriptor.source else {
            bail!("release {id} is endpoint-backed; diff-subjects needs full dumps");
        };
        let (snapshot, errors) = Snapshot::load_dump(path, id, ParseMode::Lenient)
            .with_context(|| format!("loading dump for release {id}"))?;
        for e in &errors {
            eprintln!("kbq: warning: {}: {e}", path.display());
        }
        snapshots.push(snapshot);
    }
    let subjects = |snapshot: &Snapshot| -> Vec<String> {
        snapshot
            .instances_of(&class_iri)
            .filter(|s| snapshot.triples_with_subject(s).any(|t| t.predicate() == &property_iri))
            .filter_map(|s| s.as_iri().map(|iri| iri.as_str().to_string()))
            .collect()
    };
    let cur_set: std::collections::BTreeSet<String> = subjects(&snapshots[1]).into_iter().collect();
    let mut missing: Vec<String> =
        subjects(&snapshots[0]).into_iter().filter(|s| !cur_set.contains(s)).collect();
    missing.sort();
    missing.dedup();

    let path = ctx.out.join(format!(
        "diff-subjects-{}-{}-{prev}-{cur}.csv",
        local_name(&class),
        local_name(&property)
    ));
    let mut file = fs::File::create(&path)?;
    {
        use std::io::Write;
        writeln!(file, "# {}", ctx.provenance())?;
        let mut w = csv::Writer::from_writer(&mut file);
        w.write_record(["subject"])?;
        for s in &missing {
            w.write_record([s.as_str()])?;
        }
        w.flush()?;
    }
    println!("wrote {}", path.display());
    println!("missing_subjects={}", missing.len());
    Ok(())
}

struct FeatureFiles {
    cardinality_rows: Vec<FeatureRow>,
    range_rows: Vec<FeatureRow>,
}

fn features(ctx: &Ctx, class: &str, release: &str) -> Result<FeatureFiles> {
    let profile = ctx.load_profile(release)?;
    let class_profile = profile
        .class(class)
        .ok_or_else(|| anyhow!("profile for release {release} does not cover class {class}"))?;

    let mut cardinality_rows = Vec::new();
    let mut range_rows = Vec::new();
    for (property, stats) in &class_profile.properties {
        match cardinality_features(&stats.cardinality_hist) {
            Ok(v) => cardinality_rows.push(FeatureRow {
                class: class.to_string(),
                property: property.clone(),
                values: v.as_array().to_vec(),
            }),
            Err(e) => eprintln!("kbq: note: skipping cardinality features for {property}: {e}"),
        }
        match range_features(stats) {
            Ok(v) => range_rows.push(FeatureRow {
                class: class.to_string(),
                property: property.clone(),
                values: v.as_array().to_vec(),
            }),
            Err(e) => eprintln!("kbq: note: skipping range features for {property}: {e}"),
        }
    }

    let provenance = ctx.provenance();
    let card_path =
        ctx.out.join(format!("features-cardinality-{}-{release}.csv", local_name(class)));
    let file = fs::File::create(&card_path)?;
    write_feature_matrix(
        std::io::BufWriter::new(file),
        &CARDINALITY_FEATURE_NAMES,
        &cardinality_rows,
        Some(&provenance),
    )?;
    println!("wrote {} ({} properties)", card_path.display(), cardinality_rows.len());

    let range_path = ctx.out.join(format!("features-range-{}-{release}.csv", local_name(class)));
    let file = fs::File::create(&range_path)?;
    write_feature_matrix(
        std::io::BufWriter::new(file),
        &RANGE_FEATURE_NAMES,
        &range_rows,
        Some(&provenance),
    )?;
    println!("wrote {} ({} properties)", range_path.display(), range_rows.len());

    Ok(FeatureFiles { cardinality_rows, range_rows })
}

fn classifier_spec(algorithm: &str, trees: usize, knn_k: usize, seed: u64) -> Result<ClassifierSpec> {
    let algorithm: Algorithm = algorithm.parse().map_err(|e: String| anyhow!(e))?;
    let mut spec = ClassifierSpec::new(algorithm, seed ^ LEARN_STREAM);
    spec.trees = trees;
    spec.knn_k = knn_k;
    Ok(spec)
}

/// Join annotations of one task with feature rows keyed by (class, property).
fn build_dataset(
    rows: &[FeatureRow],
    annotations: &[kbq_core::features::Annotation],
    task: Task,
) -> Result<(Dataset, Vec<String>)> {
    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut properties = Vec::new();
    let by_key: BTreeMap<(&str, &str), &FeatureRow> =
        rows.iter().map(|r| ((r.class.as_str(), r.property.as_str()), r)).collect();
    for annotation in annotations.iter().filter(|a| a.task == task) {
        match by_key.get(&(annotation.class.as_str(), annotation.property.as_str())) {
            Some(row) => {
                features.push(row.values.clone());
                labels.push(task.training_label(&annotation.label));
                properties.push(annotation.property.clone());
            }
            None => eprintln!(
                "kbq: note: no feature row for annotated pair {} {}; skipped",
                annotation.class, annotation.property
            ),
        }
    }
    if features.is_empty() {
        bail!("no annotated examples for task {task} matched the feature matrix");
    }
    Ok((Dataset::new(features, labels)?, properties))
}

fn evaluate_and_fit(
    ctx: &Ctx,
    task: Task,
    dataset: &Dataset,
    spec: &ClassifierSpec,
    folds: usize,
    positive_class: Option<&str>,
    no_smote: bool,
) -> Result<(Model, Option<PathBuf>)> {
    let positive = match positive_class {
        Some(p) => p.to_string(),
        // the class SMOTE would over-sample
        None => dataset.minority_class().expect("non-empty dataset"),
    };
    let train_set = if no_smote {
        dataset.clone()
    } else {
        smote(dataset, &SmoteParams::with_seed(ctx.seed ^ SMOTE_STREAM)).with_context(|| {
            format!("SMOTE failed for task {task}; pass --no-smote to train on the raw distribution")
        })?
    };
    let eval_path = match cross_validate(spec, &train_set, folds, &positive) {
        Ok(report) => {
            let report = report.with_task(task.as_str());
            let path = ctx
                .out
                .join(format!("evaluation-{}-{}.json", task.as_str(), spec.algorithm.as_str()));
            fs::write(&path, serde_json::to_string_pretty(&report)? + "\n")?;
            println!(
                "task={task} algorithm={} folds={folds} positive_class={positive} precision={:.4} recall={:.4} f1={:.4}",
                spec.algorithm.as_str(),
                report.precision,
                report.recall,
                report.f1
            );
            Some(path)
        }
        Err(e) => {
            eprintln!("kbq: note: skipping cross-validation for {task}: {e}");
            None
        }
    };
    let model = train(spec, &train_set)?;
    Ok((model, eval_path))
}

#[allow(clippy::too_many_arguments)]
fn train_cmd(
    ctx: &Ctx,
    task: &str,
    features_path: &Path,
    annotations_path: &Path,
    algorithm: &str,
    folds: usize,
    positive_class: Option<String>,
    no_smote: bool,
    trees: usize,
    knn_k: usize,
) -> Result<()> {
    let task: Task = task.parse().map_err(|e: String| anyhow!(e))?;
    let file = fs::File::open(features_path)
        .with_context(|| format!("opening {}", features_path.display()))?;
    let (_, rows) = kbq_core::features::read_feature_matrix(std::io::BufReader::new(file))?;
    let annotations = load_annotations(annotations_path)?;
    let (dataset, _) = build_dataset(&rows, &annotations, task)?;
    let spec = classifier_spec(algorithm, trees, knn_k, ctx.seed)?;
    let (_, eval_path) =
        evaluate_and_fit(ctx, task, &dataset, &spec, folds, positive_class.as_deref(), no_smote)?;
    match eval_path {
        Some(path) => println!("wrote {}", path.display()),
        None => bail!("cross-validation was not possible; see notes above"),
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn induce(
    ctx: &Ctx,
    class: &str,
    release: &str,
    annotations_path: Option<&Path>,
    emit_shapes: bool,
    algorithm: &str,
    folds: usize,
    no_smote: bool,
    trees: usize,
    knn_k: usize,
) -> Result<()> {
    let profile = ctx.load_profile(release)?;
    let class_profile = profile
        .class(class)
        .ok_or_else(|| anyhow!("profile for release {release} does not cover class {class}"))?
        .clone();
    let files = features(ctx, class, release)?;

    // observed labels from the data; classifier predictions override them
    let mut min_labels: BTreeMap<String, MinLabel> = BTreeMap::new();
    let mut max_labels: BTreeMap<String, MaxLabel> = BTreeMap::new();
    let mut node_kinds: BTreeMap<String, Option<TermKind>> = BTreeMap::new();
    for (property, stats) in &class_profile.properties {
        if let Ok((min, max)) = observed_cardinality_labels(&stats.cardinality_hist) {
            min_labels.insert(property.clone(), min);
            max_labels.insert(property.clone(), max);
        }
        node_kinds.insert(property.clone(), stats.node_kind_counts.majority_kind());
    }

    if let Some(path) = annotations_path {
        let annotations = load_annotations(path)?;
        let spec = classifier_spec(algorithm, trees, knn_k, ctx.seed)?;
        for task in [Task::MinCard, Task::MaxCard, Task::Range] {
            if !annotations.iter().any(|a| a.task == task) {
                continue;
            }
            let rows = match task {
                Task::MinCard | Task::MaxCard => &files.cardinality_rows,
                Task::Range => &files.range_rows,
            };
            let (dataset, _) = build_dataset(rows, &annotations, task)?;
            let (model, _) = evaluate_and_fit(ctx, task, &dataset, &spec, folds, None, no_smote)?;
            for row in rows {
                let label = model.predict(&row.values)?;
                match task {
                    Task::MinCard => {
                        let label = match label.as_str() {
                            "MIN0" => MinLabel::Min0,
                            _ => MinLabel::Min1Plus,
                        };
                        min_labels.insert(row.property.clone(), label);
                    }
                    Task::MaxCard => {
                        let label = match label.as_str() {
                            "MAX1" => MaxLabel::Max1,
                            _ => MaxLabel::Max1Plus,
                        };
                        max_labels.insert(row.property.clone(), label);
                    }
                    Task::Range => {
                        let kind = match label.as_str() {
                            "IRI" => TermKind::Iri,
                            _ => TermKind::Literal,
                        };
                        node_kinds.insert(row.property.clone(), Some(kind));
                    }
                }
            }
        }
    }

    let mut inputs: BTreeMap<String, PropertyInputs> = BTreeMap::new();
    for (property, stats) in &class_profile.properties {
        inputs.insert(
            property.clone(),
            PropertyInputs {
                min_label: min_labels.get(property).copied(),
                max_label: max_labels.get(property).copied(),
                node_kind: node_kinds.get(property).copied().flatten(),
                datatype_hist: stats.datatype_hist.clone(),
                object_class_hist: stats.object_class_hist.clone(),
                object_total: stats.node_kind_counts.iri_total + stats.node_kind_counts.blank_total,
                string_lengths: string_quartiles(&stats.string_length_hist).ok(),
            },
        );
    }
    let constraints = induce_constraints(class, &inputs, ctx.class_selection())?;
    println!("induced {} property shapes for {class}", constraints.len());

    if emit_shapes {
        let mut doc = ShapeDocument::new();
        doc.insert(class, constraints);
        let path = ctx.out.join(ShapeDocument::shape_filename(class));
        fs::write(&path, doc.emit())?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn local_name(iri: &str) -> String {
    let local = match iri.rfind(['#', '/']) {
        Some(i) if i + 1 < iri.len() => &iri[i + 1..],
        _ => iri,
    };
    local
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' { c } else { '_' })
        .collect()
}
