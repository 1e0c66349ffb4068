//! Per-release, per-class summary statistics and the cross-release
//! schema-consistency filters. The persisted `profile-<release>.json`
//! documents are the interchange format between pipeline stages.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::acquisition::{Snapshot, SparqlClient};
use crate::rdf::{vocab, Iri, Term, TermKind};

#[derive(Debug, thiserror::Error)]
pub enum ProfileError {
    #[error("need at least two releases, got {0}")]
    InsufficientReleases(usize),
    #[error("class {0:?} is not present in every profile")]
    UnknownClass(String),
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("profile file is not valid JSON: {0}")]
    BadProfileFile(#[from] serde_json::Error),
    #[error(transparent)]
    Endpoint(#[from] crate::acquisition::AcquisitionError),
}

/// Total and distinct occurrence counts for one histogram bucket.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueCount {
    pub total: u64,
    pub distinct: u64,
}

/// Object node-kind tallies for one property.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeKindCounts {
    pub iri_total: u64,
    pub iri_distinct: u64,
    pub literal_total: u64,
    pub literal_distinct: u64,
    pub blank_total: u64,
    pub blank_distinct: u64,
}

impl NodeKindCounts {
    pub fn total(&self) -> u64 {
        self.iri_total + self.literal_total + self.blank_total
    }

    /// The kind holding the majority of object occurrences, if any occur.
    pub fn majority_kind(&self) -> Option<TermKind> {
        if self.total() == 0 {
            return None;
        }
        let mut best = (self.iri_total, TermKind::Iri);
        if self.literal_total > best.0 {
            best = (self.literal_total, TermKind::Literal);
        }
        if self.blank_total > best.0 {
            best = (self.blank_total, TermKind::BlankNode);
        }
        Some(best.1)
    }
}

/// Summary statistics of one property within one class and release.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PropertyStats {
    pub property: String,
    pub freq: u64,
    pub distinct_subjects: u64,
    /// Per-subject value counts, including the 0 bucket.
    pub cardinality_hist: BTreeMap<u64, u64>,
    pub node_kind_counts: NodeKindCounts,
    /// Literal datatype IRI -> counts. Totals sum to `literal_total`.
    pub datatype_hist: BTreeMap<String, ValueCount>,
    /// Classes of IRI/blank objects per in-snapshot `rdf:type` assertions.
    pub object_class_hist: BTreeMap<String, ValueCount>,
    /// IRI/blank objects with no `rdf:type` in the same snapshot.
    pub unknown_objects: ValueCount,
    /// Lexical length -> count, for string-typed literals only.
    pub string_length_hist: BTreeMap<u64, u64>,
}

/// All properties of one class in one release.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassProfile {
    pub class: String,
    pub release: String,
    pub entity_count: u64,
    pub np: u64,
    pub properties: BTreeMap<String, PropertyStats>,
}

/// The persisted profile of one release.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KBProfile {
    pub release: String,
    pub classes: BTreeMap<String, ClassProfile>,
}

impl KBProfile {
    pub fn new(release: impl Into<String>) -> Self {
        KBProfile { release: release.into(), classes: BTreeMap::new() }
    }

    pub fn insert(&mut self, profile: ClassProfile) {
        self.classes.insert(profile.class.clone(), profile);
    }

    pub fn class(&self, class: &str) -> Option<&ClassProfile> {
        self.classes.get(class)
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self, ProfileError> {
        Ok(serde_json::from_reader(reader)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ProfileError> {
        let path = path.as_ref();
        let file = fs::File::open(path)
            .map_err(|source| ProfileError::Io { path: path.display().to_string(), source })?;
        Self::from_reader(std::io::BufReader::new(file))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ProfileError> {
        let path = path.as_ref();
        let json = serde_json::to_string_pretty(self).expect("profile serializes");
        let mut file = fs::File::create(path)
            .map_err(|source| ProfileError::Io { path: path.display().to_string(), source })?;
        file.write_all(json.as_bytes())
            .and_then(|_| file.write_all(b"\n"))
            .map_err(|source| ProfileError::Io { path: path.display().to_string(), source })
    }
}

/// Canonical file name for a release profile.
pub fn profile_filename(release: &str) -> String {
    format!("profile-{release}.json")
}

#[derive(Debug, Clone, Copy)]
pub struct ProfileOptions {
    /// Count `rdf:type` triples as a property of the class. Off by default:
    /// the completeness and constraint tables are about domain properties.
    pub include_type: bool,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions { include_type: false }
    }
}

/// Compute the full profile of one class from an in-memory snapshot.
pub fn profile_class(snapshot: &Snapshot, class: &Iri, opts: ProfileOptions) -> ClassProfile {
    struct Accum<'a> {
        freq: u64,
        per_subject: HashMap<&'a Term, u64>,
        iri_total: u64,
        literal_total: u64,
        blank_total: u64,
        iri_distinct: BTreeSet<&'a Term>,
        literal_distinct: BTreeSet<&'a Term>,
        blank_distinct: BTreeSet<&'a Term>,
        datatype_total: BTreeMap<&'a str, u64>,
        datatype_distinct: BTreeMap<&'a str, BTreeSet<&'a Term>>,
        class_total: BTreeMap<&'a str, u64>,
        class_distinct: BTreeMap<&'a str, BTreeSet<&'a Term>>,
        unknown_total: u64,
        unknown_distinct: BTreeSet<&'a Term>,
        string_lengths: BTreeMap<u64, u64>,
    }

    impl Default for Accum<'_> {
        fn default() -> Self {
            Accum {
                freq: 0,
                per_subject: HashMap::new(),
                iri_total: 0,
                literal_total: 0,
                blank_total: 0,
                iri_distinct: BTreeSet::new(),
                literal_distinct: BTreeSet::new(),
                blank_distinct: BTreeSet::new(),
                datatype_total: BTreeMap::new(),
                datatype_distinct: BTreeMap::new(),
                class_total: BTreeMap::new(),
                class_distinct: BTreeMap::new(),
                unknown_total: 0,
                unknown_distinct: BTreeSet::new(),
                string_lengths: BTreeMap::new(),
            }
        }
    }

    let mut accums: BTreeMap<&Iri, Accum> = BTreeMap::new();
    let entity_count = snapshot.count(class);

    for subject in snapshot.instances_of(class) {
        for triple in snapshot.triples_with_subject(subject) {
            if triple.is_type_assertion() && !opts.include_type {
                continue;
            }
            let acc = accums.entry(triple.predicate()).or_default();
            acc.freq += 1;
            *acc.per_subject.entry(triple.subject()).or_default() += 1;
            let object = triple.object();
            match object {
                Term::Iri(_) => {
                    acc.iri_total += 1;
                    acc.iri_distinct.insert(object);
                }
                Term::BlankNode(_) => {
                    acc.blank_total += 1;
                    acc.blank_distinct.insert(object);
                }
                Term::Literal(lit) => {
                    acc.literal_total += 1;
                    acc.literal_distinct.insert(object);
                    *acc.datatype_total.entry(lit.datatype().as_str()).or_default() += 1;
                    acc.datatype_distinct
                        .entry(lit.datatype().as_str())
                        .or_default()
                        .insert(object);
                    let dt = lit.datatype().as_str();
                    if dt == vocab::XSD_STRING || dt == vocab::RDF_LANG_STRING {
                        let len = lit.lexical().chars().count() as u64;
                        *acc.string_lengths.entry(len).or_default() += 1;
                    }
                }
            }
            if matches!(object.kind(), TermKind::Iri | TermKind::BlankNode) {
                let classes = snapshot.classes_of(object);
                if classes.is_empty() {
                    acc.unknown_total += 1;
                    acc.unknown_distinct.insert(object);
                } else {
                    for c in classes {
                        *acc.class_total.entry(c.as_str()).or_default() += 1;
                        acc.class_distinct.entry(c.as_str()).or_default().insert(object);
                    }
                }
            }
        }
    }

    let mut properties = BTreeMap::new();
    for (property, acc) in accums {
        let mut cardinality_hist: BTreeMap<u64, u64> = BTreeMap::new();
        for (_, card) in &acc.per_subject {
            *cardinality_hist.entry(*card).or_default() += 1;
        }
        let distinct_subjects = acc.per_subject.len() as u64;
        let zero = entity_count - distinct_subjects;
        if zero > 0 {
            *cardinality_hist.entry(0).or_default() += zero;
        }
        let datatype_hist = acc
            .datatype_total
            .iter()
            .map(|(dt, total)| {
                let distinct = acc.datatype_distinct[dt].len() as u64;
                (dt.to_string(), ValueCount { total: *total, distinct })
            })
            .collect();
        let object_class_hist = acc
            .class_total
            .iter()
            .map(|(c, total)| {
                let distinct = acc.class_distinct[c].len() as u64;
                (c.to_string(), ValueCount { total: *total, distinct })
            })
            .collect();
        properties.insert(
            property.as_str().to_string(),
            PropertyStats {
                property: property.as_str().to_string(),
                freq: acc.freq,
                distinct_subjects,
                cardinality_hist,
                node_kind_counts: NodeKindCounts {
                    iri_total: acc.iri_total,
                    iri_distinct: acc.iri_distinct.len() as u64,
                    literal_total: acc.literal_total,
                    literal_distinct: acc.literal_distinct.len() as u64,
                    blank_total: acc.blank_total,
                    blank_distinct: acc.blank_distinct.len() as u64,
                },
                datatype_hist,
                object_class_hist,
                unknown_objects: ValueCount {
                    total: acc.unknown_total,
                    distinct: acc.unknown_distinct.len() as u64,
                },
                string_length_hist: acc.string_lengths,
            },
        );
    }

    let np = properties.len() as u64;
    ClassProfile {
        class: class.as_str().to_string(),
        release: snapshot.release_id().to_string(),
        entity_count,
        np,
        properties,
    }
}

/// Profile every class in the snapshot (or only the listed ones).
pub fn profile_snapshot(
    snapshot: &Snapshot,
    classes: Option<&[Iri]>,
    opts: ProfileOptions,
) -> KBProfile {
    let mut profile = KBProfile::new(snapshot.release_id());
    let owned: Vec<Iri>;
    let classes: Vec<&Iri> = match classes {
        Some(list) => list.iter().collect(),
        None => {
            owned = snapshot.classes().into_iter().cloned().collect();
            owned.iter().collect()
        }
    };
    for class in classes {
        profile.insert(profile_class(snapshot, class, opts));
    }
    profile
}

/// Profile one class through a SPARQL endpoint. Only the query-derivable
/// statistics are filled: entity count, NP, per-property frequency and
/// cardinality histograms. Node-kind, datatype, object-class and string
/// histograms need dump access and stay empty.
pub fn profile_class_endpoint(
    client: &SparqlClient,
    release: &str,
    class: &Iri,
) -> Result<ClassProfile, ProfileError> {
    let entity_count = client.fetch_count(class)?;
    let np = client.fetch_np(class)?;
    let mut properties = BTreeMap::new();
    for property in client.fetch_distinct_properties(class)? {
        if property.as_str() == vocab::RDF_TYPE {
            continue;
        }
        let freq = client.fetch_freq(class, &property)?;
        if freq == 0 {
            continue;
        }
        let cardinality_hist = client.fetch_cardinality_histogram(class, &property)?;
        let distinct_subjects =
            cardinality_hist.iter().filter(|(card, _)| **card > 0).map(|(_, n)| n).sum();
        properties.insert(
            property.as_str().to_string(),
            PropertyStats {
                property: property.as_str().to_string(),
                freq,
                distinct_subjects,
                cardinality_hist,
                ..PropertyStats::default()
            },
        );
    }
    Ok(ClassProfile {
        class: class.as_str().to_string(),
        release: release.to_string(),
        entity_count,
        np,
        properties,
    })
}

/// Classes whose entity count is positive in every release, sorted by IRI.
pub fn schema_consistent_classes(profiles: &[KBProfile]) -> Result<Vec<String>, ProfileError> {
    if profiles.len() < 2 {
        return Err(ProfileError::InsufficientReleases(profiles.len()));
    }
    let (first, rest) = profiles.split_first().unwrap();
    let mut out: Vec<String> = first
        .classes
        .iter()
        .filter(|(_, p)| p.entity_count > 0)
        .filter(|(class, _)| {
            rest.iter().all(|kb| kb.class(class).is_some_and(|p| p.entity_count > 0))
        })
        .map(|(class, _)| class.clone())
        .collect();
    out.sort();
    Ok(out)
}

/// Properties of the class common to all given releases with a positive
/// frequency in at least one, sorted by IRI.
pub fn filter_properties(profiles: &[KBProfile], class: &str) -> Result<Vec<String>, ProfileError> {
    let per_release: Vec<&ClassProfile> = profiles
        .iter()
        .map(|kb| kb.class(class).ok_or_else(|| ProfileError::UnknownClass(class.to_string())))
        .collect::<Result<_, _>>()?;
    let Some((first, rest)) = per_release.split_first() else {
        return Err(ProfileError::UnknownClass(class.to_string()));
    };
    let mut out: Vec<String> = first
        .properties
        .keys()
        .filter(|p| rest.iter().all(|cp| cp.properties.contains_key(*p)))
        .filter(|p| per_release.iter().any(|cp| cp.properties[*p].freq > 0))
        .cloned()
        .collect();
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acquisition::Snapshot;
    use crate::rdf::parse_line;

    const TYPE: &str = "<http://www.w3.org/1999/02/22-rdf-syntax-ns#type>";

    fn snapshot(release: &str, lines: &[String]) -> Snapshot {
        let triples =
            lines.iter().enumerate().map(|(i, l)| parse_line(l, i as u64 + 1).unwrap()).collect();
        Snapshot::from_triples(release, triples)
    }

    fn class() -> Iri {
        Iri::new("http://ex/C").unwrap()
    }

    #[test]
    fn empty_class_yields_empty_profile() {
        let snap = snapshot("r1", &[]);
        let p = profile_class(&snap, &class(), ProfileOptions::default());
        assert_eq!(p.entity_count, 0);
        assert!(p.properties.is_empty());
        assert_eq!(p.np, 0);
    }

    #[test]
    fn node_kinds_and_unknown_bucket() {
        let lines = vec![
            format!("<http://s1> {TYPE} <http://ex/C> ."),
            format!("<http://s2> {TYPE} <http://ex/C> ."),
            "<http://s1> <http://ex/p> <http://place1> .".to_string(),
            "<http://s1> <http://ex/p> \"lit\" .".to_string(),
            "<http://s2> <http://ex/p> <http://place1> .".to_string(),
            "<http://s2> <http://ex/p> _:b1 .".to_string(),
            format!("<http://place1> {TYPE} <http://ex/Place> ."),
            format!("<http://place1> {TYPE} <http://ex/Spot> ."),
        ];
        let snap = snapshot("r1", &lines);
        let p = profile_class(&snap, &class(), ProfileOptions::default());
        let stats = &p.properties["http://ex/p"];
        assert_eq!(stats.freq, 4);
        let nk = stats.node_kind_counts;
        assert_eq!((nk.iri_total, nk.iri_distinct), (2, 1));
        assert_eq!((nk.literal_total, nk.literal_distinct), (1, 1));
        assert_eq!((nk.blank_total, nk.blank_distinct), (1, 1));
        assert_eq!(nk.total(), stats.freq);
        // place1 is typed with two classes: both buckets count it
        assert_eq!(stats.object_class_hist["http://ex/Place"], ValueCount { total: 2, distinct: 1 });
        assert_eq!(stats.object_class_hist["http://ex/Spot"], ValueCount { total: 2, distinct: 1 });
        // the untyped blank node feeds the unknown bucket
        assert_eq!(stats.unknown_objects, ValueCount { total: 1, distinct: 1 });
        assert_eq!(stats.datatype_hist.values().map(|v| v.total).sum::<u64>(), nk.literal_total);
    }

    #[test]
    fn rdf_type_is_excluded_by_default_and_included_on_demand() {
        let lines = vec![
            format!("<http://s1> {TYPE} <http://ex/C> ."),
            "<http://s1> <http://ex/p> \"v\" .".to_string(),
        ];
        let snap = snapshot("r1", &lines);
        let without = profile_class(&snap, &class(), ProfileOptions::default());
        assert_eq!(without.np, 1);
        let with = profile_class(&snap, &class(), ProfileOptions { include_type: true });
        assert_eq!(with.np, 2);
        assert!(with.properties.contains_key(vocab::RDF_TYPE));
    }

    #[test]
    fn string_lengths_only_cover_string_literals() {
        let lines = vec![
            format!("<http://s1> {TYPE} <http://ex/C> ."),
            "<http://s1> <http://ex/p> \"abc\" .".to_string(),
            "<http://s1> <http://ex/p> \"salut\"@fr .".to_string(),
            "<http://s1> <http://ex/p> \"7\"^^<http://www.w3.org/2001/XMLSchema#integer> ."
                .to_string(),
        ];
        let snap = snapshot("r1", &lines);
        let p = profile_class(&snap, &class(), ProfileOptions::default());
        let stats = &p.properties["http://ex/p"];
        assert_eq!(stats.string_length_hist, BTreeMap::from([(3, 1), (5, 1)]));
        let str_mass: u64 = stats.string_length_hist.values().sum();
        assert!(str_mass <= stats.node_kind_counts.literal_total);
    }

    #[test]
    fn schema_consistency_requires_presence_everywhere() {
        let mk = |release: &str, with_d: bool| {
            let mut lines = vec![format!("<http://s1> {TYPE} <http://ex/C> .")];
            if with_d {
                lines.push(format!("<http://s2> {TYPE} <http://ex/D> ."));
            }
            let snap = snapshot(release, &lines);
            profile_snapshot(&snap, None, ProfileOptions::default())
        };
        let profiles = vec![mk("r1", true), mk("r2", false), mk("r3", true)];
        let classes = schema_consistent_classes(&profiles).unwrap();
        assert_eq!(classes, ["http://ex/C"]);
        assert!(matches!(
            schema_consistent_classes(&profiles[..1]),
            Err(ProfileError::InsufficientReleases(1))
        ));
    }

    #[test]
    fn empty_intersection_is_not_an_error() {
        let a = {
            let snap = snapshot("r1", &[format!("<http://s1> {TYPE} <http://ex/A> .")]);
            profile_snapshot(&snap, None, ProfileOptions::default())
        };
        let b = {
            let snap = snapshot("r2", &[format!("<http://s1> {TYPE} <http://ex/B> .")]);
            profile_snapshot(&snap, None, ProfileOptions::default())
        };
        assert!(schema_consistent_classes(&[a, b]).unwrap().is_empty());
    }

    #[test]
    fn filter_properties_takes_the_intersection() {
        let mk = |release: &str, props: &[&str]| {
            let mut lines = vec![format!("<http://s1> {TYPE} <http://ex/C> .")];
            for p in props {
                lines.push(format!("<http://s1> <http://ex/{p}> \"v\" ."));
            }
            let snap = snapshot(release, &lines);
            profile_snapshot(&snap, None, ProfileOptions::default())
        };
        let profiles = vec![mk("r1", &["p", "q"]), mk("r2", &["q", "r"])];
        let props = filter_properties(&profiles, "http://ex/C").unwrap();
        assert_eq!(props, ["http://ex/q"]);
        assert!(matches!(
            filter_properties(&profiles, "http://ex/Missing"),
            Err(ProfileError::UnknownClass(_))
        ));
    }

    #[test]
    fn profile_json_round_trips() {
        let lines = vec![
            format!("<http://s1> {TYPE} <http://ex/C> ."),
            "<http://s1> <http://ex/p> \"v\" .".to_string(),
        ];
        let snap = snapshot("r1", &lines);
        let profile = profile_snapshot(&snap, None, ProfileOptions::default());
        let json = serde_json::to_string_pretty(&profile).unwrap();
        let back = KBProfile::from_reader(json.as_bytes()).unwrap();
        assert_eq!(back, profile);
    }
}
