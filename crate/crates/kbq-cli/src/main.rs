//! kbq: quality profiling for evolving RDF knowledge bases.
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime or data error.

mod commands;
mod lock;

use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{ArgGroup, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "kbq", version, about = "Profile KB releases, measure completeness and growth, induce SHACL shapes")]
pub struct Cli {
    /// Release registry file
    #[arg(long, global = true, default_value = "releases.json")]
    pub registry: PathBuf,

    /// Directory for profiles, reports and shapes
    #[arg(long, global = true, default_value = "kbq-out")]
    pub out: PathBuf,

    /// Base seed; every random stage derives from it
    #[arg(long, global = true, default_value_t = 20160909)]
    pub seed: u64,

    /// Completeness measure: raw frequency or frequency normalized by entity count
    #[arg(long, global = true, value_enum, default_value_t = Mode::Normalized)]
    pub mode: Mode,

    /// Flag a property complete only on strict growth (default: non-decrease)
    #[arg(long, global = true)]
    pub strict: bool,

    /// Keep every object class covering at least this share in sh:or
    /// (default: the classes tied for maximal coverage)
    #[arg(long, global = true, value_name = "SHARE")]
    pub class_threshold: Option<f64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Raw,
    Normalized,
}

#[derive(Subcommand)]
pub enum Command {
    /// Add one release (dump file or SPARQL endpoint) to the registry
    #[command(group(ArgGroup::new("source").required(true).args(["dump", "endpoint"])))]
    Register {
        /// Unique release id, e.g. 2016-09-09
        #[arg(long)]
        id: String,
        /// Release date, ISO-8601
        #[arg(long)]
        date: String,
        /// N-Triples dump path
        #[arg(long)]
        dump: Option<PathBuf>,
        /// SPARQL endpoint URL
        #[arg(long)]
        endpoint: Option<String>,
    },

    /// Write profile-<release>.json for the selected releases
    Profile {
        /// Release ids to profile
        #[arg(long, required_unless_present = "all")]
        release: Vec<String>,
        /// Profile every registered release
        #[arg(long)]
        all: bool,
        /// Restrict profiling to these classes (required for endpoints)
        #[arg(long = "class")]
        classes: Vec<String>,
        /// Count rdf:type rows as a property
        #[arg(long)]
        include_type: bool,
        /// Abort on the first malformed dump line instead of skipping it
        #[arg(long)]
        strict_parse: bool,
    },

    /// Property completeness of one class between two releases
    Completeness {
        #[arg(long)]
        class: String,
        /// Earlier release id
        #[arg(long)]
        prev: String,
        /// Later release id
        #[arg(long)]
        cur: String,
    },

    /// Regression growth flag for one class over all releases
    Growth {
        #[arg(long)]
        class: String,
    },

    /// Subjects holding a property in the previous release but not the
    /// current one (dump-backed releases only)
    DiffSubjects {
        #[arg(long)]
        class: String,
        #[arg(long)]
        property: String,
        #[arg(long)]
        prev: String,
        #[arg(long)]
        cur: String,
    },

    /// Extract cardinality and range feature matrices from a profile
    Features {
        #[arg(long)]
        class: String,
        #[arg(long)]
        release: String,
    },

    /// Train a constraint classifier on a feature matrix plus annotations
    /// and report cross-validated precision/recall/F1
    Train {
        /// min_card, max_card or range
        #[arg(long)]
        task: String,
        /// Feature matrix CSV (from `kbq features`)
        #[arg(long)]
        features: PathBuf,
        /// Annotation CSV (class,property,task,label)
        #[arg(long)]
        annotations: PathBuf,
        #[arg(long, default_value = "random_forest")]
        algorithm: String,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        /// Metrics positive class (default: the pre-SMOTE minority)
        #[arg(long)]
        positive_class: Option<String>,
        /// Skip SMOTE rebalancing
        #[arg(long)]
        no_smote: bool,
        #[arg(long, default_value_t = 100)]
        trees: usize,
        #[arg(long, default_value_t = 5)]
        knn_k: usize,
    },

    /// Chain features -> classifiers -> SHACL shapes for one class
    Induce {
        #[arg(long)]
        class: String,
        #[arg(long)]
        release: String,
        /// Annotations enabling classifier training and evaluation
        #[arg(long)]
        annotations: Option<PathBuf>,
        /// Write <class>.shapes.ttl
        #[arg(long)]
        emit_shapes: bool,
        #[arg(long, default_value = "random_forest")]
        algorithm: String,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        #[arg(long)]
        no_smote: bool,
        #[arg(long, default_value_t = 100)]
        trees: usize,
        #[arg(long, default_value_t = 5)]
        knn_k: usize,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = commands::run(cli) {
        eprintln!("kbq: error: {e:#}");
        std::process::exit(2);
    }
}
