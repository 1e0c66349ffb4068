//! Classifier inputs derived from profiles: the 30-feature cardinality
//! vector, node-kind range features, string-length quartiles, observed
//! cardinality labels, SMOTE rebalancing and annotation file I/O.

mod annotations;
mod matrix;
mod smote;
pub mod stats;

pub use annotations::{
    load_annotations, read_annotations, save_annotations, write_annotations, Annotation, Task,
};
pub use matrix::{read_feature_matrix, write_feature_matrix, FeatureRow};
pub use smote::{smote, SmoteParams};

use std::collections::BTreeMap;
use std::fmt;

use crate::profile::PropertyStats;

#[derive(Debug, thiserror::Error)]
pub enum FeatureError {
    #[error("histogram is empty")]
    EmptyHistogram,
    #[error("cardinality features need at least 2 observations, got {0}")]
    SingleObservation(u64),
    #[error("property has no object occurrences; range shares are undefined")]
    ZeroFrequency,
    #[error("row {row}: unknown label {label:?} for task {task}")]
    UnknownLabel { row: u64, label: String, task: Task },
    #[error("annotation file is missing column {0:?}")]
    MissingColumn(&'static str),
    #[error("row {row}: {reason}")]
    BadRow { row: u64, reason: String },
    #[error("SMOTE needs a minority class of at least {required}, got {minority}")]
    TooFewMinority { minority: usize, required: usize },
    #[error("SMOTE needs exactly 2 classes, got {0}")]
    NotBinary(usize),
    #[error("perc_over must be a positive multiple of 100, got {0}")]
    BadPercOver(u32),
    #[error(transparent)]
    Learn(#[from] crate::learn::LearnError),
    #[error("reading annotations: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// The 30 statistical features (p1-p30) for cardinality classification.
/// p1-p13 describe the raw per-subject cardinality distribution, p14-p20 the
/// distinct occurring cardinality values, p21-p30 the per-value shares.
#[derive(Debug, Clone, PartialEq)]
pub struct CardinalityFeatureVector {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub p4: f64,
    pub p5: f64,
    pub p6: f64,
    pub p7: f64,
    pub p8: f64,
    pub p9: f64,
    pub p10: f64,
    pub p11: f64,
    pub p12: f64,
    pub p13: f64,
    pub p14: f64,
    pub p15: f64,
    pub p16: f64,
    pub p17: f64,
    pub p18: f64,
    pub p19: f64,
    pub p20: f64,
    pub p21: f64,
    pub p22: f64,
    pub p23: f64,
    pub p24: f64,
    pub p25: f64,
    pub p26: f64,
    pub p27: f64,
    pub p28: f64,
    pub p29: f64,
    pub p30: f64,
}

pub const CARDINALITY_FEATURE_NAMES: [&str; 30] = [
    "p1", "p2", "p3", "p4", "p5", "p6", "p7", "p8", "p9", "p10", "p11", "p12", "p13", "p14",
    "p15", "p16", "p17", "p18", "p19", "p20", "p21", "p22", "p23", "p24", "p25", "p26", "p27",
    "p28", "p29", "p30",
];

impl CardinalityFeatureVector {
    pub fn as_array(&self) -> [f64; 30] {
        [
            self.p1, self.p2, self.p3, self.p4, self.p5, self.p6, self.p7, self.p8, self.p9,
            self.p10, self.p11, self.p12, self.p13, self.p14, self.p15, self.p16, self.p17,
            self.p18, self.p19, self.p20, self.p21, self.p22, self.p23, self.p24, self.p25,
            self.p26, self.p27, self.p28, self.p29, self.p30,
        ]
    }
}

/// Derive the 30-feature vector from a cardinality histogram (0 bucket
/// included).
pub fn cardinality_features(
    hist: &BTreeMap<u64, u64>,
) -> Result<CardinalityFeatureVector, FeatureError> {
    let raw: Vec<(f64, u64)> =
        hist.iter().filter(|(_, w)| **w > 0).map(|(v, w)| (*v as f64, *w)).collect();
    if raw.is_empty() {
        return Err(FeatureError::EmptyHistogram);
    }
    let n = stats::total_mass(&raw);
    if n < 2 {
        return Err(FeatureError::SingleObservation(n));
    }
    let distinct: Vec<(f64, u64)> = raw.iter().map(|(v, _)| (*v, 1)).collect();
    let shares: Vec<f64> = raw.iter().map(|(_, w)| *w as f64 / n as f64).collect();
    let mut share_pairs: Vec<(f64, u64)> = shares.iter().map(|&s| (s, 1)).collect();
    share_pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let share_of = |card: u64| -> f64 {
        hist.get(&card).copied().unwrap_or(0) as f64 / n as f64
    };

    Ok(CardinalityFeatureVector {
        p1: stats::min(&raw),
        p2: stats::max(&raw),
        p3: stats::mean(&raw),
        p4: stats::mode(&raw),
        p5: stats::quadratic_mean(&raw),
        p6: stats::kurtosis(&raw),
        p7: stats::sample_std(&raw),
        p8: stats::skewness(&raw),
        p9: stats::sample_variance(&raw),
        p10: stats::nearest_rank(&raw, 0.98),
        p11: stats::nearest_rank(&raw, 0.02),
        p12: stats::nearest_rank(&raw, 0.75),
        p13: stats::nearest_rank(&raw, 0.25),
        p14: distinct.len() as f64,
        p15: stats::mean(&distinct),
        p16: stats::quadratic_mean(&distinct),
        p17: stats::kurtosis(&distinct),
        p18: stats::sample_std(&distinct),
        p19: stats::skewness(&distinct),
        p20: stats::sample_variance(&distinct),
        p21: stats::min(&share_pairs),
        p22: stats::max(&share_pairs),
        p23: share_of(0),
        p24: share_of(1),
        p25: stats::mean(&share_pairs),
        p26: stats::quadratic_mean(&share_pairs),
        p27: stats::kurtosis(&share_pairs),
        p28: stats::sample_std(&share_pairs),
        p29: stats::skewness(&share_pairs),
        p30: stats::sample_variance(&share_pairs),
    })
}

/// Node-kind and range shares feeding the range classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeFeatures {
    pub iri_share: f64,
    pub literal_share: f64,
    pub blank_share: f64,
    pub iri_distinct_share: f64,
    pub literal_distinct_share: f64,
    pub blank_distinct_share: f64,
    pub top_datatype_share: f64,
    pub top_object_class_share: f64,
}

pub const RANGE_FEATURE_NAMES: [&str; 8] = [
    "iri_share",
    "literal_share",
    "blank_share",
    "iri_distinct_share",
    "literal_distinct_share",
    "blank_distinct_share",
    "top_datatype_share",
    "top_object_class_share",
];

impl RangeFeatures {
    pub fn as_array(&self) -> [f64; 8] {
        [
            self.iri_share,
            self.literal_share,
            self.blank_share,
            self.iri_distinct_share,
            self.literal_distinct_share,
            self.blank_distinct_share,
            self.top_datatype_share,
            self.top_object_class_share,
        ]
    }
}

/// Shares of IRI/literal/blank objects among totals and among distincts,
/// plus the strongest datatype and object-class shares.
pub fn range_features(stats: &PropertyStats) -> Result<RangeFeatures, FeatureError> {
    let nk = &stats.node_kind_counts;
    let total = nk.total();
    if total == 0 {
        return Err(FeatureError::ZeroFrequency);
    }
    let total = total as f64;
    let distinct_total = (nk.iri_distinct + nk.literal_distinct + nk.blank_distinct) as f64;
    let top_datatype = stats.datatype_hist.values().map(|v| v.total).max().unwrap_or(0);
    let top_class = stats.object_class_hist.values().map(|v| v.total).max().unwrap_or(0);
    let node_objects = nk.iri_total + nk.blank_total;
    Ok(RangeFeatures {
        iri_share: nk.iri_total as f64 / total,
        literal_share: nk.literal_total as f64 / total,
        blank_share: nk.blank_total as f64 / total,
        iri_distinct_share: nk.iri_distinct as f64 / distinct_total,
        literal_distinct_share: nk.literal_distinct as f64 / distinct_total,
        blank_distinct_share: nk.blank_distinct as f64 / distinct_total,
        top_datatype_share: if nk.literal_total == 0 {
            0.0
        } else {
            top_datatype as f64 / nk.literal_total as f64
        },
        top_object_class_share: if node_objects == 0 {
            0.0
        } else {
            top_class as f64 / node_objects as f64
        },
    })
}

/// Quartile summary of a string-length histogram; Q1 and Q3 are the
/// minLength/maxLength candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StringLengthSummary {
    pub min: u64,
    pub q1: u64,
    pub q3: u64,
    pub max: u64,
}

/// Nearest-rank quartiles over the length histogram: selected lengths always
/// occur in the data.
pub fn string_quartiles(hist: &BTreeMap<u64, u64>) -> Result<StringLengthSummary, FeatureError> {
    let pairs: Vec<(f64, u64)> =
        hist.iter().filter(|(_, w)| **w > 0).map(|(v, w)| (*v as f64, *w)).collect();
    if pairs.is_empty() {
        return Err(FeatureError::EmptyHistogram);
    }
    Ok(StringLengthSummary {
        min: stats::min(&pairs) as u64,
        q1: stats::nearest_rank(&pairs, 0.25) as u64,
        q3: stats::nearest_rank(&pairs, 0.75) as u64,
        max: stats::max(&pairs) as u64,
    })
}

/// Minimum-cardinality category of a property.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum MinLabel {
    Min0,
    Min1,
    Min1Plus,
}

impl MinLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            MinLabel::Min0 => "MIN0",
            MinLabel::Min1 => "MIN1",
            MinLabel::Min1Plus => "MIN1+",
        }
    }

    /// Binary training label: MIN1 folds into MIN1+.
    pub fn training_label(&self) -> &'static str {
        match self {
            MinLabel::Min0 => "MIN0",
            MinLabel::Min1 | MinLabel::Min1Plus => "MIN1+",
        }
    }
}

impl fmt::Display for MinLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Maximum-cardinality category of a property.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum MaxLabel {
    Max1,
    Max1Plus,
}

impl MaxLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            MaxLabel::Max1 => "MAX1",
            MaxLabel::Max1Plus => "MAX1+",
        }
    }
}

impl fmt::Display for MaxLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Read the observed min/max cardinality categories off a histogram.
pub fn observed_cardinality_labels(
    hist: &BTreeMap<u64, u64>,
) -> Result<(MinLabel, MaxLabel), FeatureError> {
    let mut occurring = hist.iter().filter(|(_, w)| **w > 0).map(|(v, _)| *v);
    let smallest = occurring.next().ok_or(FeatureError::EmptyHistogram)?;
    let largest = occurring.last().unwrap_or(smallest);
    let min = match smallest {
        0 => MinLabel::Min0,
        1 => MinLabel::Min1,
        _ => MinLabel::Min1Plus,
    };
    let max = if largest <= 1 { MaxLabel::Max1 } else { MaxLabel::Max1Plus };
    Ok((min, max))
}
