//! Constraint classifiers: random forest, Gaussian naive Bayes and
//! k-nearest neighbors, with stratified cross-validation and
//! precision/recall/F1 scoring. All training is deterministic given the
//! spec seed.

mod bayes;
mod cv;
mod forest;
mod knn;
mod tree;

pub use bayes::GaussianNb;
pub use cv::{cross_validate, metrics, ConfusionCounts, EvaluationReport};
pub use forest::RandomForest;
pub use knn::KnnModel;

use std::collections::BTreeMap;
use std::str::FromStr;

#[derive(Debug, thiserror::Error)]
pub enum LearnError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("dataset has a single class {0:?}; training needs at least two")]
    SingleClass(String),
    #[error("row {row} has {got} features, expected {expected}")]
    RaggedFeatures { row: usize, expected: usize, got: usize },
    #[error("feature width mismatch: model expects {expected}, got {got}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("labels and features differ in length: {labels} vs {features}")]
    LengthMismatch { labels: usize, features: usize },
    #[error("class {label:?} has {count} examples, fewer than {folds} folds")]
    TooFewPerClass { label: String, count: usize, folds: usize },
    #[error("positive class {0:?} does not occur in the dataset")]
    UnknownPositiveClass(String),
    #[error("invalid classifier settings: {0}")]
    InvalidSpec(String),
}

/// Labeled feature rows with a consistent width.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<Vec<f64>>,
    labels: Vec<String>,
    width: usize,
}

impl Dataset {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<String>) -> Result<Self, LearnError> {
        if features.len() != labels.len() {
            return Err(LearnError::LengthMismatch {
                labels: labels.len(),
                features: features.len(),
            });
        }
        if features.is_empty() {
            return Err(LearnError::EmptyDataset);
        }
        let width = features[0].len();
        for (row, f) in features.iter().enumerate() {
            if f.len() != width {
                return Err(LearnError::RaggedFeatures { row, expected: width, got: f.len() });
            }
        }
        Ok(Dataset { features, labels, width })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> (&[f64], &str) {
        (&self.features[i], &self.labels[i])
    }

    /// Examples per label, label-sorted.
    pub fn class_counts(&self) -> BTreeMap<&str, usize> {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for label in &self.labels {
            *counts.entry(label.as_str()).or_default() += 1;
        }
        counts
    }

    /// The least frequent label; ties break toward the smaller label.
    pub fn minority_class(&self) -> Option<String> {
        self.class_counts().into_iter().min_by_key(|(_, n)| *n).map(|(l, _)| l.to_string())
    }

    /// Sorted distinct labels.
    pub fn distinct_labels(&self) -> Vec<String> {
        let mut labels: Vec<String> = self.labels.clone();
        labels.sort();
        labels.dedup();
        labels
    }

    /// Select rows by index, in the given order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i].clone()).collect(),
            width: self.width,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    RandomForest,
    NaiveBayes,
    Knn,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::RandomForest => "random_forest",
            Algorithm::NaiveBayes => "naive_bayes",
            Algorithm::Knn => "knn",
        }
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random_forest" | "rf" => Ok(Algorithm::RandomForest),
            "naive_bayes" | "nb" => Ok(Algorithm::NaiveBayes),
            "knn" => Ok(Algorithm::Knn),
            other => Err(format!("unknown algorithm {other:?}")),
        }
    }
}

/// Algorithm choice and pinned hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierSpec {
    pub algorithm: Algorithm,
    /// Forest size.
    pub trees: usize,
    /// None grows trees to purity.
    pub max_depth: Option<usize>,
    /// Split candidates per node; None picks ceil(sqrt(width)).
    pub features_per_split: Option<usize>,
    /// Neighbor count; odd, for tie avoidance.
    pub knn_k: usize,
    pub seed: u64,
}

impl ClassifierSpec {
    pub fn new(algorithm: Algorithm, seed: u64) -> Self {
        ClassifierSpec {
            algorithm,
            trees: 100,
            max_depth: None,
            features_per_split: None,
            knn_k: 5,
            seed,
        }
    }

    fn validate(&self) -> Result<(), LearnError> {
        if self.trees == 0 {
            return Err(LearnError::InvalidSpec("trees must be >= 1".into()));
        }
        if self.knn_k == 0 || self.knn_k % 2 == 0 {
            return Err(LearnError::InvalidSpec(format!(
                "knn k must be odd and >= 1, got {}",
                self.knn_k
            )));
        }
        if self.features_per_split == Some(0) {
            return Err(LearnError::InvalidSpec("features_per_split must be >= 1".into()));
        }
        Ok(())
    }
}

/// A trained classifier.
#[derive(Debug, Clone)]
pub enum Model {
    Forest(RandomForest),
    Bayes(GaussianNb),
    Knn(KnnModel),
}

impl Model {
    /// Predicted label for one feature row.
    pub fn predict(&self, features: &[f64]) -> Result<String, LearnError> {
        match self {
            Model::Forest(m) => m.predict(features),
            Model::Bayes(m) => m.predict(features),
            Model::Knn(m) => m.predict(features),
        }
    }
}

/// Train a classifier. Deterministic given the spec seed.
pub fn train(spec: &ClassifierSpec, dataset: &Dataset) -> Result<Model, LearnError> {
    spec.validate()?;
    if dataset.is_empty() {
        return Err(LearnError::EmptyDataset);
    }
    let labels = dataset.distinct_labels();
    if labels.len() < 2 {
        return Err(LearnError::SingleClass(labels[0].clone()));
    }
    Ok(match spec.algorithm {
        Algorithm::RandomForest => Model::Forest(RandomForest::fit(spec, dataset)?),
        Algorithm::NaiveBayes => Model::Bayes(GaussianNb::fit(dataset)?),
        Algorithm::Knn => Model::Knn(KnnModel::fit(spec.knn_k, dataset)?),
    })
}

/// splitmix64 step, used to derive independent RNG streams from one seed.
pub(crate) fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn sorted_label_table(dataset: &Dataset) -> (Vec<String>, Vec<usize>) {
    let labels = dataset.distinct_labels();
    let index_of = |l: &str| labels.iter().position(|x| x == l).unwrap();
    let assigned = dataset.labels().iter().map(|l| index_of(l)).collect();
    (labels, assigned)
}
