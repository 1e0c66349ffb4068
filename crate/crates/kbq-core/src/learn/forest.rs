use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::tree::{DecisionTree, TreeParams};
use super::{mix_seed, sorted_label_table, ClassifierSpec, Dataset, LearnError};

/// Bagged decision trees with Gini splits over random feature subsets.
/// Classification is by majority vote; ties break toward the
/// lexicographically smaller label.
#[derive(Debug, Clone)]
pub struct RandomForest {
    labels: Vec<String>,
    trees: Vec<DecisionTree>,
    width: usize,
}

impl RandomForest {
    pub(crate) fn fit(spec: &ClassifierSpec, dataset: &Dataset) -> Result<Self, LearnError> {
        let (labels, assigned) = sorted_label_table(dataset);
        let n = dataset.len();
        let features_per_split = spec
            .features_per_split
            .unwrap_or_else(|| (dataset.width() as f64).sqrt().ceil() as usize)
            .max(1);
        let params = TreeParams {
            max_depth: spec.max_depth,
            features_per_split,
            n_labels: labels.len(),
        };
        let mut trees = Vec::with_capacity(spec.trees);
        for tree_index in 0..spec.trees {
            // independent, reproducible stream per tree
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(spec.seed, tree_index as u64));
            let sample: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            trees.push(DecisionTree::fit(dataset, &assigned, &sample, &params, &mut rng));
        }
        Ok(RandomForest { labels, trees, width: dataset.width() })
    }

    pub fn predict(&self, features: &[f64]) -> Result<String, LearnError> {
        if features.len() != self.width {
            return Err(LearnError::WidthMismatch { expected: self.width, got: features.len() });
        }
        let mut votes = vec![0usize; self.labels.len()];
        for tree in &self.trees {
            votes[tree.predict(features)] += 1;
        }
        let mut best = 0;
        for (i, &v) in votes.iter().enumerate() {
            if v > votes[best] {
                best = i;
            }
        }
        Ok(self.labels[best].clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learn::Algorithm;

    fn blobs() -> Dataset {
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for i in 0..20 {
            let jitter = (i % 5) as f64 * 0.01;
            features.push(vec![0.0 + jitter, 0.0 - jitter]);
            labels.push("low".to_string());
            features.push(vec![10.0 - jitter, 10.0 + jitter]);
            labels.push("high".to_string());
        }
        Dataset::new(features, labels).unwrap()
    }

    #[test]
    fn forest_is_deterministic_per_seed() {
        let ds = blobs();
        let mut spec = ClassifierSpec::new(Algorithm::RandomForest, 42);
        spec.trees = 20;
        let a = RandomForest::fit(&spec, &ds).unwrap();
        let b = RandomForest::fit(&spec, &ds).unwrap();
        for x in [-1.0f64, 0.3, 4.9, 5.1, 12.0] {
            let point = [x, x];
            assert_eq!(a.predict(&point).unwrap(), b.predict(&point).unwrap());
        }
    }

    #[test]
    fn forest_separates_blobs() {
        let ds = blobs();
        let mut spec = ClassifierSpec::new(Algorithm::RandomForest, 7);
        spec.trees = 30;
        let model = RandomForest::fit(&spec, &ds).unwrap();
        for i in 0..ds.len() {
            let (x, want) = ds.row(i);
            assert_eq!(model.predict(x).unwrap(), want);
        }
    }

    #[test]
    fn width_mismatch_is_rejected() {
        let ds = blobs();
        let spec = ClassifierSpec::new(Algorithm::RandomForest, 1);
        let model = RandomForest::fit(&spec, &ds).unwrap();
        assert!(matches!(
            model.predict(&[1.0]),
            Err(LearnError::WidthMismatch { expected: 2, got: 1 })
        ));
    }
}
