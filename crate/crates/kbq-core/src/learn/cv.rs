//! Stratified k-fold cross-validation with pooled confusion counts.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{mix_seed, train, ClassifierSpec, Dataset, LearnError};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    fn add(&mut self, other: &ConfusionCounts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.tn += other.tn;
        self.fn_ += other.fn_;
    }
}

/// Precision, recall and F1 with the degenerate-denominator convention:
/// a metric whose denominator is zero is 0, never NaN.
pub fn metrics(c: &ConfusionCounts) -> (f64, f64, f64) {
    let precision = if c.tp + c.fp > 0 { c.tp as f64 / (c.tp + c.fp) as f64 } else { 0.0 };
    let recall = if c.tp + c.fn_ > 0 { c.tp as f64 / (c.tp + c.fn_) as f64 } else { 0.0 };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    (precision, recall, f1)
}

/// Cross-validation outcome; aggregate metrics come from the pooled
/// confusion counts across folds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub task: Option<String>,
    pub algorithm: String,
    pub folds: usize,
    pub positive_class: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub per_fold: Vec<ConfusionCounts>,
}

impl EvaluationReport {
    pub fn with_task(mut self, task: impl Into<String>) -> Self {
        self.task = Some(task.into());
        self
    }

    pub fn pooled(&self) -> ConfusionCounts {
        let mut pooled = ConfusionCounts::default();
        for fold in &self.per_fold {
            pooled.add(fold);
        }
        pooled
    }
}

/// Stratified fold assignment: per class, shuffled indices are dealt
/// round-robin, so per-fold class proportions differ from the global ones by
/// at most one example.
pub(crate) fn stratified_folds(
    dataset: &Dataset,
    folds: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>, LearnError> {
    let mut assignment = vec![Vec::new(); folds];
    let counts = dataset.class_counts();
    for (class_idx, (label, count)) in counts.iter().enumerate() {
        if *count < folds {
            return Err(LearnError::TooFewPerClass {
                label: label.to_string(),
                count: *count,
                folds,
            });
        }
        let mut indices: Vec<usize> = dataset
            .labels()
            .iter()
            .enumerate()
            .filter(|(_, l)| l.as_str() == *label)
            .map(|(i, _)| i)
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, class_idx as u64));
        indices.shuffle(&mut rng);
        for (pos, idx) in indices.into_iter().enumerate() {
            assignment[pos % folds].push(idx);
        }
    }
    for fold in &mut assignment {
        fold.sort_unstable();
    }
    Ok(assignment)
}

/// Run stratified k-fold cross-validation. Every example is tested exactly
/// once; the report carries per-fold confusion counts and pooled metrics
/// against the given positive class.
pub fn cross_validate(
    spec: &ClassifierSpec,
    dataset: &Dataset,
    folds: usize,
    positive_class: &str,
) -> Result<EvaluationReport, LearnError> {
    if folds < 2 {
        return Err(LearnError::InvalidSpec(format!("folds must be >= 2, got {folds}")));
    }
    if dataset.is_empty() {
        return Err(LearnError::EmptyDataset);
    }
    if !dataset.labels().iter().any(|l| l == positive_class) {
        return Err(LearnError::UnknownPositiveClass(positive_class.to_string()));
    }
    let fold_sets = stratified_folds(dataset, folds, spec.seed)?;
    let mut per_fold = Vec::with_capacity(folds);
    for (fold_idx, test_indices) in fold_sets.iter().enumerate() {
        let in_test = {
            let mut mask = vec![false; dataset.len()];
            for &i in test_indices {
                mask[i] = true;
            }
            mask
        };
        let train_indices: Vec<usize> = (0..dataset.len()).filter(|i| !in_test[*i]).collect();
        let mut fold_spec = *spec;
        fold_spec.seed = mix_seed(spec.seed, 0x10_0000 + fold_idx as u64);
        let model = train(&fold_spec, &dataset.select(&train_indices))?;
        let mut counts = ConfusionCounts::default();
        for &i in test_indices {
            let (features, actual) = dataset.row(i);
            let predicted = model.predict(features)?;
            match (predicted == positive_class, actual == positive_class) {
                (true, true) => counts.tp += 1,
                (true, false) => counts.fp += 1,
                (false, false) => counts.tn += 1,
                (false, true) => counts.fn_ += 1,
            }
        }
        per_fold.push(counts);
    }
    let mut report = EvaluationReport {
        task: None,
        algorithm: spec.algorithm.as_str().to_string(),
        folds,
        positive_class: positive_class.to_string(),
        precision: 0.0,
        recall: 0.0,
        f1: 0.0,
        per_fold,
    };
    let pooled = report.pooled();
    let (precision, recall, f1) = metrics(&pooled);
    report.precision = precision;
    report.recall = recall;
    report.f1 = f1;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learn::Algorithm;
    use approx::assert_abs_diff_eq;

    #[test]
    fn metrics_examples() {
        let (p, r, f) = metrics(&ConfusionCounts { tp: 5, fp: 0, tn: 0, fn_: 0 });
        assert_eq!((p, r, f), (1.0, 1.0, 1.0));
        let (p, r, f) = metrics(&ConfusionCounts { tp: 8, fp: 2, tn: 0, fn_: 4 });
        assert_abs_diff_eq!(p, 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(r, 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f, 0.7272727272727272, epsilon = 1e-12);
        let degenerate = metrics(&ConfusionCounts { tp: 0, fp: 0, tn: 0, fn_: 3 });
        assert_eq!(degenerate, (0.0, 0.0, 0.0));
    }

    #[test]
    fn always_positive_predictor_formula() {
        // 30 positives, 70 negatives, everything predicted positive
        let c = ConfusionCounts { tp: 30, fp: 70, tn: 0, fn_: 0 };
        let (p, r, f) = metrics(&c);
        assert_abs_diff_eq!(p, 0.3, epsilon = 1e-12);
        assert_eq!(r, 1.0);
        assert_abs_diff_eq!(f, 0.4615384615384615, epsilon = 1e-12);
    }

    fn dataset(n_pos: usize, n_neg: usize) -> Dataset {
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n_pos {
            features.push(vec![10.0 + (i % 7) as f64 * 0.1]);
            labels.push("pos".to_string());
        }
        for i in 0..n_neg {
            features.push(vec![0.0 - (i % 7) as f64 * 0.1]);
            labels.push("neg".to_string());
        }
        Dataset::new(features, labels).unwrap()
    }

    #[test]
    fn folds_partition_the_dataset() {
        let ds = dataset(25, 35);
        let folds = stratified_folds(&ds, 10, 99).unwrap();
        let mut seen = vec![0usize; ds.len()];
        for fold in &folds {
            for &i in fold {
                seen[i] += 1;
            }
        }
        assert!(seen.iter().all(|&c| c == 1), "each example in exactly one fold");
        // per-fold class counts differ by at most one example per class
        for fold in &folds {
            let pos = fold.iter().filter(|&&i| ds.labels()[i] == "pos").count();
            let neg = fold.len() - pos;
            assert!((2..=3).contains(&pos), "pos {pos}");
            assert!((3..=4).contains(&neg), "neg {neg}");
        }
    }

    #[test]
    fn too_few_per_class_is_rejected() {
        let ds = dataset(4, 40);
        assert!(matches!(
            cross_validate(&ClassifierSpec::new(Algorithm::Knn, 1), &ds, 10, "pos"),
            Err(LearnError::TooFewPerClass { .. })
        ));
    }

    #[test]
    fn separable_data_reaches_perfect_scores() {
        let ds = dataset(20, 20);
        for algorithm in [Algorithm::RandomForest, Algorithm::NaiveBayes, Algorithm::Knn] {
            let mut spec = ClassifierSpec::new(algorithm, 13);
            spec.trees = 15;
            let report = cross_validate(&spec, &ds, 10, "pos").unwrap();
            assert_eq!(report.f1, 1.0, "{algorithm:?}");
            assert_eq!(report.pooled().total(), ds.len() as u64);
        }
    }

    #[test]
    fn report_is_seed_deterministic() {
        let ds = dataset(15, 25);
        let mut spec = ClassifierSpec::new(Algorithm::RandomForest, 5);
        spec.trees = 10;
        let a = cross_validate(&spec, &ds, 5, "pos").unwrap();
        let b = cross_validate(&spec, &ds, 5, "pos").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unknown_positive_class_is_rejected() {
        let ds = dataset(10, 10);
        let spec = ClassifierSpec::new(Algorithm::Knn, 1);
        assert!(matches!(
            cross_validate(&spec, &ds, 2, "nope"),
            Err(LearnError::UnknownPositiveClass(_))
        ));
    }
}
