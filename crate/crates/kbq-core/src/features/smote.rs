//! SMOTE rebalancing for binary datasets: synthetic minority points are
//! interpolated between a minority example and one of its k nearest minority
//! neighbors, then the majority class is resampled against the synthetic
//! count. With the default (100, 200) percentages the minority doubles and
//! the output is balanced 50/50.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::learn::Dataset;

use super::FeatureError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SmoteParams {
    /// Synthetic points per minority example, in percent; multiple of 100.
    pub perc_over: u32,
    /// Majority examples kept, in percent of the synthetic count.
    pub perc_under: u32,
    /// Neighborhood size for interpolation partners.
    pub k: usize,
    pub seed: u64,
}

impl Default for SmoteParams {
    fn default() -> Self {
        SmoteParams { perc_over: 100, perc_under: 200, k: 5, seed: 0 }
    }
}

impl SmoteParams {
    pub fn with_seed(seed: u64) -> Self {
        SmoteParams { seed, ..SmoteParams::default() }
    }
}

/// Rebalance a binary dataset. Output order is minority originals, then
/// synthetic points, then the resampled majority; deterministic given the
/// seed.
pub fn smote(dataset: &Dataset, params: &SmoteParams) -> Result<Dataset, FeatureError> {
    if params.perc_over == 0 || params.perc_over % 100 != 0 {
        return Err(FeatureError::BadPercOver(params.perc_over));
    }
    let k = params.k.max(1);
    let labels = dataset.distinct_labels();
    if labels.len() != 2 {
        return Err(FeatureError::NotBinary(labels.len()));
    }
    let counts = dataset.class_counts();
    let minority = dataset.minority_class().expect("non-empty dataset");
    let majority =
        labels.iter().find(|l| **l != minority).expect("two classes").clone();

    let minority_rows: Vec<usize> =
        (0..dataset.len()).filter(|&i| dataset.labels()[i] == minority).collect();
    let majority_rows: Vec<usize> =
        (0..dataset.len()).filter(|&i| dataset.labels()[i] == majority).collect();
    let m = minority_rows.len();
    if m < k + 1 {
        return Err(FeatureError::TooFewMinority { minority: m, required: k + 1 });
    }
    let _ = counts;

    // k nearest minority neighbors per minority row (squared Euclidean,
    // ties by position)
    let neighbor_table: Vec<Vec<usize>> = minority_rows
        .iter()
        .map(|&i| {
            let mut distances: Vec<(f64, usize)> = minority_rows
                .iter()
                .filter(|&&j| j != i)
                .map(|&j| {
                    let d2: f64 = dataset.features()[i]
                        .iter()
                        .zip(&dataset.features()[j])
                        .map(|(a, b)| (a - b).powi(2))
                        .sum();
                    (d2, j)
                })
                .collect();
            distances.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            distances.into_iter().take(k).map(|(_, j)| j).collect()
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let per_example = (params.perc_over / 100) as usize;
    let mut features = Vec::new();
    let mut labels_out = Vec::new();

    for &i in &minority_rows {
        features.push(dataset.features()[i].clone());
        labels_out.push(minority.clone());
    }
    for (row_pos, &i) in minority_rows.iter().enumerate() {
        let neighbors = &neighbor_table[row_pos];
        for _ in 0..per_example {
            let partner = neighbors[rng.random_range(0..neighbors.len())];
            let base = &dataset.features()[i];
            let other = &dataset.features()[partner];
            let synthetic: Vec<f64> = base
                .iter()
                .zip(other)
                .map(|(a, b)| {
                    let gap: f64 = rng.random_range(0.0..1.0);
                    a + gap * (b - a)
                })
                .collect();
            features.push(synthetic);
            labels_out.push(minority.clone());
        }
    }

    let synthetic_count = m * per_example;
    let majority_target = (params.perc_under as u64 * synthetic_count as u64 / 100) as usize;
    // sampling with replacement keeps the target reachable regardless of the
    // original majority size
    for _ in 0..majority_target {
        let pick = majority_rows[rng.random_range(0..majority_rows.len())];
        features.push(dataset.features()[pick].clone());
        labels_out.push(majority.clone());
    }

    Ok(Dataset::new(features, labels_out)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn imbalanced(minority: usize, majority: usize) -> Dataset {
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for i in 0..minority {
            features.push(vec![i as f64, (i * i) as f64 * 0.1]);
            labels.push("rare".to_string());
        }
        for i in 0..majority {
            features.push(vec![100.0 + i as f64, 50.0]);
            labels.push("common".to_string());
        }
        Dataset::new(features, labels).unwrap()
    }

    #[test]
    fn default_percentages_balance_fifty_fifty() {
        let ds = imbalanced(10, 40);
        let out = smote(&ds, &SmoteParams::with_seed(3)).unwrap();
        let counts = out.class_counts();
        assert_eq!(counts["rare"], 20, "10 real + 10 synthetic");
        assert_eq!(counts["common"], 20);
    }

    #[test]
    fn oversampling_percentage_scales_synthetic_count() {
        let ds = imbalanced(8, 60);
        let params = SmoteParams { perc_over: 200, perc_under: 100, seed: 5, k: 5 };
        let out = smote(&ds, &params).unwrap();
        let counts = out.class_counts();
        assert_eq!(counts["rare"], 8 + 16);
        assert_eq!(counts["common"], 16);
    }

    #[test]
    fn synthetic_points_stay_component_wise_between_parents() {
        let ds = imbalanced(12, 30);
        let out = smote(&ds, &SmoteParams::with_seed(11)).unwrap();
        let originals: Vec<&[f64]> = (0..12).map(|i| ds.features()[i].as_slice()).collect();
        // rows 12..24 of the output are the synthetic minority points
        for synth in &out.features()[12..24] {
            let witnessed = originals.iter().enumerate().any(|(a, pa)| {
                originals.iter().skip(a + 1).any(|pb| {
                    synth.iter().zip(pa.iter().zip(pb.iter())).all(|(s, (x, y))| {
                        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
                        *lo <= *s && *s <= *hi
                    })
                })
            });
            assert!(witnessed, "synthetic point must sit between two real minority points");
        }
    }

    #[test]
    fn determinism_per_seed() {
        let ds = imbalanced(10, 25);
        let a = smote(&ds, &SmoteParams::with_seed(42)).unwrap();
        let b = smote(&ds, &SmoteParams::with_seed(42)).unwrap();
        assert_eq!(a, b);
        let c = smote(&ds, &SmoteParams::with_seed(43)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn preconditions() {
        let ds = imbalanced(5, 20);
        assert!(matches!(
            smote(&ds, &SmoteParams::with_seed(1)),
            Err(FeatureError::TooFewMinority { minority: 5, required: 6 })
        ));

        let three = Dataset::new(
            vec![vec![0.0]; 9],
            (0..9).map(|i| format!("c{}", i % 3)).collect(),
        )
        .unwrap();
        assert!(matches!(
            smote(&three, &SmoteParams::with_seed(1)),
            Err(FeatureError::NotBinary(3))
        ));

        let bad = SmoteParams { perc_over: 150, ..SmoteParams::with_seed(1) };
        assert!(matches!(smote(&ds, &bad), Err(FeatureError::BadPercOver(150))));
    }
}
