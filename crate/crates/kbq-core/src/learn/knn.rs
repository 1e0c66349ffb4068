use super::{sorted_label_table, Dataset, LearnError};

/// k-nearest neighbors over z-scored features with Euclidean distance.
/// The training set is standardized once; queries are standardized with the
/// stored training statistics.
#[derive(Debug, Clone)]
pub struct KnnModel {
    labels: Vec<String>,
    points: Vec<Vec<f64>>,
    assigned: Vec<usize>,
    means: Vec<f64>,
    stds: Vec<f64>,
    k: usize,
}

impl KnnModel {
    pub(crate) fn fit(k: usize, dataset: &Dataset) -> Result<Self, LearnError> {
        let (labels, assigned) = sorted_label_table(dataset);
        let n = dataset.len();
        let d = dataset.width();
        let mut means = vec![0.0f64; d];
        for row in dataset.features() {
            for (m, x) in means.iter_mut().zip(row) {
                *m += x;
            }
        }
        for m in &mut means {
            *m /= n as f64;
        }
        let mut stds = vec![0.0f64; d];
        for row in dataset.features() {
            for f in 0..d {
                stds[f] += (row[f] - means[f]).powi(2);
            }
        }
        for s in &mut stds {
            *s = (*s / n as f64).sqrt();
            // constant features carry raw offsets instead of dividing by zero
            if *s == 0.0 {
                *s = 1.0;
            }
        }
        let points = dataset
            .features()
            .iter()
            .map(|row| row.iter().zip(means.iter().zip(&stds)).map(|(x, (m, s))| (x - m) / s).collect())
            .collect();
        Ok(KnnModel { labels, points, assigned, means, stds, k })
    }

    pub fn predict(&self, features: &[f64]) -> Result<String, LearnError> {
        if features.len() != self.means.len() {
            return Err(LearnError::WidthMismatch {
                expected: self.means.len(),
                got: features.len(),
            });
        }
        let query: Vec<f64> = features
            .iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(x, (m, s))| (x - m) / s)
            .collect();
        let mut distances: Vec<(f64, usize)> = self
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let d2: f64 = p.iter().zip(&query).map(|(a, b)| (a - b).powi(2)).sum();
                (d2, i)
            })
            .collect();
        distances.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let k = self.k.min(distances.len());
        let mut votes = vec![0usize; self.labels.len()];
        for &(_, i) in &distances[..k] {
            votes[self.assigned[i]] += 1;
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

    #[test]
    fn standardization_rescales_dominant_features() {
        // feature 0 spans [0, 1000], feature 1 spans [0, 1]; without z-scoring
        // feature 0 would drown out feature 1
        let ds = Dataset::new(
            vec![
                vec![0.0, 0.0],
                vec![1000.0, 0.0],
                vec![10.0, 1.0],
                vec![990.0, 1.0],
            ],
            vec!["a".into(), "a".into(), "b".into(), "b".into()],
        )
        .unwrap();
        let model = KnnModel::fit(1, &ds).unwrap();
        assert_eq!(model.predict(&[5.0, 1.0]).unwrap(), "b");
        assert_eq!(model.predict(&[995.0, 0.0]).unwrap(), "a");
    }

    #[test]
    fn distance_ties_resolve_by_training_order() {
        let ds = Dataset::new(
            vec![vec![-1.0], vec![1.0], vec![3.0]],
            vec!["a".into(), "b".into(), "b".into()],
        )
        .unwrap();
        let model = KnnModel::fit(1, &ds).unwrap();
        // 0.0 is equidistant from -1 and 1: the earlier training row wins
        assert_eq!(model.predict(&[0.0]).unwrap(), "a");
    }
}
