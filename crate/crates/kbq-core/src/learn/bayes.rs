use super::{sorted_label_table, Dataset, LearnError};

/// Gaussian naive Bayes with per-class per-feature mean/variance and a
/// variance-smoothing floor of 1e-9 times the largest feature variance.
#[derive(Debug, Clone)]
pub struct GaussianNb {
    labels: Vec<String>,
    log_priors: Vec<f64>,
    means: Vec<Vec<f64>>,
    variances: Vec<Vec<f64>>,
    width: usize,
}

impl GaussianNb {
    pub(crate) fn fit(dataset: &Dataset) -> Result<Self, LearnError> {
        let (labels, assigned) = sorted_label_table(dataset);
        let n = dataset.len();
        let d = dataset.width();
        let k = labels.len();

        // smoothing scale: population variance of each feature over all rows
        let mut global_mean = vec![0.0f64; d];
        for row in dataset.features() {
            for (m, x) in global_mean.iter_mut().zip(row) {
                *m += x;
            }
        }
        for m in &mut global_mean {
            *m /= n as f64;
        }
        let mut max_var = 0.0f64;
        for f in 0..d {
            let var = dataset
                .features()
                .iter()
                .map(|row| (row[f] - global_mean[f]).powi(2))
                .sum::<f64>()
                / n as f64;
            max_var = max_var.max(var);
        }
        let eps = (1e-9 * max_var).max(f64::MIN_POSITIVE);

        let mut counts = vec![0usize; k];
        let mut means = vec![vec![0.0f64; d]; k];
        for (row, &c) in dataset.features().iter().zip(&assigned) {
            counts[c] += 1;
            for (m, x) in means[c].iter_mut().zip(row) {
                *m += x;
            }
        }
        for (c, count) in counts.iter().enumerate() {
            for m in &mut means[c] {
                *m /= *count as f64;
            }
        }
        let mut variances = vec![vec![0.0f64; d]; k];
        for (row, &c) in dataset.features().iter().zip(&assigned) {
            for f in 0..d {
                variances[c][f] += (row[f] - means[c][f]).powi(2);
            }
        }
        for (c, count) in counts.iter().enumerate() {
            for v in &mut variances[c] {
                *v = *v / *count as f64 + eps;
            }
        }
        let log_priors =
            counts.iter().map(|&c| (c as f64 / n as f64).ln()).collect();
        Ok(GaussianNb { labels, log_priors, means, variances, width: d })
    }

    pub fn predict(&self, features: &[f64]) -> Result<String, LearnError> {
        if features.len() != self.width {
            return Err(LearnError::WidthMismatch { expected: self.width, got: features.len() });
        }
        let mut best = 0usize;
        let mut best_score = f64::NEG_INFINITY;
        for c in 0..self.labels.len() {
            let mut score = self.log_priors[c];
            for f in 0..self.width {
                let var = self.variances[c][f];
                let diff = features[f] - self.means[c][f];
                score += -0.5 * (2.0 * std::f64::consts::PI * var).ln() - diff * diff / (2.0 * var);
            }
            if score > best_score {
                best_score = score;
                best = c;
            }
        }
        Ok(self.labels[best].clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_gaussians() {
        // class A around 0.1, class B around 10.1; 0.1 is far likelier under A
        let ds = Dataset::new(
            vec![vec![0.0], vec![0.2], vec![10.0], vec![10.2]],
            vec!["A".into(), "A".into(), "B".into(), "B".into()],
        )
        .unwrap();
        let model = GaussianNb::fit(&ds).unwrap();
        assert_eq!(model.predict(&[0.1]).unwrap(), "A");
        assert_eq!(model.predict(&[10.1]).unwrap(), "B");
        assert_eq!(model.predict(&[4.0]).unwrap(), "A");
        assert_eq!(model.predict(&[6.0]).unwrap(), "B");
    }

    #[test]
    fn priors_shift_the_boundary() {
        // identical class-conditional distributions, unbalanced priors:
        // the majority class wins everywhere
        let ds = Dataset::new(
            vec![vec![0.0], vec![2.0], vec![0.0], vec![2.0], vec![0.0], vec![2.0], vec![0.0], vec![2.0]],
            vec![
                "A".into(),
                "A".into(),
                "A".into(),
                "A".into(),
                "A".into(),
                "A".into(),
                "B".into(),
                "B".into(),
            ],
        )
        .unwrap();
        let model = GaussianNb::fit(&ds).unwrap();
        for x in [0.0, 1.0, 2.0, 5.0] {
            assert_eq!(model.predict(&[x]).unwrap(), "A");
        }
    }
}
