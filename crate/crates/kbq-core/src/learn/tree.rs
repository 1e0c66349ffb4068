//! CART-style decision tree with Gini impurity, used as the forest member.

use rand::seq::SliceRandom;
use rand::Rng;

use super::Dataset;

#[derive(Debug, Clone)]
pub(crate) enum Node {
    Leaf { label: usize },
    Split { feature: usize, threshold: f64, left: Box<Node>, right: Box<Node> },
}

#[derive(Debug, Clone)]
pub(crate) struct DecisionTree {
    root: Node,
}

pub(crate) struct TreeParams {
    pub max_depth: Option<usize>,
    pub features_per_split: usize,
    pub n_labels: usize,
}

impl DecisionTree {
    /// Grow a tree on the given row indices. `labels` maps each dataset row
    /// to its label index.
    pub fn fit<R: Rng>(
        dataset: &Dataset,
        labels: &[usize],
        rows: &[usize],
        params: &TreeParams,
        rng: &mut R,
    ) -> Self {
        let root = grow(dataset, labels, rows, params, rng, 0);
        DecisionTree { root }
    }

    pub fn predict(&self, features: &[f64]) -> usize {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { label } => return *label,
                Node::Split { feature, threshold, left, right } => {
                    node = if features[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }
}

fn gini(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / t).powi(2)).sum::<f64>()
}

fn majority(counts: &[usize]) -> usize {
    // ties break toward the smaller label index (labels are sorted)
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

fn grow<R: Rng>(
    dataset: &Dataset,
    labels: &[usize],
    rows: &[usize],
    params: &TreeParams,
    rng: &mut R,
    depth: usize,
) -> Node {
    let mut counts = vec![0usize; params.n_labels];
    for &r in rows {
        counts[labels[r]] += 1;
    }
    let total = rows.len();
    let node_gini = gini(&counts, total);
    let depth_capped = params.max_depth.is_some_and(|d| depth >= d);
    if node_gini == 0.0 || total < 2 || depth_capped {
        return Node::Leaf { label: majority(&counts) };
    }

    let mut candidates: Vec<usize> = (0..dataset.width()).collect();
    candidates.shuffle(rng);
    candidates.truncate(params.features_per_split.min(dataset.width()));

    let mut best: Option<(usize, f64, f64)> = None; // (feature, threshold, weighted gini)
    let mut sorted: Vec<(f64, usize)> = Vec::with_capacity(total);
    for &feature in &candidates {
        sorted.clear();
        sorted.extend(rows.iter().map(|&r| (dataset.features()[r][feature], labels[r])));
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut left_counts = vec![0usize; params.n_labels];
        let mut right_counts = counts.clone();
        for i in 0..total - 1 {
            let (value, label) = sorted[i];
            left_counts[label] += 1;
            right_counts[label] -= 1;
            let next_value = sorted[i + 1].0;
            if next_value <= value {
                continue;
            }
            let threshold = value + (next_value - value) / 2.0;
            let left_n = i + 1;
            let right_n = total - left_n;
            let weighted = (left_n as f64 * gini(&left_counts, left_n)
                + right_n as f64 * gini(&right_counts, right_n))
                / total as f64;
            if best.is_none() || weighted < best.unwrap().2 {
                best = Some((feature, threshold, weighted));
            }
        }
    }

    match best {
        Some((feature, threshold, weighted)) if weighted < node_gini - 1e-12 => {
            let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
                rows.iter().partition(|&&r| dataset.features()[r][feature] <= threshold);
            if left_rows.is_empty() || right_rows.is_empty() {
                return Node::Leaf { label: majority(&counts) };
            }
            let left = grow(dataset, labels, &left_rows, params, rng, depth + 1);
            let right = grow(dataset, labels, &right_rows, params, rng, depth + 1);
            Node::Split { feature, threshold, left: Box::new(left), right: Box::new(right) }
        }
        _ => Node::Leaf { label: majority(&counts) },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn separable_data_is_fit_exactly() {
        let ds = Dataset::new(
            vec![vec![0.0], vec![0.5], vec![1.0], vec![5.0], vec![5.5], vec![6.0]],
            vec!["a".into(), "a".into(), "a".into(), "b".into(), "b".into(), "b".into()],
        )
        .unwrap();
        let labels = vec![0, 0, 0, 1, 1, 1];
        let rows: Vec<usize> = (0..6).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let params = TreeParams { max_depth: None, features_per_split: 1, n_labels: 2 };
        let tree = DecisionTree::fit(&ds, &labels, &rows, &params, &mut rng);
        for (i, &want) in labels.iter().enumerate() {
            assert_eq!(tree.predict(&ds.features()[i]), want);
        }
        assert_eq!(tree.predict(&[-3.0]), 0);
        assert_eq!(tree.predict(&[9.0]), 1);
    }

    #[test]
    fn constant_features_become_majority_leaf() {
        let ds = Dataset::new(
            vec![vec![1.0], vec![1.0], vec![1.0]],
            vec!["a".into(), "b".into(), "b".into()],
        )
        .unwrap();
        let labels = vec![0, 1, 1];
        let rows: Vec<usize> = (0..3).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let params = TreeParams { max_depth: None, features_per_split: 1, n_labels: 2 };
        let tree = DecisionTree::fit(&ds, &labels, &rows, &params, &mut rng);
        assert_eq!(tree.predict(&[1.0]), 1);
    }
}
