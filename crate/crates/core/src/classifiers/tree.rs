//! Binary decision trees with the entropy criterion. One builder scans every
//! midpoint between consecutive sorted values; a second draws one uniform
//! threshold per candidate feature, which is what the randomized ensembles
//! use. Ties on gain resolve to the lowest feature index, then the lowest
//! threshold.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{ModelParams, ModelSpec};
use crate::error::Result;

#[derive(Debug, Clone)]
pub enum TreeNode {
    Leaf {
        /// Fraction of class-1 samples that reached this leaf.
        positive_fraction: f64,
    },
    Split {
        feature: usize,
        /// Rows with `value <= threshold` go left.
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    /// Class-1 fraction of the leaf this row lands in.
    pub fn positive_fraction(&self, row: &[f64]) -> f64 {
        match self {
            TreeNode::Leaf { positive_fraction } => *positive_fraction,
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                if row[*feature] <= *threshold {
                    left.positive_fraction(row)
                } else {
                    right.positive_fraction(row)
                }
            }
        }
    }
}

fn entropy(pos: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let mut h = 0.0;
    for count in [pos, total - pos] {
        if count > 0 {
            let p = count as f64 / total as f64;
            h -= p * p.log2();
        }
    }
    h
}

/// How candidate split thresholds are produced at a node.
pub(crate) enum ThresholdRule<'a> {
    /// All midpoints between consecutive distinct sorted values.
    Exhaustive,
    /// One uniform draw in `(min, max)` per candidate feature.
    Random(&'a mut ChaCha8Rng),
}

pub(crate) struct TreeSettings<'a> {
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub threshold_rule: ThresholdRule<'a>,
    /// Candidate features per node; `None` means all, in index order.
    pub feature_sampler: Option<(&'a mut ChaCha8Rng, usize)>,
}

struct Candidate {
    feature: usize,
    threshold: f64,
    gain: f64,
}

fn better(a: &Candidate, b: &Candidate) -> bool {
    // Larger gain wins; ties prefer the lower feature, then lower threshold.
    (a.gain - b.gain).abs() > 1e-12 && a.gain > b.gain
        || (a.gain - b.gain).abs() <= 1e-12
            && (a.feature < b.feature
                || (a.feature == b.feature && a.threshold < b.threshold))
}

fn split_gain(values: &[(f64, u8)], threshold: f64, parent_entropy: f64) -> f64 {
    let total = values.len();
    let (mut left_n, mut left_pos, mut right_pos) = (0usize, 0usize, 0usize);
    for &(v, label) in values {
        if v <= threshold {
            left_n += 1;
            left_pos += usize::from(label == 1);
        } else {
            right_pos += usize::from(label == 1);
        }
    }
    let right_n = total - left_n;
    if left_n == 0 || right_n == 0 {
        return 0.0;
    }
    parent_entropy
        - (left_n as f64 / total as f64) * entropy(left_pos, left_n)
        - (right_n as f64 / total as f64) * entropy(right_pos, right_n)
}

/// Picks `m` distinct feature indices with a partial Fisher-Yates pass,
/// returned in ascending order.
fn sample_features(rng: &mut ChaCha8Rng, d: usize, m: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..d).collect();
    let take = m.min(d);
    for i in 0..take {
        let j = rng.random_range(i..d);
        pool.swap(i, j);
    }
    let mut chosen: Vec<usize> = pool[..take].to_vec();
    chosen.sort_unstable();
    chosen
}

pub(crate) fn build_tree(
    x: &[Vec<f64>],
    y: &[u8],
    rows: &[usize],
    depth: usize,
    settings: &mut TreeSettings<'_>,
) -> TreeNode {
    let total = rows.len();
    let pos = rows.iter().filter(|&&r| y[r] == 1).count();
    let leaf = TreeNode::Leaf {
        positive_fraction: pos as f64 / total as f64,
    };
    if pos == 0 || pos == total || depth >= settings.max_depth || total < settings.min_samples_split
    {
        return leaf;
    }

    let d = x[0].len();
    let candidates: Vec<usize> = match &mut settings.feature_sampler {
        Some((rng, m)) => sample_features(rng, d, *m),
        None => (0..d).collect(),
    };
    let parent_entropy = entropy(pos, total);

    let mut best: Option<Candidate> = None;
    let mut column: Vec<(f64, u8)> = Vec::with_capacity(total);
    for &feature in &candidates {
        column.clear();
        column.extend(rows.iter().map(|&r| (x[r][feature], y[r])));
        match &mut settings.threshold_rule {
            ThresholdRule::Exhaustive => {
                column.sort_by(|a, b| a.0.total_cmp(&b.0));
                // Sweep counts once; evaluate a midpoint wherever the value
                // actually changes.
                let (mut left_n, mut left_pos) = (0usize, 0usize);
                for i in 0..total - 1 {
                    left_n += 1;
                    left_pos += usize::from(column[i].1 == 1);
                    if column[i].0 == column[i + 1].0 {
                        continue;
                    }
                    let threshold = 0.5 * (column[i].0 + column[i + 1].0);
                    let right_n = total - left_n;
                    let right_pos = pos - left_pos;
                    let gain = parent_entropy
                        - (left_n as f64 / total as f64) * entropy(left_pos, left_n)
                        - (right_n as f64 / total as f64) * entropy(right_pos, right_n);
                    let cand = Candidate {
                        feature,
                        threshold,
                        gain,
                    };
                    if best.as_ref().is_none_or(|b| better(&cand, b)) {
                        best = Some(cand);
                    }
                }
            }
            ThresholdRule::Random(rng) => {
                let lo = column.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
                let hi = column.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
                // Draw unconditionally so the stream does not depend on the
                // data reaching this node.
                let u: f64 = rng.random();
                if lo < hi {
                    let threshold = lo + u * (hi - lo);
                    let cand = Candidate {
                        feature,
                        threshold,
                        gain: split_gain(&column, threshold, parent_entropy),
                    };
                    if best.as_ref().is_none_or(|b| better(&cand, b)) {
                        best = Some(cand);
                    }
                }
            }
        }
    }

    let Some(chosen) = best else {
        return leaf;
    };
    if chosen.gain <= 1e-12 {
        return leaf;
    }
    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
        .iter()
        .partition(|&&r| x[r][chosen.feature] <= chosen.threshold);
    if left_rows.is_empty() || right_rows.is_empty() {
        return leaf;
    }
    TreeNode::Split {
        feature: chosen.feature,
        threshold: chosen.threshold,
        left: Box::new(build_tree(x, y, &left_rows, depth + 1, settings)),
        right: Box::new(build_tree(x, y, &right_rows, depth + 1, settings)),
    }
}

pub(crate) fn fit_decision_tree(
    spec: &ModelSpec,
    x: &[Vec<f64>],
    y: &[u8],
) -> Result<ModelParams> {
    let rows: Vec<usize> = (0..x.len()).collect();
    let mut settings = TreeSettings {
        max_depth: spec.param_usize("max_depth", 10),
        min_samples_split: spec.param_usize("min_samples_split", 2),
        threshold_rule: ThresholdRule::Exhaustive,
        feature_sampler: None,
    };
    Ok(ModelParams::Tree(build_tree(x, y, &rows, 0, &mut settings)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::{fit, ModelFamily};

    #[test]
    fn entropy_basics() {
        assert_eq!(entropy(0, 10), 0.0);
        assert_eq!(entropy(10, 10), 0.0);
        assert!((entropy(5, 10) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tree_fits_a_threshold() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let y: Vec<u8> = (0..10).map(|i| u8::from(i >= 5)).collect();
        let model = fit(&ModelSpec::new(ModelFamily::DecisionTree), &x, &y).unwrap();
        assert_eq!(model.predict(&x).unwrap(), y);
        // the split should land between 4 and 5
        let s = model.predict_score(&[vec![4.4], vec![4.6]]).unwrap();
        assert_eq!(s, vec![0.0, 1.0]);
    }

    #[test]
    fn tie_break_prefers_lower_feature() {
        // Both features separate the data identically; feature 0 must win.
        let x = vec![
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![2.0, 2.0],
            vec![3.0, 3.0],
        ];
        let y = vec![0, 0, 1, 1];
        let ModelParams::Tree(root) =
            fit_decision_tree(&ModelSpec::new(ModelFamily::DecisionTree), &x, &y).unwrap()
        else {
            panic!()
        };
        match root {
            TreeNode::Split { feature, .. } => assert_eq!(feature, 0),
            TreeNode::Leaf { .. } => panic!("expected a split"),
        }
    }

    #[test]
    fn depth_limit_respected() {
        // Alternating labels along one feature force deep recursion.
        let x: Vec<Vec<f64>> = (0..32).map(|i| vec![i as f64]).collect();
        let y: Vec<u8> = (0..32).map(|i| (i % 2) as u8).collect();
        let spec = ModelSpec::new(ModelFamily::DecisionTree).with_param("max_depth", 2.0);
        let ModelParams::Tree(root) = fit_decision_tree(&spec, &x, &y).unwrap() else {
            panic!()
        };
        fn depth(node: &TreeNode) -> usize {
            match node {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + depth(left).max(depth(right)),
            }
        }
        assert!(depth(&root) <= 2);
    }
}
