//! Tree ensembles: random forest, extremely randomized trees, bagging, and
//! discrete two-class AdaBoost over depth-1 stumps.

use rand::Rng;

use super::tree::{build_tree, ThresholdRule, TreeSettings};
use super::{ModelParams, ModelSpec};
use crate::error::Result;
use crate::rng::{stream, Stage};

/// 100 bootstrapped trees, `ceil(sqrt(d))` candidate features per split,
/// exhaustive thresholds.
pub(crate) fn fit_random_forest(
    spec: &ModelSpec,
    x: &[Vec<f64>],
    y: &[u8],
) -> Result<ModelParams> {
    let n = x.len();
    let d = x[0].len();
    let n_trees = spec.param_usize("n_trees", 100);
    let per_split = (d as f64).sqrt().ceil() as usize;
    let mut trees = Vec::with_capacity(n_trees);
    for t in 0..n_trees {
        let mut rng = stream(spec.seed, Stage::Model, t as u64);
        let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        let mut feature_rng = rng.clone();
        let mut settings = TreeSettings {
            max_depth: spec.param_usize("max_depth", 10),
            min_samples_split: spec.param_usize("min_samples_split", 2),
            threshold_rule: ThresholdRule::Exhaustive,
            feature_sampler: Some((&mut feature_rng, per_split)),
        };
        trees.push(build_tree(x, y, &rows, 0, &mut settings));
    }
    Ok(ModelParams::Forest { trees })
}

/// 100 unbootstrapped trees, every feature a candidate, one random threshold
/// per feature per node.
pub(crate) fn fit_extra_trees(spec: &ModelSpec, x: &[Vec<f64>], y: &[u8]) -> Result<ModelParams> {
    let n_trees = spec.param_usize("n_trees", 100);
    let rows: Vec<usize> = (0..x.len()).collect();
    let mut trees = Vec::with_capacity(n_trees);
    for t in 0..n_trees {
        let mut rng = stream(spec.seed, Stage::Model, t as u64);
        let mut settings = TreeSettings {
            max_depth: spec.param_usize("max_depth", 10),
            min_samples_split: spec.param_usize("min_samples_split", 2),
            threshold_rule: ThresholdRule::Random(&mut rng),
            feature_sampler: None,
        };
        trees.push(build_tree(x, y, &rows, 0, &mut settings));
    }
    Ok(ModelParams::Forest { trees })
}

/// 10 bootstrapped full-feature trees.
pub(crate) fn fit_bagging(spec: &ModelSpec, x: &[Vec<f64>], y: &[u8]) -> Result<ModelParams> {
    let n = x.len();
    let n_trees = spec.param_usize("n_trees", 10);
    let mut trees = Vec::with_capacity(n_trees);
    for t in 0..n_trees {
        let mut rng = stream(spec.seed, Stage::Model, t as u64);
        let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        let mut settings = TreeSettings {
            max_depth: spec.param_usize("max_depth", 10),
            min_samples_split: spec.param_usize("min_samples_split", 2),
            threshold_rule: ThresholdRule::Exhaustive,
            feature_sampler: None,
        };
        trees.push(build_tree(x, y, &rows, 0, &mut settings));
    }
    Ok(ModelParams::Forest { trees })
}

/// A depth-1 weak learner: `value <= threshold` predicts `left_label`.
#[derive(Debug, Clone)]
pub(crate) struct WeightedStump {
    pub feature: usize,
    pub threshold: f64,
    pub left_label: u8,
    /// Vote weight `0.5 * ln((1 - eps) / eps)`.
    pub alpha: f64,
}

impl WeightedStump {
    fn predict_signed(&self, row: &[f64]) -> f64 {
        let label = if row[self.feature] <= self.threshold {
            self.left_label
        } else {
            1 - self.left_label
        };
        if label == 1 {
            1.0
        } else {
            -1.0
        }
    }
}

pub(crate) fn adaboost_score(stumps: &[WeightedStump], row: &[f64]) -> f64 {
    stumps
        .iter()
        .map(|s| s.alpha * s.predict_signed(row))
        .sum()
}

/// Best stump by weighted misclassification error. Ties prefer the lower
/// feature index, then the lower threshold, then `left_label = 1`.
fn best_stump(x: &[Vec<f64>], y: &[u8], weights: &[f64]) -> (usize, f64, u8, f64) {
    let d = x[0].len();
    let n = x.len();
    let total_pos: f64 = (0..n).filter(|&i| y[i] == 1).map(|i| weights[i]).sum();
    let total_neg: f64 = (0..n).filter(|&i| y[i] == 0).map(|i| weights[i]).sum();
    let mut best = (0usize, f64::NEG_INFINITY, 1u8, f64::INFINITY);
    let mut column: Vec<(f64, u8, f64)> = Vec::with_capacity(n);
    for feature in 0..d {
        column.clear();
        column.extend((0..n).map(|i| (x[i][feature], y[i], weights[i])));
        column.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (mut left_pos, mut left_neg) = (0.0f64, 0.0f64);
        for i in 0..n - 1 {
            if column[i].1 == 1 {
                left_pos += column[i].2;
            } else {
                left_neg += column[i].2;
            }
            if column[i].0 == column[i + 1].0 {
                continue;
            }
            let threshold = 0.5 * (column[i].0 + column[i + 1].0);
            // left predicts 1: wrong on left negatives and right positives
            let err_pos_left = left_neg + (total_pos - left_pos);
            // left predicts 0: the complement
            let err_neg_left = left_pos + (total_neg - left_neg);
            for (left_label, err) in [(1u8, err_pos_left), (0u8, err_neg_left)] {
                let improves = err < best.3 - 1e-15;
                let ties = (err - best.3).abs() <= 1e-15
                    && (feature, threshold, std::cmp::Reverse(left_label))
                        < (best.0, best.1, std::cmp::Reverse(best.2));
                if improves || ties {
                    best = (feature, threshold, left_label, err);
                }
            }
        }
    }
    best
}

/// Discrete AdaBoost with 50 rounds. A round with weighted error at or above
/// one half stops boosting; a perfect stump is kept and stops boosting.
pub(crate) fn fit_adaboost(spec: &ModelSpec, x: &[Vec<f64>], y: &[u8]) -> Result<ModelParams> {
    let n = x.len();
    let n_rounds = spec.param_usize("n_rounds", 50);
    let mut weights = vec![1.0 / n as f64; n];
    let mut stumps: Vec<WeightedStump> = Vec::new();
    for _ in 0..n_rounds {
        let (feature, threshold, left_label, err) = best_stump(x, y, &weights);
        if !threshold.is_finite() || err >= 0.5 - 1e-12 {
            break;
        }
        let eps = err.clamp(1e-10, 1.0 - 1e-10);
        let alpha = 0.5 * ((1.0 - eps) / eps).ln();
        let stump = WeightedStump {
            feature,
            threshold,
            left_label,
            alpha,
        };
        let mut norm = 0.0;
        for i in 0..n {
            let target = if y[i] == 1 { 1.0 } else { -1.0 };
            weights[i] *= (-alpha * target * stump.predict_signed(&x[i])).exp();
            norm += weights[i];
        }
        for w in &mut weights {
            *w /= norm;
        }
        stumps.push(stump);
        if err <= 1e-10 {
            break;
        }
    }
    if stumps.is_empty() {
        // No usable stump; majority class as a zero-margin-free constant.
        let pos = y.iter().filter(|&&l| l == 1).count();
        let class = u8::from(pos * 2 > n);
        return Ok(ModelParams::Constant { class });
    }
    Ok(ModelParams::AdaBoost { stumps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::{fit, FittedModel, ModelFamily, ModelParams};

    fn clusters() -> (Vec<Vec<f64>>, Vec<u8>) {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..12 {
            let t = i as f64 * 0.01;
            x.push(vec![0.1 + t, 0.2 - t]);
            y.push(0);
            x.push(vec![0.9 - t, 0.8 + t]);
            y.push(1);
        }
        (x, y)
    }

    #[test]
    fn forests_learn_clusters() {
        let (x, y) = clusters();
        for family in [
            ModelFamily::RandomForest,
            ModelFamily::ExtraTrees,
            ModelFamily::Bagging,
        ] {
            let model = fit(&ModelSpec::new(family).with_seed(11), &x, &y).unwrap();
            assert_eq!(model.predict(&x).unwrap(), y, "family {}", family.name());
        }
    }

    #[test]
    fn unanimous_forest_equals_single_tree() {
        let (x, y) = clusters();
        let tree = fit(&ModelSpec::new(ModelFamily::DecisionTree), &x, &y).unwrap();
        // bagging with one tree and no feature sampling still bootstraps, so
        // make the unanimity explicit: a forest of identical trees.
        let ModelParams::Tree(root) = &tree.params else { panic!() };
        let forest = FittedModel {
            spec: ModelSpec::new(ModelFamily::RandomForest),
            feature_count: 2,
            params: ModelParams::Forest {
                trees: vec![root.clone(), root.clone(), root.clone()],
            },
        };
        assert_eq!(forest.predict(&x).unwrap(), tree.predict(&x).unwrap());
    }

    #[test]
    fn adaboost_training_error_non_increasing() {
        let (x, y) = clusters();
        let spec = ModelSpec::new(ModelFamily::AdaBoost);
        let ModelParams::AdaBoost { stumps } = fit_adaboost(&spec, &x, &y).unwrap() else {
            panic!()
        };
        let mut prev_err = f64::INFINITY;
        for rounds in 1..=stumps.len() {
            let partial = &stumps[..rounds];
            let errors = x
                .iter()
                .zip(&y)
                .filter(|(row, &label)| {
                    let s = adaboost_score(partial, row);
                    u8::from(s > 0.0) != label
                })
                .count();
            let err = errors as f64 / x.len() as f64;
            assert!(err <= prev_err + 1e-12);
            prev_err = err;
        }
        assert_eq!(prev_err, 0.0);
    }

    #[test]
    fn adaboost_handles_perfect_stump() {
        let x: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64]).collect();
        let y: Vec<u8> = (0..8).map(|i| u8::from(i >= 4)).collect();
        let model = fit(&ModelSpec::new(ModelFamily::AdaBoost), &x, &y).unwrap();
        assert_eq!(model.predict(&x).unwrap(), y);
        let ModelParams::AdaBoost { stumps } = &model.params else { panic!() };
        assert_eq!(stumps.len(), 1);
    }

    #[test]
    fn forest_vote_fraction_is_score() {
        let (x, y) = clusters();
        let model = fit(
            &ModelSpec::new(ModelFamily::RandomForest)
                .with_seed(3)
                .with_param("n_trees", 10.0),
            &x,
            &y,
        )
        .unwrap();
        for s in model.predict_score(&x).unwrap() {
            let scaled = s * 10.0;
            assert!((scaled - scaled.round()).abs() < 1e-9);
        }
    }
}
