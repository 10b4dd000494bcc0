//! Model-agnostic Shapley attributions on model scores.
//!
//! The value of a coalition replaces every out-of-coalition feature with the
//! corresponding background-row value and averages the model score over the
//! background (interventional form). Exact enumeration covers up to 16
//! features; the kernel estimator solves a weighted least-squares system over
//! sampled coalitions and reproduces the exact values when every proper
//! coalition is included.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::classifiers::FittedModel;
use crate::error::{Error, Result};
use crate::rng::{stream, Stage};

/// Anything that can score a feature row. Implemented by [`FittedModel`] and
/// by plain closures, which the test suites use for constructed models.
pub trait ScoreModel: Sync {
    fn score(&self, row: &[f64]) -> f64;
}

impl ScoreModel for FittedModel {
    fn score(&self, row: &[f64]) -> f64 {
        self.score_row(row)
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> ScoreModel for F {
    fn score(&self, row: &[f64]) -> f64 {
        self(row)
    }
}

/// Per-feature attribution of one instance's score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribution {
    pub values: Vec<f64>,
    /// Mean model score over the background.
    pub base_value: f64,
    pub instance_score: f64,
}

const EXACT_LIMIT: usize = 16;

/// Coalition values for every subset of the `m` features, indexed by bitmask.
fn coalition_values<M: ScoreModel>(
    model: &M,
    background: &[Vec<f64>],
    instance: &[f64],
) -> Vec<f64> {
    let m = instance.len();
    let mut values = vec![0.0; 1 << m];
    let mut hybrid = vec![0.0; m];
    for (mask, value) in values.iter_mut().enumerate() {
        let mut acc = 0.0;
        for bg in background {
            for j in 0..m {
                hybrid[j] = if mask >> j & 1 == 1 { instance[j] } else { bg[j] };
            }
            acc += model.score(&hybrid);
        }
        *value = acc / background.len() as f64;
    }
    values
}

fn check_inputs(background: &[Vec<f64>], instance: &[f64]) -> Result<()> {
    if background.is_empty() {
        return Err(Error::EmptyInput("empty attribution background".into()));
    }
    for row in background {
        if row.len() != instance.len() {
            return Err(Error::DimensionMismatch {
                expected: instance.len(),
                got: row.len(),
            });
        }
    }
    Ok(())
}

/// Exact Shapley values by full coalition enumeration.
pub fn exact_shapley<M: ScoreModel>(
    model: &M,
    background: &[Vec<f64>],
    instance: &[f64],
) -> Result<Attribution> {
    let m = instance.len();
    if m > EXACT_LIMIT {
        return Err(Error::TooManyFeatures(m, EXACT_LIMIT));
    }
    check_inputs(background, instance)?;

    let v = coalition_values(model, background, instance);
    let mut factorial = vec![1.0f64; m + 1];
    for i in 1..=m {
        factorial[i] = factorial[i - 1] * i as f64;
    }
    // weight of a coalition of size s not containing the feature
    let weight: Vec<f64> = (0..m)
        .map(|s| factorial[s] * factorial[m - 1 - s] / factorial[m])
        .collect();

    let full = (1usize << m) - 1;
    let mut values = vec![0.0; m];
    for (j, value) in values.iter_mut().enumerate() {
        let bit = 1usize << j;
        let mut acc = 0.0;
        for mask in 0..=full {
            if mask & bit != 0 {
                continue;
            }
            let s = mask.count_ones() as usize;
            acc += weight[s] * (v[mask | bit] - v[mask]);
        }
        *value = acc;
    }
    Ok(Attribution {
        values,
        base_value: v[0],
        instance_score: v[full],
    })
}

/// Shapley kernel weight for a coalition of size `s` out of `m`, up to a
/// constant factor shared by all sizes.
fn kernel_weight(m: usize, s: usize) -> f64 {
    let mut binom = 1.0f64;
    for i in 0..s {
        binom = binom * (m - i) as f64 / (i + 1) as f64;
    }
    (m - 1) as f64 / (binom * (s * (m - s)) as f64)
}

/// Kernel SHAP: weighted least squares over coalitions under the additivity
/// constraint. With `n_coalitions >= 2^m - 2` every proper coalition is
/// enumerated and the estimate coincides with [`exact_shapley`].
pub fn kernel_shap<M: ScoreModel>(
    model: &M,
    background: &[Vec<f64>],
    instance: &[f64],
    n_coalitions: usize,
    seed: u64,
) -> Result<Attribution> {
    let m = instance.len();
    check_inputs(background, instance)?;
    if n_coalitions < m + 2 {
        return Err(Error::InvalidConfig(format!(
            "kernel attribution needs at least {} coalitions, got {n_coalitions}",
            m + 2
        )));
    }

    let value_of = |mask: usize| -> f64 {
        let mut acc = 0.0;
        let mut hybrid = vec![0.0; m];
        for bg in background {
            for j in 0..m {
                hybrid[j] = if mask >> j & 1 == 1 { instance[j] } else { bg[j] };
            }
            acc += model.score(&hybrid);
        }
        acc / background.len() as f64
    };

    let full = (1usize << m) - 1;
    let base_value = value_of(0);
    let instance_score = value_of(full);
    let delta = instance_score - base_value;

    if m == 1 {
        return Ok(Attribution {
            values: vec![delta],
            base_value,
            instance_score,
        });
    }

    // (mask, weight) rows of the regression
    let proper = (1usize << m) - 2;
    let rows: Vec<(usize, f64)> = if n_coalitions >= proper {
        (1..full)
            .map(|mask| (mask, kernel_weight(m, mask.count_ones() as usize)))
            .collect()
    } else {
        // importance sampling: uniform size in 1..m, uniform subset of that
        // size; reweight so the weighted sum still targets the kernel
        let mut rng = stream(seed, Stage::Shapley, 1);
        (0..n_coalitions)
            .map(|_| {
                let s = rng.random_range(1..m);
                let mut mask = 0usize;
                // partial Fisher-Yates over feature indices
                let mut pool: Vec<usize> = (0..m).collect();
                for i in 0..s {
                    let j = rng.random_range(i..m);
                    pool.swap(i, j);
                    mask |= 1 << pool[i];
                }
                (mask, (m - 1) as f64 / (s * (m - s)) as f64)
            })
            .collect()
    };

    // Eliminate the last coefficient with the constraint sum(phi) = delta.
    let p = m - 1;
    let mut gram = vec![vec![0.0; p]; p];
    let mut rhs = vec![0.0; p];
    for &(mask, w) in &rows {
        let z_last = f64::from(mask >> p & 1 == 1);
        let target = value_of(mask) - base_value - z_last * delta;
        let a_row: Vec<f64> = (0..p)
            .map(|j| f64::from(mask >> j & 1 == 1) - z_last)
            .collect();
        for i in 0..p {
            if a_row[i] == 0.0 {
                continue;
            }
            rhs[i] += w * a_row[i] * target;
            for k in 0..p {
                gram[i][k] += w * a_row[i] * a_row[k];
            }
        }
    }
    let phi_head = crate::linalg::solve(gram, rhs)
        .ok_or_else(|| Error::SingularSystem("kernel attribution regression".into()))?;
    let mut values = phi_head;
    let tail = delta - values.iter().sum::<f64>();
    values.push(tail);

    Ok(Attribution {
        values,
        base_value,
        instance_score,
    })
}

/// Mean-|value| feature ranking over a batch of attributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapSummary {
    /// Per feature, in input order.
    pub mean_abs: Vec<f64>,
    /// Feature names sorted by descending mean |value|, ties by name.
    pub ranking: Vec<String>,
    /// One row of Shapley values per sample.
    pub matrix: Vec<Vec<f64>>,
}

pub fn summarize(attributions: &[Attribution], feature_names: &[String]) -> Result<ShapSummary> {
    if attributions.is_empty() {
        return Err(Error::EmptyInput("no attributions to summarize".into()));
    }
    let m = feature_names.len();
    for a in attributions {
        if a.values.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: a.values.len(),
            });
        }
    }
    let n = attributions.len() as f64;
    let mean_abs: Vec<f64> = (0..m)
        .map(|j| attributions.iter().map(|a| a.values[j].abs()).sum::<f64>() / n)
        .collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        mean_abs[b]
            .total_cmp(&mean_abs[a])
            .then_with(|| feature_names[a].cmp(&feature_names[b]))
    });
    Ok(ShapSummary {
        ranking: order.iter().map(|&j| feature_names[j].clone()).collect(),
        mean_abs,
        matrix: attributions.iter().map(|a| a.values.clone()).collect(),
    })
}
