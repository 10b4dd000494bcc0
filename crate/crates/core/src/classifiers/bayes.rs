//! Naive Bayes variants. Scores are posteriors `P(y=1|x)` computed from the
//! two joint log-likelihoods with a stable log-sum-exp.

use super::{ModelParams, ModelSpec};
use crate::error::Result;

fn class_rows(y: &[u8], label: u8) -> Vec<usize> {
    (0..y.len()).filter(|&i| y[i] == label).collect()
}

fn posterior_from_jll(jll0: f64, jll1: f64) -> f64 {
    let m = jll0.max(jll1);
    let e0 = (jll0 - m).exp();
    let e1 = (jll1 - m).exp();
    e1 / (e0 + e1)
}

#[derive(Debug, Clone)]
pub(crate) struct GaussianNbParams {
    pub log_prior: [f64; 2],
    pub mean: [Vec<f64>; 2],
    pub var: [Vec<f64>; 2],
}

impl GaussianNbParams {
    pub fn posterior(&self, row: &[f64]) -> f64 {
        let jll = |c: usize| -> f64 {
            let mut s = self.log_prior[c];
            for ((&x, &m), &v) in row.iter().zip(&self.mean[c]).zip(&self.var[c]) {
                let diff = x - m;
                s -= 0.5 * ((2.0 * std::f64::consts::PI * v).ln() + diff * diff / v);
            }
            s
        };
        posterior_from_jll(jll(0), jll(1))
    }
}

/// Per-class means and maximum-likelihood variances, each variance floored up
/// by `1e-9` times the largest overall feature variance.
pub(crate) fn fit_gaussian(x: &[Vec<f64>], y: &[u8]) -> Result<ModelParams> {
    let n = x.len();
    let d = x[0].len();

    let mut global_mean = vec![0.0; d];
    for row in x {
        for j in 0..d {
            global_mean[j] += row[j];
        }
    }
    global_mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut max_var = 0.0f64;
    for j in 0..d {
        let v = x.iter().map(|r| (r[j] - global_mean[j]).powi(2)).sum::<f64>() / n as f64;
        max_var = max_var.max(v);
    }
    let epsilon = 1e-9 * max_var.max(f64::MIN_POSITIVE);

    let mut mean = [vec![0.0; d], vec![0.0; d]];
    let mut var = [vec![0.0; d], vec![0.0; d]];
    let mut log_prior = [0.0; 2];
    for c in 0..2 {
        let rows = class_rows(y, c as u8);
        let nc = rows.len();
        log_prior[c] = (nc as f64 / n as f64).ln();
        for j in 0..d {
            let m = rows.iter().map(|&i| x[i][j]).sum::<f64>() / nc as f64;
            let v = rows.iter().map(|&i| (x[i][j] - m).powi(2)).sum::<f64>() / nc as f64;
            mean[c][j] = m;
            var[c][j] = v + epsilon;
        }
    }
    Ok(ModelParams::GaussianNb(GaussianNbParams {
        log_prior,
        mean,
        var,
    }))
}

#[derive(Debug, Clone)]
pub(crate) struct BernoulliNbParams {
    pub log_prior: [f64; 2],
    /// log(theta) and log(1 - theta) per class per feature.
    pub log_on: [Vec<f64>; 2],
    pub log_off: [Vec<f64>; 2],
    pub binarize: f64,
}

impl BernoulliNbParams {
    pub fn posterior(&self, row: &[f64]) -> f64 {
        let jll = |c: usize| -> f64 {
            let mut s = self.log_prior[c];
            for (j, &v) in row.iter().enumerate() {
                s += if v > self.binarize {
                    self.log_on[c][j]
                } else {
                    self.log_off[c][j]
                };
            }
            s
        };
        posterior_from_jll(jll(0), jll(1))
    }
}

pub(crate) fn fit_bernoulli(spec: &ModelSpec, x: &[Vec<f64>], y: &[u8]) -> Result<ModelParams> {
    let n = x.len();
    let d = x[0].len();
    let alpha = spec.param("alpha", 1.0);
    let binarize = spec.param("binarize", 0.5);
    let mut log_prior = [0.0; 2];
    let mut log_on = [vec![0.0; d], vec![0.0; d]];
    let mut log_off = [vec![0.0; d], vec![0.0; d]];
    for c in 0..2 {
        let rows = class_rows(y, c as u8);
        let nc = rows.len();
        log_prior[c] = (nc as f64 / n as f64).ln();
        for j in 0..d {
            let on = rows.iter().filter(|&&i| x[i][j] > binarize).count();
            let theta = (on as f64 + alpha) / (nc as f64 + 2.0 * alpha);
            log_on[c][j] = theta.ln();
            log_off[c][j] = (1.0 - theta).ln();
        }
    }
    Ok(ModelParams::BernoulliNb(BernoulliNbParams {
        log_prior,
        log_on,
        log_off,
        binarize,
    }))
}

#[derive(Debug, Clone)]
pub(crate) struct MultinomialNbParams {
    pub log_prior: [f64; 2],
    pub feature_log_prob: [Vec<f64>; 2],
}

impl MultinomialNbParams {
    pub fn posterior(&self, row: &[f64]) -> f64 {
        let jll = |c: usize| -> f64 {
            self.log_prior[c]
                + row
                    .iter()
                    .zip(&self.feature_log_prob[c])
                    .map(|(&v, &lp)| v * lp)
                    .sum::<f64>()
        };
        posterior_from_jll(jll(0), jll(1))
    }
}

pub(crate) fn fit_multinomial(spec: &ModelSpec, x: &[Vec<f64>], y: &[u8]) -> Result<ModelParams> {
    let n = x.len();
    let d = x[0].len();
    let alpha = spec.param("alpha", 1.0);
    let mut log_prior = [0.0; 2];
    let mut feature_log_prob = [vec![0.0; d], vec![0.0; d]];
    for c in 0..2 {
        let rows = class_rows(y, c as u8);
        log_prior[c] = (rows.len() as f64 / n as f64).ln();
        let mut counts = vec![0.0; d];
        for &i in &rows {
            for j in 0..d {
                counts[j] += x[i][j];
            }
        }
        let total: f64 = counts.iter().sum();
        for j in 0..d {
            feature_log_prob[c][j] = ((counts[j] + alpha) / (total + alpha * d as f64)).ln();
        }
    }
    Ok(ModelParams::MultinomialNb(MultinomialNbParams {
        log_prior,
        feature_log_prob,
    }))
}

#[derive(Debug, Clone)]
pub(crate) struct ComplementNbParams {
    /// Per class, `-log` of the complement-class feature distribution.
    pub feature_weights: [Vec<f64>; 2],
}

impl ComplementNbParams {
    pub fn posterior(&self, row: &[f64]) -> f64 {
        let score = |c: usize| -> f64 {
            row.iter()
                .zip(&self.feature_weights[c])
                .map(|(&v, &w)| v * w)
                .sum::<f64>()
        };
        posterior_from_jll(score(0), score(1))
    }
}

/// Complement statistics: for each class, feature counts are accumulated over
/// every *other* class; priors are not used at decision time.
pub(crate) fn fit_complement(spec: &ModelSpec, x: &[Vec<f64>], y: &[u8]) -> Result<ModelParams> {
    let d = x[0].len();
    let alpha = spec.param("alpha", 1.0);
    let mut feature_weights = [vec![0.0; d], vec![0.0; d]];
    for c in 0..2u8 {
        let mut counts = vec![0.0; d];
        for (row, &label) in x.iter().zip(y) {
            if label != c {
                for j in 0..d {
                    counts[j] += row[j];
                }
            }
        }
        let total: f64 = counts.iter().sum();
        for j in 0..d {
            feature_weights[c as usize][j] =
                -((counts[j] + alpha) / (total + alpha * d as f64)).ln();
        }
    }
    Ok(ModelParams::ComplementNb(ComplementNbParams {
        feature_weights,
    }))
}
