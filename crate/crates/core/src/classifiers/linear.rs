//! Linear-family fits: logistic regression (plain and CV-tuned), ridge
//! regression on signed targets (plain and CV-tuned), hinge-loss models,
//! perceptron, passive-aggressive.

use rand::seq::SliceRandom;

use super::{ModelParams, ModelSpec};
use crate::error::{Error, Result};
use crate::eval::stratified_fold_indices;
use crate::linalg::{dot, solve};
use crate::rng::{stream, Stage};

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn signed(y: &[u8]) -> Vec<f64> {
    y.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect()
}

/// Full-batch gradient descent on the mean cross-entropy with optional L2
/// penalty on the weights (bias unpenalized).
pub(crate) fn fit_logistic(
    spec: &ModelSpec,
    x: &[Vec<f64>],
    y: &[u8],
    lambda: f64,
) -> Result<ModelParams> {
    let n = x.len();
    let d = x[0].len();
    let lr = spec.param("learning_rate", 0.1);
    let epochs = spec.param_usize("epochs", 1000);
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let inv_n = 1.0 / n as f64;
    let mut grad_w = vec![0.0; d];
    for _ in 0..epochs {
        grad_w.iter_mut().for_each(|g| *g = 0.0);
        let mut grad_b = 0.0;
        for (row, &label) in x.iter().zip(y) {
            let err = sigmoid(dot(&w, row) + b) - f64::from(label);
            for (g, &v) in grad_w.iter_mut().zip(row) {
                *g += err * v;
            }
            grad_b += err;
        }
        for (wj, g) in w.iter_mut().zip(&grad_w) {
            *wj -= lr * inv_n * (g + lambda * *wj);
        }
        b -= lr * inv_n * grad_b;
    }
    Ok(ModelParams::Linear {
        weights: w,
        bias: b,
        sigmoid: true,
    })
}

/// Closed-form ridge on ±1 targets: solve `(A^T A + λD) c = A^T t` where `A`
/// is `x` with an appended ones column and `D` penalizes everything but the
/// bias.
pub(crate) fn fit_ridge(
    _spec: &ModelSpec,
    x: &[Vec<f64>],
    y: &[u8],
    lambda: f64,
) -> Result<ModelParams> {
    let d = x[0].len();
    let t = signed(y);
    let m = d + 1;
    let mut gram = vec![vec![0.0; m]; m];
    let mut rhs = vec![0.0; m];
    for (row, &target) in x.iter().zip(&t) {
        for i in 0..m {
            let ai = if i < d { row[i] } else { 1.0 };
            rhs[i] += ai * target;
            for j in i..m {
                let aj = if j < d { row[j] } else { 1.0 };
                gram[i][j] += ai * aj;
            }
        }
    }
    for i in 0..m {
        for j in 0..i {
            gram[i][j] = gram[j][i];
        }
    }
    for (i, row) in gram.iter_mut().enumerate().take(d) {
        row[i] += lambda;
    }
    let c = solve(gram, rhs).ok_or_else(|| Error::SingularSystem("ridge normal equations".into()))?;
    let (weights, bias) = (c[..d].to_vec(), c[d]);
    Ok(ModelParams::Linear {
        weights,
        bias,
        sigmoid: false,
    })
}

const PENALTY_GRID: [f64; 5] = [0.001, 0.01, 0.1, 1.0, 10.0];

/// Picks a penalty strength from the fixed grid by internal seeded
/// stratified k-fold accuracy; ties go to the smaller penalty. Falls back to
/// the smallest grid value when a class is too small to fold.
fn select_penalty<F>(spec: &ModelSpec, x: &[Vec<f64>], y: &[u8], fit_one: F) -> Result<f64>
where
    F: Fn(&[Vec<f64>], &[u8], f64) -> Result<ModelParams>,
{
    let folds = spec.param_usize("folds", 5);
    let min_class = y.iter().filter(|&&l| l == 1).count().min(y.iter().filter(|&&l| l == 0).count());
    let k = folds.min(min_class);
    if k < 2 {
        return Ok(PENALTY_GRID[0]);
    }
    let mut rng = stream(spec.seed, Stage::Model, u64::MAX);
    let assignment = stratified_fold_indices(y, k, &mut rng);
    let tau = spec.family.threshold();
    let mut best = (f64::NEG_INFINITY, PENALTY_GRID[0]);
    for &lambda in &PENALTY_GRID {
        let mut correct = 0usize;
        for fold in 0..k {
            let mut tr_x = Vec::new();
            let mut tr_y = Vec::new();
            let mut va = Vec::new();
            for (i, &f) in assignment.iter().enumerate() {
                if f == fold {
                    va.push(i);
                } else {
                    tr_x.push(x[i].clone());
                    tr_y.push(y[i]);
                }
            }
            let params = fit_one(&tr_x, &tr_y, lambda)?;
            let model = super::FittedModel {
                spec: spec.clone(),
                feature_count: x[0].len(),
                params,
            };
            for &i in &va {
                let s = model.score_row(&x[i]);
                if u8::from(s > tau) == y[i] {
                    correct += 1;
                }
            }
        }
        let acc = correct as f64 / y.len() as f64;
        if acc > best.0 {
            best = (acc, lambda);
        }
    }
    Ok(best.1)
}

pub(crate) fn fit_logistic_cv(spec: &ModelSpec, x: &[Vec<f64>], y: &[u8]) -> Result<ModelParams> {
    let lambda = select_penalty(spec, x, y, |tx, ty, l| fit_logistic(spec, tx, ty, l))?;
    fit_logistic(spec, x, y, lambda)
}

pub(crate) fn fit_ridge_cv(spec: &ModelSpec, x: &[Vec<f64>], y: &[u8]) -> Result<ModelParams> {
    let lambda = select_penalty(spec, x, y, |tx, ty, l| fit_ridge(spec, tx, ty, l))?;
    fit_ridge(spec, x, y, lambda)
}

/// Per-sample subgradient descent on hinge loss + L2, samples visited in a
/// seeded shuffled order each epoch.
pub(crate) fn fit_sgd_hinge(spec: &ModelSpec, x: &[Vec<f64>], y: &[u8]) -> Result<ModelParams> {
    let d = x[0].len();
    let lambda = spec.param("lambda", 1e-4);
    let lr0 = spec.param("learning_rate", 0.01);
    let epochs = spec.param_usize("epochs", 1000);
    let t = signed(y);
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut order: Vec<usize> = (0..x.len()).collect();
    let mut rng = stream(spec.seed, Stage::Model, 0);
    for epoch in 0..epochs {
        let lr = lr0 / (1.0 + epoch as f64 * lambda);
        order.shuffle(&mut rng);
        for &i in &order {
            let margin = t[i] * (dot(&w, &x[i]) + b);
            let shrink = 1.0 - lr * lambda;
            if margin < 1.0 {
                for (wj, &v) in w.iter_mut().zip(&x[i]) {
                    *wj = *wj * shrink + lr * t[i] * v;
                }
                b += lr * t[i];
            } else {
                w.iter_mut().for_each(|wj| *wj *= shrink);
            }
        }
    }
    Ok(ModelParams::Linear {
        weights: w,
        bias: b,
        sigmoid: false,
    })
}

/// Full-batch subgradient descent on hinge loss + L2.
pub(crate) fn fit_linear_svm(spec: &ModelSpec, x: &[Vec<f64>], y: &[u8]) -> Result<ModelParams> {
    let n = x.len();
    let d = x[0].len();
    let lambda = spec.param("lambda", 1e-4);
    let lr0 = spec.param("learning_rate", 0.01);
    let epochs = spec.param_usize("epochs", 1000);
    let t = signed(y);
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let inv_n = 1.0 / n as f64;
    let mut grad_w = vec![0.0; d];
    for epoch in 0..epochs {
        let lr = lr0 / (1.0 + epoch as f64 * lambda);
        grad_w
            .iter_mut()
            .zip(&w)
            .for_each(|(g, &wj)| *g = lambda * wj);
        let mut grad_b = 0.0;
        for (row, &target) in x.iter().zip(&t) {
            if target * (dot(&w, row) + b) < 1.0 {
                for (g, &v) in grad_w.iter_mut().zip(row) {
                    *g -= inv_n * target * v;
                }
                grad_b -= inv_n * target;
            }
        }
        for (wj, g) in w.iter_mut().zip(&grad_w) {
            *wj -= lr * g;
        }
        b -= lr * grad_b;
    }
    Ok(ModelParams::Linear {
        weights: w,
        bias: b,
        sigmoid: false,
    })
}

/// Rosenblatt perceptron: update on every misclassification, stop early on a
/// clean pass.
pub(crate) fn fit_perceptron(spec: &ModelSpec, x: &[Vec<f64>], y: &[u8]) -> Result<ModelParams> {
    let d = x[0].len();
    let lr = spec.param("learning_rate", 1.0);
    let epochs = spec.param_usize("epochs", 1000);
    let t = signed(y);
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    for _ in 0..epochs {
        let mut mistakes = 0usize;
        for (row, &target) in x.iter().zip(&t) {
            if target * (dot(&w, row) + b) <= 0.0 {
                for (wj, &v) in w.iter_mut().zip(row) {
                    *wj += lr * target * v;
                }
                b += lr * target;
                mistakes += 1;
            }
        }
        if mistakes == 0 {
            break;
        }
    }
    Ok(ModelParams::Linear {
        weights: w,
        bias: b,
        sigmoid: false,
    })
}

/// PA-I: update only on hinge violations, with step `min(C, loss/|x|^2)`
/// (bias treated as an appended constant feature).
pub(crate) fn fit_passive_aggressive(
    spec: &ModelSpec,
    x: &[Vec<f64>],
    y: &[u8],
) -> Result<ModelParams> {
    let d = x[0].len();
    let c = spec.param("c", 1.0);
    let epochs = spec.param_usize("epochs", 100);
    let t = signed(y);
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    for _ in 0..epochs {
        let mut updated = false;
        for (row, &target) in x.iter().zip(&t) {
            let loss = (1.0 - target * (dot(&w, row) + b)).max(0.0);
            if loss > 0.0 {
                let norm_sq = dot(row, row) + 1.0;
                let tau = (loss / norm_sq).min(c);
                for (wj, &v) in w.iter_mut().zip(row) {
                    *wj += tau * target * v;
                }
                b += tau * target;
                updated = true;
            }
        }
        if !updated {
            break;
        }
    }
    Ok(ModelParams::Linear {
        weights: w,
        bias: b,
        sigmoid: false,
    })
}
