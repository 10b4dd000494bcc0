//! Linear and quadratic discriminant analysis. Covariances get a 1e-6
//! diagonal bump before factorization so masked low-rank subsets stay
//! invertible; the bump rescales discriminants uniformly and cannot flip a
//! decision when the true covariance is well conditioned.

use super::ModelParams;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, cholesky_log_det, cholesky_solve, dot};

const RIDGE: f64 = 1e-6;

fn class_mean(x: &[Vec<f64>], rows: &[usize], d: usize) -> Vec<f64> {
    let mut m = vec![0.0; d];
    for &i in rows {
        for j in 0..d {
            m[j] += x[i][j];
        }
    }
    m.iter_mut().for_each(|v| *v /= rows.len() as f64);
    m
}

#[derive(Debug, Clone)]
pub(crate) struct LdaParams {
    /// `Sigma^-1 mu_c` per class.
    pub w: [Vec<f64>; 2],
    /// `-0.5 mu_c^T Sigma^-1 mu_c + ln pi_c` per class.
    pub c: [f64; 2],
}

impl LdaParams {
    pub fn posterior(&self, row: &[f64]) -> f64 {
        let d0 = dot(&self.w[0], row) + self.c[0];
        let d1 = dot(&self.w[1], row) + self.c[1];
        super::linear::sigmoid(d1 - d0)
    }
}

/// Pooled within-class covariance (denominator `N - 2`) shared by both
/// classes.
pub(crate) fn fit_lda(x: &[Vec<f64>], y: &[u8]) -> Result<ModelParams> {
    let n = x.len();
    let d = x[0].len();
    let rows: [Vec<usize>; 2] = [
        (0..n).filter(|&i| y[i] == 0).collect(),
        (0..n).filter(|&i| y[i] == 1).collect(),
    ];
    let means = [class_mean(x, &rows[0], d), class_mean(x, &rows[1], d)];

    let mut sigma = vec![vec![0.0; d]; d];
    for c in 0..2 {
        for &i in &rows[c] {
            for a in 0..d {
                let da = x[i][a] - means[c][a];
                for b in a..d {
                    sigma[a][b] += da * (x[i][b] - means[c][b]);
                }
            }
        }
    }
    let denom = (n - 2).max(1) as f64;
    for a in 0..d {
        for b in a..d {
            sigma[a][b] /= denom;
            sigma[b][a] = sigma[a][b];
        }
        sigma[a][a] += RIDGE;
    }
    let l = cholesky(&sigma)
        .ok_or_else(|| Error::SingularSystem("pooled covariance".into()))?;
    let mut w: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    let mut c = [0.0; 2];
    for k in 0..2 {
        w[k] = cholesky_solve(&l, &means[k]);
        let prior = rows[k].len() as f64 / n as f64;
        c[k] = -0.5 * dot(&means[k], &w[k]) + prior.ln();
    }
    Ok(ModelParams::Lda(LdaParams { w, c }))
}

#[derive(Debug, Clone)]
pub(crate) struct QdaParams {
    pub mean: [Vec<f64>; 2],
    /// Lower Cholesky factor of each class covariance.
    pub chol: [Vec<Vec<f64>>; 2],
    /// `-0.5 log|Sigma_c| + ln pi_c`.
    pub offset: [f64; 2],
}

impl QdaParams {
    fn discriminant(&self, c: usize, row: &[f64]) -> f64 {
        let d = row.len();
        let diff: Vec<f64> = (0..d).map(|j| row[j] - self.mean[c][j]).collect();
        // forward-solve L z = diff, then |z|^2 = diff^T Sigma^-1 diff
        let l = &self.chol[c];
        let mut z = vec![0.0; d];
        for i in 0..d {
            let mut s = diff[i];
            for k in 0..i {
                s -= l[i][k] * z[k];
            }
            z[i] = s / l[i][i];
        }
        -0.5 * dot(&z, &z) + self.offset[c]
    }

    pub fn posterior(&self, row: &[f64]) -> f64 {
        super::linear::sigmoid(self.discriminant(1, row) - self.discriminant(0, row))
    }
}

/// Per-class covariances (denominator `n_c - 1`, or `n_c` for singleton
/// classes), each with the diagonal bump.
pub(crate) fn fit_qda(x: &[Vec<f64>], y: &[u8]) -> Result<ModelParams> {
    let n = x.len();
    let d = x[0].len();
    let mut mean: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    let mut chol: [Vec<Vec<f64>>; 2] = [Vec::new(), Vec::new()];
    let mut offset = [0.0; 2];
    for c in 0..2u8 {
        let rows: Vec<usize> = (0..n).filter(|&i| y[i] == c).collect();
        let m = class_mean(x, &rows, d);
        let mut sigma = vec![vec![0.0; d]; d];
        for &i in &rows {
            for a in 0..d {
                let da = x[i][a] - m[a];
                for b in a..d {
                    sigma[a][b] += da * (x[i][b] - m[b]);
                }
            }
        }
        let denom = (rows.len().saturating_sub(1)).max(1) as f64;
        for a in 0..d {
            for b in a..d {
                sigma[a][b] /= denom;
                sigma[b][a] = sigma[a][b];
            }
            sigma[a][a] += RIDGE;
        }
        let l = cholesky(&sigma)
            .ok_or_else(|| Error::SingularSystem(format!("class {c} covariance")))?;
        let prior = rows.len() as f64 / n as f64;
        offset[c as usize] = -0.5 * cholesky_log_det(&l) + prior.ln();
        mean[c as usize] = m;
        chol[c as usize] = l;
    }
    Ok(ModelParams::Qda(QdaParams { mean, chol, offset }))
}
