//! Significance tests: paired and pairwise t-tests, Cohen's d, and the
//! chi-square independence test, backed by Lanczos log-gamma with
//! regularized incomplete beta/gamma continued fractions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

// Lanczos approximation, g = 7, 9 coefficients.
const LANCZOS: [f64; 8] = [
    676.5203681218851,
    -1259.1392167224028,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507343278686905,
    -0.13857109526572012,
    9.984_369_578_019_572e-6,
    1.5056327351493116e-7,
];

pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection formula
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = 0.999_999_999_999_809_9;
    for (i, &c) in LANCZOS.iter().enumerate() {
        acc += c / (x + (i + 1) as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

const CF_EPS: f64 = 1e-12;
const CF_MAX_ITER: usize = 500;
const TINY: f64 = 1e-300;

/// Continued fraction for the incomplete beta (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < CF_EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn inc_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front =
        ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

/// Regularized lower incomplete gamma `P(a, x)`: series for `x < a + 1`,
/// continued fraction otherwise.
pub fn inc_gamma_lower(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let ln_pre = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut ap = a;
        for _ in 0..CF_MAX_ITER {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * CF_EPS {
                break;
            }
        }
        sum * ln_pre.exp()
    } else {
        // Lentz continued fraction for Q(a, x)
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..=CF_MAX_ITER {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < CF_EPS {
                break;
            }
        }
        1.0 - ln_pre.exp() * h
    }
}

/// Student-t CDF via the regularized incomplete beta.
pub fn t_cdf(t: f64, df: usize) -> Result<f64> {
    if df < 1 {
        return Err(Error::InvalidConfig("t distribution needs df >= 1".into()));
    }
    let v = df as f64;
    let x = v / (v + t * t);
    let tail = 0.5 * inc_beta(0.5 * v, 0.5, x);
    Ok(if t >= 0.0 { 1.0 - tail } else { tail })
}

/// Chi-square CDF with `df` degrees of freedom.
pub fn chi2_cdf(x: f64, df: usize) -> f64 {
    inc_gamma_lower(0.5 * df as f64, 0.5 * x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub t_statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
    pub two_tailed: bool,
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (n - 1 denominator).
fn sample_sd(values: &[f64]) -> f64 {
    let m = mean(values);
    (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
}

/// Two-tailed paired t-test. Zero variance of the differences is reported as
/// degenerate rather than a p-value.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTestResult> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::EmptyInput("paired t-test needs n >= 2".into()));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let sd = sample_sd(&diffs);
    if sd == 0.0 {
        return Err(Error::ZeroVariance(
            "paired differences are all identical".into(),
        ));
    }
    let t = mean(&diffs) / (sd / (n as f64).sqrt());
    let df = n - 1;
    let p = (2.0 * (1.0 - t_cdf(t.abs(), df)?)).clamp(0.0, 1.0);
    Ok(TTestResult {
        t_statistic: t,
        degrees_of_freedom: df,
        p_value: p,
        two_tailed: true,
    })
}

/// Paired and pooled Cohen's d; a zero standard deviation in a denominator
/// leaves that variant unset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectSize {
    pub d_paired: Option<f64>,
    pub d_pooled: Option<f64>,
}

pub fn cohens_d(a: &[f64], b: &[f64]) -> Result<EffectSize> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::EmptyInput("effect size needs n >= 2".into()));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let sd_diff = sample_sd(&diffs);
    let d_paired = (sd_diff > 0.0).then(|| mean(&diffs) / sd_diff);

    let n = a.len() as f64;
    let var_a = sample_sd(a).powi(2);
    let var_b = sample_sd(b).powi(2);
    let pooled = (((n - 1.0) * var_a + (n - 1.0) * var_b) / (2.0 * n - 2.0)).sqrt();
    let d_pooled = (pooled > 0.0).then(|| (mean(a) - mean(b)) / pooled);

    Ok(EffectSize { d_paired, d_pooled })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseTTest {
    pub model_a: String,
    pub model_b: String,
    pub result: TTestResult,
}

/// Paired t-tests over every unordered pair of score vectors, in name order.
/// Identical vectors are reported as `t = 0, p = 1`.
pub fn pairwise_t_tests(model_scores: &[(String, Vec<f64>)]) -> Result<Vec<PairwiseTTest>> {
    let n_folds = model_scores.first().map_or(0, |(_, v)| v.len());
    for (name, scores) in model_scores {
        if scores.len() != n_folds {
            return Err(Error::InvalidConfig(format!(
                "fold count mismatch for {name}: {} vs {n_folds}",
                scores.len()
            )));
        }
    }
    let mut sorted: Vec<&(String, Vec<f64>)> = model_scores.iter().collect();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    let mut out = Vec::new();
    for i in 0..sorted.len() {
        for j in i + 1..sorted.len() {
            let (name_a, scores_a) = sorted[i];
            let (name_b, scores_b) = sorted[j];
            let result = if scores_a == scores_b {
                TTestResult {
                    t_statistic: 0.0,
                    degrees_of_freedom: n_folds.saturating_sub(1),
                    p_value: 1.0,
                    two_tailed: true,
                }
            } else {
                paired_t_test(scores_a, scores_b)?
            };
            out.push(PairwiseTTest {
                model_a: name_a.clone(),
                model_b: name_b.clone(),
                result,
            });
        }
    }
    Ok(out)
}

/// Pearson chi-square independence test on a 2x2 table, no continuity
/// correction, df = 1.
pub fn chi_square_independence(table: &[[f64; 2]; 2]) -> Result<(f64, usize, f64)> {
    let row_sums = [table[0][0] + table[0][1], table[1][0] + table[1][1]];
    let col_sums = [table[0][0] + table[1][0], table[0][1] + table[1][1]];
    let total = row_sums[0] + row_sums[1];
    if row_sums.contains(&0.0) || col_sums.contains(&0.0) {
        return Err(Error::ZeroVariance(
            "chi-square table has an empty row or column".into(),
        ));
    }
    let mut chi2 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let expected = row_sums[i] * col_sums[j] / total;
            let diff = table[i][j] - expected;
            chi2 += diff * diff / expected;
        }
    }
    let p = (1.0 - chi2_cdf(chi2, 1)).clamp(0.0, 1.0);
    Ok((chi2, 1, p))
}
