//! Confusion-matrix metrics, AUC-ROC (Mann-Whitney form), balanced accuracy
//! and stratified k-fold cross-validation.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{fit, ModelSpec};
use crate::data::{DataTable, FeatureMask};
use crate::error::{Error, Result};
use crate::rng::{stream, Stage};

/// Binary confusion counts with class 1 as positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

pub fn confusion(y_true: &[u8], y_pred: &[u8]) -> Result<ConfusionCounts> {
    if y_true.is_empty() {
        return Err(Error::EmptyInput("empty label vectors".into()));
    }
    if y_true.len() != y_pred.len() {
        return Err(Error::DimensionMismatch {
            expected: y_true.len(),
            got: y_pred.len(),
        });
    }
    let mut c = ConfusionCounts {
        tp: 0,
        fp: 0,
        tn: 0,
        fn_: 0,
    };
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t, p) {
            (1, 1) => c.tp += 1,
            (0, 1) => c.fp += 1,
            (0, 0) => c.tn += 1,
            (1, 0) => c.fn_ += 1,
            _ => return Err(Error::InvalidConfig("labels must be 0 or 1".into())),
        }
    }
    Ok(c)
}

/// How precision/recall/F1 are aggregated over the two classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    /// Metrics of class 1 only.
    PositiveClass,
    /// Support-weighted average of the per-class metrics.
    Weighted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub balanced_accuracy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub auc: Option<f64>,
    pub averaging: Averaging,
    /// True when any precision/recall denominator was 0 (ratio reported as 0).
    pub degenerate_denominators: bool,
}

/// Ratio with the 0/0 -> 0 convention; flags the degenerate case.
fn ratio(num: usize, den: usize, degenerate: &mut bool) -> f64 {
    if den == 0 {
        *degenerate = true;
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f1_of(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

pub fn metrics(c: &ConfusionCounts, averaging: Averaging) -> Result<MetricsReport> {
    let total = c.total();
    if total == 0 {
        return Err(Error::EmptyInput("empty confusion counts".into()));
    }
    let mut degenerate = false;
    let accuracy = (c.tp + c.tn) as f64 / total as f64;

    // per-class views: class 1 and class 0
    let prec1 = ratio(c.tp, c.tp + c.fp, &mut degenerate);
    let rec1 = ratio(c.tp, c.tp + c.fn_, &mut degenerate);
    let prec0 = ratio(c.tn, c.tn + c.fn_, &mut degenerate);
    let rec0 = ratio(c.tn, c.tn + c.fp, &mut degenerate);
    let balanced_accuracy = 0.5 * (rec0 + rec1);

    let (precision, recall, f1) = match averaging {
        Averaging::PositiveClass => (prec1, rec1, f1_of(prec1, rec1)),
        Averaging::Weighted => {
            let support1 = (c.tp + c.fn_) as f64 / total as f64;
            let support0 = (c.tn + c.fp) as f64 / total as f64;
            // support-weighted recall telescopes to (tp + tn) / total, so it
            // is computed as the accuracy expression to keep the identity
            // exact in floating point
            (
                support0 * prec0 + support1 * prec1,
                accuracy,
                support0 * f1_of(prec0, rec0) + support1 * f1_of(prec1, rec1),
            )
        }
    };
    Ok(MetricsReport {
        accuracy,
        precision,
        recall,
        f1,
        balanced_accuracy,
        auc: None,
        averaging,
        degenerate_denominators: degenerate,
    })
}

/// AUC-ROC as the Mann-Whitney pairwise-ranking statistic (tie credit 0.5),
/// computed with a single sorted sweep over average ranks.
pub fn auc_roc(y_true: &[u8], scores: &[f64]) -> Result<f64> {
    if y_true.len() != scores.len() {
        return Err(Error::DimensionMismatch {
            expected: y_true.len(),
            got: scores.len(),
        });
    }
    let pos = y_true.iter().filter(|&&l| l == 1).count();
    let neg = y_true.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::ClassTooSmall {
            label: u8::from(pos == 0),
            count: 0,
            needed: 1,
        });
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    let mut rank_sum_pos = 0.0f64;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1 share the average rank
        let avg_rank = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            if y_true[idx] == 1 {
                rank_sum_pos += avg_rank;
            }
        }
        i = j + 1;
    }
    let p = pos as f64;
    Ok((rank_sum_pos - p * (p + 1.0) / 2.0) / (p * neg as f64))
}

/// Assignment of samples to k folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub k: usize,
    /// Fold index per sample, in table row order.
    pub fold_index: Vec<usize>,
}

impl FoldAssignment {
    pub fn fold_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_index.len())
            .filter(|&i| self.fold_index[i] == fold)
            .collect()
    }

    pub fn rest_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_index.len())
            .filter(|&i| self.fold_index[i] != fold)
            .collect()
    }
}

/// Core fold assignment: shuffle each class, then deal classes round-robin
/// with a cursor that carries across classes so overall fold sizes stay
/// within one of each other.
pub fn stratified_fold_indices(y: &[u8], k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut assignment = vec![0usize; y.len()];
    let mut cursor = 0usize;
    for label in [0u8, 1u8] {
        let mut rows: Vec<usize> = (0..y.len()).filter(|&i| y[i] == label).collect();
        rows.shuffle(rng);
        for row in rows {
            assignment[row] = cursor % k;
            cursor += 1;
        }
    }
    assignment
}

pub fn stratified_kfold(table: &DataTable, k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::InvalidConfig(format!("k must be >= 2, got {k}")));
    }
    for label in [0u8, 1u8] {
        let count = table.class_count(label);
        if count < k {
            return Err(Error::ClassTooSmall {
                label,
                count,
                needed: k,
            });
        }
    }
    let mut rng = stream(seed, Stage::Fold, 0);
    Ok(FoldAssignment {
        k,
        fold_index: stratified_fold_indices(&table.y, k, &mut rng),
    })
}

/// Per-metric mean and sample standard deviation over folds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub sd: f64,
}

fn summarize(values: &[f64]) -> MetricSummary {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    MetricSummary { mean, sd }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub folds: Vec<MetricsReport>,
    pub accuracy: MetricSummary,
    pub precision: MetricSummary,
    pub recall: MetricSummary,
    pub f1: MetricSummary,
    pub balanced_accuracy: MetricSummary,
    pub auc: MetricSummary,
}

/// Stratified k-fold cross-validation of one (model, mask) pipeline. Folds
/// are evaluated in parallel and reassembled in fold order.
pub fn cross_validate(
    spec: &ModelSpec,
    mask: &FeatureMask,
    table: &DataTable,
    k: usize,
    seed: u64,
) -> Result<CvReport> {
    if mask.count() == 0 {
        return Err(Error::EmptyMask);
    }
    let assignment = stratified_kfold(table, k, seed)?;
    let masked = table.select_columns(mask);

    let folds: Vec<MetricsReport> = (0..k)
        .into_par_iter()
        .map(|fold| -> Result<MetricsReport> {
            let train_rows = assignment.rest_rows(fold);
            let val_rows = assignment.fold_rows(fold);
            let train = masked.select_rows(&train_rows);
            let val = masked.select_rows(&val_rows);
            let model = fit(spec, &train.x, &train.y).map_err(|e| Error::Fold {
                fold,
                source: Box::new(e),
            })?;
            let pred = model.predict(&val.x)?;
            let scores = model.predict_score(&val.x)?;
            let mut report = metrics(&confusion(&val.y, &pred)?, Averaging::Weighted)?;
            report.auc = auc_roc(&val.y, &scores).ok();
            Ok(report)
        })
        .collect::<Result<Vec<_>>>()?;

    let pull = |f: &dyn Fn(&MetricsReport) -> f64| -> Vec<f64> { folds.iter().map(f).collect() };
    Ok(CvReport {
        accuracy: summarize(&pull(&|m| m.accuracy)),
        precision: summarize(&pull(&|m| m.precision)),
        recall: summarize(&pull(&|m| m.recall)),
        f1: summarize(&pull(&|m| m.f1)),
        balanced_accuracy: summarize(&pull(&|m| m.balanced_accuracy)),
        auc: summarize(&pull(&|m| m.auc.unwrap_or(0.5))),
        folds,
    })
}
