//! Dataset ingestion and the cleaning pipeline: IQR outlier detection,
//! percentile winsorization, label encoding, min-max scaling and the
//! stratified train/test split.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::DataTable;
use crate::error::{Error, Result};
use crate::rng::{stream, Stage};

/// Per-feature min/max fitted on a reference matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

/// Per-feature winsorization bounds (5th and 95th percentiles).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WinsorBounds {
    pub p_low: Vec<f64>,
    pub p_high: Vec<f64>,
}

/// Train/test split parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub seed: u64,
}

/// Whether cleaning parameters are fitted on the full table before splitting
/// or on the training portion only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitScope {
    /// Winsor bounds and scaler fitted on all rows, then split.
    Full,
    /// Split first; bounds and scaler fitted on the training rows only.
    TrainOnly,
}

/// Empirical percentile by linear interpolation of order statistics at rank
/// `q * (n - 1)`.
pub fn percentile(column: &[f64], q: f64) -> Result<f64> {
    if column.is_empty() {
        return Err(Error::EmptyInput("percentile of empty column".into()));
    }
    let mut sorted = column.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = q * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    Ok(sorted[lo] + frac * (sorted[hi] - sorted[lo]))
}

/// Tukey fences: `(Q1 - 1.5*IQR, Q3 + 1.5*IQR)`.
pub fn iqr_bounds(column: &[f64]) -> Result<(f64, f64)> {
    let q1 = percentile(column, 0.25)?;
    let q3 = percentile(column, 0.75)?;
    let iqr = q3 - q1;
    Ok((q1 - 1.5 * iqr, q3 + 1.5 * iqr))
}

/// Winsor bounds at the 5th/95th percentiles of each column of `x`.
pub fn fit_winsor_bounds(x: &[Vec<f64>], d: usize) -> Result<WinsorBounds> {
    let mut p_low = Vec::with_capacity(d);
    let mut p_high = Vec::with_capacity(d);
    for j in 0..d {
        let col: Vec<f64> = x.iter().map(|r| r[j]).collect();
        p_low.push(percentile(&col, 0.05)?);
        p_high.push(percentile(&col, 0.95)?);
    }
    Ok(WinsorBounds { p_low, p_high })
}

/// Clamps a column into `[p_low, p_high]`.
pub fn winsorize(column: &[f64], p_low: f64, p_high: f64) -> Vec<f64> {
    column.iter().map(|&v| v.clamp(p_low, p_high)).collect()
}

/// Winsorizes every column of a matrix in place.
pub fn winsorize_matrix(x: &mut [Vec<f64>], bounds: &WinsorBounds) {
    for row in x.iter_mut() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = v.clamp(bounds.p_low[j], bounds.p_high[j]);
        }
    }
}

/// Maps raw text labels to 0/1 with `positive_label` as 1.
pub fn encode_labels(raw: &[String], positive_label: &str) -> Result<Vec<u8>> {
    let mut distinct: Vec<&str> = Vec::new();
    for v in raw {
        if !distinct.contains(&v.as_str()) {
            distinct.push(v);
        }
    }
    if distinct.len() > 2 {
        return Err(Error::LabelCardinality(distinct.len()));
    }
    if !distinct.contains(&positive_label) {
        return Err(Error::PositiveLabelMissing(positive_label.to_string()));
    }
    Ok(raw
        .iter()
        .map(|v| u8::from(v == positive_label))
        .collect())
}

/// Reads a headered CSV, drops id-like columns, encodes the label column and
/// returns the remaining columns as features in file order.
pub fn load_csv(
    path: &Path,
    label_column: &str,
    positive_label: &str,
    drop_columns: &[String],
) -> Result<DataTable> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut lines = text.lines();
    let header_line = lines
        .next()
        .ok_or_else(|| Error::EmptyInput(format!("{} has no header row", path.display())))?;
    let header: Vec<String> = header_line.split(',').map(|s| s.trim().to_string()).collect();
    for (i, name) in header.iter().enumerate() {
        if header[..i].contains(name) {
            return Err(Error::DuplicateColumn(name.clone()));
        }
    }
    let label_idx = header
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| Error::MissingColumn(label_column.to_string()))?;
    for dropped in drop_columns {
        if !header.contains(dropped) {
            return Err(Error::MissingColumn(dropped.clone()));
        }
    }
    let feature_cols: Vec<usize> = (0..header.len())
        .filter(|&i| i != label_idx && !drop_columns.contains(&header[i]))
        .collect();
    let feature_names: Vec<String> = feature_cols.iter().map(|&i| header[i].clone()).collect();

    let mut x: Vec<Vec<f64>> = Vec::new();
    let mut raw_labels: Vec<String> = Vec::new();
    for (row_num, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != header.len() {
            return Err(Error::RaggedRow {
                row: row_num + 1,
                expected: header.len(),
                found: fields.len(),
            });
        }
        let mut row = Vec::with_capacity(feature_cols.len());
        for &col in &feature_cols {
            let v: f64 = fields[col].parse().map_err(|_| Error::BadCell {
                row: row_num + 1,
                column: header[col].clone(),
                value: fields[col].to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::BadCell {
                    row: row_num + 1,
                    column: header[col].clone(),
                    value: fields[col].to_string(),
                });
            }
            row.push(v);
        }
        x.push(row);
        raw_labels.push(fields[label_idx].to_string());
    }
    if x.is_empty() {
        return Err(Error::EmptyInput(format!("{} has no data rows", path.display())));
    }
    let y = encode_labels(&raw_labels, positive_label)?;
    DataTable::new(feature_names, x, y)
}

/// Fits per-feature min/max on a matrix.
pub fn fit_scaler(x: &[Vec<f64>], d: usize) -> Result<ScalerParams> {
    if x.is_empty() {
        return Err(Error::EmptyInput("cannot fit scaler on empty matrix".into()));
    }
    let mut min = vec![f64::INFINITY; d];
    let mut max = vec![f64::NEG_INFINITY; d];
    for row in x {
        for j in 0..d {
            min[j] = min[j].min(row[j]);
            max[j] = max[j].max(row[j]);
        }
    }
    Ok(ScalerParams { min, max })
}

/// `(x - min) / (max - min)` per feature, clipped to `[0, 1]`. A feature with
/// `max == min` maps to 0.
pub fn apply_scaler(x: &[Vec<f64>], scaler: &ScalerParams) -> Result<Vec<Vec<f64>>> {
    let d = scaler.min.len();
    x.iter()
        .map(|row| {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: row.len(),
                });
            }
            Ok((0..d)
                .map(|j| {
                    let range = scaler.max[j] - scaler.min[j];
                    if range == 0.0 {
                        0.0
                    } else {
                        ((row[j] - scaler.min[j]) / range).clamp(0.0, 1.0)
                    }
                })
                .collect())
        })
        .collect()
}

/// Stratified train/test split. Per-class test counts start at
/// `floor(n_c * f)` and remainders go to classes by largest fractional part
/// (ties to the lower label) until the test set holds `round(N * f)` rows.
/// Membership is decided by a seeded shuffle within each class; row order in
/// the outputs is ascending by original index.
pub fn stratified_split(table: &DataTable, spec: &SplitSpec) -> Result<(DataTable, DataTable)> {
    if !(spec.test_fraction > 0.0 && spec.test_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "test_fraction must be in (0,1), got {}",
            spec.test_fraction
        )));
    }
    let n = table.n_samples();
    let mut per_class: BTreeMap<u8, Vec<usize>> = BTreeMap::new();
    for (i, &label) in table.y.iter().enumerate() {
        per_class.entry(label).or_default().push(i);
    }
    for (&label, rows) in &per_class {
        if rows.is_empty() {
            return Err(Error::ClassTooSmall {
                label,
                count: 0,
                needed: 1,
            });
        }
    }

    let target_total = (n as f64 * spec.test_fraction).round() as usize;
    let mut counts: BTreeMap<u8, usize> = BTreeMap::new();
    let mut fracs: Vec<(f64, u8)> = Vec::new();
    let mut allocated = 0usize;
    for (&label, rows) in &per_class {
        let exact = rows.len() as f64 * spec.test_fraction;
        let base = exact.floor() as usize;
        counts.insert(label, base);
        allocated += base;
        fracs.push((exact - base as f64, label));
    }
    // Largest fractional part first; ties to the lower class label.
    fracs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut deficit = target_total.saturating_sub(allocated);
    for (_, label) in fracs {
        if deficit == 0 {
            break;
        }
        let c = counts.get_mut(&label).unwrap();
        if *c < per_class[&label].len() {
            *c += 1;
            deficit -= 1;
        }
    }

    let mut rng = stream(spec.seed, Stage::Split, 0);
    let mut test_rows: Vec<usize> = Vec::new();
    let mut train_rows: Vec<usize> = Vec::new();
    for (&label, rows) in &per_class {
        let mut shuffled = rows.clone();
        shuffled.shuffle(&mut rng);
        let take = counts[&label];
        test_rows.extend_from_slice(&shuffled[..take]);
        train_rows.extend_from_slice(&shuffled[take..]);
    }
    test_rows.sort_unstable();
    train_rows.sort_unstable();
    Ok((table.select_rows(&train_rows), table.select_rows(&test_rows)))
}

/// Output of the full cleaning pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Preprocessed {
    /// The cleaned, scaled table over all rows (used for cross-validation).
    pub full: DataTable,
    pub train: DataTable,
    pub test: DataTable,
    pub winsor: WinsorBounds,
    pub scaler: ScalerParams,
    /// Per-feature count of IQR-rule outliers in the fitting rows.
    pub outlier_counts: Vec<usize>,
}

/// Runs the cleaning pipeline on an ingested table.
///
/// With [`FitScope::Full`] the winsor bounds and scaler are fitted on every
/// row before the split; with [`FitScope::TrainOnly`] the split happens first
/// and held-out rows are transformed with training-set parameters (clipped
/// into `[0, 1]`). The `full` table is always cleaned with full-table
/// parameters so fold assignments see one consistent matrix.
pub fn preprocess(table: &DataTable, scope: FitScope, split: &SplitSpec) -> Result<Preprocessed> {
    let d = table.n_features();

    let fit_rows: Vec<Vec<f64>> = match scope {
        FitScope::Full => table.x.clone(),
        FitScope::TrainOnly => {
            let (train_raw, _) = stratified_split(table, split)?;
            train_raw.x
        }
    };
    let winsor = fit_winsor_bounds(&fit_rows, d)?;
    let mut outlier_counts = vec![0usize; d];
    for j in 0..d {
        let col: Vec<f64> = fit_rows.iter().map(|r| r[j]).collect();
        let (lo, hi) = iqr_bounds(&col)?;
        outlier_counts[j] = col.iter().filter(|&&v| v < lo || v > hi).count();
    }

    let mut fit_wins = fit_rows;
    winsorize_matrix(&mut fit_wins, &winsor);
    let scaler = fit_scaler(&fit_wins, d)?;

    let transform = |rows: &[Vec<f64>]| -> Result<Vec<Vec<f64>>> {
        let mut w = rows.to_vec();
        winsorize_matrix(&mut w, &winsor);
        apply_scaler(&w, &scaler)
    };

    // The full table is cleaned with full-table parameters regardless of
    // scope, so CV folds all share the same feature space.
    let (full_winsor, full_scaler) = match scope {
        FitScope::Full => (winsor.clone(), scaler.clone()),
        FitScope::TrainOnly => {
            let b = fit_winsor_bounds(&table.x, d)?;
            let mut w = table.x.clone();
            winsorize_matrix(&mut w, &b);
            let s = fit_scaler(&w, d)?;
            (b, s)
        }
    };
    let mut full_rows = table.x.clone();
    winsorize_matrix(&mut full_rows, &full_winsor);
    let full = DataTable::new(
        table.feature_names.clone(),
        apply_scaler(&full_rows, &full_scaler)?,
        table.y.clone(),
    )?;

    let (train, test) = match scope {
        FitScope::Full => stratified_split(&full, split)?,
        FitScope::TrainOnly => {
            let (train_raw, test_raw) = stratified_split(table, split)?;
            (
                DataTable::new(
                    table.feature_names.clone(),
                    transform(&train_raw.x)?,
                    train_raw.y,
                )?,
                DataTable::new(
                    table.feature_names.clone(),
                    transform(&test_raw.x)?,
                    test_raw.y,
                )?,
            )
        }
    };

    Ok(Preprocessed {
        full,
        train,
        test,
        winsor,
        scaler,
        outlier_counts,
    })
}
