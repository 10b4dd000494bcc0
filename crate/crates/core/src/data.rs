//! Column-named feature matrices and boolean feature masks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A feature matrix with named columns and a binary label vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataTable {
    pub feature_names: Vec<String>,
    /// Row-major N x d matrix.
    pub x: Vec<Vec<f64>>,
    /// Labels in {0, 1}.
    pub y: Vec<u8>,
}

impl DataTable {
    /// Builds a table, enforcing finite values, 0/1 labels, consistent row
    /// widths and unique column names.
    pub fn new(feature_names: Vec<String>, x: Vec<Vec<f64>>, y: Vec<u8>) -> Result<Self> {
        let d = feature_names.len();
        for (i, name) in feature_names.iter().enumerate() {
            if feature_names[..i].contains(name) {
                return Err(Error::DuplicateColumn(name.clone()));
            }
        }
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: y.len(),
                got: x.len(),
            });
        }
        for (row_idx, row) in x.iter().enumerate() {
            if row.len() != d {
                return Err(Error::RaggedRow {
                    row: row_idx + 1,
                    expected: d,
                    found: row.len(),
                });
            }
            for (col, v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::BadCell {
                        row: row_idx + 1,
                        column: feature_names[col].clone(),
                        value: v.to_string(),
                    });
                }
            }
        }
        if y.iter().any(|&l| l > 1) {
            return Err(Error::InvalidConfig("labels must be 0 or 1".into()));
        }
        Ok(Self {
            feature_names,
            x,
            y,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.y.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Count of samples labelled `label`.
    pub fn class_count(&self, label: u8) -> usize {
        self.y.iter().filter(|&&l| l == label).count()
    }

    /// New table containing the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self {
            feature_names: self.feature_names.clone(),
            x: rows.iter().map(|&r| self.x[r].clone()).collect(),
            y: rows.iter().map(|&r| self.y[r]).collect(),
        }
    }

    /// New table restricted to the masked columns.
    pub fn select_columns(&self, mask: &FeatureMask) -> Self {
        let idx = mask.indices();
        Self {
            feature_names: idx.iter().map(|&j| self.feature_names[j].clone()).collect(),
            x: self
                .x
                .iter()
                .map(|row| idx.iter().map(|&j| row[j]).collect())
                .collect(),
            y: self.y.clone(),
        }
    }
}

/// Boolean selection over feature indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureMask(pub Vec<bool>);

impl FeatureMask {
    pub fn from_indices(d: usize, indices: &[usize]) -> Self {
        let mut m = vec![false; d];
        for &i in indices {
            m[i] = true;
        }
        FeatureMask(m)
    }

    pub fn all(d: usize) -> Self {
        FeatureMask(vec![true; d])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of selected features.
    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    /// Selected indices in ascending order.
    pub fn indices(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0.get(index).copied().unwrap_or(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicate_names() {
        let err = DataTable::new(
            vec!["a".into(), "a".into()],
            vec![vec![1.0, 2.0]],
            vec![0],
        )
        .unwrap_err();
        assert!(matches!(err, Error::DuplicateColumn(_)));
    }

    #[test]
    fn rejects_non_finite() {
        let err = DataTable::new(
            vec!["a".into()],
            vec![vec![f64::NAN]],
            vec![0],
        )
        .unwrap_err();
        assert!(matches!(err, Error::BadCell { .. }));
    }

    #[test]
    fn mask_roundtrip() {
        let m = FeatureMask::from_indices(5, &[0, 3]);
        assert_eq!(m.count(), 2);
        assert_eq!(m.indices(), vec![0, 3]);
        assert!(m.contains(3) && !m.contains(4));
    }

    #[test]
    fn column_selection_preserves_order() {
        let t = DataTable::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]],
            vec![0, 1],
        )
        .unwrap();
        let sub = t.select_columns(&FeatureMask::from_indices(3, &[0, 2]));
        assert_eq!(sub.feature_names, vec!["a", "c"]);
        assert_eq!(sub.x, vec![vec![1.0, 3.0], vec![4.0, 6.0]]);
    }
}
