use ndarray::Array2;

use crate::error::{Error, Result};

/// `N x D` sample matrix with optional class labels and row identifiers.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: Array2<f64>,
    labels: Option<Vec<i64>>,
    ids: Option<Vec<String>>,
}

impl Dataset {
    /// Wraps a matrix; rejects empty shapes and non-finite entries.
    pub fn new(values: Array2<f64>) -> Result<Self> {
        if values.nrows() == 0 {
            return Err(Error::Empty("dataset has no rows"));
        }
        if values.ncols() == 0 {
            return Err(Error::Empty("dataset has no feature columns"));
        }
        for ((row, feature), v) in values.indexed_iter() {
            if !v.is_finite() {
                return Err(Error::NonFinite { row, feature });
            }
        }
        Ok(Dataset {
            values,
            labels: None,
            ids: None,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        let mut flat = Vec::with_capacity(n * d);
        for row in rows {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: row.len(),
                });
            }
            flat.extend_from_slice(row);
        }
        let values = Array2::from_shape_vec((n, d), flat)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Self::new(values)
    }

    pub fn with_labels(mut self, labels: Vec<i64>) -> Result<Self> {
        if labels.len() != self.n_samples() {
            return Err(Error::DimensionMismatch {
                expected: self.n_samples(),
                got: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_ids(mut self, ids: Vec<String>) -> Result<Self> {
        if ids.len() != self.n_samples() {
            return Err(Error::DimensionMismatch {
                expected: self.n_samples(),
                got: ids.len(),
            });
        }
        self.ids = Some(ids);
        Ok(self)
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn labels(&self) -> Option<&[i64]> {
        self.labels.as_deref()
    }

    pub fn ids(&self) -> Option<&[String]> {
        self.ids.as_deref()
    }

    pub fn n_samples(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.values.ncols()
    }

    /// Fails on the first negative entry in row-major order.
    pub fn check_nonnegative(&self) -> Result<()> {
        match self.values.indexed_iter().find(|(_, v)| **v < 0.0) {
            Some(((row, feature), &value)) => Err(Error::NegativeEntry {
                row,
                feature,
                value,
            }),
            None => Ok(()),
        }
    }
}
