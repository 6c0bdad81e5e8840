use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense column-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnMatrix {
    n_rows: usize,
    columns: Vec<Vec<f64>>,
}

impl ColumnMatrix {
    pub fn new(n_rows: usize, columns: Vec<Vec<f64>>) -> Result<Self> {
        for c in &columns {
            if c.len() != n_rows {
                return Err(Error::LengthMismatch {
                    context: "matrix column",
                    expected: n_rows,
                    actual: c.len(),
                });
            }
        }
        Ok(ColumnMatrix { n_rows, columns })
    }

    /// Build from row-major rows; all rows must have the same width.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let width = rows.first().map_or(0, |r| r.len());
        let mut columns = alloc::vec![Vec::with_capacity(rows.len()); width];
        for r in rows {
            if r.len() != width {
                return Err(Error::LengthMismatch {
                    context: "matrix row",
                    expected: width,
                    actual: r.len(),
                });
            }
            for (c, &v) in columns.iter_mut().zip(r) {
                c.push(v);
            }
        }
        Ok(ColumnMatrix {
            n_rows: rows.len(),
            columns,
        })
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    #[inline]
    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    #[inline]
    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.columns[col][row]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    pub fn select_rows(&self, rows: &[usize]) -> ColumnMatrix {
        ColumnMatrix {
            n_rows: rows.len(),
            columns: self
                .columns
                .iter()
                .map(|c| rows.iter().map(|&i| c[i]).collect())
                .collect(),
        }
    }

    pub fn select_columns(&self, cols: &[usize]) -> ColumnMatrix {
        ColumnMatrix {
            n_rows: self.n_rows,
            columns: cols.iter().map(|&j| self.columns[j].clone()).collect(),
        }
    }

    pub fn ensure_finite(&self) -> Result<()> {
        for (j, c) in self.columns.iter().enumerate() {
            if let Some(i) = c.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { column: j, row: i });
            }
        }
        Ok(())
    }
}
