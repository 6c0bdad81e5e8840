//! Raw table ingestion, the preprocessing recipe, and stratified splitting.

mod preprocess;
mod raw;
mod split;

pub use preprocess::{
    apply_preprocess, apply_preprocess_features, fit_preprocess, ColumnKind, DerivedColumn,
    PreprocessStats, SourceColumn, DEFAULT_SENTINEL, MISSING_LEVEL,
};
pub use raw::{is_missing_cell, parse_label, RawColumn, RawTable};
pub use split::{stratified_kfold, stratified_split, stratified_split_indices, FoldAssignment};

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ColumnMatrix;

/// Preprocessed numeric features with binary labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabularDataset {
    feature_names: Vec<String>,
    x: ColumnMatrix,
    y: Vec<u8>,
}

impl TabularDataset {
    pub fn new(feature_names: Vec<String>, x: ColumnMatrix, y: Vec<u8>) -> Result<Self> {
        if feature_names.len() != x.n_cols() {
            return Err(Error::LengthMismatch {
                context: "feature names",
                expected: x.n_cols(),
                actual: feature_names.len(),
            });
        }
        if y.len() != x.n_rows() {
            return Err(Error::LengthMismatch {
                context: "labels",
                expected: x.n_rows(),
                actual: y.len(),
            });
        }
        if let Some(bad) = y.iter().find(|&&v| v > 1) {
            return Err(Error::InvalidLabel(alloc::format!("{bad}")));
        }
        Ok(TabularDataset { feature_names, x, y })
    }

    pub fn n_rows(&self) -> usize {
        self.x.n_rows()
    }

    pub fn n_features(&self) -> usize {
        self.x.n_cols()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn x(&self) -> &ColumnMatrix {
        &self.x
    }

    pub fn y(&self) -> &[u8] {
        &self.y
    }

    pub fn n_positive(&self) -> usize {
        self.y.iter().filter(|&&v| v == 1).count()
    }

    pub fn select_rows(&self, rows: &[usize]) -> TabularDataset {
        TabularDataset {
            feature_names: self.feature_names.clone(),
            x: self.x.select_rows(rows),
            y: rows.iter().map(|&i| self.y[i]).collect(),
        }
    }

    pub fn select_columns(&self, cols: &[usize]) -> TabularDataset {
        TabularDataset {
            feature_names: cols.iter().map(|&j| self.feature_names[j].clone()).collect(),
            x: self.x.select_columns(cols),
            y: self.y.clone(),
        }
    }
}
