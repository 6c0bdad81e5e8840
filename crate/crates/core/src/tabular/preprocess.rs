//! One-hot encoding, sentinel imputation and min-max scaling, in that order.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::raw::RawTable;
use super::TabularDataset;
use crate::error::{Error, Result};
use crate::matrix::ColumnMatrix;

pub const DEFAULT_SENTINEL: f64 = -999.0;
pub const MISSING_LEVEL: &str = "__missing__";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ColumnKind {
    Numeric,
    Categorical {
        /// Levels in first-seen order.
        levels: Vec<String>,
        /// Whether a `__missing__` indicator column was emitted.
        has_missing: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceColumn {
    pub name: String,
    #[serde(flatten)]
    pub kind: ColumnKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedColumn {
    pub name: String,
    pub min: f64,
    pub max: f64,
}

/// Everything needed to transform unseen rows exactly like the training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessStats {
    pub sources: Vec<SourceColumn>,
    pub derived: Vec<DerivedColumn>,
    pub sentinel: f64,
}

impl PreprocessStats {
    pub fn feature_names(&self) -> Vec<String> {
        self.derived.iter().map(|d| d.name.clone()).collect()
    }
}

#[inline]
fn scale(v: f64, min: f64, max: f64) -> f64 {
    if max > min {
        ((v - min) / (max - min)).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// Encode and impute one source column against a fixed schema, returning
/// unscaled derived columns.
fn encode_column(
    raw: &RawTable,
    source: &SourceColumn,
    sentinel: f64,
) -> Result<Vec<Vec<f64>>> {
    let col = raw
        .column(&source.name)
        .ok_or_else(|| Error::Schema(format!("column `{}` is missing", source.name)))?;
    let n = raw.n_rows();
    match &source.kind {
        ColumnKind::Numeric => {
            let values = match col.numeric_values() {
                Some(v) => v.iter().map(|c| c.unwrap_or(sentinel)).collect(),
                None => col
                    .cells()
                    .iter()
                    .map(|c| match c {
                        None => Ok(sentinel),
                        Some(s) => s.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(
                            || {
                                Error::Schema(format!(
                                    "column `{}` is numeric but has value {s:?}",
                                    source.name
                                ))
                            },
                        ),
                    })
                    .collect::<Result<Vec<f64>>>()?,
            };
            Ok(alloc::vec![values])
        }
        ColumnKind::Categorical {
            levels,
            has_missing,
        } => {
            let width = levels.len() + usize::from(*has_missing);
            let mut out = alloc::vec![alloc::vec![0.0; n]; width];
            for (i, cell) in col.cells().iter().enumerate() {
                match cell {
                    Some(s) => {
                        if let Some(k) = levels.iter().position(|l| l == s) {
                            out[k][i] = 1.0;
                        }
                    }
                    None if *has_missing => out[levels.len()][i] = 1.0,
                    None => {}
                }
            }
            Ok(out)
        }
    }
}

fn encode_all(raw: &RawTable, stats: &PreprocessStats) -> Result<Vec<Vec<f64>>> {
    let mut cols = Vec::with_capacity(stats.derived.len());
    for s in &stats.sources {
        cols.extend(encode_column(raw, s, stats.sentinel)?);
    }
    Ok(cols)
}

/// Fit the encoding and scaling on `raw` and return the transformed dataset.
pub fn fit_preprocess(raw: &RawTable) -> Result<(TabularDataset, PreprocessStats)> {
    if raw.n_rows() == 0 {
        return Err(Error::Empty("rows"));
    }
    if raw.columns().is_empty() {
        return Err(Error::Empty("feature columns"));
    }
    let labels = raw
        .labels()
        .ok_or_else(|| Error::Schema("training table has no label column".into()))?;
    let mut sources = Vec::with_capacity(raw.columns().len());
    let mut names = Vec::new();
    for c in raw.columns() {
        if c.is_numeric() {
            names.push(String::from(c.name()));
            sources.push(SourceColumn {
                name: c.name().into(),
                kind: ColumnKind::Numeric,
            });
        } else {
            let levels = c.levels();
            let has_missing = c.missing_count() > 0;
            names.extend(levels.iter().map(|l| format!("{}={l}", c.name())));
            if has_missing {
                names.push(format!("{}={MISSING_LEVEL}", c.name()));
            }
            sources.push(SourceColumn {
                name: c.name().into(),
                kind: ColumnKind::Categorical {
                    levels,
                    has_missing,
                },
            });
        }
    }
    let mut stats = PreprocessStats {
        sources,
        derived: Vec::new(),
        sentinel: DEFAULT_SENTINEL,
    };
    let encoded = encode_all(raw, &stats)?;
    stats.derived = names
        .into_iter()
        .zip(&encoded)
        .map(|(name, col)| {
            let (min, max) = col
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                    (lo.min(v), hi.max(v))
                });
            DerivedColumn { name, min, max }
        })
        .collect();
    let x = scale_columns(encoded, &stats, raw.n_rows())?;
    let ds = TabularDataset::new(stats.feature_names(), x, labels.to_vec())?;
    Ok((ds, stats))
}

fn scale_columns(
    mut encoded: Vec<Vec<f64>>,
    stats: &PreprocessStats,
    n_rows: usize,
) -> Result<ColumnMatrix> {
    for (col, d) in encoded.iter_mut().zip(&stats.derived) {
        for v in col.iter_mut() {
            *v = scale(*v, d.min, d.max);
        }
    }
    ColumnMatrix::new(n_rows, encoded)
}

/// Transform feature columns of `raw` with fitted statistics. Labels, if any,
/// are ignored.
pub fn apply_preprocess_features(raw: &RawTable, stats: &PreprocessStats) -> Result<ColumnMatrix> {
    let encoded = encode_all(raw, stats)?;
    scale_columns(encoded, stats, raw.n_rows())
}

/// Transform a labelled table with fitted statistics.
pub fn apply_preprocess(raw: &RawTable, stats: &PreprocessStats) -> Result<TabularDataset> {
    let labels = raw
        .labels()
        .ok_or_else(|| Error::Schema("table has no label column".into()))?;
    let x = apply_preprocess_features(raw, stats)?;
    TabularDataset::new(stats.feature_names(), x, labels.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::RawColumn;
    use alloc::string::ToString;
    use alloc::vec;
    use proptest::prelude::*;

    fn table(cols: Vec<RawColumn>, labels: Vec<u8>) -> RawTable {
        let n = labels.len();
        RawTable::new(cols, Some("y".into()), Some(labels), n).unwrap()
    }

    #[test]
    fn sentinel_is_part_of_the_scaling_range() {
        let t = table(vec![RawColumn::from_cells("a", &["", "0", "1"])], vec![0, 1, 0]);
        let (ds, stats) = fit_preprocess(&t).unwrap();
        assert_eq!(ds.x().column(0), &[0.0, 0.999, 1.0]);
        assert_eq!(stats.derived[0].min, -999.0);
    }

    #[test]
    fn constant_column_maps_to_zero() {
        let t = table(vec![RawColumn::from_cells("a", &["5", "5", "5"])], vec![0, 1, 0]);
        let (ds, _) = fit_preprocess(&t).unwrap();
        assert_eq!(ds.x().column(0), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn categorical_one_hot_with_missing_level() {
        let t = table(vec![RawColumn::from_cells("c", &["A", "", "B"])], vec![0, 1, 0]);
        let (ds, _) = fit_preprocess(&t).unwrap();
        assert_eq!(ds.feature_names(), &["c=A", "c=B", "c=__missing__"]);
        assert_eq!(ds.x().row(0), vec![1.0, 0.0, 0.0]);
        assert_eq!(ds.x().row(1), vec![0.0, 0.0, 1.0]);
        assert_eq!(ds.x().row(2), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn apply_uses_training_range_and_clamps() {
        let train = table(vec![RawColumn::from_cells("a", &["0", "10"])], vec![0, 1]);
        let (_, stats) = fit_preprocess(&train).unwrap();
        let test = table(vec![RawColumn::from_cells("a", &["5", "20"])], vec![0, 1]);
        let ds = apply_preprocess(&test, &stats).unwrap();
        assert_eq!(ds.x().column(0), &[0.5, 1.0]);
    }

    #[test]
    fn unseen_level_is_all_zero() {
        let train = table(vec![RawColumn::from_cells("c", &["A", "B"])], vec![0, 1]);
        let (_, stats) = fit_preprocess(&train).unwrap();
        let test = table(vec![RawColumn::from_cells("c", &["Z"])], vec![0]);
        let ds = apply_preprocess(&test, &stats).unwrap();
        assert_eq!(ds.x().row(0), vec![0.0, 0.0]);
    }

    #[test]
    fn schema_mismatch_is_reported() {
        let train = table(vec![RawColumn::from_cells("a", &["0", "10"])], vec![0, 1]);
        let (_, stats) = fit_preprocess(&train).unwrap();
        let other = table(vec![RawColumn::from_cells("b", &["1"])], vec![0]);
        assert!(matches!(apply_preprocess(&other, &stats), Err(Error::Schema(_))));
        let text = table(vec![RawColumn::from_cells("a", &["x"])], vec![0]);
        assert!(matches!(apply_preprocess(&text, &stats), Err(Error::Schema(_))));
    }

    #[test]
    fn empty_inputs_rejected() {
        let t = RawTable::new(vec![], Some("y".into()), Some(vec![0]), 1).unwrap();
        assert_eq!(fit_preprocess(&t).unwrap_err(), Error::Empty("feature columns"));
        let t = table(vec![RawColumn::from_cells::<&str>("a", &[])], vec![]);
        assert_eq!(fit_preprocess(&t).unwrap_err(), Error::Empty("rows"));
    }

    proptest! {
        #[test]
        fn fit_then_apply_is_bit_identical(
            rows in proptest::collection::vec(
                (proptest::option::of(-50.0f64..50.0), 0u8..4, 0u8..2), 1..40)
        ) {
            let a: Vec<String> = rows.iter()
                .map(|r| r.0.map(|v| alloc::format!("{v}")).unwrap_or_default())
                .collect();
            let c: Vec<String> = rows.iter()
                .map(|r| if r.1 == 3 { String::new() } else { ((b'A' + r.1) as char).to_string() })
                .collect();
            let y: Vec<u8> = rows.iter().map(|r| r.2).collect();
            let t = table(
                vec![RawColumn::from_cells("a", &a), RawColumn::from_cells("c", &c)],
                y,
            );
            let (ds, stats) = fit_preprocess(&t).unwrap();
            let again = apply_preprocess(&t, &stats).unwrap();
            prop_assert_eq!(&ds, &again);
            for col in ds.x().columns() {
                let lo = col.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(lo == 0.0);
                prop_assert!(hi == 1.0 || col.iter().all(|&v| v == 0.0));
            }
        }
    }
}
