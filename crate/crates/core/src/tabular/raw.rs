use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A cell is missing iff it is empty or the literal `NA`.
pub fn is_missing_cell(cell: &str) -> bool {
    let c = cell.trim();
    c.is_empty() || c == "NA"
}

pub fn parse_label(cell: &str) -> Result<u8> {
    match cell.trim() {
        "0" => Ok(0),
        "1" => Ok(1),
        other => Err(Error::InvalidLabel(other.to_string())),
    }
}

fn parse_real(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// One raw column: the original cell text plus, when every non-missing cell
/// parses as a finite real, the parsed values.
#[derive(Debug, Clone, PartialEq)]
pub struct RawColumn {
    name: String,
    cells: Vec<Option<String>>,
    numeric: Option<Vec<Option<f64>>>,
}

impl RawColumn {
    pub fn from_cells<S: AsRef<str>>(name: impl Into<String>, cells: &[S]) -> Self {
        let cells: Vec<Option<String>> = cells
            .iter()
            .map(|c| {
                let c = c.as_ref();
                (!is_missing_cell(c)).then(|| c.trim().to_string())
            })
            .collect();
        let numeric = cells
            .iter()
            .map(|c| match c {
                None => Some(None),
                Some(s) => parse_real(s).map(Some),
            })
            .collect::<Option<Vec<_>>>();
        RawColumn {
            name: name.into(),
            cells,
            numeric,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn is_numeric(&self) -> bool {
        self.numeric.is_some()
    }

    pub fn cells(&self) -> &[Option<String>] {
        &self.cells
    }

    pub fn numeric_values(&self) -> Option<&[Option<f64>]> {
        self.numeric.as_deref()
    }

    pub fn missing_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_none()).count()
    }

    /// Distinct non-missing values in first-seen order.
    pub fn levels(&self) -> Vec<String> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for c in self.cells.iter().flatten() {
            if seen.insert(c.as_str()) {
                out.push(c.clone());
            }
        }
        out
    }

    fn select_rows(&self, rows: &[usize]) -> RawColumn {
        RawColumn {
            name: self.name.clone(),
            cells: rows.iter().map(|&i| self.cells[i].clone()).collect(),
            numeric: self
                .numeric
                .as_ref()
                .map(|v| rows.iter().map(|&i| v[i]).collect()),
        }
    }
}

/// Feature columns as read from a file, before any preprocessing.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    columns: Vec<RawColumn>,
    label_column: Option<String>,
    labels: Option<Vec<u8>>,
    n_rows: usize,
}

impl RawTable {
    pub fn new(
        columns: Vec<RawColumn>,
        label_column: Option<String>,
        labels: Option<Vec<u8>>,
        n_rows: usize,
    ) -> Result<Self> {
        for c in &columns {
            if c.len() != n_rows {
                return Err(Error::LengthMismatch {
                    context: "raw column",
                    expected: n_rows,
                    actual: c.len(),
                });
            }
        }
        if let Some(l) = &labels {
            if l.len() != n_rows {
                return Err(Error::LengthMismatch {
                    context: "raw labels",
                    expected: n_rows,
                    actual: l.len(),
                });
            }
        }
        Ok(RawTable {
            columns,
            label_column,
            labels,
            n_rows,
        })
    }

    /// Build from a header and string records.
    ///
    /// With `label_column = Some(name)` the column must be present and every
    /// cell must be `0` or `1`. With `require_label = false` an absent label
    /// column is tolerated (prediction input); if present it is still split
    /// off and parsed.
    pub fn from_records<S: AsRef<str>>(
        header: &[S],
        records: &[Vec<String>],
        label_column: Option<&str>,
        require_label: bool,
    ) -> Result<Self> {
        let width = header.len();
        for (i, r) in records.iter().enumerate() {
            if r.len() != width {
                return Err(Error::Schema(format!(
                    "record {} has {} fields, header has {width}",
                    i + 1,
                    r.len()
                )));
            }
        }
        let label_idx = match label_column {
            Some(name) => {
                let idx = header.iter().position(|h| h.as_ref() == name);
                if idx.is_none() && require_label {
                    return Err(Error::Schema(format!(
                        "label column `{name}` not found in header"
                    )));
                }
                idx
            }
            None => None,
        };
        let labels = match label_idx {
            Some(li) => Some(
                records
                    .iter()
                    .map(|r| parse_label(&r[li]))
                    .collect::<Result<Vec<u8>>>()?,
            ),
            None => None,
        };
        let mut columns = Vec::with_capacity(width);
        let mut cells: Vec<&str> = Vec::with_capacity(records.len());
        for (j, h) in header.iter().enumerate() {
            if Some(j) == label_idx {
                continue;
            }
            cells.clear();
            cells.extend(records.iter().map(|r| r[j].as_str()));
            columns.push(RawColumn::from_cells(h.as_ref(), &cells));
        }
        RawTable::new(
            columns,
            label_idx.and(label_column.map(|s| s.to_string())),
            labels,
            records.len(),
        )
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn columns(&self) -> &[RawColumn] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Option<&RawColumn> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn labels(&self) -> Option<&[u8]> {
        self.labels.as_deref()
    }

    pub fn label_column(&self) -> Option<&str> {
        self.label_column.as_deref()
    }

    pub fn select_rows(&self, rows: &[usize]) -> RawTable {
        RawTable {
            columns: self.columns.iter().map(|c| c.select_rows(rows)).collect(),
            label_column: self.label_column.clone(),
            labels: self
                .labels
                .as_ref()
                .map(|l| rows.iter().map(|&i| l[i]).collect()),
            n_rows: rows.len(),
        }
    }
}
