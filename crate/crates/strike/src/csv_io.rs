//! CSV ingestion and the CSV outputs written by commands.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use strike_core::tabular::RawTable;

use crate::error::{CliError, CliResult};

/// Header and string records of a CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRecords {
    pub header: Vec<String>,
    pub records: Vec<Vec<String>>,
}

impl CsvRecords {
    pub fn read(path: &Path) -> CliResult<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(path)
            .map_err(|e| CliError::read(path, e))?;
        let header = rdr
            .headers()
            .map_err(|e| CliError::read(path, e))?
            .iter()
            .map(str::to_string)
            .collect::<Vec<_>>();
        if header.is_empty() || header.iter().all(String::is_empty) {
            return Err(CliError::config(format!("{}: header row is empty", path.display())));
        }
        let mut records = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| CliError::read(path, e))?;
            records.push(rec.iter().map(str::to_string).collect());
        }
        Ok(CsvRecords { header, records })
    }

    /// Parse into a raw table. A missing label column is an error only when
    /// `require_label` is set.
    pub fn to_raw(&self, label_column: &str, require_label: bool) -> CliResult<RawTable> {
        Ok(RawTable::from_records(
            &self.header,
            &self.records,
            Some(label_column),
            require_label,
        )?)
    }

    pub fn select(&self, rows: &[usize]) -> CsvRecords {
        CsvRecords {
            header: self.header.clone(),
            records: rows.iter().map(|&i| self.records[i].clone()).collect(),
        }
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| CliError::write(path, e))?;
        w.write_record(&self.header).map_err(|e| CliError::write(path, e))?;
        for r in &self.records {
            w.write_record(r).map_err(|e| CliError::write(path, e))?;
        }
        w.flush().map_err(|e| CliError::write(path, e))
    }
}

/// Read a labelled CSV. Empty cells and `NA` are missing.
pub fn load_csv(path: &Path, label_column: &str) -> CliResult<RawTable> {
    CsvRecords::read(path)?.to_raw(label_column, true)
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_prob(p: f64) -> String {
    format!("{p:.16e}")
}

pub fn write_scores(path: &Path, probs: &[f64]) -> CliResult<()> {
    let f = File::create(path).map_err(|e| CliError::write(path, e))?;
    let mut w = BufWriter::new(f);
    let mut body = String::from("row_index,probability\n");
    for (i, p) in probs.iter().enumerate() {
        body.push_str(&format!("{i},{}\n", format_prob(*p)));
    }
    w.write_all(body.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| CliError::write(path, e))
}

/// Write rows of already formatted cells.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::write(path, e))?;
    w.write_record(header).map_err(|e| CliError::write(path, e))?;
    for r in rows {
        w.write_record(r).map_err(|e| CliError::write(path, e))?;
    }
    w.flush().map_err(|e| CliError::write(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    #[test]
    fn load_infers_types_and_missing_cells() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        fs::write(&p, "a,b,c,target\n1,x,1.5,0\n2,y,,1\n3,x,abc,1\n").unwrap();
        let raw = load_csv(&p, "target").unwrap();
        assert_eq!(raw.labels().unwrap(), &[0, 1, 1]);
        assert!(raw.column("a").unwrap().is_numeric());
        assert!(!raw.column("b").unwrap().is_numeric());
        let c = raw.column("c").unwrap();
        assert!(!c.is_numeric());
        assert_eq!(c.levels(), vec!["1.5".to_string(), "abc".to_string()]);

        fs::write(&p, "c,target\n1.5,0\nNA,1\n").unwrap();
        let raw = load_csv(&p, "target").unwrap();
        assert!(raw.column("c").unwrap().is_numeric());
        assert_eq!(raw.column("c").unwrap().missing_count(), 1);
    }

    #[test]
    fn load_errors_are_configuration_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        assert_eq!(load_csv(&p, "target").unwrap_err().exit_code(), 2);
        fs::write(&p, "a,y\n1,0\n").unwrap();
        assert_eq!(load_csv(&p, "target").unwrap_err().exit_code(), 2);
        fs::write(&p, "a,target\n1,2\n").unwrap();
        assert_eq!(load_csv(&p, "target").unwrap_err().exit_code(), 2);
    }

    #[test]
    fn probabilities_round_trip() {
        for p in [0.1, 1.0 / 3.0, 1e-6, 0.999_999_999_999_9] {
            let s = format_prob(p);
            assert_eq!(s.parse::<f64>().unwrap(), p);
        }
    }
}
