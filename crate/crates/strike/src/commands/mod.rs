//! Command implementations. Each returns a [`CliResult`] whose error carries
//! the process exit code.

mod ablate;
mod cmi;
mod train;

pub use ablate::{
    run_ablate_groups, run_ablate_meta, run_benchmark, AblationRow, BenchmarkRow, MetaAblationRow,
    DEFAULT_ABLATION_SEEDS,
};
pub use cmi::run_cmi;
pub use train::{run_evaluate, run_predict, run_train, TrainOutcome, TrainReport};

use std::path::{Path, PathBuf};

use serde::Serialize;
use strike_core::tabular::{
    fit_preprocess, stratified_split_indices, PreprocessStats, RawTable, TabularDataset,
};

use crate::config::RunConfig;
use crate::csv_io::CsvRecords;
use crate::error::{CliError, CliResult};
use crate::synth::{self, FixtureKind, FixtureParams};

/// Input read, split and preprocessed as every training command needs it.
pub struct Prepared {
    pub records: CsvRecords,
    pub raw: RawTable,
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
    pub train: TabularDataset,
    pub stats: PreprocessStats,
}

pub fn prepare(cfg: &RunConfig) -> CliResult<Prepared> {
    let records = CsvRecords::read(&cfg.dataset_path())?;
    let raw = records.to_raw(&cfg.label_column, true)?;
    let labels = raw.labels().expect("label column required");
    let (train_rows, test_rows) = stratified_split_indices(labels, cfg.train_frac, cfg.seed)?;
    let (train, stats) = fit_preprocess(&raw.select_rows(&train_rows))?;
    Ok(Prepared {
        records,
        raw,
        train_rows,
        test_rows,
        train,
        stats,
    })
}

pub fn output_dir(cfg: &RunConfig) -> CliResult<PathBuf> {
    let dir = cfg.output_path();
    std::fs::create_dir_all(&dir).map_err(|e| CliError::write(&dir, e))?;
    Ok(dir)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::runtime(format!("cannot serialize {}: {e}", path.display())))?;
    std::fs::write(path, text + "\n").map_err(|e| CliError::write(path, e))
}

/// Shortest round-tripping decimal, empty for `None`.
pub(crate) fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Write a synthetic fixture (`data.csv`, `groups.json`) into `dir`.
pub fn run_synth(kind: FixtureKind, params: &FixtureParams, dir: &Path) -> CliResult<()> {
    synth::generate(kind, params)?.write(dir)
}
