use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use strike_core::grouping::FeatureGroupPartition;
use strike_core::metrics::{MetricReport, DEFAULT_THRESHOLD};
use strike_core::stacking::{predict_strike, train_strike, EvalReport, StrikeModel};
use strike_core::Executor;

use super::{output_dir, prepare, write_json};
use crate::bundle::ModelBundle;
use crate::config::RunConfig;
use crate::csv_io::{write_scores, CsvRecords};
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub n_train: usize,
    pub n_test: usize,
    pub partition: FeatureGroupPartition,
    #[serde(flatten)]
    pub eval: EvalReport,
    /// Metrics on the held-out split; absent when it has a single class.
    pub holdout: Option<MetricReport>,
}

pub struct TrainOutcome {
    pub bundle: ModelBundle,
    pub report: TrainReport,
    pub bundle_path: PathBuf,
    pub report_path: PathBuf,
    pub test_path: PathBuf,
}

/// Split, preprocess, group, train and write `model.json`, `report.json`
/// and the held-out rows as `test.csv`.
pub fn run_train<E: Executor>(cfg: &RunConfig, exec: &E) -> CliResult<TrainOutcome> {
    let prep = prepare(cfg)?;
    let partition = cfg.partition(&prep.train)?;
    let (ensemble, eval) = train_strike(
        &prep.train,
        &partition,
        &cfg.pool_specs(),
        &cfg.strike_config(),
        exec,
    )?;
    let model = StrikeModel {
        stats: prep.stats,
        ensemble,
        master_seed: cfg.seed,
    };
    let test_raw = prep.raw.select_rows(&prep.test_rows);
    let holdout = if prep.test_rows.is_empty() {
        None
    } else {
        let probs = predict_strike(&model, &test_raw)?;
        MetricReport::compute(&probs, test_raw.labels().expect("labelled"), DEFAULT_THRESHOLD).ok()
    };
    let report = TrainReport {
        n_train: prep.train_rows.len(),
        n_test: prep.test_rows.len(),
        partition,
        eval,
        holdout,
    };
    let dir = output_dir(cfg)?;
    let bundle = ModelBundle::new(cfg.clone(), model);
    let bundle_path = dir.join("model.json");
    let report_path = dir.join("report.json");
    let test_path = dir.join("test.csv");
    bundle.save(&bundle_path)?;
    write_json(&report_path, &report)?;
    prep.records.select(&prep.test_rows).write(&test_path)?;
    Ok(TrainOutcome {
        bundle,
        report,
        bundle_path,
        report_path,
        test_path,
    })
}

fn bundle_predict(bundle: &ModelBundle, input: &Path, require_label: bool) -> CliResult<(Vec<f64>, Option<Vec<u8>>)> {
    let records = CsvRecords::read(input)?;
    let raw = records.to_raw(&bundle.config.label_column, require_label)?;
    let probs = predict_strike(&bundle.model, &raw)?;
    Ok((probs, raw.labels().map(<[u8]>::to_vec)))
}

/// Score `input` and write `row_index,probability`.
pub fn run_predict(bundle_path: &Path, input: &Path, output: &Path) -> CliResult<Vec<f64>> {
    let bundle = ModelBundle::load(bundle_path)?;
    let (probs, _) = bundle_predict(&bundle, input, false)?;
    write_scores(output, &probs)?;
    Ok(probs)
}

/// Metrics of the bundle on a labelled CSV, optionally written as JSON.
pub fn run_evaluate(bundle_path: &Path, input: &Path, output: Option<&Path>) -> CliResult<MetricReport> {
    let bundle = ModelBundle::load(bundle_path)?;
    let (probs, labels) = bundle_predict(&bundle, input, true)?;
    let labels = labels.ok_or_else(|| CliError::config("input has no label column"))?;
    let report = MetricReport::compute(&probs, &labels, DEFAULT_THRESHOLD)?;
    if let Some(p) = output {
        write_json(p, &report)?;
    }
    Ok(report)
}
