use strike_core::cmi::{cmi_matrix, CmiMatrix, CmiSettings, SummaryMethod};
use strike_core::Executor;

use super::{output_dir, prepare, write_json};
use crate::config::RunConfig;
use crate::csv_io::write_table;
use crate::error::CliResult;

/// CMI between the configured groups on the training split. Writes
/// `cmi.csv` (group names as row and column headers) and `cmi.json`.
pub fn run_cmi<E: Executor>(
    cfg: &RunConfig,
    method: SummaryMethod,
    bins: usize,
    exec: &E,
) -> CliResult<CmiMatrix> {
    let prep = prepare(cfg)?;
    let partition = cfg.partition(&prep.train)?;
    let settings = CmiSettings {
        method,
        bins,
        k_folds: cfg.k_folds,
        pool: cfg.pool_specs(),
        seed: cfg.seed,
    };
    let m = cmi_matrix(&prep.train, &partition.groups, &settings, exec)?;
    let dir = output_dir(cfg)?;
    let mut header = vec!["group"];
    header.extend(m.group_names.iter().map(String::as_str));
    let rows: Vec<Vec<String>> = m
        .group_names
        .iter()
        .zip(&m.values)
        .map(|(name, vals)| {
            let mut r = vec![name.clone()];
            r.extend(vals.iter().map(f64::to_string));
            r
        })
        .collect();
    write_table(&dir.join("cmi.csv"), &header, &rows)?;
    write_json(&dir.join("cmi.json"), &m)?;
    Ok(m)
}
