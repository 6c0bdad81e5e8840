use serde::{Deserialize, Serialize};
use strike_core::grouping::{
    correlation_partition, manual_partition, mi_partition, random_round_robin_partition,
    FeatureGroupPartition,
};
use strike_core::metrics::cv_aggregate;
use strike_core::stacking::{train_strike, train_strike_detailed, MetaKind, StrikeConfig};
use strike_core::Executor;

use super::{cell, output_dir, prepare, write_json};
use crate::config::RunConfig;
use crate::csv_io::write_table;
use crate::error::{CliError, CliResult};

pub const DEFAULT_ABLATION_SEEDS: [u64; 5] = [0, 1, 2, 3, 4];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub strategy: String,
    pub seed: Option<u64>,
    pub meta_cv_auc: f64,
    pub delta_vs_manual: Option<f64>,
}

/// Meta CV AUC for the manual (if configured), correlation, mutual-information
/// and seeded random partitions, plus the mean over random seeds. Writes
/// `ablate_groups.csv` and `ablate_groups.json`.
pub fn run_ablate_groups<E: Executor>(
    cfg: &RunConfig,
    seeds: &[u64],
    exec: &E,
) -> CliResult<Vec<AblationRow>> {
    if seeds.is_empty() {
        return Err(CliError::config("at least one random seed is required"));
    }
    let prep = prepare(cfg)?;
    let ds = &prep.train;
    let manual = match cfg.group_spec()? {
        Some(spec) => Some(manual_partition(&spec, ds.feature_names())?),
        None => None,
    };
    let g = cfg
        .grouping
        .groups
        .or(manual.as_ref().map(FeatureGroupPartition::n_groups))
        .ok_or_else(|| {
            CliError::config("config field `grouping.groups`: required without a manual config")
        })?;
    let pool = cfg.pool_specs();
    let scfg = cfg.strike_config();
    let score = |p: &FeatureGroupPartition| -> CliResult<f64> {
        Ok(train_strike(ds, p, &pool, &scfg, exec)?.1.meta.cv_auc_mean)
    };

    let mut rows = Vec::new();
    let manual_auc = match &manual {
        Some(p) => {
            let auc = score(p)?;
            rows.push(("manual".to_string(), None, auc));
            Some(auc)
        }
        None => None,
    };
    rows.push(("corr".into(), None, score(&correlation_partition(ds.x(), g)?)?));
    rows.push((
        "mi".into(),
        None,
        score(&mi_partition(ds.x(), g, cfg.grouping.bins)?)?,
    ));
    let mut random = Vec::with_capacity(seeds.len());
    for &s in seeds {
        let auc = score(&random_round_robin_partition(ds.n_features(), g, s)?)?;
        random.push(auc);
        rows.push(("random".into(), Some(s), auc));
    }
    rows.push((
        "random_mean".into(),
        None,
        random.iter().sum::<f64>() / random.len() as f64,
    ));

    let table: Vec<AblationRow> = rows
        .into_iter()
        .map(|(strategy, seed, auc)| AblationRow {
            strategy,
            seed,
            meta_cv_auc: auc,
            delta_vs_manual: manual_auc.map(|m| auc - m),
        })
        .collect();
    let dir = output_dir(cfg)?;
    let csv_rows: Vec<Vec<String>> = table
        .iter()
        .map(|r| {
            vec![
                r.strategy.clone(),
                r.seed.map(|s| s.to_string()).unwrap_or_default(),
                r.meta_cv_auc.to_string(),
                cell(r.delta_vs_manual),
            ]
        })
        .collect();
    write_table(
        &dir.join("ablate_groups.csv"),
        &["strategy", "seed", "meta_cv_auc", "delta_vs_manual"],
        &csv_rows,
    )?;
    write_json(&dir.join("ablate_groups.json"), &table)?;
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaAblationRow {
    pub meta: MetaKind,
    pub cv_auc_mean: f64,
    pub cv_auc_std: f64,
}

/// Meta CV AUC of each meta-learner kind on the configured partition.
/// Writes `ablate_meta.csv` and `ablate_meta.json`.
pub fn run_ablate_meta<E: Executor>(cfg: &RunConfig, exec: &E) -> CliResult<Vec<MetaAblationRow>> {
    let prep = prepare(cfg)?;
    let partition = cfg.partition(&prep.train)?;
    let pool = cfg.pool_specs();
    let mut table = Vec::new();
    for kind in MetaKind::ALL {
        let scfg = StrikeConfig {
            meta_kind: kind,
            ..cfg.strike_config()
        };
        let rep = train_strike(&prep.train, &partition, &pool, &scfg, exec)?.1;
        table.push(MetaAblationRow {
            meta: kind,
            cv_auc_mean: rep.meta.cv_auc_mean,
            cv_auc_std: rep.meta.cv_auc_std,
        });
    }
    let dir = output_dir(cfg)?;
    let rows: Vec<Vec<String>> = table
        .iter()
        .map(|r| {
            vec![
                r.meta.name().to_string(),
                r.cv_auc_mean.to_string(),
                r.cv_auc_std.to_string(),
            ]
        })
        .collect();
    write_table(
        &dir.join("ablate_meta.csv"),
        &["meta", "cv_auc_mean", "cv_auc_std"],
        &rows,
    )?;
    write_json(&dir.join("ablate_meta.json"), &table)?;
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub model: String,
    pub cv_auc_mean: f64,
    pub cv_auc_std: f64,
}

/// K-fold CV AUC of every pool learner on all features, of orthodox
/// stacking and of group-aware stacking. Writes `benchmark.csv` and
/// `benchmark.json`.
pub fn run_benchmark<E: Executor>(cfg: &RunConfig, exec: &E) -> CliResult<Vec<BenchmarkRow>> {
    let prep = prepare(cfg)?;
    let pool = cfg.pool_specs();
    let scfg = cfg.strike_config();
    let single = FeatureGroupPartition::single(prep.train.n_features(), "all")?;
    let orthodox = train_strike_detailed(&prep.train, &single, &pool, &scfg, exec)?;
    let mut table = Vec::new();
    for col in &orthodox.oof[0] {
        let (mean, std) = cv_aggregate(&col.fold_aucs)?;
        table.push(BenchmarkRow {
            model: col.kind.name().to_string(),
            cv_auc_mean: mean,
            cv_auc_std: std,
        });
    }
    table.push(BenchmarkRow {
        model: "orthodox_stacking".into(),
        cv_auc_mean: orthodox.report.meta.cv_auc_mean,
        cv_auc_std: orthodox.report.meta.cv_auc_std,
    });
    let partition = cfg.partition(&prep.train)?;
    let strike = train_strike(&prep.train, &partition, &pool, &scfg, exec)?.1;
    table.push(BenchmarkRow {
        model: "strike".into(),
        cv_auc_mean: strike.meta.cv_auc_mean,
        cv_auc_std: strike.meta.cv_auc_std,
    });
    let dir = output_dir(cfg)?;
    let rows: Vec<Vec<String>> = table
        .iter()
        .map(|r| vec![r.model.clone(), r.cv_auc_mean.to_string(), r.cv_auc_std.to_string()])
        .collect();
    write_table(
        &dir.join("benchmark.csv"),
        &["model", "cv_auc_mean", "cv_auc_std"],
        &rows,
    )?;
    write_json(&dir.join("benchmark.json"), &table)?;
    Ok(table)
}
