use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::meta::{build_meta_dataset, fit_meta, MetaDataset, MetaKind, MetaLearner};
use super::oof::{generate_group_oof, select_top_models, task_seed, OofColumn};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::grouping::FeatureGroupPartition;
use crate::learners::{self, LearnerKind, LearnerSpec, TrainedBaseModel};
use crate::math;
use crate::matrix::ColumnMatrix;
use crate::metrics::{auc_roc, cv_aggregate};
use crate::tabular::{
    apply_preprocess_features, stratified_kfold, FoldAssignment, PreprocessStats, RawTable,
    TabularDataset,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrikeConfig {
    pub k_folds: usize,
    pub top_k: usize,
    pub meta_kind: MetaKind,
    pub master_seed: u64,
}

impl Default for StrikeConfig {
    fn default() -> Self {
        StrikeConfig {
            k_folds: 5,
            top_k: 3,
            meta_kind: MetaKind::Logistic,
            master_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub kind: LearnerKind,
    pub fold_aucs: Vec<f64>,
    pub mean_auc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupReport {
    pub group: String,
    pub models: Vec<ModelReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaReport {
    pub kind: MetaKind,
    pub cv_auc_mean: f64,
    pub cv_auc_std: f64,
    pub fold_aucs: Vec<f64>,
    /// The meta-learner fitted on all OOF rows.
    pub coefficients: MetaLearner,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_group: Vec<GroupReport>,
    pub meta: MetaReport,
}

impl EvalReport {
    /// Best mean CV AUC of any single base model in any group.
    pub fn best_base_auc(&self) -> f64 {
        self.per_group
            .iter()
            .flat_map(|g| g.models.iter().map(|m| m.mean_auc))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedGroup {
    pub name: String,
    pub columns: Vec<usize>,
    /// Deployment models refit on all training rows, best CV AUC first.
    pub models: Vec<TrainedBaseModel>,
}

/// Selected base models per group plus the meta-learner, operating on
/// preprocessed features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrikeEnsemble {
    pub partition: FeatureGroupPartition,
    pub groups: Vec<SelectedGroup>,
    pub meta: MetaLearner,
}

impl StrikeEnsemble {
    pub fn n_features(&self) -> usize {
        self.partition.groups.iter().map(|g| g.columns.len()).sum()
    }

    /// Logit meta-features in training order.
    pub fn meta_features(&self, x: &ColumnMatrix) -> Result<ColumnMatrix> {
        if x.n_cols() != self.n_features() {
            return Err(Error::LengthMismatch {
                context: "feature columns",
                expected: self.n_features(),
                actual: x.n_cols(),
            });
        }
        let mut cols = Vec::new();
        for g in &self.groups {
            let xg = x.select_columns(&g.columns);
            for m in &g.models {
                cols.push(
                    m.predict_proba(&xg)?
                        .into_iter()
                        .map(math::clipped_logit)
                        .collect(),
                );
            }
        }
        ColumnMatrix::new(x.n_rows(), cols)
    }

    pub fn predict_proba(&self, x: &ColumnMatrix) -> Result<Vec<f64>> {
        self.meta.predict_proba(&self.meta_features(x)?)
    }
}

/// Everything produced while training, for reports and diagnostics.
#[derive(Debug, Clone)]
pub struct StrikeRun {
    pub ensemble: StrikeEnsemble,
    pub report: EvalReport,
    pub folds: FoldAssignment,
    pub oof: Vec<Vec<OofColumn>>,
    pub selected: Vec<Vec<OofColumn>>,
    pub meta_data: MetaDataset,
}

/// Refit the meta-learner on each fold's complement and score the fold.
pub fn meta_cv_aucs(meta: &MetaDataset, folds: &FoldAssignment, kind: MetaKind) -> Result<Vec<f64>> {
    (0..folds.k())
        .map(|f| {
            let m = fit_meta(&meta.select_rows(&folds.training_rows(f)), kind)?;
            let val = meta.select_rows(&folds.validation_rows(f));
            auc_roc(&m.predict_proba(&val.x)?, &val.y)
        })
        .collect()
}

pub fn train_strike<E: Executor>(
    ds: &TabularDataset,
    partition: &FeatureGroupPartition,
    pool: &[LearnerSpec],
    config: &StrikeConfig,
    exec: &E,
) -> Result<(StrikeEnsemble, EvalReport)> {
    let run = train_strike_detailed(ds, partition, pool, config, exec)?;
    Ok((run.ensemble, run.report))
}

pub fn train_strike_detailed<E: Executor>(
    ds: &TabularDataset,
    partition: &FeatureGroupPartition,
    pool: &[LearnerSpec],
    config: &StrikeConfig,
    exec: &E,
) -> Result<StrikeRun> {
    partition.validate(ds.n_features())?;
    if pool.is_empty() {
        return Err(Error::Empty("learner pool"));
    }
    for spec in pool {
        spec.validate()?;
    }
    let y = ds.y();
    let folds = stratified_kfold(y, config.k_folds, config.master_seed)?;
    let group_x: Vec<ColumnMatrix> = partition
        .groups
        .iter()
        .map(|g| ds.x().select_columns(&g.columns))
        .collect();

    let mut oof = Vec::with_capacity(partition.n_groups());
    let mut selected = Vec::with_capacity(partition.n_groups());
    for (g, group) in partition.groups.iter().enumerate() {
        let cols = generate_group_oof(
            &group_x[g],
            y,
            pool,
            &folds,
            &group.name,
            g,
            config.master_seed,
            exec,
        )?;
        selected.push(select_top_models(&cols, config.top_k)?);
        oof.push(cols);
    }
    let meta_data = build_meta_dataset(&selected, y)?;
    let meta = fit_meta(&meta_data, config.meta_kind)?;
    let fold_aucs = meta_cv_aucs(&meta_data, &folds, config.meta_kind)?;
    let (cv_auc_mean, cv_auc_std) = cv_aggregate(&fold_aucs)?;

    let refit_tasks: Vec<(usize, usize)> = selected
        .iter()
        .enumerate()
        .flat_map(|(g, cols)| cols.iter().map(move |c| (g, c.pool_index)))
        .collect();
    let k = config.k_folds;
    let refits = exec.map(refit_tasks.len(), |t| {
        let (g, s) = refit_tasks[t];
        let spec = pool[s].with_seed(task_seed(config.master_seed, g, pool[s].kind, k));
        learners::fit(&spec, &group_x[g], y)
    });
    let mut refits = refits.into_iter();
    let groups = partition
        .groups
        .iter()
        .zip(&selected)
        .map(|(group, cols)| {
            Ok(SelectedGroup {
                name: group.name.clone(),
                columns: group.columns.clone(),
                models: cols
                    .iter()
                    .map(|_| refits.next().expect("one refit per selected column"))
                    .collect::<Result<Vec<_>>>()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let report = EvalReport {
        per_group: oof
            .iter()
            .zip(&partition.groups)
            .map(|(cols, group)| GroupReport {
                group: group.name.clone(),
                models: cols
                    .iter()
                    .map(|c| ModelReport {
                        kind: c.kind,
                        fold_aucs: c.fold_aucs.clone(),
                        mean_auc: c.mean_auc,
                    })
                    .collect(),
            })
            .collect(),
        meta: MetaReport {
            kind: config.meta_kind,
            cv_auc_mean,
            cv_auc_std,
            fold_aucs,
            coefficients: meta.clone(),
        },
    };
    Ok(StrikeRun {
        ensemble: StrikeEnsemble {
            partition: partition.clone(),
            groups,
            meta,
        },
        report,
        folds,
        oof,
        selected,
        meta_data,
    })
}

/// Stacking without group isolation: one group holding every feature.
pub fn train_orthodox_stacking<E: Executor>(
    ds: &TabularDataset,
    pool: &[LearnerSpec],
    config: &StrikeConfig,
    exec: &E,
) -> Result<(StrikeEnsemble, EvalReport)> {
    let partition = FeatureGroupPartition::single(ds.n_features(), "all")?;
    train_strike(ds, &partition, pool, config, exec)
}

/// A trained ensemble together with the preprocessing it expects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrikeModel {
    pub stats: PreprocessStats,
    pub ensemble: StrikeEnsemble,
    pub master_seed: u64,
}

pub fn predict_strike(model: &StrikeModel, raw: &RawTable) -> Result<Vec<f64>> {
    let x = apply_preprocess_features(raw, &model.stats)?;
    model.ensemble.predict_proba(&x)
}
