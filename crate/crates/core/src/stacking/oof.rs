use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::learners::{self, LearnerKind, LearnerSpec};
use crate::math;
use crate::matrix::ColumnMatrix;
use crate::metrics::auc_roc;
use crate::tabular::FoldAssignment;

/// Out-of-fold probabilities of one learner on one group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OofColumn {
    pub group: String,
    pub kind: LearnerKind,
    /// Position of the producing spec in the pool.
    pub pool_index: usize,
    pub probabilities: Vec<f64>,
    pub fold_aucs: Vec<f64>,
    pub mean_auc: f64,
}

/// Rows seen by the model that produced the OOF predictions of one fold.
#[derive(Debug, Clone, PartialEq)]
pub struct OofTrace {
    pub pool_index: usize,
    pub fold: usize,
    pub training_rows: Vec<usize>,
    pub predicted_rows: Vec<usize>,
}

/// Seed of the model trained for `(group, kind, fold)`. Deployment refits
/// use `fold = K`.
pub fn task_seed(master: u64, group: usize, kind: LearnerKind, fold: usize) -> u64 {
    math::mix(&[master, group as u64, kind.seed_tag(), fold as u64])
}

#[allow(clippy::too_many_arguments)]
pub fn generate_group_oof<E: Executor>(
    x: &ColumnMatrix,
    y: &[u8],
    pool: &[LearnerSpec],
    folds: &FoldAssignment,
    group_name: &str,
    group_index: usize,
    master_seed: u64,
    exec: &E,
) -> Result<Vec<OofColumn>> {
    run(x, y, pool, folds, group_name, group_index, master_seed, exec, false).map(|(c, _)| c)
}

/// As [`generate_group_oof`], also returning the training rows of every
/// fitted model.
#[allow(clippy::too_many_arguments)]
pub fn generate_group_oof_traced<E: Executor>(
    x: &ColumnMatrix,
    y: &[u8],
    pool: &[LearnerSpec],
    folds: &FoldAssignment,
    group_name: &str,
    group_index: usize,
    master_seed: u64,
    exec: &E,
) -> Result<(Vec<OofColumn>, Vec<OofTrace>)> {
    run(x, y, pool, folds, group_name, group_index, master_seed, exec, true)
}

#[allow(clippy::too_many_arguments)]
fn run<E: Executor>(
    x: &ColumnMatrix,
    y: &[u8],
    pool: &[LearnerSpec],
    folds: &FoldAssignment,
    group_name: &str,
    group_index: usize,
    master_seed: u64,
    exec: &E,
    record: bool,
) -> Result<(Vec<OofColumn>, Vec<OofTrace>)> {
    if pool.is_empty() {
        return Err(Error::Empty("learner pool"));
    }
    if folds.n_rows() != y.len() || x.n_rows() != y.len() {
        return Err(Error::LengthMismatch {
            context: "fold assignment",
            expected: y.len(),
            actual: folds.n_rows(),
        });
    }
    let k = folds.k();
    let val_rows: Vec<Vec<usize>> = (0..k).map(|f| folds.validation_rows(f)).collect();
    for (f, rows) in val_rows.iter().enumerate() {
        let pos = rows.iter().filter(|&&i| y[i] == 1).count();
        if pos == 0 || pos == rows.len() {
            return Err(Error::SingleClass(format!(
                "fold {f} of group {group_name}"
            )));
        }
    }
    let train_rows: Vec<Vec<usize>> = (0..k).map(|f| folds.training_rows(f)).collect();

    let results = exec.map(pool.len() * k, |t| {
        let (s, f) = (t / k, t % k);
        let spec = pool[s].with_seed(task_seed(master_seed, group_index, pool[s].kind, f));
        // The learner only ever receives a copy of its training rows.
        let xt = x.select_rows(&train_rows[f]);
        let yt: Vec<u8> = train_rows[f].iter().map(|&i| y[i]).collect();
        let model = learners::fit(&spec, &xt, &yt)?;
        model.predict_proba(&x.select_rows(&val_rows[f]))
    });

    let mut columns = Vec::with_capacity(pool.len());
    let mut traces = Vec::new();
    let mut results = results.into_iter();
    for (s, spec) in pool.iter().enumerate() {
        let mut probs = alloc::vec![f64::NAN; y.len()];
        let mut fold_aucs = Vec::with_capacity(k);
        for f in 0..k {
            let pred = results.next().expect("one result per task")?;
            let yv: Vec<u8> = val_rows[f].iter().map(|&i| y[i]).collect();
            fold_aucs.push(auc_roc(&pred, &yv)?);
            for (&i, &p) in val_rows[f].iter().zip(&pred) {
                probs[i] = math::clip_prob(p, math::PROB_CLIP);
            }
            if record {
                traces.push(OofTrace {
                    pool_index: s,
                    fold: f,
                    training_rows: train_rows[f].clone(),
                    predicted_rows: val_rows[f].clone(),
                });
            }
        }
        let mean_auc = math::mean(&fold_aucs);
        columns.push(OofColumn {
            group: group_name.into(),
            kind: spec.kind,
            pool_index: s,
            probabilities: probs,
            fold_aucs,
            mean_auc,
        });
    }
    Ok((columns, traces))
}

/// The `k` columns with the highest mean CV AUC, best first. Ties go to the
/// lexicographically smaller learner name, then the earlier pool entry.
pub fn select_top_models(columns: &[OofColumn], k: usize) -> Result<Vec<OofColumn>> {
    if columns.is_empty() {
        return Err(Error::Empty("OOF columns"));
    }
    if k == 0 {
        return Err(Error::param("top_k", "must be at least 1"));
    }
    let mut order: Vec<usize> = (0..columns.len()).collect();
    order.sort_by(|&a, &b| {
        let (ca, cb) = (&columns[a], &columns[b]);
        cb.mean_auc
            .total_cmp(&ca.mean_auc)
            .then_with(|| ca.kind.name().cmp(cb.kind.name()))
            .then(ca.pool_index.cmp(&cb.pool_index))
    });
    Ok(order
        .into_iter()
        .take(k)
        .map(|i| columns[i].clone())
        .collect())
}
