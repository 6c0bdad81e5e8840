use alloc::vec::Vec;

use rand::Rng;

use super::tree::{grow, Criterion, GrowConfig, Samples, SortedColumns, ThresholdRule};
use super::{check_training_data, LearnerKind, LearnerSpec, ModelParams, TrainedBaseModel};
use crate::error::{Error, Result};
use crate::math;
use crate::matrix::ColumnMatrix;

/// Random forest (bootstrap + exhaustive splits) or extra trees (no
/// bootstrap, one random threshold per candidate feature), chosen by
/// `spec.kind`.
pub fn fit_forest(x: &ColumnMatrix, y: &[u8], spec: &LearnerSpec) -> Result<TrainedBaseModel> {
    check_training_data(x, y)?;
    spec.validate()?;
    let (bootstrap, thresholds) = match spec.kind {
        LearnerKind::Forest => (true, ThresholdRule::Exhaustive),
        LearnerKind::ExtraTrees => (false, ThresholdRule::Random),
        other => {
            return Err(Error::param(
                "kind",
                alloc::format!("fit_forest cannot train `{other}`"),
            ))
        }
    };
    let n = x.n_rows();
    let d = x.n_cols();
    let default_mtry = math::ceil(math::sqrt(d as f64)) as usize;
    let cfg = GrowConfig {
        criterion: Criterion::Gini,
        thresholds,
        max_depth: spec.params.max_depth,
        min_samples_split: spec.params.min_samples_split,
        max_features: spec.params.max_features.unwrap_or(default_mtry).clamp(1, d),
    };
    let sorted = SortedColumns::new(x);
    let target: Vec<f64> = y.iter().map(|&v| f64::from(v)).collect();
    let mut count = alloc::vec![1u32; n];
    let mut weight = alloc::vec![1.0; n];
    let mut trees = Vec::with_capacity(spec.params.n_estimators);
    for t in 0..spec.params.n_estimators {
        let mut rng = math::rng(math::mix(&[spec.seed, t as u64]));
        if bootstrap {
            count.iter_mut().for_each(|c| *c = 0);
            for _ in 0..n {
                count[rng.random_range(0..n)] += 1;
            }
            for (w, &c) in weight.iter_mut().zip(&count) {
                *w = f64::from(c);
            }
        }
        let samples = Samples {
            target: &target,
            weight: &weight,
            count: &count,
            hess: None,
        };
        trees.push(grow(x, &sorted, &samples, cfg, &mut rng));
    }
    Ok(TrainedBaseModel {
        spec: *spec,
        n_features: d,
        params: ModelParams::Forest { trees },
    })
}
