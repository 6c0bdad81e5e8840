use alloc::vec::Vec;

use super::tree::{grow, Criterion, GrowConfig, Samples, SortedColumns, ThresholdRule};
use super::{base_rate, check_training_data, LearnerSpec, ModelParams, TrainedBaseModel};
use crate::error::Result;
use crate::math;
use crate::matrix::ColumnMatrix;

const INIT_CLIP: f64 = 1e-6;

/// Mean logistic loss of raw scores, `log(1 + e^F) - y F`.
fn mean_log_loss(f: &[f64], y: &[u8]) -> f64 {
    let total: f64 = f
        .iter()
        .zip(y)
        .map(|(&fi, &yi)| {
            let softplus = if fi > 0.0 {
                fi + math::ln(1.0 + math::exp(-fi))
            } else {
                math::ln(1.0 + math::exp(fi))
            };
            softplus - f64::from(yi) * fi
        })
        .sum();
    total / y.len() as f64
}

/// Gradient boosting on logistic loss with Newton leaf values.
pub fn fit_gbdt(x: &ColumnMatrix, y: &[u8], spec: &LearnerSpec) -> Result<TrainedBaseModel> {
    fit_gbdt_traced(x, y, spec).map(|(m, _)| m)
}

/// As [`fit_gbdt`], also returning the training log loss after
/// initialisation and after every round (`n_estimators + 1` values).
pub fn fit_gbdt_traced(
    x: &ColumnMatrix,
    y: &[u8],
    spec: &LearnerSpec,
) -> Result<(TrainedBaseModel, Vec<f64>)> {
    check_training_data(x, y)?;
    spec.validate()?;
    let n = x.n_rows();
    let lr = spec.params.learning_rate;
    let p_bar = math::clip_prob(base_rate(y), INIT_CLIP);
    let init_score = math::ln(p_bar / (1.0 - p_bar));
    let cfg = GrowConfig {
        criterion: Criterion::Mse,
        thresholds: ThresholdRule::Exhaustive,
        max_depth: spec.params.max_depth,
        min_samples_split: spec.params.min_samples_split,
        max_features: spec.params.max_features.unwrap_or(x.n_cols()).min(x.n_cols()),
    };
    let sorted = SortedColumns::new(x);
    let weight = alloc::vec![1.0; n];
    let count = alloc::vec![1u32; n];
    let mut f = alloc::vec![init_score; n];
    let mut residual = alloc::vec![0.0; n];
    let mut hess = alloc::vec![0.0; n];
    let mut trees = Vec::with_capacity(spec.params.n_estimators);
    let mut losses = Vec::with_capacity(spec.params.n_estimators + 1);
    losses.push(mean_log_loss(&f, y));
    for t in 0..spec.params.n_estimators {
        for i in 0..n {
            let p = math::sigmoid(f[i]);
            residual[i] = f64::from(y[i]) - p;
            hess[i] = p * (1.0 - p);
        }
        let samples = Samples {
            target: &residual,
            weight: &weight,
            count: &count,
            hess: Some(&hess),
        };
        let mut rng = math::rng(math::mix(&[spec.seed, t as u64]));
        let tree = grow(x, &sorted, &samples, cfg, &mut rng);
        for (i, fi) in f.iter_mut().enumerate() {
            *fi += lr * tree.predict_row(x, i);
        }
        losses.push(mean_log_loss(&f, y));
        trees.push(tree);
    }
    let model = TrainedBaseModel {
        spec: *spec,
        n_features: x.n_cols(),
        params: ModelParams::Gbdt {
            init_score,
            learning_rate: lr,
            trees,
        },
    };
    Ok((model, losses))
}
