use alloc::vec::Vec;

use super::tree::{grow, Criterion, GrowConfig, Samples, SortedColumns, ThresholdRule, Tree};
use super::{base_rate, check_training_data, LearnerSpec, ModelParams, TrainedBaseModel};
use crate::error::Result;
use crate::math;
use crate::matrix::ColumnMatrix;

const ERR_FLOOR: f64 = 1e-12;

#[inline]
fn stump_class(t: &Tree, x: &ColumnMatrix, i: usize) -> f64 {
    t.predict_row(x, i)
}

/// Raw score `sum_t alpha_t * (2 h_t(x) - 1)`.
pub(crate) fn score(stumps: &[Tree], alphas: &[f64], x: &ColumnMatrix, i: usize) -> f64 {
    stumps
        .iter()
        .zip(alphas)
        .map(|(t, a)| a * (2.0 * stump_class(t, x, i) - 1.0))
        .sum()
}

/// Discrete AdaBoost (SAMME, two classes) over weighted-Gini stumps.
/// Stump leaves store the predicted class (0 or 1).
pub fn fit_adaboost(x: &ColumnMatrix, y: &[u8], spec: &LearnerSpec) -> Result<TrainedBaseModel> {
    check_training_data(x, y)?;
    spec.validate()?;
    let n = x.n_rows();
    let cfg = GrowConfig {
        criterion: Criterion::Gini,
        thresholds: ThresholdRule::Exhaustive,
        max_depth: spec.params.max_depth,
        min_samples_split: spec.params.min_samples_split,
        max_features: x.n_cols(),
    };
    let sorted = SortedColumns::new(x);
    let target: Vec<f64> = y.iter().map(|&v| f64::from(v)).collect();
    let count = alloc::vec![1u32; n];
    let mut weight = alloc::vec![1.0 / n as f64; n];
    let mut stumps = Vec::new();
    let mut alphas = Vec::new();
    let mut miss = alloc::vec![false; n];
    for t in 0..spec.params.n_estimators {
        let samples = Samples {
            target: &target,
            weight: &weight,
            count: &count,
            hess: None,
        };
        let mut rng = math::rng(math::mix(&[spec.seed, t as u64]));
        let mut stump = grow(x, &sorted, &samples, cfg, &mut rng);
        for v in stump.leaf_value.iter_mut() {
            *v = if *v > 0.5 { 1.0 } else { 0.0 };
        }
        let total: f64 = weight.iter().sum();
        let mut wrong = 0.0;
        for i in 0..n {
            miss[i] = stump_class(&stump, x, i) != target[i];
            if miss[i] {
                wrong += weight[i];
            }
        }
        let err = wrong / total;
        if err >= 0.5 {
            break;
        }
        let alpha = math::ln((1.0 - err) / err.max(ERR_FLOOR));
        stumps.push(stump);
        alphas.push(alpha);
        if err <= ERR_FLOOR {
            break;
        }
        let boost = math::exp(alpha);
        let mut sum = 0.0;
        for i in 0..n {
            if miss[i] {
                weight[i] *= boost;
            }
            sum += weight[i];
        }
        weight.iter_mut().for_each(|w| *w /= sum);
    }
    Ok(TrainedBaseModel {
        spec: *spec,
        n_features: x.n_cols(),
        params: ModelParams::AdaBoost {
            stumps,
            alphas,
            base_rate: base_rate(y),
        },
    })
}

/// Mean exponential loss `exp(-y' s(x) / 2)` with `y' = 2y - 1`, after each
/// boosting round of a fitted model (index 0 is the empty ensemble).
pub fn exponential_loss_trace(model: &TrainedBaseModel, x: &ColumnMatrix, y: &[u8]) -> Vec<f64> {
    let ModelParams::AdaBoost { stumps, alphas, .. } = &model.params else {
        return Vec::new();
    };
    let n = x.n_rows();
    let mut s = alloc::vec![0.0; n];
    let mut out = Vec::with_capacity(stumps.len() + 1);
    let loss = |s: &[f64]| {
        s.iter()
            .zip(y)
            .map(|(&si, &yi)| math::exp(-(2.0 * f64::from(yi) - 1.0) * si / 2.0))
            .sum::<f64>()
            / n as f64
    };
    out.push(loss(&s));
    for (t, a) in stumps.iter().zip(alphas) {
        for (i, si) in s.iter_mut().enumerate() {
            *si += a * (2.0 * stump_class(t, x, i) - 1.0);
        }
        out.push(loss(&s));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::LearnerKind;
    use alloc::vec;
    use rand::Rng;

    #[test]
    fn separable_data_stops_after_one_round() {
        let x = ColumnMatrix::from_rows(&[vec![0.1], vec![0.2], vec![0.8], vec![0.9]]).unwrap();
        let y = [0, 0, 1, 1];
        let m = fit_adaboost(&x, &y, &LearnerSpec::new(LearnerKind::AdaBoost)).unwrap();
        let ModelParams::AdaBoost { stumps, .. } = &m.params else {
            unreachable!()
        };
        assert_eq!(stumps.len(), 1);
        let p = m.predict_proba(&x).unwrap();
        for (pi, yi) in p.iter().zip(y) {
            assert_eq!(*pi > 0.5, yi == 1);
        }
    }

    #[test]
    fn coin_flip_stump_falls_back_to_base_rate() {
        // Constant feature: the stump is one leaf, error exactly 0.5.
        let x = ColumnMatrix::from_rows(&[vec![0.5], vec![0.5], vec![0.5], vec![0.5]]).unwrap();
        let m = fit_adaboost(&x, &[0, 1, 0, 1], &LearnerSpec::new(LearnerKind::AdaBoost)).unwrap();
        assert_eq!(m.predict_proba(&x).unwrap(), vec![0.5; 4]);
        let ModelParams::AdaBoost { stumps, .. } = &m.params else {
            unreachable!()
        };
        assert!(stumps.is_empty());
    }

    #[test]
    fn exponential_loss_non_increasing() {
        for seed in 0..3 {
            let mut r = math::rng(seed);
            let rows: Vec<Vec<f64>> = (0..300)
                .map(|_| (0..4).map(|_| r.random::<f64>()).collect())
                .collect();
            let y: Vec<u8> = rows
                .iter()
                .map(|v| u8::from(v[0] * v[1] + 0.3 * r.random::<f64>() > 0.4))
                .collect();
            let x = ColumnMatrix::from_rows(&rows).unwrap();
            let m = fit_adaboost(&x, &y, &LearnerSpec::new(LearnerKind::AdaBoost)).unwrap();
            let trace = exponential_loss_trace(&m, &x, &y);
            assert!(trace.len() > 2);
            for w in trace.windows(2) {
                assert!(w[1] <= w[0] * (1.0 + 1e-12), "{} -> {}", w[0], w[1]);
            }
        }
    }
}
