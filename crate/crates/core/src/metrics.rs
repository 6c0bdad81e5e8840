//! Ranking and thresholded evaluation metrics.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;

pub const DEFAULT_THRESHOLD: f64 = 0.5;
const LOG_LOSS_CLIP: f64 = 1e-15;

fn check_lengths(scores: &[f64], y: &[u8]) -> Result<()> {
    if scores.is_empty() {
        return Err(Error::Empty("scores"));
    }
    if scores.len() != y.len() {
        return Err(Error::LengthMismatch {
            context: "scores vs labels",
            expected: y.len(),
            actual: scores.len(),
        });
    }
    Ok(())
}

fn class_counts(y: &[u8]) -> (u64, u64) {
    let pos = y.iter().filter(|&&v| v == 1).count() as u64;
    (pos, y.len() as u64 - pos)
}

/// Area under the ROC curve via the Mann–Whitney statistic with midranks.
///
/// Ranks are kept doubled so the statistic is an exact integer; the result
/// is `(2 * wins + ties) / (2 * n_pos * n_neg)` with a single rounding.
pub fn auc_roc(scores: &[f64], y: &[u8]) -> Result<f64> {
    check_lengths(scores, y)?;
    if let Some(i) = scores.iter().position(|s| s.is_nan()) {
        return Err(Error::NonFinite { column: 0, row: i });
    }
    let (n_pos, n_neg) = class_counts(y);
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass(format!(
            "auc over {} rows",
            y.len()
        )));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_unstable_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Sum over positives of doubled midranks.
    let mut doubled_rank_sum: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        let doubled_mid = (i + 1 + j) as u128;
        let pos_in_group = order[i..j].iter().filter(|&&k| y[k] == 1).count() as u128;
        doubled_rank_sum += doubled_mid * pos_in_group;
        i = j;
    }
    let n_pos = n_pos as u128;
    let doubled_u = doubled_rank_sum - n_pos * (n_pos + 1);
    Ok(doubled_u as f64 / (2 * n_pos * n_neg as u128) as f64)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

pub fn confusion(scores: &[f64], y: &[u8], threshold: f64) -> Result<Confusion> {
    check_lengths(scores, y)?;
    let mut c = Confusion::default();
    for (&s, &t) in scores.iter().zip(y) {
        match (s >= threshold, t == 1) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}

/// F1 of the positive class; 0 when there are no positives predicted or present.
pub fn f1(scores: &[f64], y: &[u8], threshold: f64) -> Result<f64> {
    let c = confusion(scores, y, threshold)?;
    let denom = 2 * c.tp + c.fp + c.fn_;
    Ok(if denom == 0 {
        0.0
    } else {
        (2 * c.tp) as f64 / denom as f64
    })
}

pub fn accuracy(scores: &[f64], y: &[u8], threshold: f64) -> Result<f64> {
    let c = confusion(scores, y, threshold)?;
    Ok((c.tp + c.tn) as f64 / y.len() as f64)
}

pub fn balanced_accuracy(scores: &[f64], y: &[u8], threshold: f64) -> Result<f64> {
    let c = confusion(scores, y, threshold)?;
    let pos = c.tp + c.fn_;
    let neg = c.tn + c.fp;
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass("balanced accuracy".into()));
    }
    let tpr = c.tp as f64 / pos as f64;
    let tnr = c.tn as f64 / neg as f64;
    Ok((tpr + tnr) / 2.0)
}

pub fn log_loss(scores: &[f64], y: &[u8]) -> Result<f64> {
    check_lengths(scores, y)?;
    let total: f64 = scores
        .iter()
        .zip(y)
        .map(|(&p, &t)| {
            let p = math::clip_prob(p, LOG_LOSS_CLIP);
            if t == 1 {
                -math::ln(p)
            } else {
                -math::ln(1.0 - p)
            }
        })
        .sum();
    Ok(total / y.len() as f64)
}

/// Mean and sample standard deviation (divisor `K - 1`).
pub fn cv_aggregate(per_fold: &[f64]) -> Result<(f64, f64)> {
    if per_fold.len() < 2 {
        return Err(Error::param("per_fold", "need at least two folds"));
    }
    let mean = math::mean(per_fold);
    let ss: f64 = per_fold.iter().map(|v| (v - mean) * (v - mean)).sum();
    Ok((mean, math::sqrt(ss / (per_fold.len() - 1) as f64)))
}

/// Held-out evaluation summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub auc: f64,
    pub f1: f64,
    pub log_loss: f64,
    pub accuracy: f64,
    pub balanced_accuracy: f64,
    pub threshold: f64,
    pub n_rows: usize,
}

impl MetricReport {
    pub fn compute(scores: &[f64], y: &[u8], threshold: f64) -> Result<Self> {
        Ok(MetricReport {
            auc: auc_roc(scores, y)?,
            f1: f1(scores, y, threshold)?,
            log_loss: log_loss(scores, y)?,
            accuracy: accuracy(scores, y, threshold)?,
            balanced_accuracy: balanced_accuracy(scores, y, threshold)?,
            threshold,
            n_rows: y.len(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_auc(scores: &[f64], y: &[u8]) -> f64 {
        let mut twice = 0u64;
        let mut pairs = 0u64;
        for (i, &si) in scores.iter().enumerate() {
            if y[i] != 1 {
                continue;
            }
            for (j, &sj) in scores.iter().enumerate() {
                if y[j] != 0 {
                    continue;
                }
                pairs += 1;
                if si > sj {
                    twice += 2;
                } else if si == sj {
                    twice += 1;
                }
            }
        }
        twice as f64 / (2 * pairs) as f64
    }

    #[test]
    fn auc_examples() {
        let y = [0, 0, 1, 1];
        assert_eq!(auc_roc(&[0.1, 0.4, 0.35, 0.8], &y).unwrap(), 0.75);
        assert_eq!(auc_roc(&[0.1, 0.2, 0.8, 0.9], &y).unwrap(), 1.0);
        assert_eq!(auc_roc(&[0.3; 4], &y).unwrap(), 0.5);
    }

    #[test]
    fn auc_rejects_single_class() {
        assert!(matches!(
            auc_roc(&[0.1, 0.2], &[1, 1]),
            Err(Error::SingleClass(_))
        ));
    }

    #[test]
    fn f1_examples() {
        let y = [1, 0, 1, 0];
        assert_eq!(f1(&[0.9, 0.1, 0.8, 0.2], &y, 0.5).unwrap(), 1.0);
        // tp=1 fp=1 fn=1
        assert_eq!(f1(&[0.9, 0.6, 0.1, 0.2], &y, 0.5).unwrap(), 0.5);
        assert_eq!(f1(&[0.1, 0.2], &[0, 0], 0.5).unwrap(), 0.0);
    }

    #[test]
    fn log_loss_and_accuracy_examples() {
        let y = [1, 0, 1, 0];
        let ll = log_loss(&[0.5; 4], &y).unwrap();
        assert!((ll - core::f64::consts::LN_2).abs() < 1e-15);
        let exact = log_loss(&[1.0, 0.0, 1.0, 0.0], &y).unwrap();
        assert!(exact > 0.0 && exact < 4e-14);
        assert_eq!(accuracy(&[1.0, 0.0, 1.0, 0.0], &y, 0.5).unwrap(), 1.0);
        assert_eq!(accuracy(&[0.6, 0.6], &[1, 0], 0.5).unwrap(), 0.5);
        assert_eq!(balanced_accuracy(&[0.6, 0.6], &[1, 0], 0.5).unwrap(), 0.5);
        assert!(balanced_accuracy(&[0.6], &[1], 0.5).is_err());
    }

    #[test]
    fn cv_aggregate_examples() {
        let (m, s) = cv_aggregate(&[0.7, 0.7, 0.7]).unwrap();
        assert!((m - 0.7).abs() < 1e-15 && s < 1e-15);
        let (m, s) = cv_aggregate(&[0.6, 0.8]).unwrap();
        assert!((m - 0.7).abs() < 1e-15);
        assert!((s - 0.141_421_356_237_309_5).abs() < 1e-12);
        assert!(cv_aggregate(&[0.7]).is_err());
    }

    fn labelled() -> impl Strategy<Value = (Vec<f64>, Vec<u8>)> {
        (2usize..120).prop_flat_map(|n| {
            (
                proptest::collection::vec((0u8..12).prop_map(|v| v as f64 / 4.0), n),
                proptest::collection::vec(0u8..2, n),
            )
        })
        .prop_filter("both classes", |(_, y)| y.contains(&0) && y.contains(&1))
    }

    proptest! {
        #[test]
        fn auc_matches_pairwise_count((s, y) in labelled()) {
            prop_assert_eq!(auc_roc(&s, &y).unwrap(), brute_auc(&s, &y));
        }

        #[test]
        fn auc_invariant_under_increasing_transform((s, y) in labelled()) {
            let t: Vec<f64> = s.iter().map(|v| math::exp(3.0 * v) - 7.0).collect();
            prop_assert_eq!(auc_roc(&s, &y).unwrap(), auc_roc(&t, &y).unwrap());
        }

        #[test]
        fn auc_negation_and_label_flip(n in 2usize..80, seed in any::<u64>()) {
            use rand::Rng;
            let mut r = math::rng(seed);
            let s: Vec<f64> = (0..n).map(|i| i as f64 + r.random::<f64>() * 0.5).collect();
            let mut y: Vec<u8> = (0..n).map(|_| r.random_range(0..2u8)).collect();
            y[0] = 0;
            y[1] = 1;
            let neg: Vec<f64> = s.iter().map(|v| -v).collect();
            let flip: Vec<u8> = y.iter().map(|v| 1 - v).collect();
            let a = auc_roc(&s, &y).unwrap();
            prop_assert!((a + auc_roc(&neg, &y).unwrap() - 1.0).abs() < 1e-12);
            prop_assert!((auc_roc(&s, &flip).unwrap() - (1.0 - a)).abs() < 1e-12);
        }
    }

    #[test]
    fn metric_report_ranges() {
        let r = MetricReport::compute(&[0.2, 0.7, 0.9, 0.4], &[0, 1, 1, 0], 0.5).unwrap();
        assert_eq!(r.auc, 1.0);
        assert_eq!(r.n_rows, 4);
        assert!(r.log_loss > 0.0);
    }
}
