//! L2-penalised logistic regression by iteratively reweighted least squares.
//!
//! Objective: `(1/n) sum_i [log(1 + e^z_i) - y_i z_i] + (l2 / 2) |w|^2` with
//! `z_i = b + w . x_i`; the intercept `b` is not penalised.

use alloc::vec::Vec;

use super::{base_rate, check_training_data, LearnerSpec, ModelParams, TrainedBaseModel};
use crate::error::{Error, Result};
use crate::math;
use crate::matrix::ColumnMatrix;

pub const MAX_ITER: usize = 100;
pub const STEP_TOL: f64 = 1e-8;
const MAX_HALVINGS: usize = 40;

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticFit {
    pub intercept: f64,
    pub weights: Vec<f64>,
    pub iterations: usize,
}

fn linear_scores(x: &ColumnMatrix, intercept: f64, weights: &[f64]) -> Vec<f64> {
    let mut z = alloc::vec![intercept; x.n_rows()];
    for (j, &w) in weights.iter().enumerate() {
        if w != 0.0 {
            for (zi, &v) in z.iter_mut().zip(x.column(j)) {
                *zi += w * v;
            }
        }
    }
    z
}

#[inline]
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + math::ln(1.0 + math::exp(-z))
    } else {
        math::ln(1.0 + math::exp(z))
    }
}

fn objective_from_scores(z: &[f64], y: &[u8], l2: f64, weights: &[f64]) -> f64 {
    let data: f64 = z
        .iter()
        .zip(y)
        .map(|(&zi, &yi)| softplus(zi) - f64::from(yi) * zi)
        .sum();
    let penalty: f64 = weights.iter().map(|w| w * w).sum();
    data / y.len() as f64 + 0.5 * l2 * penalty
}

/// Penalised objective and its gradient `[d/db, d/dw_1, ..]` at a point.
pub fn logistic_objective(
    x: &ColumnMatrix,
    y: &[u8],
    l2: f64,
    intercept: f64,
    weights: &[f64],
) -> (f64, Vec<f64>) {
    let z = linear_scores(x, intercept, weights);
    let n = y.len() as f64;
    let resid: Vec<f64> = z
        .iter()
        .zip(y)
        .map(|(&zi, &yi)| math::sigmoid(zi) - f64::from(yi))
        .collect();
    let mut grad = Vec::with_capacity(weights.len() + 1);
    grad.push(resid.iter().sum::<f64>() / n);
    for (j, &w) in weights.iter().enumerate() {
        let g: f64 = resid.iter().zip(x.column(j)).map(|(r, v)| r * v).sum();
        grad.push(g / n + l2 * w);
    }
    (objective_from_scores(&z, y, l2, weights), grad)
}

/// Newton/IRLS with step halving. Stops when the largest coefficient change
/// drops below `STEP_TOL` or after `MAX_ITER` iterations.
pub fn fit_logistic_irls(x: &ColumnMatrix, y: &[u8], l2: f64) -> Result<LogisticFit> {
    check_training_data(x, y)?;
    let d = x.n_cols();
    let p = d + 1;
    let n = y.len() as f64;
    let rate = math::clip_prob(base_rate(y), math::PROB_CLIP);
    let mut theta = alloc::vec![0.0; p];
    theta[0] = math::ln(rate / (1.0 - rate));
    let mut z = linear_scores(x, theta[0], &theta[1..]);
    let mut loss = objective_from_scores(&z, y, l2, &theta[1..]);
    let mut hess = alloc::vec![0.0; p * p];
    let mut grad = alloc::vec![0.0; p];
    let mut iterations = 0;
    let cols = x.columns();
    while iterations < MAX_ITER {
        iterations += 1;
        hess.iter_mut().for_each(|h| *h = 0.0);
        grad.iter_mut().for_each(|g| *g = 0.0);
        for i in 0..y.len() {
            let pi = math::sigmoid(z[i]);
            let r = pi - f64::from(y[i]);
            let w = pi * (1.0 - pi);
            grad[0] += r;
            hess[0] += w;
            for a in 0..d {
                let xa = cols[a][i];
                grad[a + 1] += r * xa;
                let wxa = w * xa;
                let row = (a + 1) * p;
                hess[row] += wxa;
                for b in 0..=a {
                    hess[row + b + 1] += wxa * cols[b][i];
                }
            }
        }
        for a in 0..p {
            grad[a] /= n;
            for b in 0..=a {
                hess[a * p + b] /= n;
            }
        }
        for a in 1..p {
            grad[a] += l2 * theta[a];
            hess[a * p + a] += l2;
        }
        for a in 0..p {
            for b in a + 1..p {
                hess[a * p + b] = hess[b * p + a];
            }
        }
        let step = solve_with_jitter(&mut hess, &grad, p)
            .ok_or_else(|| Error::param("x", "logistic Hessian is not positive definite"))?;

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let cand: Vec<f64> = theta.iter().zip(&step).map(|(th, s)| th - t * s).collect();
            let zc = linear_scores(x, cand[0], &cand[1..]);
            let lc = objective_from_scores(&zc, y, l2, &cand[1..]);
            if lc <= loss {
                accepted = Some((cand, zc, lc));
                break;
            }
            t *= 0.5;
        }
        let Some((cand, zc, lc)) = accepted else {
            break;
        };
        let change = theta
            .iter()
            .zip(&cand)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        theta = cand;
        z = zc;
        loss = lc;
        if change < STEP_TOL {
            break;
        }
    }
    Ok(LogisticFit {
        intercept: theta[0],
        weights: theta[1..].to_vec(),
        iterations,
    })
}

fn solve_with_jitter(hess: &mut [f64], grad: &[f64], p: usize) -> Option<Vec<f64>> {
    if let Some(s) = math::cholesky_solve(hess, grad, p) {
        return Some(s);
    }
    let mut jitter = 1e-12;
    while jitter < 1.0 {
        for a in 0..p {
            hess[a * p + a] += jitter;
        }
        if let Some(s) = math::cholesky_solve(hess, grad, p) {
            return Some(s);
        }
        jitter *= 100.0;
    }
    None
}

pub fn fit_logreg(x: &ColumnMatrix, y: &[u8], spec: &LearnerSpec) -> Result<TrainedBaseModel> {
    spec.validate()?;
    let fit = fit_logistic_irls(x, y, spec.params.l2)?;
    Ok(TrainedBaseModel {
        spec: *spec,
        n_features: x.n_cols(),
        params: ModelParams::Logreg {
            intercept: fit.intercept,
            weights: fit.weights,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::LearnerKind;
    use crate::metrics::auc_roc;
    use alloc::vec;
    use rand::Rng;

    fn noisy_linear(n: usize, d: usize, seed: u64) -> (ColumnMatrix, Vec<u8>) {
        let mut r = math::rng(seed);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| r.random::<f64>()).collect())
            .collect();
        let y = rows
            .iter()
            .map(|v| {
                let z: f64 = v.iter().enumerate().map(|(j, a)| (j as f64 - 1.0) * a).sum();
                u8::from(r.random::<f64>() < math::sigmoid(2.0 * z - 0.5))
            })
            .collect();
        (ColumnMatrix::from_rows(&rows).unwrap(), y)
    }

    #[test]
    fn symmetric_data_has_zero_intercept() {
        let x = ColumnMatrix::from_rows(&[vec![-1.0], vec![1.0]]).unwrap();
        let fit = fit_logistic_irls(&x, &[0, 1], 1e-6).unwrap();
        assert!(fit.intercept.abs() < 1e-9);
        assert!(fit.weights[0] > 0.0);
    }

    #[test]
    fn xor_is_not_learnable() {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for _ in 0..25 {
            for (a, b) in [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)] {
                rows.push(vec![a, b]);
                y.push(u8::from((a == 1.0) != (b == 1.0)));
            }
        }
        let x = ColumnMatrix::from_rows(&rows).unwrap();
        let m = fit_logreg(&x, &y, &LearnerSpec::new(LearnerKind::Logreg)).unwrap();
        let auc = auc_roc(&m.predict_proba(&x).unwrap(), &y).unwrap();
        assert!((auc - 0.5).abs() <= 0.1, "{auc}");
    }

    #[test]
    fn gradient_vanishes_at_solution() {
        let (x, y) = noisy_linear(500, 4, 1);
        let fit = fit_logistic_irls(&x, &y, 1e-6).unwrap();
        let (_, g) = logistic_objective(&x, &y, 1e-6, fit.intercept, &fit.weights);
        assert!(g.iter().all(|v| v.abs() < 1e-6), "{g:?}");
    }

    #[test]
    fn label_flip_negates_coefficients() {
        let (x, y) = noisy_linear(400, 3, 2);
        let flipped: Vec<u8> = y.iter().map(|v| 1 - v).collect();
        let a = fit_logistic_irls(&x, &y, 1e-6).unwrap();
        let b = fit_logistic_irls(&x, &flipped, 1e-6).unwrap();
        assert!((a.intercept + b.intercept).abs() < 1e-6);
        for (wa, wb) in a.weights.iter().zip(&b.weights) {
            assert!((wa + wb).abs() < 1e-6);
        }
    }

    #[test]
    fn constant_column_gets_zero_weight() {
        let (x, y) = noisy_linear(300, 2, 3);
        let mut cols = x.columns().to_vec();
        cols.push(vec![0.7; 300]);
        let x = ColumnMatrix::new(300, cols).unwrap();
        let fit = fit_logistic_irls(&x, &y, 1e-6).unwrap();
        assert!(fit.weights[2].abs() < 1e-6, "{}", fit.weights[2]);
    }

    #[test]
    fn non_finite_input_rejected() {
        let x = ColumnMatrix::from_rows(&[vec![f64::NAN], vec![1.0]]).unwrap();
        assert!(matches!(
            fit_logistic_irls(&x, &[0, 1], 1e-6),
            Err(Error::NonFinite { .. })
        ));
    }
}
