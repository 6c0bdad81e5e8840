//! Scalar helpers shared by every module.
//!
//! All transcendental functions go through `libm` so results are identical
//! with and without `std`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Probability clip applied wherever a logit is formed.
pub const PROB_CLIP: f64 = 1e-6;

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

/// Numerically stable logistic function.
#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + exp(-z))
    } else {
        let e = exp(z);
        e / (1.0 + e)
    }
}

#[inline]
pub fn clip_prob(p: f64, eps: f64) -> f64 {
    p.clamp(eps, 1.0 - eps)
}

/// `log(p / (1 - p))` after clipping `p` to `[PROB_CLIP, 1 - PROB_CLIP]`.
#[inline]
pub fn clipped_logit(p: f64) -> f64 {
    // Clamp in logit space so that the two caps are exact negatives.
    let cap = ln((1.0 - PROB_CLIP) / PROB_CLIP);
    let z = if p <= 0.0 {
        f64::NEG_INFINITY
    } else if p >= 1.0 {
        f64::INFINITY
    } else {
        ln(p / (1.0 - p))
    };
    z.clamp(-cap, cap)
}

/// Round half away from zero for non-negative inputs.
#[inline]
pub fn round_half_up(x: f64) -> f64 {
    floor(x + 0.5)
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from an ordered list of components.
///
/// Every task seed in the crate is produced here, so results never depend on
/// the order in which tasks run.
pub fn mix(parts: &[u64]) -> u64 {
    let mut h = splitmix64(parts.len() as u64);
    for &p in parts {
        h = splitmix64(h ^ splitmix64(p));
    }
    h
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// In-place Fisher–Yates shuffle.
pub fn shuffle<T, R: rand::Rng + ?Sized>(items: &mut [T], rng: &mut R) {
    for i in (1..items.len()).rev() {
        let j = rng.random_range(0..=i);
        items.swap(i, j);
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Solve `a x = b` for a symmetric positive definite `a` (row-major, `n x n`)
/// by Cholesky factorisation. Returns `None` if `a` is not numerically SPD.
pub fn cholesky_solve(a: &[f64], b: &[f64], n: usize) -> Option<alloc::vec::Vec<f64>> {
    let mut l = alloc::vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return None;
                }
                l[i * n + i] = sqrt(s);
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    let mut y = alloc::vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    let mut x = alloc::vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logit_inverts_sigmoid() {
        assert_eq!(clipped_logit(0.5), 0.0);
        assert!((clipped_logit(0.7310586) - 1.0).abs() < 1e-6);
        let cap = clipped_logit(1.0);
        assert!((cap - 13.815508).abs() < 1e-5);
        assert_eq!(clipped_logit(0.0), -cap);
    }

    #[test]
    fn sigmoid_is_stable_at_extremes() {
        assert_eq!(sigmoid(-1000.0), 0.0);
        assert_eq!(sigmoid(1000.0), 1.0);
        assert_eq!(sigmoid(0.0), 0.5);
    }

    #[test]
    fn mix_depends_on_order_and_length() {
        assert_ne!(mix(&[1, 2]), mix(&[2, 1]));
        assert_ne!(mix(&[0]), mix(&[0, 0]));
        assert_eq!(mix(&[7, 8, 9]), mix(&[7, 8, 9]));
    }

    #[test]
    fn cholesky_solves_small_system() {
        let a = [4.0, 2.0, 2.0, 3.0];
        let x = cholesky_solve(&a, &[2.0, 1.0], 2).unwrap();
        assert!((4.0 * x[0] + 2.0 * x[1] - 2.0).abs() < 1e-12);
        assert!((2.0 * x[0] + 3.0 * x[1] - 1.0).abs() < 1e-12);
        assert!(cholesky_solve(&[0.0], &[1.0], 1).is_none());
    }

    #[test]
    fn round_half_up_rounds_up_at_half() {
        assert_eq!(round_half_up(2.5), 3.0);
        assert_eq!(round_half_up(0.7 * 271.0), 190.0);
        assert_eq!(round_half_up(0.7 * 6756.0), 4729.0);
    }
}
