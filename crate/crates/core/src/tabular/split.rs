use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::TabularDataset;
use crate::error::{Error, Result};
use crate::math;

const SPLIT_STREAM: u64 = 0x5350_4c49_54;
const FOLD_STREAM: u64 = 0x464f_4c44;

fn class_rows(y: &[u8]) -> [Vec<usize>; 2] {
    let mut out = [Vec::new(), Vec::new()];
    for (i, &v) in y.iter().enumerate() {
        out[usize::from(v == 1)].push(i);
    }
    out
}

/// Row indices `(train, test)` of a per-class stratified split, each sorted.
pub fn stratified_split_indices(
    y: &[u8],
    train_frac: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_frac > 0.0 && train_frac < 1.0) {
        return Err(Error::param("train_frac", "must lie strictly between 0 and 1"));
    }
    let mut rng = math::rng(math::mix(&[seed, SPLIT_STREAM]));
    let mut in_train = alloc::vec![false; y.len()];
    for (class, mut rows) in class_rows(y).into_iter().enumerate() {
        if rows.len() < 2 {
            return Err(Error::ClassTooSmall {
                class: class as u8,
                count: rows.len(),
                required: 2,
            });
        }
        math::shuffle(&mut rows, &mut rng);
        let take = math::round_half_up(train_frac * rows.len() as f64) as usize;
        for &i in &rows[..take] {
            in_train[i] = true;
        }
    }
    let train = (0..y.len()).filter(|&i| in_train[i]).collect();
    let test = (0..y.len()).filter(|&i| !in_train[i]).collect();
    Ok((train, test))
}

pub fn stratified_split(
    ds: &TabularDataset,
    train_frac: f64,
    seed: u64,
) -> Result<(TabularDataset, TabularDataset)> {
    let (train, test) = stratified_split_indices(ds.y(), train_frac, seed)?;
    Ok((ds.select_rows(&train), ds.select_rows(&test)))
}

/// Per-row fold index for stratified K-fold cross-validation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    k: usize,
    fold_of: Vec<usize>,
    seed: u64,
}

impl FoldAssignment {
    /// Wrap an explicit assignment. Every fold must be non-empty.
    pub fn from_assignment(k: usize, fold_of: Vec<usize>, seed: u64) -> Result<Self> {
        if k < 2 {
            return Err(Error::param("k", "need at least two folds"));
        }
        let mut sizes = alloc::vec![0usize; k];
        for &f in &fold_of {
            if f >= k {
                return Err(Error::param("fold_of", "fold index out of range"));
            }
            sizes[f] += 1;
        }
        if sizes.contains(&0) {
            return Err(Error::param("fold_of", "every fold must be non-empty"));
        }
        Ok(FoldAssignment { k, fold_of, seed })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n_rows(&self) -> usize {
        self.fold_of.len()
    }

    pub fn fold_of(&self, row: usize) -> usize {
        self.fold_of[row]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.fold_of
    }

    /// Held-out rows of fold `f`, ascending.
    pub fn validation_rows(&self, f: usize) -> Vec<usize> {
        (0..self.fold_of.len())
            .filter(|&i| self.fold_of[i] == f)
            .collect()
    }

    /// Training rows for fold `f` (all rows outside it), ascending.
    pub fn training_rows(&self, f: usize) -> Vec<usize> {
        (0..self.fold_of.len())
            .filter(|&i| self.fold_of[i] != f)
            .collect()
    }
}

/// Shuffle each class with a seeded RNG and deal its rows round-robin to
/// folds `0..k`.
pub fn stratified_kfold(y: &[u8], k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::param("k", "need at least two folds"));
    }
    let mut rng = math::rng(math::mix(&[seed, FOLD_STREAM]));
    let mut fold_of = alloc::vec![0usize; y.len()];
    for (class, mut rows) in class_rows(y).into_iter().enumerate() {
        if rows.len() < k {
            return Err(Error::ClassTooSmall {
                class: class as u8,
                count: rows.len(),
                required: k,
            });
        }
        math::shuffle(&mut rows, &mut rng);
        for (pos, &i) in rows.iter().enumerate() {
            fold_of[i] = pos % k;
        }
    }
    FoldAssignment::from_assignment(k, fold_of, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn labels(n_pos: usize, n_neg: usize) -> Vec<u8> {
        let mut y = alloc::vec![1u8; n_pos];
        y.extend(core::iter::repeat(0).take(n_neg));
        y
    }

    #[test]
    fn split_counts_follow_per_class_rounding() {
        let y = labels(271, 6756);
        let (train, test) = stratified_split_indices(&y, 0.7, 11).unwrap();
        let pos = train.iter().filter(|&&i| y[i] == 1).count();
        assert_eq!(pos, 190);
        assert_eq!(train.len() - pos, 4729);
        assert_eq!(train.len() + test.len(), y.len());
    }

    #[test]
    fn split_rounds_half_up() {
        let y = labels(5, 5);
        let (train, _) = stratified_split_indices(&y, 0.5, 3).unwrap();
        assert_eq!(train.len(), 6);
        assert_eq!(train.iter().filter(|&&i| y[i] == 1).count(), 3);
    }

    #[test]
    fn split_rejects_bad_fraction_and_tiny_class() {
        let y = labels(5, 5);
        assert!(stratified_split_indices(&y, 1.0, 0).is_err());
        assert!(stratified_split_indices(&y, 0.0, 0).is_err());
        assert!(matches!(
            stratified_split_indices(&labels(1, 5), 0.7, 0),
            Err(Error::ClassTooSmall { class: 1, .. })
        ));
    }

    #[test]
    fn kfold_alternating_labels() {
        let y = [1, 0, 1, 0, 1, 0];
        let f = stratified_kfold(&y, 3, 9).unwrap();
        for fold in 0..3 {
            let rows = f.validation_rows(fold);
            assert_eq!(rows.len(), 2);
            assert_eq!(rows.iter().map(|&i| y[i] as usize).sum::<usize>(), 1);
        }
    }

    #[test]
    fn kfold_positive_counts_for_271() {
        let y = labels(271, 500);
        let f = stratified_kfold(&y, 5, 1).unwrap();
        let mut total = 0;
        for fold in 0..5 {
            let p = f.validation_rows(fold).iter().filter(|&&i| y[i] == 1).count();
            assert!(p == 54 || p == 55);
            total += p;
        }
        assert_eq!(total, 271);
    }

    #[test]
    fn kfold_rejects_small_class() {
        assert!(stratified_kfold(&labels(1, 10), 2, 0).is_err());
        assert!(stratified_kfold(&labels(5, 5), 1, 0).is_err());
    }

    proptest! {
        #[test]
        fn kfold_invariants(n_pos in 5usize..60, n_neg in 5usize..60, k in 2usize..6, seed in any::<u64>()) {
            let y = labels(n_pos, n_neg);
            let f = stratified_kfold(&y, k, seed).unwrap();
            prop_assert_eq!(&f, &stratified_kfold(&y, k, seed).unwrap());
            let mut seen = alloc::vec![0usize; y.len()];
            for fold in 0..k {
                let rows = f.validation_rows(fold);
                prop_assert!(!rows.is_empty());
                for &r in &rows { seen[r] += 1; }
                for (class, n_c) in [(1u8, n_pos), (0u8, n_neg)] {
                    let c = rows.iter().filter(|&&i| y[i] == class).count();
                    prop_assert!(c == n_c / k || c == n_c / k + 1);
                }
            }
            prop_assert!(seen.iter().all(|&s| s == 1));
        }

        #[test]
        fn split_invariants(n_pos in 2usize..80, n_neg in 2usize..80, frac in 0.05f64..0.95, seed in any::<u64>()) {
            let y = labels(n_pos, n_neg);
            let (train, test) = stratified_split_indices(&y, frac, seed).unwrap();
            prop_assert_eq!(train.len() + test.len(), y.len());
            prop_assert!(train.iter().all(|i| !test.contains(i)));
            let pos = train.iter().filter(|&&i| y[i] == 1).count();
            prop_assert_eq!(pos, math::round_half_up(frac * n_pos as f64) as usize);
            prop_assert!(train.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
