//! Binary decision trees stored as parallel arrays, and the shared grower.
//!
//! The grower works on presorted per-feature row orders. Each node owns the
//! same contiguous range in every feature's order array, and splitting a node
//! stably partitions that range, so no sorting happens below the root.

use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_training_data, LearnerSpec, ModelParams, TrainedBaseModel};
use crate::error::{Error, Result};
use crate::matrix::ColumnMatrix;

const LEAF: i32 = -1;
const NEWTON_EPS: f64 = 1e-12;

/// Parallel-array tree. Leaf nodes have `feature`, `left` and `right` set to
/// `-1`; rows with `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub feature: Vec<i32>,
    pub threshold: Vec<f64>,
    pub left: Vec<i32>,
    pub right: Vec<i32>,
    pub leaf_value: Vec<f64>,
}

impl Tree {
    pub fn leaf(value: f64) -> Self {
        Tree {
            feature: alloc::vec![LEAF],
            threshold: alloc::vec![0.0],
            left: alloc::vec![LEAF],
            right: alloc::vec![LEAF],
            leaf_value: alloc::vec![value],
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.feature.len()
    }

    pub fn n_leaves(&self) -> usize {
        self.left.iter().filter(|&&l| l == LEAF).count()
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, n: usize) -> usize {
            if t.left[n] == LEAF {
                0
            } else {
                1 + go(t, t.left[n] as usize).max(go(t, t.right[n] as usize))
            }
        }
        go(self, 0)
    }

    #[inline]
    pub fn predict_row(&self, x: &ColumnMatrix, row: usize) -> f64 {
        let mut n = 0usize;
        loop {
            let f = self.feature[n];
            if f == LEAF {
                return self.leaf_value[n];
            }
            n = if x.get(row, f as usize) <= self.threshold[n] {
                self.left[n] as usize
            } else {
                self.right[n] as usize
            };
        }
    }

    /// Check that the arrays describe a single rooted binary tree in which
    /// every non-root node has exactly one parent.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_nodes();
        let same_len = [
            self.threshold.len(),
            self.left.len(),
            self.right.len(),
            self.leaf_value.len(),
        ]
        .iter()
        .all(|&l| l == n);
        if n == 0 || !same_len {
            return Err(Error::Schema("malformed tree arrays".into()));
        }
        let mut parents = alloc::vec![0u32; n];
        for i in 0..n {
            let (l, r) = (self.left[i], self.right[i]);
            if (l == LEAF) != (r == LEAF) || (l == LEAF) != (self.feature[i] == LEAF) {
                return Err(Error::Schema("tree node has one child".into()));
            }
            for c in [l, r] {
                if c == LEAF {
                    continue;
                }
                if c <= 0 || c as usize >= n {
                    return Err(Error::Schema("tree child index out of range".into()));
                }
                parents[c as usize] += 1;
            }
        }
        if parents[0] != 0 || parents[1..].iter().any(|&p| p != 1) {
            return Err(Error::Schema("tree is not a single rooted tree".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Criterion {
    /// Weighted Gini impurity of a 0/1 target.
    Gini,
    /// Weighted squared error of a real target.
    Mse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ThresholdRule {
    /// Midpoints between consecutive distinct values.
    Exhaustive,
    /// One uniform draw between the node's min and max per feature.
    Random,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct GrowConfig {
    pub criterion: Criterion,
    pub thresholds: ThresholdRule,
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub max_features: usize,
}

/// Per-row training signal.
pub(crate) struct Samples<'a> {
    pub target: &'a [f64],
    pub weight: &'a [f64],
    /// Multiplicity of each row (bootstrap counts); zero excludes the row.
    pub count: &'a [u32],
    /// When present, leaf values are Newton steps
    /// `sum(w * target) / max(eps, sum(w * hess))`; otherwise weighted means.
    pub hess: Option<&'a [f64]>,
}

/// Row orders of every feature, sorted by (value, row index).
pub(crate) struct SortedColumns {
    order: Vec<Vec<u32>>,
}

impl SortedColumns {
    pub fn new(x: &ColumnMatrix) -> Self {
        let order = x
            .columns()
            .iter()
            .map(|c| {
                let mut idx: Vec<u32> = (0..c.len() as u32).collect();
                idx.sort_by(|&a, &b| c[a as usize].total_cmp(&c[b as usize]).then(a.cmp(&b)));
                idx
            })
            .collect();
        SortedColumns { order }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Stats {
    w: f64,
    s: f64,
    q: f64,
    count: u64,
}

impl Stats {
    #[inline]
    fn add(&mut self, w: f64, t: f64, c: u32) {
        self.w += w;
        self.s += w * t;
        self.q += w * t * t;
        self.count += u64::from(c);
    }

    #[inline]
    fn minus(&self, o: &Stats) -> Stats {
        Stats {
            w: self.w - o.w,
            s: self.s - o.s,
            q: self.q - o.q,
            count: self.count - o.count,
        }
    }

    #[inline]
    fn impurity(&self, criterion: Criterion) -> f64 {
        if self.w <= 0.0 {
            return 0.0;
        }
        match criterion {
            Criterion::Gini => 2.0 * self.s * (self.w - self.s) / self.w,
            Criterion::Mse => (self.q - self.s * self.s / self.w).max(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Split {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl Split {
    /// Higher gain wins; ties go to the lower feature index, then the lower
    /// threshold.
    #[inline]
    fn beats(&self, other: &Option<Split>) -> bool {
        match other {
            None => true,
            Some(o) => {
                self.gain > o.gain
                    || (self.gain == o.gain
                        && (self.feature < o.feature
                            || (self.feature == o.feature && self.threshold < o.threshold)))
            }
        }
    }
}

struct Grower<'a, R: Rng> {
    x: &'a ColumnMatrix,
    samples: &'a Samples<'a>,
    cfg: GrowConfig,
    rng: &'a mut R,
    /// Feature-major order arrays, `n_active` entries per feature.
    order: Vec<u32>,
    scratch: Vec<u32>,
    goes_left: Vec<bool>,
    n_active: usize,
    features: Vec<usize>,
    tree: Tree,
}

pub(crate) fn grow<R: Rng>(
    x: &ColumnMatrix,
    sorted: &SortedColumns,
    samples: &Samples<'_>,
    cfg: GrowConfig,
    rng: &mut R,
) -> Tree {
    let d = x.n_cols();
    let n_active = samples.count.iter().filter(|&&c| c > 0).count();
    let mut order = Vec::with_capacity(d * n_active);
    for f in 0..d {
        order.extend(
            sorted.order[f]
                .iter()
                .copied()
                .filter(|&r| samples.count[r as usize] > 0),
        );
    }
    let mut g = Grower {
        x,
        samples,
        cfg,
        rng,
        order,
        scratch: alloc::vec![0; n_active],
        goes_left: alloc::vec![false; x.n_rows()],
        n_active,
        features: (0..d).collect(),
        tree: Tree {
            feature: Vec::new(),
            threshold: Vec::new(),
            left: Vec::new(),
            right: Vec::new(),
            leaf_value: Vec::new(),
        },
    };
    g.build();
    g.tree
}

impl<'a, R: Rng> Grower<'a, R> {
    fn push_node(&mut self) -> usize {
        let t = &mut self.tree;
        t.feature.push(LEAF);
        t.threshold.push(0.0);
        t.left.push(LEAF);
        t.right.push(LEAF);
        t.leaf_value.push(0.0);
        t.feature.len() - 1
    }

    fn range(&self, f: usize, start: usize, end: usize) -> &[u32] {
        let base = f * self.n_active;
        &self.order[base + start..base + end]
    }

    fn node_stats(&self, start: usize, end: usize) -> (Stats, f64) {
        let s = self.samples;
        let mut st = Stats::default();
        let mut h = 0.0;
        for &r in self.range(0, start, end) {
            let r = r as usize;
            st.add(s.weight[r], s.target[r], s.count[r]);
            if let Some(hess) = s.hess {
                h += s.weight[r] * hess[r];
            }
        }
        (st, h)
    }

    fn build(&mut self) {
        if self.n_active == 0 {
            let root = self.push_node();
            self.tree.leaf_value[root] = 0.0;
            return;
        }
        let root = self.push_node();
        let mut stack = alloc::vec![(root, 0usize, self.n_active, 0usize)];
        while let Some((node, start, end, depth)) = stack.pop() {
            let (stats, hess_sum) = self.node_stats(start, end);
            self.tree.leaf_value[node] = if self.samples.hess.is_some() {
                stats.s / hess_sum.max(NEWTON_EPS)
            } else if stats.w > 0.0 {
                stats.s / stats.w
            } else {
                0.0
            };
            let parent_imp = stats.impurity(self.cfg.criterion);
            if depth >= self.cfg.max_depth
                || stats.count < self.cfg.min_samples_split as u64
                || parent_imp <= 0.0
            {
                continue;
            }
            let Some(split) = self.find_split(start, end, &stats, parent_imp) else {
                continue;
            };
            let n_left = self.partition(start, end, split);
            let l = self.push_node();
            let r = self.push_node();
            let t = &mut self.tree;
            t.feature[node] = split.feature as i32;
            t.threshold[node] = split.threshold;
            t.left[node] = l as i32;
            t.right[node] = r as i32;
            stack.push((r, start + n_left, end, depth + 1));
            stack.push((l, start, start + n_left, depth + 1));
        }
    }

    fn find_split(
        &mut self,
        start: usize,
        end: usize,
        parent: &Stats,
        parent_imp: f64,
    ) -> Option<Split> {
        let d = self.features.len();
        let subsample = self.cfg.max_features < d;
        let mut best: Option<Split> = None;
        let mut visited = 0;
        // Draw candidate features lazily (partial Fisher-Yates). Keep drawing
        // past `max_features` only while no valid split has been found.
        for i in 0..d {
            if visited >= self.cfg.max_features && best.is_some() {
                break;
            }
            let f = if subsample {
                let j = self.rng.random_range(i..d);
                self.features.swap(i, j);
                self.features[i]
            } else {
                i
            };
            visited += 1;
            let cand = match self.cfg.thresholds {
                ThresholdRule::Exhaustive => self.best_exhaustive(f, start, end, parent, parent_imp),
                ThresholdRule::Random => self.random_threshold(f, start, end, parent, parent_imp),
            };
            if let Some(c) = cand {
                if c.beats(&best) {
                    best = Some(c);
                }
            }
        }
        if subsample {
            // Restore identity order so later nodes draw from a known state.
            self.features.sort_unstable();
        }
        best
    }

    #[inline]
    fn gain(&self, parent: &Stats, parent_imp: f64, left: &Stats) -> f64 {
        let right = parent.minus(left);
        parent_imp - left.impurity(self.cfg.criterion) - right.impurity(self.cfg.criterion)
    }

    fn best_exhaustive(
        &self,
        f: usize,
        start: usize,
        end: usize,
        parent: &Stats,
        parent_imp: f64,
    ) -> Option<Split> {
        let col = self.x.column(f);
        let s = self.samples;
        let rows = self.range(f, start, end);
        let mut left = Stats::default();
        let mut best: Option<Split> = None;
        for k in 0..rows.len() - 1 {
            let r = rows[k] as usize;
            left.add(s.weight[r], s.target[r], s.count[r]);
            let v = col[r];
            let next = col[rows[k + 1] as usize];
            if next <= v {
                continue;
            }
            let gain = self.gain(parent, parent_imp, &left);
            if gain > 0.0 && best.is_none_or(|b| gain > b.gain) {
                best = Some(Split {
                    feature: f,
                    threshold: midpoint(v, next),
                    gain,
                });
            }
        }
        best
    }

    fn random_threshold(
        &mut self,
        f: usize,
        start: usize,
        end: usize,
        parent: &Stats,
        parent_imp: f64,
    ) -> Option<Split> {
        let col = self.x.column(f);
        let (lo, hi) = {
            let rows = self.range(f, start, end);
            (col[rows[0] as usize], col[rows[rows.len() - 1] as usize])
        };
        if lo >= hi {
            return None;
        }
        let u: f64 = self.rng.random();
        let mut threshold = lo + u * (hi - lo);
        if threshold >= hi {
            threshold = lo;
        }
        let s = self.samples;
        let mut left = Stats::default();
        for &r in self.range(f, start, end) {
            let r = r as usize;
            if col[r] > threshold {
                break;
            }
            left.add(s.weight[r], s.target[r], s.count[r]);
        }
        let gain = self.gain(parent, parent_imp, &left);
        (gain > 0.0).then_some(Split {
            feature: f,
            threshold,
            gain,
        })
    }

    /// Stable partition of `[start, end)` in every feature order; returns the
    /// size of the left part.
    fn partition(&mut self, start: usize, end: usize, split: Split) -> usize {
        let col = self.x.column(split.feature);
        let base = split.feature * self.n_active;
        for &r in &self.order[base + start..base + end] {
            self.goes_left[r as usize] = col[r as usize] <= split.threshold;
        }
        let mut n_left = 0;
        for f in 0..self.features.len() {
            let base = f * self.n_active;
            let seg = &mut self.order[base + start..base + end];
            let mut li = 0;
            let mut ri = 0;
            for k in 0..seg.len() {
                let r = seg[k];
                if self.goes_left[r as usize] {
                    seg[li] = r;
                    li += 1;
                } else {
                    self.scratch[ri] = r;
                    ri += 1;
                }
            }
            seg[li..].copy_from_slice(&self.scratch[..ri]);
            n_left = li;
        }
        n_left
    }
}

/// Midpoint threshold that keeps `a` on the left and `b` on the right.
#[inline]
fn midpoint(a: f64, b: f64) -> f64 {
    let m = a * 0.5 + b * 0.5;
    if m >= a && m < b {
        m
    } else {
        a
    }
}

/// CART classification tree with Gini impurity and exhaustive midpoint scan.
pub fn fit_tree(x: &ColumnMatrix, y: &[u8], spec: &LearnerSpec) -> Result<TrainedBaseModel> {
    check_training_data(x, y)?;
    spec.validate()?;
    let target: Vec<f64> = y.iter().map(|&v| f64::from(v)).collect();
    let weight = alloc::vec![1.0; y.len()];
    let count = alloc::vec![1u32; y.len()];
    let samples = Samples {
        target: &target,
        weight: &weight,
        count: &count,
        hess: None,
    };
    let cfg = GrowConfig {
        criterion: Criterion::Gini,
        thresholds: ThresholdRule::Exhaustive,
        max_depth: spec.params.max_depth,
        min_samples_split: spec.params.min_samples_split,
        max_features: spec.params.max_features.unwrap_or(x.n_cols()).min(x.n_cols()),
    };
    let mut rng = crate::math::rng(spec.seed);
    let tree = grow(x, &SortedColumns::new(x), &samples, cfg, &mut rng);
    Ok(TrainedBaseModel {
        spec: *spec,
        n_features: x.n_cols(),
        params: ModelParams::Tree { tree },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::LearnerKind;
    use crate::metrics::auc_roc;
    use alloc::vec;

    fn tree_of(m: &TrainedBaseModel) -> &Tree {
        match &m.params {
            ModelParams::Tree { tree } => tree,
            _ => unreachable!(),
        }
    }

    #[test]
    fn pure_root_is_single_leaf() {
        let x = ColumnMatrix::from_rows(&[vec![0.1], vec![0.5], vec![0.9]]).unwrap();
        let m = fit_tree(&x, &[1, 1, 1], &LearnerSpec::new(LearnerKind::Tree)).unwrap();
        assert_eq!(tree_of(&m).n_nodes(), 1);
        assert_eq!(m.predict_proba(&x).unwrap(), vec![1.0; 3]);
    }

    #[test]
    fn separable_1d_gives_depth_one() {
        let x = ColumnMatrix::from_rows(&[vec![0.1], vec![0.2], vec![0.8], vec![0.9]]).unwrap();
        let y = [0, 0, 1, 1];
        let m = fit_tree(&x, &y, &LearnerSpec::new(LearnerKind::Tree)).unwrap();
        let t = tree_of(&m);
        assert_eq!(t.depth(), 1);
        assert!((t.threshold[0] - 0.5).abs() < 1e-15);
        assert_eq!(auc_roc(&m.predict_proba(&x).unwrap(), &y).unwrap(), 1.0);
    }

    #[test]
    fn min_samples_split_above_n_gives_base_rate() {
        let x = ColumnMatrix::from_rows(&[vec![0.1], vec![0.2], vec![0.8], vec![0.9]]).unwrap();
        let mut spec = LearnerSpec::new(LearnerKind::Tree);
        spec.params.min_samples_split = 5;
        let m = fit_tree(&x, &[0, 1, 1, 1], &spec).unwrap();
        assert_eq!(m.predict_proba(&x).unwrap(), vec![0.75; 4]);
    }

    #[test]
    fn ties_prefer_lower_feature_index() {
        // Both features separate the classes perfectly.
        let x = ColumnMatrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let m = fit_tree(&x, &[0, 1], &LearnerSpec::new(LearnerKind::Tree)).unwrap();
        assert_eq!(tree_of(&m).feature[0], 0);
    }

    #[test]
    fn midpoint_never_sends_upper_value_left() {
        let a = 1.0f64;
        let b = f64::from_bits(a.to_bits() + 1);
        let m = midpoint(a, b);
        assert!(m >= a && m < b);
        assert_eq!(midpoint(0.2, 0.4), 0.30000000000000004);
    }

    #[test]
    fn empty_input_rejected() {
        let x = ColumnMatrix::new(0, vec![vec![]]).unwrap();
        assert!(fit_tree(&x, &[], &LearnerSpec::new(LearnerKind::Tree)).is_err());
    }

    #[test]
    fn grown_trees_are_well_formed() {
        use rand::Rng;
        let mut r = crate::math::rng(5);
        let rows: Vec<Vec<f64>> = (0..300)
            .map(|_| (0..4).map(|_| r.random::<f64>()).collect())
            .collect();
        let y: Vec<u8> = rows
            .iter()
            .map(|v| u8::from(v[0] + 0.3 * r.random::<f64>() > 0.6))
            .collect();
        let x = ColumnMatrix::from_rows(&rows).unwrap();
        let m = fit_tree(&x, &y, &LearnerSpec::new(LearnerKind::Tree)).unwrap();
        let t = tree_of(&m);
        t.validate().unwrap();
        assert_eq!(t.n_nodes(), 2 * t.n_leaves() - 1);
        assert!(t.depth() <= 8);
        assert!(m.predict_proba(&x).unwrap().iter().all(|p| (0.0..=1.0).contains(p)));
    }
}
