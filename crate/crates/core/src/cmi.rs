//! Conditional mutual information between feature groups given the label.
//!
//! Each group is reduced to one scalar per row (its best base model's OOF
//! logit, or its first principal component), the scalars are quantile-binned
//! and a plug-in estimate is taken from the contingency tables.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::grouping::FeatureGroup;
use crate::learners::{LearnerKind, LearnerSpec};
use crate::math;
use crate::matrix::ColumnMatrix;
use crate::stacking::{generate_group_oof, select_top_models};
use crate::tabular::{stratified_kfold, TabularDataset};

pub const DEFAULT_BINS: usize = 10;
const PC_STEPS: usize = 200;
const PC_TOL: f64 = 1e-9;

/// Bin edges at the empirical quantiles `j/bins`, `j = 1..bins-1`, using the
/// nearest-rank rule. Duplicate edges are collapsed.
pub fn quantile_edges(values: &[f64], bins: usize) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::Empty("values to bin"));
    }
    if bins < 2 {
        return Err(Error::param("bins", "need at least two bins"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::param("values", "binning requires finite values"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut edges: Vec<f64> = Vec::with_capacity(bins - 1);
    for j in 1..bins {
        let rank = (j * n).div_ceil(bins);
        let e = sorted[rank.max(1) - 1];
        if edges.last() != Some(&e) {
            edges.push(e);
        }
    }
    Ok(edges)
}

/// Bin of `v`: the number of edges strictly below it.
#[inline]
pub fn bin_of(edges: &[f64], v: f64) -> usize {
    edges.partition_point(|&e| e < v)
}

pub fn quantile_bin(values: &[f64], bins: usize) -> Result<Vec<usize>> {
    let edges = quantile_edges(values, bins)?;
    Ok(values.iter().map(|&v| bin_of(&edges, v)).collect())
}

fn sorted_sum(mut terms: Vec<f64>) -> f64 {
    // Summing in a canonical order makes the estimate exactly invariant to
    // bin relabelling and argument order.
    terms.sort_by(f64::total_cmp);
    terms.iter().sum()
}

fn counts(a: &[usize]) -> BTreeMap<usize, u64> {
    let mut m = BTreeMap::new();
    for &v in a {
        *m.entry(v).or_insert(0) += 1;
    }
    m
}

/// Plug-in entropy in nats.
pub fn entropy(a: &[usize]) -> f64 {
    let n = a.len() as f64;
    let terms = counts(a)
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * math::ln(p)
        })
        .collect();
    sorted_sum(terms)
}

/// `sum c_ij ln(c_ij m / (c_i c_j))` terms for one contingency table over
/// `m` rows selected by `rows`.
fn mi_terms(a: &[usize], b: &[usize], rows: impl Iterator<Item = usize> + Clone, out: &mut Vec<f64>) {
    let mut ca = BTreeMap::new();
    let mut cb = BTreeMap::new();
    let mut cab = BTreeMap::new();
    let mut m = 0u64;
    for i in rows {
        *ca.entry(a[i]).or_insert(0u64) += 1;
        *cb.entry(b[i]).or_insert(0u64) += 1;
        *cab.entry((a[i], b[i])).or_insert(0u64) += 1;
        m += 1;
    }
    for (&(i, j), &c) in &cab {
        let num = (c as f64) * (m as f64);
        let den = (ca[&i] as f64) * (cb[&j] as f64);
        out.push(c as f64 * math::ln(num / den));
    }
}

/// Plug-in mutual information in nats, clamped at zero.
pub fn mutual_information(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            context: "mutual information",
            expected: a.len(),
            actual: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::Empty("mutual information input"));
    }
    let mut terms = Vec::new();
    mi_terms(a, b, 0..a.len(), &mut terms);
    Ok((sorted_sum(terms) / a.len() as f64).max(0.0))
}

/// Plug-in `I(A; B | Y)` in nats, clamped at zero.
pub fn conditional_mutual_information(a: &[usize], b: &[usize], y: &[u8]) -> Result<f64> {
    for (len, ctx) in [(b.len(), "cmi second argument"), (y.len(), "cmi labels")] {
        if len != a.len() {
            return Err(Error::LengthMismatch {
                context: ctx,
                expected: a.len(),
                actual: len,
            });
        }
    }
    let n_pos = y.iter().filter(|&&v| v == 1).count();
    if n_pos == 0 || n_pos == y.len() {
        return Err(Error::SingleClass("conditional mutual information".into()));
    }
    let mut terms = Vec::new();
    for class in [0u8, 1] {
        let rows = (0..y.len()).filter(move |&i| y[i] == class);
        mi_terms(a, b, rows, &mut terms);
    }
    Ok((sorted_sum(terms) / a.len() as f64).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SummaryMethod {
    #[default]
    OofLogit,
    FirstPc,
}

impl SummaryMethod {
    pub fn name(self) -> &'static str {
        match self {
            SummaryMethod::OofLogit => "oof_logit",
            SummaryMethod::FirstPc => "first_pc",
        }
    }
}

impl core::str::FromStr for SummaryMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "oof_logit" => Ok(SummaryMethod::OofLogit),
            "first_pc" => Ok(SummaryMethod::FirstPc),
            _ => Err(Error::param("method", alloc::format!("unknown summary method {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmiSettings {
    pub method: SummaryMethod,
    pub bins: usize,
    /// Folds and pool used by the `oof_logit` summary.
    pub k_folds: usize,
    pub pool: Vec<LearnerSpec>,
    pub seed: u64,
}

impl Default for CmiSettings {
    fn default() -> Self {
        CmiSettings {
            method: SummaryMethod::OofLogit,
            bins: DEFAULT_BINS,
            k_folds: 5,
            pool: alloc::vec![LearnerSpec::new(LearnerKind::Logreg)],
            seed: 0,
        }
    }
}

/// Projection of the centred columns onto their leading principal
/// component. Returns `(scores, degenerate)`; a group whose columns are all
/// constant yields a zero vector and `degenerate = true`.
pub fn first_principal_component(x: &ColumnMatrix, seed: u64) -> (Vec<f64>, bool) {
    let n = x.n_rows();
    let d = x.n_cols();
    let centred: Vec<Vec<f64>> = x
        .columns()
        .iter()
        .map(|c| {
            let m = math::mean(c);
            c.iter().map(|v| v - m).collect()
        })
        .collect();
    let mut cov = alloc::vec![0.0; d * d];
    for a in 0..d {
        for b in 0..=a {
            let s: f64 = centred[a].iter().zip(&centred[b]).map(|(u, v)| u * v).sum();
            cov[a * d + b] = s / n as f64;
            cov[b * d + a] = s / n as f64;
        }
    }
    let trace: f64 = (0..d).map(|a| cov[a * d + a]).sum();
    if !(trace > 0.0) {
        return (alloc::vec![0.0; n], true);
    }

    use rand::Rng;
    let mut r = math::rng(seed);
    let mut v: Vec<f64> = (0..d).map(|_| r.random::<f64>() + 0.5).collect();
    normalize(&mut v);
    for _ in 0..PC_STEPS {
        let mut w: Vec<f64> = (0..d)
            .map(|a| (0..d).map(|b| cov[a * d + b] * v[b]).sum())
            .collect();
        if normalize(&mut w) == 0.0 {
            return (alloc::vec![0.0; n], true);
        }
        let delta = v.iter().zip(&w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = w;
        if delta < PC_TOL {
            break;
        }
    }
    let lead = v
        .iter()
        .copied()
        .fold(0.0f64, |best, x| if x.abs() > best.abs() { x } else { best });
    if lead < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    let mut scores = alloc::vec![0.0; n];
    for (c, &w) in centred.iter().zip(&v) {
        for (s, &val) in scores.iter_mut().zip(c) {
            *s += w * val;
        }
    }
    (scores, false)
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = math::sqrt(v.iter().map(|x| x * x).sum());
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

/// One scalar summary per group, plus the names of degenerate groups.
pub fn group_summaries<E: Executor>(
    ds: &TabularDataset,
    groups: &[FeatureGroup],
    settings: &CmiSettings,
    exec: &E,
) -> Result<(Vec<Vec<f64>>, Vec<String>)> {
    let mut out = Vec::with_capacity(groups.len());
    let mut degenerate = Vec::new();
    match settings.method {
        SummaryMethod::FirstPc => {
            for (g, group) in groups.iter().enumerate() {
                let x = ds.x().select_columns(&group.columns);
                let (s, bad) = first_principal_component(&x, math::mix(&[settings.seed, g as u64]));
                if bad {
                    degenerate.push(group.name.clone());
                }
                out.push(s);
            }
        }
        SummaryMethod::OofLogit => {
            let folds = stratified_kfold(ds.y(), settings.k_folds, settings.seed)?;
            for (g, group) in groups.iter().enumerate() {
                let x = ds.x().select_columns(&group.columns);
                let cols = generate_group_oof(
                    &x,
                    ds.y(),
                    &settings.pool,
                    &folds,
                    &group.name,
                    g,
                    settings.seed,
                    exec,
                )?;
                let best = select_top_models(&cols, 1)?;
                out.push(best[0].probabilities.iter().map(|&p| math::clipped_logit(p)).collect());
            }
        }
    }
    Ok((out, degenerate))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmiMatrix {
    pub group_names: Vec<String>,
    /// Row-major `G x G`, in nats.
    pub values: Vec<Vec<f64>>,
    pub off_diagonal_mean: f64,
    pub method: SummaryMethod,
    pub bins: usize,
    pub n_samples: usize,
    pub degenerate_groups: Vec<String>,
}

/// Pairwise CMI between precomputed group summaries.
pub fn cmi_from_summaries<E: Executor>(
    names: &[String],
    summaries: &[Vec<f64>],
    y: &[u8],
    bins: usize,
    exec: &E,
) -> Result<Vec<Vec<f64>>> {
    let g = summaries.len();
    if g < 2 {
        return Err(Error::param("groups", "need at least two groups"));
    }
    if names.len() != g {
        return Err(Error::LengthMismatch {
            context: "group names",
            expected: g,
            actual: names.len(),
        });
    }
    let binned = summaries
        .iter()
        .map(|s| quantile_bin(s, bins))
        .collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(usize, usize)> = (0..g)
        .flat_map(|a| (a + 1..g).map(move |b| (a, b)))
        .collect();
    let cells = exec.map(pairs.len(), |t| {
        let (a, b) = pairs[t];
        conditional_mutual_information(&binned[a], &binned[b], y)
    });
    let mut m = alloc::vec![alloc::vec![0.0; g]; g];
    for (&(a, b), c) in pairs.iter().zip(cells) {
        let c = c?;
        m[a][b] = c;
        m[b][a] = c;
    }
    Ok(m)
}

/// Full CMI matrix between the given groups. Groups may overlap.
pub fn cmi_matrix<E: Executor>(
    ds: &TabularDataset,
    groups: &[FeatureGroup],
    settings: &CmiSettings,
    exec: &E,
) -> Result<CmiMatrix> {
    if groups.len() < 2 {
        return Err(Error::param("groups", "need at least two groups"));
    }
    if let Some(g) = groups.iter().find(|g| g.columns.is_empty()) {
        return Err(Error::Grouping(alloc::format!("group {} is empty", g.name)));
    }
    let (summaries, degenerate) = group_summaries(ds, groups, settings, exec)?;
    let names: Vec<String> = groups.iter().map(|g| g.name.clone()).collect();
    let values = cmi_from_summaries(&names, &summaries, ds.y(), settings.bins, exec)?;
    let g = groups.len();
    let off: Vec<f64> = (0..g)
        .flat_map(|a| (0..g).filter(move |&b| b != a).map(move |b| (a, b)))
        .map(|(a, b)| values[a][b])
        .collect();
    Ok(CmiMatrix {
        group_names: names,
        values,
        off_diagonal_mean: math::mean(&off),
        method: settings.method,
        bins: settings.bins,
        n_samples: ds.n_rows(),
        degenerate_groups: degenerate,
    })
}
