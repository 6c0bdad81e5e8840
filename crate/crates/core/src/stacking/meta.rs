use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::oof::OofColumn;
use crate::cmi::{bin_of, quantile_edges};
use crate::error::{Error, Result};
use crate::learners::{fit_logistic_irls, LearnerKind};
use crate::math;
use crate::matrix::ColumnMatrix;

pub const META_L2: f64 = 1e-6;
pub const META_BINS: usize = 16;
pub const BACKFIT_PASSES: usize = 20;
pub const BACKFIT_TOL: f64 = 1e-6;
/// Largest per-bin change in one Newton update; bins that are pure in one
/// class would otherwise take huge steps.
const MAX_BIN_STEP: f64 = 8.0;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetaColumn {
    pub group: String,
    pub kind: LearnerKind,
}

/// Logit meta-features, one column per selected OOF column.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaDataset {
    pub x: ColumnMatrix,
    pub y: Vec<u8>,
    pub columns: Vec<MetaColumn>,
}

impl MetaDataset {
    pub fn select_rows(&self, rows: &[usize]) -> MetaDataset {
        MetaDataset {
            x: self.x.select_rows(rows),
            y: rows.iter().map(|&i| self.y[i]).collect(),
            columns: self.columns.clone(),
        }
    }
}

/// Clip, convert to logits and concatenate in group order, keeping each
/// group's columns in the given (descending AUC) order.
pub fn build_meta_dataset(selected: &[Vec<OofColumn>], y: &[u8]) -> Result<MetaDataset> {
    let mut cols = Vec::new();
    let mut meta = Vec::new();
    for c in selected.iter().flatten() {
        if c.probabilities.len() != y.len() {
            return Err(Error::LengthMismatch {
                context: "meta-feature column",
                expected: y.len(),
                actual: c.probabilities.len(),
            });
        }
        cols.push(c.probabilities.iter().map(|&p| math::clipped_logit(p)).collect());
        meta.push(MetaColumn {
            group: c.group.clone(),
            kind: c.kind,
        });
    }
    if cols.is_empty() {
        return Err(Error::Empty("meta-features"));
    }
    Ok(MetaDataset {
        x: ColumnMatrix::new(y.len(), cols)?,
        y: y.to_vec(),
        columns: meta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MetaKind {
    #[default]
    Logistic,
    AdditiveBinned,
}

impl MetaKind {
    pub const ALL: [MetaKind; 2] = [MetaKind::Logistic, MetaKind::AdditiveBinned];

    pub fn name(self) -> &'static str {
        match self {
            MetaKind::Logistic => "logistic",
            MetaKind::AdditiveBinned => "additive_binned",
        }
    }
}

impl core::str::FromStr for MetaKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logistic" => Ok(MetaKind::Logistic),
            "additive_binned" => Ok(MetaKind::AdditiveBinned),
            _ => Err(Error::param("meta", format!("unknown meta-learner kind {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedShape {
    /// Strictly increasing; a value goes to the bin counting edges below it.
    pub edges: Vec<f64>,
    pub contributions: Vec<f64>,
}

impl BinnedShape {
    fn eval(&self, v: f64) -> f64 {
        self.contributions[bin_of(&self.edges, v)]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetaLearner {
    Logistic {
        intercept: f64,
        weights: Vec<f64>,
    },
    AdditiveBinned {
        intercept: f64,
        shapes: Vec<BinnedShape>,
    },
}

impl MetaLearner {
    pub fn kind(&self) -> MetaKind {
        match self {
            MetaLearner::Logistic { .. } => MetaKind::Logistic,
            MetaLearner::AdditiveBinned { .. } => MetaKind::AdditiveBinned,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            MetaLearner::Logistic { weights, .. } => weights.len(),
            MetaLearner::AdditiveBinned { shapes, .. } => shapes.len(),
        }
    }

    pub fn decision(&self, x: &ColumnMatrix) -> Result<Vec<f64>> {
        if x.n_cols() != self.n_features() {
            return Err(Error::LengthMismatch {
                context: "meta-features",
                expected: self.n_features(),
                actual: x.n_cols(),
            });
        }
        let n = x.n_rows();
        Ok(match self {
            MetaLearner::Logistic { intercept, weights } => {
                let mut z = alloc::vec![*intercept; n];
                for (j, w) in weights.iter().enumerate() {
                    for (zi, v) in z.iter_mut().zip(x.column(j)) {
                        *zi += w * v;
                    }
                }
                z
            }
            MetaLearner::AdditiveBinned { intercept, shapes } => {
                let mut z = alloc::vec![*intercept; n];
                for (j, s) in shapes.iter().enumerate() {
                    for (zi, &v) in z.iter_mut().zip(x.column(j)) {
                        *zi += s.eval(v);
                    }
                }
                z
            }
        })
    }

    pub fn predict_proba(&self, x: &ColumnMatrix) -> Result<Vec<f64>> {
        Ok(self.decision(x)?.into_iter().map(math::sigmoid).collect())
    }
}

pub fn fit_meta(meta: &MetaDataset, kind: MetaKind) -> Result<MetaLearner> {
    if meta.y.is_empty() {
        return Err(Error::Empty("meta rows"));
    }
    let pos = meta.y.iter().filter(|&&v| v == 1).count();
    if pos == 0 || pos == meta.y.len() {
        return Err(Error::SingleClass("meta-learner training labels".into()));
    }
    match kind {
        MetaKind::Logistic => {
            let fit = fit_logistic_irls(&meta.x, &meta.y, META_L2)?;
            Ok(MetaLearner::Logistic {
                intercept: fit.intercept,
                weights: fit.weights,
            })
        }
        MetaKind::AdditiveBinned => fit_additive_binned(&meta.x, &meta.y),
    }
}

/// Cyclic backfitting of per-feature step functions on logistic loss.
fn fit_additive_binned(x: &ColumnMatrix, y: &[u8]) -> Result<MetaLearner> {
    x.ensure_finite()?;
    let n = y.len();
    let d = x.n_cols();
    let rate = math::clip_prob(
        y.iter().map(|&v| f64::from(v)).sum::<f64>() / n as f64,
        math::PROB_CLIP,
    );
    let mut intercept = math::ln(rate / (1.0 - rate));
    let mut shapes = Vec::with_capacity(d);
    let mut bins: Vec<Vec<usize>> = Vec::with_capacity(d);
    for j in 0..d {
        let edges = quantile_edges(x.column(j), META_BINS)?;
        bins.push(x.column(j).iter().map(|&v| bin_of(&edges, v)).collect());
        shapes.push(BinnedShape {
            contributions: alloc::vec![0.0; edges.len() + 1],
            edges,
        });
    }
    let mut f = alloc::vec![intercept; n];
    for _ in 0..BACKFIT_PASSES {
        let mut max_change = 0.0f64;
        for j in 0..d {
            let nb = shapes[j].contributions.len();
            let mut grad = alloc::vec![0.0; nb];
            let mut hess = alloc::vec![0.0; nb];
            let mut count = alloc::vec![0usize; nb];
            for i in 0..n {
                let p = math::sigmoid(f[i]);
                let b = bins[j][i];
                grad[b] += f64::from(y[i]) - p;
                hess[b] += p * (1.0 - p);
                count[b] += 1;
            }
            let step: Vec<f64> = grad
                .iter()
                .zip(&hess)
                .map(|(g, h)| (g / h.max(1e-12)).clamp(-MAX_BIN_STEP, MAX_BIN_STEP))
                .collect();
            let contrib = &mut shapes[j].contributions;
            for (c, s) in contrib.iter_mut().zip(&step) {
                *c += s;
            }
            let centre: f64 = contrib
                .iter()
                .zip(&count)
                .map(|(c, &k)| c * k as f64)
                .sum::<f64>()
                / n as f64;
            for c in contrib.iter_mut() {
                *c -= centre;
            }
            intercept += centre;
            for (b, s) in step.iter().enumerate() {
                if count[b] > 0 {
                    max_change = max_change.max(s.abs());
                }
            }
            for i in 0..n {
                f[i] += step[bins[j][i]];
            }
        }
        if max_change < BACKFIT_TOL {
            break;
        }
    }
    Ok(MetaLearner::AdditiveBinned { intercept, shapes })
}
