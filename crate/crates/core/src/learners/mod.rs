//! Base learners sharing one fit / predict-probability contract.

mod adaboost;
mod forest;
mod gbdt;
mod logreg;
mod tree;

pub use adaboost::{exponential_loss_trace, fit_adaboost};
pub use forest::fit_forest;
pub use gbdt::{fit_gbdt, fit_gbdt_traced};
pub use logreg::{fit_logistic_irls, fit_logreg, logistic_objective, LogisticFit};
pub use tree::{fit_tree, Tree};

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ColumnMatrix;
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LearnerKind {
    Logreg,
    Tree,
    Forest,
    #[serde(rename = "extratrees")]
    ExtraTrees,
    Gbdt,
    #[serde(rename = "adaboost")]
    AdaBoost,
}

impl LearnerKind {
    pub const ALL: [LearnerKind; 6] = [
        LearnerKind::Logreg,
        LearnerKind::Tree,
        LearnerKind::Forest,
        LearnerKind::ExtraTrees,
        LearnerKind::Gbdt,
        LearnerKind::AdaBoost,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LearnerKind::Logreg => "logreg",
            LearnerKind::Tree => "tree",
            LearnerKind::Forest => "forest",
            LearnerKind::ExtraTrees => "extratrees",
            LearnerKind::Gbdt => "gbdt",
            LearnerKind::AdaBoost => "adaboost",
        }
    }

    /// Stable numeric tag used when mixing task seeds.
    pub fn seed_tag(self) -> u64 {
        self as u64 + 1
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LearnerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LearnerKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::param("kind", alloc::format!("unknown learner kind `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    /// L2 penalty for logistic regression.
    pub l2: f64,
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub n_estimators: usize,
    pub learning_rate: f64,
    /// Candidate features per split; `None` means the kind's default
    /// (all for single trees and boosting, `ceil(sqrt(d))` for forests).
    pub max_features: Option<usize>,
}

impl Hyperparams {
    pub fn defaults(kind: LearnerKind) -> Self {
        let base = Hyperparams {
            l2: 1e-6,
            max_depth: 8,
            min_samples_split: 2,
            n_estimators: 100,
            learning_rate: 0.1,
            max_features: None,
        };
        match kind {
            LearnerKind::Logreg | LearnerKind::Tree => base,
            LearnerKind::Forest | LearnerKind::ExtraTrees => Hyperparams {
                max_depth: 12,
                ..base
            },
            LearnerKind::Gbdt => Hyperparams {
                max_depth: 3,
                ..base
            },
            LearnerKind::AdaBoost => Hyperparams {
                max_depth: 1,
                ..base
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearnerSpec {
    pub kind: LearnerKind,
    pub params: Hyperparams,
    pub seed: u64,
}

impl LearnerSpec {
    pub fn new(kind: LearnerKind) -> Self {
        LearnerSpec {
            kind,
            params: Hyperparams::defaults(kind),
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.params;
        if !(p.l2 >= 0.0 && p.l2.is_finite()) {
            return Err(Error::param("l2", "must be finite and >= 0"));
        }
        if !(p.learning_rate >= 0.0 && p.learning_rate.is_finite()) {
            return Err(Error::param("learning_rate", "must be finite and >= 0"));
        }
        if p.n_estimators == 0 {
            return Err(Error::param("n_estimators", "must be >= 1"));
        }
        if p.max_depth == 0 {
            return Err(Error::param("max_depth", "must be >= 1"));
        }
        if p.min_samples_split < 2 && self.kind != LearnerKind::Logreg {
            return Err(Error::param("min_samples_split", "must be >= 2"));
        }
        if p.max_features == Some(0) {
            return Err(Error::param("max_features", "must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelParams {
    Logreg {
        intercept: f64,
        weights: Vec<f64>,
    },
    Tree {
        tree: Tree,
    },
    /// Random forest or extra trees: mean of per-tree leaf probabilities.
    Forest {
        trees: Vec<Tree>,
    },
    Gbdt {
        init_score: f64,
        learning_rate: f64,
        trees: Vec<Tree>,
    },
    AdaBoost {
        stumps: Vec<Tree>,
        alphas: Vec<f64>,
        base_rate: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedBaseModel {
    pub spec: LearnerSpec,
    pub n_features: usize,
    pub params: ModelParams,
}

impl TrainedBaseModel {
    pub fn kind(&self) -> LearnerKind {
        self.spec.kind
    }

    /// Per-row probability of the positive class.
    pub fn predict_proba(&self, x: &ColumnMatrix) -> Result<Vec<f64>> {
        if x.n_cols() != self.n_features {
            return Err(Error::LengthMismatch {
                context: "feature width",
                expected: self.n_features,
                actual: x.n_cols(),
            });
        }
        let n = x.n_rows();
        let out = match &self.params {
            ModelParams::Logreg { intercept, weights } => (0..n)
                .map(|i| {
                    let z = weights
                        .iter()
                        .enumerate()
                        .fold(*intercept, |acc, (j, w)| acc + w * x.get(i, j));
                    math::sigmoid(z)
                })
                .collect(),
            ModelParams::Tree { tree } => (0..n).map(|i| tree.predict_row(x, i)).collect(),
            ModelParams::Forest { trees } => {
                let mut sum = alloc::vec![0.0; n];
                for t in trees {
                    for (i, s) in sum.iter_mut().enumerate() {
                        *s += t.predict_row(x, i);
                    }
                }
                let m = trees.len() as f64;
                sum.into_iter().map(|s| (s / m).clamp(0.0, 1.0)).collect()
            }
            ModelParams::Gbdt {
                init_score,
                learning_rate,
                trees,
            } => {
                let mut f = alloc::vec![*init_score; n];
                for t in trees {
                    for (i, fi) in f.iter_mut().enumerate() {
                        *fi += learning_rate * t.predict_row(x, i);
                    }
                }
                f.into_iter().map(math::sigmoid).collect()
            }
            ModelParams::AdaBoost {
                stumps,
                alphas,
                base_rate,
            } => {
                if stumps.is_empty() {
                    alloc::vec![*base_rate; n]
                } else {
                    (0..n)
                        .map(|i| math::sigmoid(adaboost::score(stumps, alphas, x, i) / 2.0))
                        .collect()
                }
            }
        };
        Ok(out)
    }
}

pub(crate) fn check_training_data(x: &ColumnMatrix, y: &[u8]) -> Result<()> {
    if x.n_rows() == 0 {
        return Err(Error::Empty("training rows"));
    }
    if x.n_cols() == 0 {
        return Err(Error::Empty("training features"));
    }
    if y.len() != x.n_rows() {
        return Err(Error::LengthMismatch {
            context: "training labels",
            expected: x.n_rows(),
            actual: y.len(),
        });
    }
    if let Some(bad) = y.iter().find(|&&v| v > 1) {
        return Err(Error::InvalidLabel(alloc::format!("{bad}")));
    }
    x.ensure_finite()
}

pub(crate) fn base_rate(y: &[u8]) -> f64 {
    y.iter().map(|&v| f64::from(v)).sum::<f64>() / y.len() as f64
}

/// Fit any learner kind.
pub fn fit(spec: &LearnerSpec, x: &ColumnMatrix, y: &[u8]) -> Result<TrainedBaseModel> {
    spec.validate()?;
    match spec.kind {
        LearnerKind::Logreg => fit_logreg(x, y, spec),
        LearnerKind::Tree => fit_tree(x, y, spec),
        LearnerKind::Forest | LearnerKind::ExtraTrees => fit_forest(x, y, spec),
        LearnerKind::Gbdt => fit_gbdt(x, y, spec),
        LearnerKind::AdaBoost => fit_adaboost(x, y, spec),
    }
}
