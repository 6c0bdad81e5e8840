//! Synthetic datasets with known group structure.
//!
//! * `conditional_independent`: `Y ~ Bernoulli(pi)`, then every group is drawn
//!   from class-conditional Gaussians (identity covariance, class mean shift)
//!   independently of the other groups given `Y`. The true log-odds are a sum
//!   of one linear term per group.
//! * `group_nonlinear`: each group casts a noisy vote on `Y`, encoded in the
//!   sign pattern of a feature pair (an XOR with unbalanced quadrants) plus
//!   pure-noise features. Groups are independent given `Y`.
//! * `xor_meta`: features are standard normal and each group adds a V-shaped
//!   function of its own linear score to the true logit, so linear per-group
//!   logits have to be combined nonlinearly.

use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use strike_core::grouping::{GroupSpec, GroupSpecEntry};
use strike_core::math;
use strike_core::metrics::auc_roc;
use strike_core::tabular::{RawColumn, RawTable};

use crate::csv_io::CsvRecords;
use crate::error::{CliError, CliResult};

pub const LABEL_COLUMN: &str = "target";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum FixtureKind {
    ConditionalIndependent,
    GroupNonlinear,
    XorMeta,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixtureParams {
    pub n: usize,
    pub seed: u64,
    pub groups: usize,
    pub features_per_group: usize,
}

impl FixtureParams {
    pub fn new(n: usize, seed: u64) -> Self {
        FixtureParams {
            n,
            seed,
            groups: 3,
            features_per_group: 12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub feature_names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
    pub y: Vec<u8>,
    /// Log-odds of `Y = 1` under the generating distribution.
    pub true_logit: Vec<f64>,
    pub groups: GroupSpec,
}

/// Per-row generator shared by fixture creation and Monte Carlo estimates.
struct Sampler {
    kind: FixtureKind,
    groups: usize,
    per_group: usize,
    /// Class-1 mean shift per feature (conditional_independent).
    shift: Vec<Vec<f64>>,
    prior_logit: f64,
}

const POSITIVE_RATE: f64 = 0.3;
/// Separation (Mahalanobis distance between class means) of successive
/// groups in `conditional_independent`.
const SEPARATION: [f64; 3] = [0.9, 0.75, 0.6];
const VOTE_ACCURACY: f64 = 0.8;
const PAIR_OFFSET: f64 = 0.5;

impl Sampler {
    fn new(kind: FixtureKind, groups: usize, per_group: usize) -> Self {
        let shift = (0..groups)
            .map(|g| {
                let raw: Vec<f64> = (0..per_group).map(|j| 1.0 / ((j + 1) as f64).sqrt()).collect();
                let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
                let d = SEPARATION[g % SEPARATION.len()];
                raw.iter().map(|v| v * d / norm).collect()
            })
            .collect();
        let prior = match kind {
            FixtureKind::ConditionalIndependent => POSITIVE_RATE,
            _ => 0.5,
        };
        Sampler {
            kind,
            groups,
            per_group,
            shift,
            prior_logit: (prior / (1.0 - prior)).ln(),
        }
    }

    fn normal(rng: &mut ChaCha8Rng) -> f64 {
        rng.sample(StandardNormal)
    }

    /// Fill `x` with one row and return `(y, true_logit)`.
    fn row(&self, rng: &mut ChaCha8Rng, x: &mut [f64]) -> (u8, f64) {
        let p = self.per_group;
        match self.kind {
            FixtureKind::ConditionalIndependent => {
                let y = u8::from(rng.random::<f64>() < POSITIVE_RATE);
                let mut logit = self.prior_logit;
                for g in 0..self.groups {
                    let mut sq = 0.0;
                    for j in 0..p {
                        let mu = self.shift[g][j];
                        let v = f64::from(y) * mu + Self::normal(rng);
                        x[g * p + j] = v;
                        logit += mu * v;
                        sq += mu * mu;
                    }
                    logit -= 0.5 * sq;
                }
                (y, logit)
            }
            FixtureKind::GroupNonlinear => {
                let y = u8::from(rng.random::<f64>() < 0.5);
                let weight = (VOTE_ACCURACY / (1.0 - VOTE_ACCURACY)).ln();
                let mut logit = self.prior_logit;
                for g in 0..self.groups {
                    let agree = rng.random::<f64>() < VOTE_ACCURACY;
                    let vote = if agree { y } else { 1 - y };
                    let s = if vote == 1 { 1.0 } else { -1.0 };
                    let a = PAIR_OFFSET + Self::normal(rng);
                    let b = a.signum() * s * Self::normal(rng).abs();
                    x[g * p] = a;
                    x[g * p + 1] = b;
                    for j in 2..p {
                        x[g * p + j] = Self::normal(rng);
                    }
                    logit += s * weight;
                }
                (y, logit)
            }
            FixtureKind::XorMeta => {
                let mut logit = 0.0;
                for g in 0..self.groups {
                    let mut s = 0.0;
                    for j in 0..p {
                        let v = Self::normal(rng);
                        x[g * p + j] = v;
                        s += v;
                    }
                    s /= (p as f64).sqrt();
                    logit += 0.5 * s + 1.5 * s.abs() - 1.2;
                }
                let y = u8::from(rng.random::<f64>() < math::sigmoid(logit));
                (y, logit)
            }
        }
    }
}

pub fn generate(kind: FixtureKind, params: &FixtureParams) -> CliResult<Fixture> {
    let g = params.groups;
    let p = params.features_per_group;
    if g == 0 || p == 0 || params.n == 0 {
        return Err(CliError::config("fixture needs n, groups and features per group >= 1"));
    }
    if kind == FixtureKind::GroupNonlinear && p < 2 {
        return Err(CliError::config("group_nonlinear needs at least 2 features per group"));
    }
    let sampler = Sampler::new(kind, g, p);
    let mut rng = math::rng(params.seed);
    let d = g * p;
    let mut columns = vec![Vec::with_capacity(params.n); d];
    let mut y = Vec::with_capacity(params.n);
    let mut true_logit = Vec::with_capacity(params.n);
    let mut row = vec![0.0; d];
    for _ in 0..params.n {
        let (label, logit) = sampler.row(&mut rng, &mut row);
        for (c, &v) in columns.iter_mut().zip(&row) {
            c.push(v);
        }
        y.push(label);
        true_logit.push(logit);
    }
    let feature_names: Vec<String> = (0..g)
        .flat_map(|gi| (0..p).map(move |j| format!("g{gi}_f{j}")))
        .collect();
    let groups = GroupSpec {
        groups: (0..g)
            .map(|gi| GroupSpecEntry {
                name: format!("g{gi}"),
                features: feature_names[gi * p..(gi + 1) * p].to_vec(),
            })
            .collect(),
    };
    Ok(Fixture {
        feature_names,
        columns,
        y,
        true_logit,
        groups,
    })
}

/// AUC of the true log-odds on `samples` fresh draws: the best AUC any
/// classifier can reach on this distribution.
pub fn bayes_auc(kind: FixtureKind, params: &FixtureParams, samples: usize) -> f64 {
    let sampler = Sampler::new(kind, params.groups, params.features_per_group);
    let mut rng = math::rng(math::mix(&[params.seed, 0xBA7E5]));
    let mut row = vec![0.0; params.groups * params.features_per_group];
    let (mut y, mut logit) = (Vec::with_capacity(samples), Vec::with_capacity(samples));
    for _ in 0..samples {
        let (label, l) = sampler.row(&mut rng, &mut row);
        y.push(label);
        logit.push(l);
    }
    auc_roc(&logit, &y).expect("both classes in a large sample")
}

impl Fixture {
    pub fn n_rows(&self) -> usize {
        self.y.len()
    }

    pub fn records(&self) -> CsvRecords {
        let mut header = self.feature_names.clone();
        header.push(LABEL_COLUMN.into());
        let records = (0..self.n_rows())
            .map(|i| {
                let mut r: Vec<String> = self.columns.iter().map(|c| c[i].to_string()).collect();
                r.push(self.y[i].to_string());
                r
            })
            .collect();
        CsvRecords { header, records }
    }

    /// The same table that reading the written CSV would produce.
    pub fn raw_table(&self) -> RawTable {
        let columns = self
            .feature_names
            .iter()
            .zip(&self.columns)
            .map(|(name, c)| {
                let cells: Vec<String> = c.iter().map(|v| v.to_string()).collect();
                RawColumn::from_cells(name.as_str(), &cells)
            })
            .collect();
        RawTable::new(columns, Some(LABEL_COLUMN.into()), Some(self.y.clone()), self.n_rows())
            .expect("consistent fixture")
    }

    /// Write `data.csv` and `groups.json` into `dir`.
    pub fn write(&self, dir: &Path) -> CliResult<()> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::write(dir, e))?;
        self.records().write(&dir.join("data.csv"))?;
        let groups = dir.join("groups.json");
        let text = serde_json::to_string_pretty(&self.groups)
            .map_err(|e| CliError::runtime(e.to_string()))?;
        std::fs::write(&groups, text).map_err(|e| CliError::write(&groups, e))
    }
}
