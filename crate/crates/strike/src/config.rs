//! Run configuration: a JSON file plus `--key value` overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use strike_core::grouping::{
    correlation_partition, manual_partition, mi_partition, random_round_robin_partition,
    FeatureGroupPartition, GroupSpec, GroupingStrategy,
};
use strike_core::learners::{Hyperparams, LearnerKind, LearnerSpec};
use strike_core::stacking::{MetaKind, StrikeConfig};
use strike_core::tabular::TabularDataset;

use crate::error::{CliError, CliResult};

pub const DEFAULT_POOL: [LearnerKind; 5] = [
    LearnerKind::Gbdt,
    LearnerKind::Forest,
    LearnerKind::ExtraTrees,
    LearnerKind::AdaBoost,
    LearnerKind::Logreg,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupingConfig {
    #[serde(default = "default_strategy")]
    pub strategy: GroupingStrategy,
    /// Number of groups for the automatic strategies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups: Option<usize>,
    /// Group configuration file for the manual strategy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<String>,
    #[serde(default)]
    pub seed: u64,
    /// Quantile bins used by the `mi` strategy.
    #[serde(default = "default_bins")]
    pub bins: usize,
}

impl Default for GroupingConfig {
    fn default() -> Self {
        GroupingConfig {
            strategy: default_strategy(),
            groups: None,
            config: None,
            seed: 0,
            bins: default_bins(),
        }
    }
}

/// A pool entry is either a learner name or an object with overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PoolEntry {
    Kind(LearnerKind),
    Custom(CustomLearner),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomLearner {
    pub kind: LearnerKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_samples_split: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_estimators: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_features: Option<usize>,
}

impl PoolEntry {
    pub fn spec(&self) -> LearnerSpec {
        match self {
            PoolEntry::Kind(k) => LearnerSpec::new(*k),
            PoolEntry::Custom(c) => {
                let d = Hyperparams::defaults(c.kind);
                LearnerSpec {
                    kind: c.kind,
                    params: Hyperparams {
                        l2: c.l2.unwrap_or(d.l2),
                        max_depth: c.max_depth.unwrap_or(d.max_depth),
                        min_samples_split: c.min_samples_split.unwrap_or(d.min_samples_split),
                        n_estimators: c.n_estimators.unwrap_or(d.n_estimators),
                        learning_rate: c.learning_rate.unwrap_or(d.learning_rate),
                        max_features: c.max_features.or(d.max_features),
                    },
                    seed: 0,
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: String,
    pub label_column: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_k_folds")]
    pub k_folds: usize,
    #[serde(default = "default_train_frac")]
    pub train_frac: f64,
    #[serde(default)]
    pub grouping: GroupingConfig,
    #[serde(default = "default_pool")]
    pub pool: Vec<PoolEntry>,
    #[serde(default = "default_top_k")]
    pub top_k: usize,
    #[serde(default)]
    pub meta: MetaKind,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    /// Directory that relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_strategy() -> GroupingStrategy {
    GroupingStrategy::Manual
}
fn default_bins() -> usize {
    10
}
fn default_k_folds() -> usize {
    5
}
fn default_train_frac() -> f64 {
    0.7
}
fn default_top_k() -> usize {
    3
}
fn default_output_dir() -> String {
    "strike_out".into()
}
fn default_pool() -> Vec<PoolEntry> {
    DEFAULT_POOL.iter().map(|&k| PoolEntry::Kind(k)).collect()
}

/// Command-line values that replace entries of the configuration file.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// Input CSV with a header row.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    pub label_column: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub k_folds: Option<usize>,
    #[arg(long)]
    pub train_frac: Option<f64>,
    /// Grouping strategy: manual, corr, mi or random.
    #[arg(long)]
    pub strategy: Option<String>,
    /// Number of groups for corr, mi and random.
    #[arg(long)]
    pub groups: Option<usize>,
    /// Group configuration JSON for the manual strategy.
    #[arg(long)]
    pub group_config: Option<PathBuf>,
    #[arg(long)]
    pub grouping_seed: Option<u64>,
    /// Comma-separated learner kinds.
    #[arg(long)]
    pub pool: Option<String>,
    #[arg(long)]
    pub top_k: Option<usize>,
    /// Meta-learner: logistic or additive_binned.
    #[arg(long)]
    pub meta: Option<String>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

fn absolute(p: &Path) -> String {
    if p.is_absolute() {
        p.display().to_string()
    } else {
        std::env::current_dir()
            .map(|d| d.join(p))
            .unwrap_or_else(|_| p.to_path_buf())
            .display()
            .to_string()
    }
}

impl Overrides {
    fn apply(&self, v: &mut Map<String, Value>) {
        let mut set = |k: &str, val: Value| {
            v.insert(k.to_string(), val);
        };
        if let Some(p) = &self.dataset {
            set("dataset", json!(absolute(p)));
        }
        if let Some(s) = &self.label_column {
            set("label_column", json!(s));
        }
        if let Some(s) = self.seed {
            set("seed", json!(s));
        }
        if let Some(k) = self.k_folds {
            set("k_folds", json!(k));
        }
        if let Some(f) = self.train_frac {
            set("train_frac", json!(f));
        }
        if let Some(p) = &self.pool {
            let kinds: Vec<&str> = p.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
            set("pool", json!(kinds));
        }
        if let Some(k) = self.top_k {
            set("top_k", json!(k));
        }
        if let Some(m) = &self.meta {
            set("meta", json!(m));
        }
        if let Some(p) = &self.output_dir {
            set("output_dir", json!(absolute(p)));
        }
        let grouping = v
            .entry("grouping")
            .or_insert_with(|| Value::Object(Map::new()));
        if let Value::Object(g) = grouping {
            if let Some(s) = &self.strategy {
                g.insert("strategy".into(), json!(s));
            }
            if let Some(n) = self.groups {
                g.insert("groups".into(), json!(n));
            }
            if let Some(p) = &self.group_config {
                g.insert("config".into(), json!(absolute(p)));
            }
            if let Some(s) = self.grouping_seed {
                g.insert("seed".into(), json!(s));
            }
        }
    }
}

impl RunConfig {
    /// Read `path` (if any), apply overrides and validate.
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> CliResult<Self> {
        let (mut value, base_dir) = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::read(p, e))?;
                let v: Value = serde_json::from_str(&text)
                    .map_err(|e| CliError::config(format!("{}: {e}", p.display())))?;
                let dir = p.parent().map(Path::to_path_buf).unwrap_or_default();
                (v, dir)
            }
            None => (Value::Object(Map::new()), PathBuf::from(".")),
        };
        let Value::Object(map) = &mut value else {
            return Err(CliError::config("configuration must be a JSON object"));
        };
        overrides.apply(map);
        let mut cfg = Self::from_value(value)?;
        cfg.base_dir = base_dir;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_value(value: Value) -> CliResult<Self> {
        serde_path_to_error::deserialize(value).map_err(|e| {
            let path = e.path().to_string();
            CliError::config(format!("config field `{path}`: {}", e.inner()))
        })
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |field: &str, why: &str| Err(CliError::config(format!("config field `{field}`: {why}")));
        if self.k_folds < 2 {
            return bad("k_folds", "must be at least 2");
        }
        if !(self.train_frac > 0.0 && self.train_frac < 1.0) {
            return bad("train_frac", "must be strictly between 0 and 1");
        }
        if self.top_k == 0 {
            return bad("top_k", "must be at least 1");
        }
        if self.pool.is_empty() {
            return bad("pool", "must name at least one learner");
        }
        for (i, entry) in self.pool.iter().enumerate() {
            entry
                .spec()
                .validate()
                .map_err(|e| CliError::config(format!("config field `pool[{i}]`: {e}")))?;
        }
        if self.grouping.bins < 2 {
            return bad("grouping.bins", "must be at least 2");
        }
        match self.grouping.strategy {
            GroupingStrategy::Manual => {
                if self.grouping.config.is_none() {
                    return bad("grouping.config", "required for the manual strategy");
                }
            }
            _ => {
                if self.grouping.groups.is_none() {
                    return bad("grouping.groups", "required for automatic strategies");
                }
            }
        }
        Ok(())
    }

    pub fn resolve(&self, p: &str) -> PathBuf {
        let path = Path::new(p);
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn dataset_path(&self) -> PathBuf {
        self.resolve(&self.dataset)
    }

    pub fn output_path(&self) -> PathBuf {
        self.resolve(&self.output_dir)
    }

    pub fn pool_specs(&self) -> Vec<LearnerSpec> {
        self.pool.iter().map(PoolEntry::spec).collect()
    }

    pub fn strike_config(&self) -> StrikeConfig {
        StrikeConfig {
            k_folds: self.k_folds,
            top_k: self.top_k,
            meta_kind: self.meta,
            master_seed: self.seed,
        }
    }

    /// The manual group specification, if one is configured.
    pub fn group_spec(&self) -> CliResult<Option<GroupSpec>> {
        let Some(p) = &self.grouping.config else {
            return Ok(None);
        };
        let path = self.resolve(p);
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::read(&path, e))?;
        let mut de = serde_json::Deserializer::from_str(&text);
        serde_path_to_error::deserialize(&mut de)
            .map(Some)
            .map_err(|e| {
                CliError::config(format!(
                    "{} field `{}`: {}",
                    path.display(),
                    e.path(),
                    e.inner()
                ))
            })
    }

    /// Build the configured partition over the preprocessed training set.
    pub fn partition(&self, ds: &TabularDataset) -> CliResult<FeatureGroupPartition> {
        let g = self.grouping.groups.unwrap_or(0);
        let p = match self.grouping.strategy {
            GroupingStrategy::Manual => {
                let spec = self.group_spec()?.expect("validated");
                manual_partition(&spec, ds.feature_names())?
            }
            GroupingStrategy::Corr => correlation_partition(ds.x(), g)?,
            GroupingStrategy::Mi => mi_partition(ds.x(), g, self.grouping.bins)?,
            GroupingStrategy::Random => {
                random_round_robin_partition(ds.n_features(), g, self.grouping.seed)?
            }
        };
        Ok(p)
    }
}
