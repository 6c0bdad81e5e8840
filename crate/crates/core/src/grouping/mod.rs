//! Feature-group partitions: manual configuration, correlation or
//! mutual-information clustering, and the seeded round-robin baseline.

mod linkage;

pub use linkage::average_linkage;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::cmi;
use crate::error::{Error, Result};
use crate::math;
use crate::matrix::ColumnMatrix;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureGroup {
    pub name: String,
    pub columns: Vec<usize>,
}

impl FeatureGroup {
    pub fn new(name: impl Into<String>, columns: Vec<usize>) -> Self {
        FeatureGroup {
            name: name.into(),
            columns,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupingStrategy {
    Manual,
    Corr,
    Mi,
    Random,
}

impl GroupingStrategy {
    pub fn name(self) -> &'static str {
        match self {
            GroupingStrategy::Manual => "manual",
            GroupingStrategy::Corr => "corr",
            GroupingStrategy::Mi => "mi",
            GroupingStrategy::Random => "random",
        }
    }
}

impl core::str::FromStr for GroupingStrategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "manual" => Ok(GroupingStrategy::Manual),
            "corr" => Ok(GroupingStrategy::Corr),
            "mi" => Ok(GroupingStrategy::Mi),
            "random" => Ok(GroupingStrategy::Random),
            _ => Err(Error::param("strategy", format!("unknown grouping strategy {s:?}"))),
        }
    }
}

/// Disjoint named groups of column indices covering every feature.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureGroupPartition {
    pub groups: Vec<FeatureGroup>,
    pub strategy: GroupingStrategy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl FeatureGroupPartition {
    pub fn new(
        groups: Vec<FeatureGroup>,
        strategy: GroupingStrategy,
        seed: Option<u64>,
        n_features: usize,
    ) -> Result<Self> {
        let p = FeatureGroupPartition {
            groups,
            strategy,
            seed,
        };
        p.validate(n_features)?;
        Ok(p)
    }

    /// Every feature in one group named `name`.
    pub fn single(n_features: usize, name: &str) -> Result<Self> {
        Self::new(
            alloc::vec![FeatureGroup::new(name, (0..n_features).collect())],
            GroupingStrategy::Manual,
            None,
            n_features,
        )
    }

    pub fn n_groups(&self) -> usize {
        self.groups.len()
    }

    /// Check the disjoint, covering, non-empty invariant.
    pub fn validate(&self, n_features: usize) -> Result<()> {
        if self.groups.is_empty() {
            return Err(Error::Grouping("partition has no groups".into()));
        }
        let mut owner: Vec<Option<usize>> = alloc::vec![None; n_features];
        for (g, group) in self.groups.iter().enumerate() {
            if group.columns.is_empty() {
                return Err(Error::Grouping(format!("group {} is empty", group.name)));
            }
            if self.groups[..g].iter().any(|o| o.name == group.name) {
                return Err(Error::Grouping(format!("duplicate group name {}", group.name)));
            }
            for &c in &group.columns {
                let slot = owner.get_mut(c).ok_or_else(|| {
                    Error::Grouping(format!(
                        "group {} references column {c} of {n_features}",
                        group.name
                    ))
                })?;
                if let Some(prev) = slot {
                    return Err(Error::Grouping(format!(
                        "column {c} is in both {} and {}",
                        self.groups[*prev].name, group.name
                    )));
                }
                *slot = Some(g);
            }
        }
        if let Some(c) = owner.iter().position(Option::is_none) {
            return Err(Error::Grouping(format!("column {c} is unassigned")));
        }
        Ok(())
    }
}

/// Group configuration document: `{"groups": [{"name", "features"}]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub groups: Vec<GroupSpecEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpecEntry {
    pub name: String,
    pub features: Vec<String>,
}

fn pattern_matches(pattern: &str, feature: &str) -> bool {
    match pattern.strip_suffix('*') {
        Some(prefix) if prefix.ends_with('=') => feature.starts_with(prefix),
        _ => pattern == feature,
    }
}

/// Resolve a group configuration against derived feature names. An entry
/// `"col=*"` matches every one-hot column derived from raw column `col`.
pub fn manual_partition(spec: &GroupSpec, feature_names: &[String]) -> Result<FeatureGroupPartition> {
    let mut owner: Vec<Option<usize>> = alloc::vec![None; feature_names.len()];
    let mut groups = Vec::with_capacity(spec.groups.len());
    for (g, entry) in spec.groups.iter().enumerate() {
        let mut columns = Vec::new();
        for pattern in &entry.features {
            let hits: Vec<usize> = feature_names
                .iter()
                .enumerate()
                .filter(|(_, f)| pattern_matches(pattern, f))
                .map(|(i, _)| i)
                .collect();
            if hits.is_empty() {
                return Err(Error::Grouping(format!(
                    "group {}: {pattern} matches no feature",
                    entry.name
                )));
            }
            for c in hits {
                if let Some(prev) = owner[c] {
                    return Err(Error::Grouping(format!(
                        "feature {} matched by both {} and {}",
                        feature_names[c], spec.groups[prev].name, entry.name
                    )));
                }
                owner[c] = Some(g);
                columns.push(c);
            }
        }
        if columns.is_empty() {
            return Err(Error::Grouping(format!("group {} is empty", entry.name)));
        }
        columns.sort_unstable();
        groups.push(FeatureGroup::new(entry.name.clone(), columns));
    }
    if let Some(c) = owner.iter().position(Option::is_none) {
        return Err(Error::Grouping(format!("feature {} unassigned", feature_names[c])));
    }
    FeatureGroupPartition::new(groups, GroupingStrategy::Manual, None, feature_names.len())
}

fn check_group_count(g: usize, n_features: usize) -> Result<()> {
    if g < 2 || g > n_features {
        return Err(Error::param(
            "groups",
            format!("need 2 <= G <= {n_features}, got {g}"),
        ));
    }
    Ok(())
}

fn clustered_partition(
    dist: &[f64],
    n: usize,
    g: usize,
    strategy: GroupingStrategy,
) -> Result<FeatureGroupPartition> {
    let clusters = average_linkage(dist, n, g);
    let groups = clusters
        .into_iter()
        .enumerate()
        .map(|(i, cols)| FeatureGroup::new(format!("cluster_{i}"), cols))
        .collect();
    FeatureGroupPartition::new(groups, strategy, None, n)
}

/// Pearson correlation; zero when either column is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let ma = math::mean(a);
    let mb = math::mean(b);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (&u, &v) in a.iter().zip(b) {
        let (du, dv) = (u - ma, v - mb);
        sab += du * dv;
        saa += du * du;
        sbb += dv * dv;
    }
    if saa <= 0.0 || sbb <= 0.0 {
        return 0.0;
    }
    (sab / math::sqrt(saa * sbb)).clamp(-1.0, 1.0)
}

/// `1 - |pearson|` for every column pair, row-major `d x d`.
pub fn correlation_distances(x: &ColumnMatrix) -> Vec<f64> {
    let d = x.n_cols();
    let mut dist = alloc::vec![0.0; d * d];
    for i in 0..d {
        for j in 0..i {
            let v = 1.0 - math_abs(pearson(x.column(i), x.column(j)));
            dist[i * d + j] = v;
            dist[j * d + i] = v;
        }
    }
    dist
}

/// `1 - MI / max(eps, min(H_i, H_j))` on quantile-binned columns.
pub fn mi_distances(x: &ColumnMatrix, bins: usize) -> Result<Vec<f64>> {
    let d = x.n_cols();
    let binned = x
        .columns()
        .iter()
        .map(|c| cmi::quantile_bin(c, bins))
        .collect::<Result<Vec<_>>>()?;
    let h: Vec<f64> = binned.iter().map(|b| cmi::entropy(b)).collect();
    let mut dist = alloc::vec![0.0; d * d];
    for i in 0..d {
        for j in 0..i {
            let mi = cmi::mutual_information(&binned[i], &binned[j])?;
            let v = (1.0 - mi / h[i].min(h[j]).max(1e-12)).clamp(0.0, 1.0);
            dist[i * d + j] = v;
            dist[j * d + i] = v;
        }
    }
    Ok(dist)
}

fn math_abs(v: f64) -> f64 {
    if v < 0.0 {
        -v
    } else {
        v
    }
}

/// Average-linkage clustering on `1 - |pearson|`, cut at `g` clusters.
pub fn correlation_partition(x: &ColumnMatrix, g: usize) -> Result<FeatureGroupPartition> {
    check_group_count(g, x.n_cols())?;
    clustered_partition(&correlation_distances(x), x.n_cols(), g, GroupingStrategy::Corr)
}

/// Average-linkage clustering on normalised mutual-information distance.
pub fn mi_partition(x: &ColumnMatrix, g: usize, bins: usize) -> Result<FeatureGroupPartition> {
    check_group_count(g, x.n_cols())?;
    clustered_partition(&mi_distances(x, bins)?, x.n_cols(), g, GroupingStrategy::Mi)
}

/// Deal shuffled positions cyclically into `g` groups.
pub fn deal_round_robin(order: &[usize], g: usize) -> Vec<Vec<usize>> {
    let mut groups = alloc::vec![Vec::new(); g];
    for (pos, &c) in order.iter().enumerate() {
        groups[pos % g].push(c);
    }
    groups.iter_mut().for_each(|cols| cols.sort_unstable());
    groups
}

/// Seeded shuffle of feature indices dealt round-robin into `g` groups.
pub fn random_round_robin_partition(
    n_features: usize,
    g: usize,
    seed: u64,
) -> Result<FeatureGroupPartition> {
    check_group_count(g, n_features)?;
    let mut order: Vec<usize> = (0..n_features).collect();
    math::shuffle(&mut order, &mut math::rng(seed));
    let groups = deal_round_robin(&order, g)
        .into_iter()
        .enumerate()
        .map(|(i, cols)| FeatureGroup::new(format!("random_{i}"), cols))
        .collect();
    FeatureGroupPartition::new(groups, GroupingStrategy::Random, Some(seed), n_features)
}
