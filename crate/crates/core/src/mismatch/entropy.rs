//! Label entropy of host sets and of clusterings.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::graph::NodeId;

use super::{ClusterPartition, MismatchError};

/// Per-label probabilities over a host population.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelDistribution {
    probs: BTreeMap<String, f64>,
    population: usize,
}

impl LabelDistribution {
    pub fn from_labels<'a>(labels: impl IntoIterator<Item = &'a str>) -> Result<Self, MismatchError> {
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        let mut population = 0;
        for l in labels {
            *counts.entry(l.to_string()).or_default() += 1;
            population += 1;
        }
        if population == 0 {
            return Err(MismatchError::EmptyPopulation);
        }
        let probs = counts.into_iter().map(|(l, c)| (l, c as f64 / population as f64)).collect();
        Ok(LabelDistribution { probs, population })
    }

    /// Probabilities must lie in (0, 1] and sum to 1 within 1e-9.
    pub fn from_probs(
        probs: impl IntoIterator<Item = (String, f64)>,
        population: usize,
    ) -> Result<Self, MismatchError> {
        let probs: BTreeMap<String, f64> = probs.into_iter().collect();
        if probs.values().any(|&p| !(p > 0.0 && p <= 1.0)) {
            return Err(MismatchError::InvalidDistribution("probabilities must lie in (0, 1]".into()));
        }
        let sum: f64 = probs.values().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(MismatchError::InvalidDistribution(format!("probabilities sum to {sum}")));
        }
        Ok(LabelDistribution { probs, population })
    }

    pub fn probs(&self) -> &BTreeMap<String, f64> {
        &self.probs
    }

    pub fn support_size(&self) -> usize {
        self.probs.len()
    }

    pub fn population(&self) -> usize {
        self.population
    }
}

/// Sum over labels of the binary entropy of p_i, in bits.
pub fn label_entropy(dist: &LabelDistribution) -> f64 {
    dist.probs.values().map(|&p| binary_entropy(p)).sum()
}

fn binary_entropy(p: f64) -> f64 {
    let term = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
    term(p) + term(1.0 - p)
}

/// Size-weighted mean of per-cluster label entropy.
pub fn clustering_entropy(
    partition: &ClusterPartition,
    node_labels: &HashMap<NodeId, String>,
) -> Result<f64, MismatchError> {
    let mut seen = HashSet::new();
    let mut total = 0usize;
    let mut weighted = 0.0;
    for cluster in &partition.clusters {
        let mut labels = Vec::with_capacity(cluster.len());
        for id in cluster {
            if !seen.insert(*id) {
                return Err(MismatchError::PartitionMismatch(format!("node {id} appears in two clusters")));
            }
            let label = node_labels
                .get(id)
                .ok_or_else(|| MismatchError::PartitionMismatch(format!("node {id} has no label")))?;
            labels.push(label.as_str());
        }
        if labels.is_empty() {
            continue;
        }
        weighted += labels.len() as f64 * label_entropy(&LabelDistribution::from_labels(labels)?);
        total += cluster.len();
    }
    if total != node_labels.len() {
        return Err(MismatchError::PartitionMismatch(format!(
            "partition covers {total} nodes but {} are labeled",
            node_labels.len()
        )));
    }
    if total == 0 {
        return Err(MismatchError::EmptyPopulation);
    }
    Ok(weighted / total as f64)
}
