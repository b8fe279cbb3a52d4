//! Domain and AS label assignment for synthetic overlays.

use std::cmp::Reverse;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{GraphError, NodeId, OverlayGraph};

/// A discrete distribution over label strings.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedLabels {
    labels: Vec<String>,
    weights: Vec<f64>,
}

impl WeightedLabels {
    /// Weights must be non-negative and sum to 1 (within 1e-6).
    pub fn new(pairs: impl IntoIterator<Item = (String, f64)>) -> Result<Self, GraphError> {
        let (labels, weights): (Vec<String>, Vec<f64>) = pairs.into_iter().unzip();
        if labels.is_empty() {
            return Err(GraphError::InvalidDistribution("no labels".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(GraphError::InvalidDistribution("weights must be finite and non-negative".into()));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(GraphError::InvalidDistribution(format!("weights sum to {sum}, expected 1")));
        }
        Ok(WeightedLabels { labels, weights })
    }

    pub fn single(label: &str) -> Self {
        WeightedLabels { labels: vec![label.to_string()], weights: vec![1.0] }
    }

    pub fn uniform(prefix: &str, n: usize) -> Result<Self, GraphError> {
        Self::new((0..n).map(|i| (format!("{prefix}{i}"), 1.0 / n as f64)))
    }

    /// `n` labels where the first `top_k` share `top_mass` equally and the rest
    /// share the remainder equally.
    pub fn top_heavy(prefix: &str, n: usize, top_k: usize, top_mass: f64) -> Result<Self, GraphError> {
        if top_k == 0 || top_k >= n || !(0.0..=1.0).contains(&top_mass) {
            return Err(GraphError::InvalidDistribution(format!(
                "top_heavy needs 0 < top_k < n and mass in [0, 1], got n={n}, top_k={top_k}, mass={top_mass}"
            )));
        }
        let head = top_mass / top_k as f64;
        let tail = (1.0 - top_mass) / (n - top_k) as f64;
        Self::new((0..n).map(|i| (format!("{prefix}{i}"), if i < top_k { head } else { tail })))
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Σ q², the probability that two independent draws agree.
    pub fn collision_probability(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum()
    }

    fn sampler(&self) -> WeightedIndex<f64> {
        WeightedIndex::new(&self.weights).expect("validated weights")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LabelScheme {
    /// Every node draws its domain and AS independently of the topology.
    Independent { domains: WeightedLabels, ases: WeightedLabels },
    /// Each node's territory is anchored at the highest-degree member of its
    /// closed neighborhood (ties to the smaller NodeId), so leaves share the
    /// labels of the hub they hang off. A node keeps its anchor's labels with
    /// probability `locality` and otherwise takes those of a uniformly random
    /// anchor.
    TopologyCorrelated { locality: f64 },
}

impl LabelScheme {
    pub fn topology_correlated(locality: f64) -> Self {
        LabelScheme::TopologyCorrelated { locality }
    }
}

pub fn assign_labels(graph: &mut OverlayGraph, scheme: &LabelScheme, seed: u64) -> Result<(), GraphError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids: Vec<NodeId> = graph.node_ids().collect();
    match scheme {
        LabelScheme::Independent { domains, ases } => {
            let (ds, as_) = (domains.sampler(), ases.sampler());
            for id in ids {
                let d = &domains.labels[ds.sample(&mut rng)];
                let a = &ases.labels[as_.sample(&mut rng)];
                let info = graph.info_mut(id).expect("live id");
                info.domain.clone_from(d);
                info.as_label.clone_from(a);
            }
        }
        &LabelScheme::TopologyCorrelated { locality } => {
            if !(0.0..=1.0).contains(&locality) {
                return Err(GraphError::InvalidDistribution(format!("locality {locality} outside [0, 1]")));
            }
            let anchors: Vec<NodeId> = ids.iter().map(|&id| anchor(graph, id)).collect();
            let mut distinct = anchors.clone();
            distinct.sort_unstable();
            distinct.dedup();
            for (&id, &own) in ids.iter().zip(&anchors) {
                let t =
                    if rng.random::<f64>() < locality { own } else { distinct[rng.random_range(0..distinct.len())] };
                let info = graph.info_mut(id).expect("live id");
                info.domain = format!("site{t}.net");
                info.as_label = format!("AS{t}");
            }
        }
    }
    Ok(())
}

fn anchor(graph: &OverlayGraph, id: NodeId) -> NodeId {
    std::iter::once(id)
        .chain(graph.neighbors(id).iter().copied())
        .min_by_key(|&u| (Reverse(graph.degree(u)), u))
        .expect("closed neighborhood is nonempty")
}
