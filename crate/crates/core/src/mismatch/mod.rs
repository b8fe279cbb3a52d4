//! Overlay/underlay mismatch: label entropy under hub clustering, AS
//! locality and physical link stress.

mod clusters;
mod entropy;
pub mod fixtures;
mod underlay;

use std::collections::HashMap;

use crate::graph::{NodeId, OverlayGraph};
use crate::protocol::ProtocolError;

pub use clusters::{
    as_labels, build_clusters, domain_labels, entropy_reduction, ClusterPartition, EntropyReduction,
    DEFAULT_HUB_THRESHOLD, DEFAULT_MERGE_OVERLAP,
};
pub use entropy::{clustering_entropy, label_entropy, LabelDistribution};
pub use underlay::{link_stress, HostPlacement, LinkStress, UnderlayGraph};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MismatchError {
    #[error("empty population")]
    EmptyPopulation,
    #[error("invalid label distribution: {0}")]
    InvalidDistribution(String),
    #[error("partition does not match labels: {0}")]
    PartitionMismatch(String),
    #[error("graph has no edges")]
    NoEdges,
    #[error("overlay node {0} has no placement")]
    UnplacedNode(NodeId),
    #[error("invalid placement: {0}")]
    InvalidPlacement(String),
    #[error("unknown underlay router {0}")]
    UnknownRouter(usize),
    #[error("invalid underlay: {0}")]
    InvalidUnderlay(String),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

/// Fraction of edges whose endpoints share an AS label.
pub fn intra_as_fraction(graph: &OverlayGraph) -> Result<f64, MismatchError> {
    if graph.edge_count() == 0 {
        return Err(MismatchError::NoEdges);
    }
    let same = graph
        .edges()
        .filter(|&(a, b)| graph.info(a).map(|i| &i.as_label) == graph.info(b).map(|i| &i.as_label))
        .count();
    Ok(same as f64 / graph.edge_count() as f64)
}

/// Fraction of nodes in the `k` most populous ASs.
pub fn top_as_share(graph: &OverlayGraph, k: usize) -> Result<f64, MismatchError> {
    if graph.node_count() == 0 {
        return Err(MismatchError::EmptyPopulation);
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for (_, info) in graph.nodes() {
        *counts.entry(info.as_label.as_str()).or_default() += 1;
    }
    let mut sizes: Vec<usize> = counts.into_values().collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    let top: usize = sizes.iter().take(k).sum();
    Ok(top as f64 / graph.node_count() as f64)
}
