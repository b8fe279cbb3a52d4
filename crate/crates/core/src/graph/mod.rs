//! Overlay graph representation shared by every other module.
//!
//! Node ids are dense slot indices. Removing a node leaves a hole so the ids
//! of the remaining nodes never change; `capacity()` is the slot count and is
//! what per-node scratch arrays should be sized by.

mod generators;
mod io;
mod labels;
mod metrics;

pub use generators::{generate_multimodal, generate_preferential_attachment, MultimodalParams};
pub use io::{load_graph, parse_graph, save_graph, write_graph};
pub use labels::{assign_labels, LabelScheme, WeightedLabels};
pub use metrics::{
    average_connections_per_node, connected_components, degree_distribution, largest_component_fraction, mean_degree,
    path_length_distribution, DegreeDistribution, PathLengthDistribution, PathMode, DEFAULT_PATH_SOURCES,
    EXACT_PATH_THRESHOLD,
};

use std::fmt;

use thiserror::Error;

/// Label used for a domain or AS that has not been assigned yet.
pub const UNLABELED: &str = "-";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Per-servent metadata as reported in PONG messages.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NodeInfo {
    pub address: String,
    pub port: u16,
    /// Hierarchical domain name, e.g. `uchicago.edu`.
    pub domain: String,
    pub as_label: String,
    pub files_shared: u64,
    pub kbytes_shared: u64,
}

impl NodeInfo {
    /// Synthetic info for generated graphs: a private address derived from the
    /// id, the default Gnutella port and no labels.
    pub fn synthetic(id: usize) -> Self {
        NodeInfo {
            address: format!("10.{}.{}.{}", (id >> 16) & 0xff, (id >> 8) & 0xff, id & 0xff),
            port: 6346,
            domain: UNLABELED.to_string(),
            as_label: UNLABELED.to_string(),
            files_shared: 0,
            kbytes_shared: 0,
        }
    }

    /// Identity used to match a servent across crawls.
    pub fn endpoint(&self) -> (String, u16) {
        (self.address.clone(), self.port)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("node {0} already exists")]
    DuplicateNode(NodeId),
    #[error("graph is empty")]
    Empty,
    #[error("invalid generator parameters: {0}")]
    InvalidParameters(String),
    #[error("infeasible degree sequence: {0}")]
    Infeasible(String),
    #[error("invalid label distribution: {0}")]
    InvalidDistribution(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}

/// Outcome of [`OverlayGraph::add_edge`] for an edge that passed validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeInsert {
    Added,
    /// The edge already existed; the graph is unchanged.
    Duplicate,
}

/// Undirected overlay of servents and their open connections.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OverlayGraph {
    nodes: Vec<Option<NodeInfo>>,
    // Sorted neighbor lists.
    adjacency: Vec<Vec<NodeId>>,
    node_count: usize,
    edge_count: usize,
}

impl OverlayGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Graph with `n` synthetic nodes `0..n` and no edges.
    pub fn with_synthetic_nodes(n: usize) -> Self {
        let mut g = OverlayGraph::new();
        for i in 0..n {
            g.add_node(NodeInfo::synthetic(i));
        }
        g
    }

    pub fn add_node(&mut self, info: NodeInfo) -> NodeId {
        let id = NodeId(self.nodes.len());
        self.nodes.push(Some(info));
        self.adjacency.push(Vec::new());
        self.node_count += 1;
        id
    }

    /// Insert a node under a caller-chosen id, growing the slot table with
    /// holes as needed. Used when loading files and building crawl snapshots.
    pub fn insert_node(&mut self, id: NodeId, info: NodeInfo) -> Result<(), GraphError> {
        if id.0 >= self.nodes.len() {
            self.nodes.resize(id.0 + 1, None);
            self.adjacency.resize(id.0 + 1, Vec::new());
        }
        if self.nodes[id.0].is_some() {
            return Err(GraphError::DuplicateNode(id));
        }
        self.nodes[id.0] = Some(info);
        self.node_count += 1;
        Ok(())
    }

    pub fn remove_node(&mut self, id: NodeId) -> Result<NodeInfo, GraphError> {
        self.check(id)?;
        let neighbors = std::mem::take(&mut self.adjacency[id.0]);
        for n in &neighbors {
            let list = &mut self.adjacency[n.0];
            if let Ok(pos) = list.binary_search(&id) {
                list.remove(pos);
            }
        }
        self.edge_count -= neighbors.len();
        self.node_count -= 1;
        Ok(self.nodes[id.0].take().expect("checked above"))
    }

    pub fn add_edge(&mut self, a: NodeId, b: NodeId) -> Result<EdgeInsert, GraphError> {
        self.check(a)?;
        self.check(b)?;
        if a == b {
            return Err(GraphError::SelfLoop(a));
        }
        match self.adjacency[a.0].binary_search(&b) {
            Ok(_) => Ok(EdgeInsert::Duplicate),
            Err(pos) => {
                self.adjacency[a.0].insert(pos, b);
                let pos_b = self.adjacency[b.0].binary_search(&a).unwrap_err();
                self.adjacency[b.0].insert(pos_b, a);
                self.edge_count += 1;
                Ok(EdgeInsert::Added)
            }
        }
    }

    /// Returns whether an edge was actually removed.
    pub fn remove_edge(&mut self, a: NodeId, b: NodeId) -> Result<bool, GraphError> {
        self.check(a)?;
        self.check(b)?;
        match self.adjacency[a.0].binary_search(&b) {
            Ok(pos) => {
                self.adjacency[a.0].remove(pos);
                let pos_b = self.adjacency[b.0].binary_search(&a).expect("symmetric adjacency");
                self.adjacency[b.0].remove(pos_b);
                self.edge_count -= 1;
                Ok(true)
            }
            Err(_) => Ok(false),
        }
    }

    pub fn contains(&self, id: NodeId) -> bool {
        matches!(self.nodes.get(id.0), Some(Some(_)))
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.contains(a) && self.adjacency[a.0].binary_search(&b).is_ok()
    }

    pub fn info(&self, id: NodeId) -> Option<&NodeInfo> {
        self.nodes.get(id.0).and_then(Option::as_ref)
    }

    pub fn info_mut(&mut self, id: NodeId) -> Option<&mut NodeInfo> {
        self.nodes.get_mut(id.0).and_then(Option::as_mut)
    }

    /// Neighbors in ascending id order. Empty for unknown ids.
    pub fn neighbors(&self, id: NodeId) -> &[NodeId] {
        self.adjacency.get(id.0).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn degree(&self, id: NodeId) -> usize {
        self.neighbors(id).len()
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Number of id slots, including holes left by removed nodes.
    pub fn capacity(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().enumerate().filter(|(_, n)| n.is_some()).map(|(i, _)| NodeId(i))
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &NodeInfo)> + '_ {
        self.nodes.iter().enumerate().filter_map(|(i, n)| n.as_ref().map(|info| (NodeId(i), info)))
    }

    /// Each undirected edge once, as `(low, high)` in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(i, list)| {
            let a = NodeId(i);
            list.iter().filter(move |b| a < **b).map(move |b| (a, *b))
        })
    }

    /// Subgraph induced by `keep`, preserving ids and node info.
    pub fn induced_subgraph(&self, keep: impl Fn(NodeId) -> bool) -> OverlayGraph {
        let mut sub = OverlayGraph::new();
        for (id, info) in self.nodes() {
            if keep(id) {
                sub.insert_node(id, info.clone()).expect("ids are unique");
            }
        }
        for (a, b) in self.edges() {
            if sub.contains(a) && sub.contains(b) {
                sub.add_edge(a, b).expect("endpoints present");
            }
        }
        sub
    }

    fn check(&self, id: NodeId) -> Result<(), GraphError> {
        if self.contains(id) {
            Ok(())
        } else {
            Err(GraphError::UnknownNode(id))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star(leaves: usize) -> (OverlayGraph, NodeId) {
        let mut g = OverlayGraph::with_synthetic_nodes(leaves + 1);
        for i in 1..=leaves {
            g.add_edge(NodeId(0), NodeId(i)).unwrap();
        }
        (g, NodeId(0))
    }

    #[test]
    fn add_edge_on_two_nodes() {
        let mut g = OverlayGraph::with_synthetic_nodes(2);
        assert_eq!(g.add_edge(NodeId(0), NodeId(1)), Ok(EdgeInsert::Added));
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.add_edge(NodeId(1), NodeId(0)), Ok(EdgeInsert::Duplicate));
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn self_loop_rejected() {
        let mut g = OverlayGraph::with_synthetic_nodes(1);
        assert_eq!(g.add_edge(NodeId(0), NodeId(0)), Err(GraphError::SelfLoop(NodeId(0))));
    }

    #[test]
    fn unknown_endpoint_rejected() {
        let mut g = OverlayGraph::with_synthetic_nodes(1);
        assert_eq!(g.add_edge(NodeId(0), NodeId(3)), Err(GraphError::UnknownNode(NodeId(3))));
        assert!(g.remove_node(NodeId(7)).is_err());
    }

    #[test]
    fn removing_star_hub_isolates_leaves() {
        let (mut g, hub) = star(4);
        g.remove_node(hub).unwrap();
        assert_eq!(g.node_count(), 4);
        assert_eq!(g.edge_count(), 0);
        assert!(g.node_ids().all(|n| g.degree(n) == 0));
        // ids of survivors are stable
        assert_eq!(g.node_ids().collect::<Vec<_>>(), vec![NodeId(1), NodeId(2), NodeId(3), NodeId(4)]);
    }

    #[test]
    fn remove_edge_reports_presence() {
        let (mut g, hub) = star(2);
        assert_eq!(g.remove_edge(hub, NodeId(1)), Ok(true));
        assert_eq!(g.remove_edge(hub, NodeId(1)), Ok(false));
        assert_eq!(g.edge_count(), 1);
        assert!(!g.has_edge(NodeId(1), hub));
    }

    #[test]
    fn insert_node_with_holes() {
        let mut g = OverlayGraph::new();
        g.insert_node(NodeId(5), NodeInfo::synthetic(5)).unwrap();
        g.insert_node(NodeId(2), NodeInfo::synthetic(2)).unwrap();
        assert_eq!(g.capacity(), 6);
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.insert_node(NodeId(2), NodeInfo::synthetic(2)), Err(GraphError::DuplicateNode(NodeId(2))));
        g.add_edge(NodeId(2), NodeId(5)).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(NodeId(2), NodeId(5))]);
    }

    #[test]
    fn synthetic_addresses_are_distinct() {
        let a = NodeInfo::synthetic(1);
        let b = NodeInfo::synthetic(256);
        assert_ne!(a.endpoint(), b.endpoint());
        assert_eq!(b.address, "10.0.1.0");
    }
}
