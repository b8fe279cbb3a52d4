//! Networks the crawler can contact.

use std::collections::HashMap;

use crate::graph::{NodeId, NodeInfo, OverlayGraph};
use crate::sim::NetworkHistory;

/// What a connection attempt to a node finds at a given time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Observation {
    /// Not running, or never existed.
    Departed,
    /// Running but already at its connection limit.
    Refused,
    /// Accepted the crawler; current neighbors in ascending order.
    Accepted(Vec<NodeId>),
}

pub trait CrawlTarget {
    fn info(&self, node: NodeId) -> Option<&NodeInfo>;

    fn observe(&self, node: NodeId, t: f64) -> Observation;

    /// Last time the network state is defined; None for static networks.
    fn horizon(&self) -> Option<f64>;
}

/// Fixed topology with optional per-node connection limits.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticNetwork {
    pub graph: OverlayGraph,
    limits: HashMap<NodeId, usize>,
}

impl StaticNetwork {
    pub fn new(graph: OverlayGraph) -> Self {
        StaticNetwork { graph, limits: HashMap::new() }
    }

    /// A node refuses the crawler once its degree reaches `limit`.
    pub fn with_limit(mut self, node: NodeId, limit: usize) -> Self {
        self.limits.insert(node, limit);
        self
    }

    pub fn limit(&self, node: NodeId) -> Option<usize> {
        self.limits.get(&node).copied()
    }

    pub fn is_contactable(&self, node: NodeId) -> bool {
        self.graph.contains(node) && self.limit(node).is_none_or(|l| self.graph.degree(node) < l)
    }
}

impl CrawlTarget for StaticNetwork {
    fn info(&self, node: NodeId) -> Option<&NodeInfo> {
        self.graph.info(node)
    }

    fn observe(&self, node: NodeId, _t: f64) -> Observation {
        if !self.graph.contains(node) {
            Observation::Departed
        } else if !self.is_contactable(node) {
            Observation::Refused
        } else {
            let mut n = self.graph.neighbors(node).to_vec();
            n.sort_unstable();
            Observation::Accepted(n)
        }
    }

    fn horizon(&self) -> Option<f64> {
        None
    }
}

impl CrawlTarget for NetworkHistory {
    fn info(&self, node: NodeId) -> Option<&NodeInfo> {
        self.node(node).map(|r| &r.info)
    }

    fn observe(&self, node: NodeId, t: f64) -> Observation {
        let Some(record) = self.node(node) else { return Observation::Departed };
        if !self.alive_at(node, t) {
            return Observation::Departed;
        }
        let neighbors = self.neighbors_at(node, t);
        if neighbors.len() >= record.max_connections {
            Observation::Refused
        } else {
            Observation::Accepted(neighbors)
        }
    }

    fn horizon(&self) -> Option<f64> {
        Some(self.horizon_s())
    }
}
