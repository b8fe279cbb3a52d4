//! Time-indexed record of node lifetimes and connections.

use crate::graph::{NodeId, NodeInfo, OverlayGraph};

#[derive(Debug, Clone, PartialEq)]
pub struct NodeRecord {
    pub info: NodeInfo,
    pub joined_s: f64,
    pub left_s: Option<f64>,
    pub max_connections: usize,
    pub known_host: bool,
    pub pings_originated: u32,
    pub queries_originated: u32,
}

/// Connection open over `[opened_s, closed_s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeRecord {
    pub a: NodeId,
    pub b: NodeId,
    pub opened_s: f64,
    pub closed_s: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct NetworkHistory {
    nodes: Vec<NodeRecord>,
    edges: Vec<EdgeRecord>,
    incident: Vec<Vec<usize>>,
    horizon_s: f64,
}

impl NetworkHistory {
    pub(crate) fn join(&mut self, record: NodeRecord) -> NodeId {
        self.nodes.push(record);
        self.incident.push(Vec::new());
        NodeId(self.nodes.len() - 1)
    }

    pub(crate) fn leave(&mut self, id: NodeId, t: f64) {
        self.nodes[id.0].left_s = Some(t);
    }

    pub(crate) fn node_mut(&mut self, id: NodeId) -> &mut NodeRecord {
        &mut self.nodes[id.0]
    }

    pub(crate) fn open_edge(&mut self, a: NodeId, b: NodeId, t: f64) -> usize {
        let idx = self.edges.len();
        self.edges.push(EdgeRecord { a, b, opened_s: t, closed_s: None });
        self.incident[a.0].push(idx);
        self.incident[b.0].push(idx);
        idx
    }

    pub(crate) fn close_edge(&mut self, idx: usize, t: f64) {
        self.edges[idx].closed_s = Some(t);
    }

    pub(crate) fn set_horizon(&mut self, t: f64) {
        self.horizon_s = t;
    }

    /// End of the simulated interval.
    pub fn horizon_s(&self) -> f64 {
        self.horizon_s
    }

    pub fn nodes(&self) -> &[NodeRecord] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> Option<&NodeRecord> {
        self.nodes.get(id.0)
    }

    pub fn edges(&self) -> &[EdgeRecord] {
        &self.edges
    }

    pub fn alive_at(&self, id: NodeId, t: f64) -> bool {
        self.nodes.get(id.0).is_some_and(|n| n.joined_s <= t && n.left_s.is_none_or(|l| t < l))
    }

    /// Sorted neighbors of `id` at time `t`.
    pub fn neighbors_at(&self, id: NodeId, t: f64) -> Vec<NodeId> {
        let Some(list) = self.incident.get(id.0) else { return Vec::new() };
        let mut out: Vec<NodeId> = list
            .iter()
            .map(|&i| &self.edges[i])
            .filter(|e| e.opened_s <= t && e.closed_s.is_none_or(|c| t < c))
            .map(|e| if e.a == id { e.b } else { e.a })
            .collect();
        out.sort_unstable();
        out
    }

    pub fn degree_at(&self, id: NodeId, t: f64) -> usize {
        self.neighbors_at(id, t).len()
    }

    pub fn live_at(&self, t: f64) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).map(NodeId).filter(move |&id| self.alive_at(id, t))
    }

    /// Live overlay at time `t`, keeping simulator node ids.
    pub fn graph_at(&self, t: f64) -> OverlayGraph {
        let mut g = OverlayGraph::new();
        for id in self.live_at(t) {
            g.insert_node(id, self.nodes[id.0].info.clone()).expect("fresh id");
        }
        for e in &self.edges {
            if e.opened_s <= t && e.closed_s.is_none_or(|c| t < c) {
                g.add_edge(e.a, e.b).expect("edge between live nodes");
            }
        }
        g
    }

    /// Σ over connections of their open time within `[0, until]`.
    pub fn connection_seconds(&self, until: f64) -> f64 {
        self.edges.iter().map(|e| (e.closed_s.unwrap_or(until).min(until) - e.opened_s).max(0.0)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(joined: f64) -> NodeRecord {
        NodeRecord {
            info: NodeInfo::synthetic(0),
            joined_s: joined,
            left_s: None,
            max_connections: 4,
            known_host: false,
            pings_originated: 0,
            queries_originated: 0,
        }
    }

    #[test]
    fn intervals_are_half_open() {
        let mut h = NetworkHistory::default();
        let a = h.join(record(0.0));
        let b = h.join(record(5.0));
        let e = h.open_edge(a, b, 5.0);
        h.close_edge(e, 8.0);
        h.leave(b, 8.0);
        h.set_horizon(10.0);
        assert!(!h.alive_at(b, 4.9));
        assert!(h.alive_at(b, 5.0));
        assert!(!h.alive_at(b, 8.0));
        assert_eq!(h.neighbors_at(a, 7.0), vec![b]);
        assert!(h.neighbors_at(a, 8.0).is_empty());
        assert_eq!(h.graph_at(6.0).edge_count(), 1);
        assert_eq!(h.graph_at(9.0).node_count(), 1);
        assert_eq!(h.connection_seconds(10.0), 3.0);
    }
}
