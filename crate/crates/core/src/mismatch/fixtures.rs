//! Two-group physical network joined by a single D–E link, with one
//! well-mapped and one poorly mapped overlay tree over the same 8 hosts.

use crate::graph::{NodeId, NodeInfo, OverlayGraph};

use super::{HostPlacement, UnderlayGraph};

pub const HOSTS: [&str; 8] = ["A", "B", "C", "D", "E", "F", "G", "H"];

fn host(name: &str) -> usize {
    HOSTS.iter().position(|h| *h == name).expect("fixture host")
}

/// A, B, C hang off D; F, G, H hang off E; D–E is the only cross link.
pub fn underlay() -> UnderlayGraph {
    let mut u = UnderlayGraph::new(HOSTS.iter().map(|h| h.to_string()));
    for (a, b) in [("D", "A"), ("D", "B"), ("D", "C"), ("D", "E"), ("E", "F"), ("E", "G"), ("E", "H")] {
        u.add_link(host(a), host(b)).expect("fixture link");
    }
    u
}

fn overlay(edges: &[(&str, &str)]) -> (OverlayGraph, HostPlacement) {
    let mut g = OverlayGraph::new();
    for (i, name) in HOSTS.iter().enumerate() {
        let mut info = NodeInfo::synthetic(i);
        info.domain = format!("{}.example", name.to_lowercase());
        g.add_node(info);
    }
    for &(a, b) in edges {
        g.add_edge(NodeId(host(a)), NodeId(host(b))).expect("fixture edge");
    }
    let placement = HostPlacement::new((0..HOSTS.len()).map(|i| (NodeId(i), i))).expect("identity placement");
    (g, placement)
}

/// Overlay that mirrors the physical tree: one edge crosses D–E.
pub fn matched_overlay() -> (OverlayGraph, HostPlacement) {
    overlay(&[("D", "A"), ("D", "B"), ("D", "C"), ("D", "E"), ("E", "F"), ("E", "G"), ("E", "H")])
}

/// Path A-E-B-F-C-G-H-D: six of its seven edges cross D–E.
pub fn mismatched_overlay() -> (OverlayGraph, HostPlacement) {
    overlay(&[("A", "E"), ("E", "B"), ("B", "F"), ("F", "C"), ("C", "G"), ("G", "H"), ("H", "D")])
}

/// Router index of the D–E link's endpoints.
pub fn cross_link() -> (usize, usize) {
    (host("D"), host("E"))
}

pub fn source() -> NodeId {
    NodeId(host("A"))
}
