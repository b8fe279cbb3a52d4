#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use gnutellab::crawler::StaticNetwork;
use gnutellab::{NodeId, OverlayGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random tree on `n` nodes plus `extra` random chords.
pub fn random_connected(n: usize, extra: usize, seed: u64) -> OverlayGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = OverlayGraph::with_synthetic_nodes(n);
    for i in 1..n {
        let parent = rng.random_range(0..i);
        g.add_edge(NodeId(i), NodeId(parent)).unwrap();
    }
    if n > 2 {
        for _ in 0..extra {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            if a != b {
                g.add_edge(NodeId(a), NodeId(b)).unwrap();
            }
        }
    }
    g
}

/// Nodes reachable from `seeds` when only contactable nodes are expanded.
pub fn contactable_reach(net: &StaticNetwork, seeds: &[NodeId]) -> BTreeSet<NodeId> {
    let mut seen = BTreeSet::new();
    let mut confirmed = BTreeSet::new();
    let mut queue: VecDeque<NodeId> = VecDeque::new();
    for &s in seeds {
        if seen.insert(s) {
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        if !net.is_contactable(u) {
            continue;
        }
        confirmed.insert(u);
        for &v in net.graph.neighbors(u) {
            if seen.insert(v) {
                queue.push_back(v);
            }
        }
    }
    confirmed
}

pub fn edge_set(g: &OverlayGraph) -> BTreeSet<(NodeId, NodeId)> {
    g.edges().collect()
}
