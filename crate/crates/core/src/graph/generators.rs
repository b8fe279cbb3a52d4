//! Synthetic overlay generators.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{GraphError, NodeId, OverlayGraph};

/// Barabási–Albert growth: seed clique of `m + 1` nodes, then every new node
/// attaches `m` edges to distinct existing nodes chosen with probability
/// proportional to their current degree.
pub fn generate_preferential_attachment(n: usize, m: usize, seed: u64) -> Result<OverlayGraph, GraphError> {
    if m == 0 || n <= m {
        return Err(GraphError::InvalidParameters(format!("need n > m >= 1, got n={n}, m={m}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = OverlayGraph::with_synthetic_nodes(n);
    // Every edge contributes both endpoints, so uniform picks from this list
    // are degree-proportional.
    let mut endpoints: Vec<NodeId> = Vec::with_capacity(2 * m * n);
    for i in 0..=m {
        for j in i + 1..=m {
            g.add_edge(NodeId(i), NodeId(j))?;
            endpoints.push(NodeId(i));
            endpoints.push(NodeId(j));
        }
    }
    let mut targets = Vec::with_capacity(m);
    for new in m + 1..n {
        targets.clear();
        while targets.len() < m {
            let t = endpoints[rng.random_range(0..endpoints.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            g.add_edge(NodeId(new), t)?;
            endpoints.push(NodeId(new));
            endpoints.push(t);
        }
    }
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultimodalParams {
    pub n: usize,
    /// First degree of the power-law tail.
    pub knee: usize,
    pub tail_exponent: f64,
    /// Target edge_count / node_count.
    pub avg_connections: f64,
    pub seed: u64,
}

impl MultimodalParams {
    pub fn new(n: usize, seed: u64) -> Self {
        MultimodalParams { n, knee: 10, tail_exponent: 2.3, avg_connections: 3.4, seed }
    }
}

/// Graph whose degree histogram is flat over `[1, knee)` and follows
/// `L^-tail_exponent` from `knee` on.
///
/// The degree sequence is built deterministically: the tail share is chosen
/// so the stub total equals `2 * round(avg_connections * n)`, tail counts are
/// rounded per degree, and head nodes are spread evenly.
/// Stubs are then matched at random (configuration model); self-loops and
/// duplicate edges are repaired with degree-preserving edge swaps, so the
/// realized histogram is exactly the constructed one.
pub fn generate_multimodal(params: &MultimodalParams) -> Result<OverlayGraph, GraphError> {
    let degrees = multimodal_degree_sequence(params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut per_node = degrees;
    per_node.shuffle(&mut rng);
    let edges = configuration_model(&per_node, &mut rng)?;
    let mut g = OverlayGraph::with_synthetic_nodes(params.n);
    for (a, b) in edges {
        g.add_edge(NodeId(a), NodeId(b))?;
    }
    Ok(g)
}

fn multimodal_degree_sequence(p: &MultimodalParams) -> Result<Vec<usize>, GraphError> {
    if p.knee < 2 {
        return Err(GraphError::InvalidParameters(format!("knee must be >= 2, got {}", p.knee)));
    }
    if p.tail_exponent.is_nan() || p.tail_exponent <= 1.0 {
        return Err(GraphError::InvalidParameters(format!("tail_exponent must be > 1, got {}", p.tail_exponent)));
    }
    if p.n <= p.knee + 1 {
        return Err(GraphError::InvalidParameters(format!("n must exceed knee + 1, got n={}", p.n)));
    }
    if p.avg_connections.is_nan() || p.avg_connections <= 0.0 {
        return Err(GraphError::InvalidParameters(format!(
            "avg_connections must be positive, got {}",
            p.avg_connections
        )));
    }
    let target_stubs = 2 * (p.avg_connections * p.n as f64).round() as usize;

    let tail_degrees: Vec<usize> = (p.knee..p.n).collect();
    let weights: Vec<f64> = tail_degrees.iter().map(|&l| (l as f64).powf(-p.tail_exponent)).collect();
    let wsum: f64 = weights.iter().sum();
    let pmf: Vec<f64> = weights.iter().map(|w| w / wsum).collect();

    // Tail counts are rounded per bin, so bins whose expected count is below
    // one half stay empty and the tail ends where the law runs out of nodes.
    let build = |tail_share: usize| -> Option<Vec<(usize, usize)>> {
        let tail: Vec<usize> = pmf.iter().map(|q| (q * tail_share as f64).round() as usize).collect();
        let tail_nodes: usize = tail.iter().sum::<usize>();
        if tail_nodes > p.n {
            return None;
        }
        let mut hist = Vec::new();
        let head_nodes = p.n - tail_nodes;
        let head_bins = p.knee - 1;
        for (i, d) in (1..p.knee).enumerate() {
            let c = head_nodes / head_bins + usize::from(i < head_nodes % head_bins);
            hist.push((d, c));
        }
        for (d, c) in tail_degrees.iter().zip(tail) {
            if c > 0 {
                hist.push((*d, c));
            }
        }
        Some(hist)
    };
    let stubs = |hist: &Option<Vec<(usize, usize)>>| {
        hist.as_ref().map_or(usize::MAX, |h| h.iter().map(|(d, c)| d * c).sum::<usize>())
    };

    if stubs(&build(0)) > target_stubs {
        return Err(GraphError::Infeasible(format!(
            "a flat head over [1, {}) already exceeds {} connections per node",
            p.knee, p.avg_connections
        )));
    }
    // Stub total grows with the tail share; bisect on the number of tail nodes.
    let (mut lo, mut hi) = (0usize, p.n);
    while build(hi).is_none() {
        hi -= 1;
    }
    if stubs(&build(hi)) < target_stubs {
        return Err(GraphError::Infeasible(format!(
            "{} connections per node is out of reach for this tail",
            p.avg_connections
        )));
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if stubs(&build(mid)) <= target_stubs {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut hist = build(lo).expect("lo is feasible");
    let mut residual = target_stubs as i64 - hist.iter().map(|(d, c)| d * c).sum::<usize>() as i64;

    // Close the remaining gap one stub at a time by nudging head nodes to a
    // neighboring head degree, cycling over the head so it stays flat.
    // Head entries sit at indices 0..head_len with degree = index + 1.
    let head_len = p.knee - 1;
    let mut cursor = 0usize;
    let mut stalled = 0usize;
    while residual != 0 {
        if head_len < 2 || stalled > head_len {
            return Err(GraphError::Infeasible("cannot match the requested stub total".into()));
        }
        let i = cursor % (head_len - 1);
        let (from, to) = if residual > 0 { (i, i + 1) } else { (i + 1, i) };
        cursor += 1;
        if hist[from].1 == 0 {
            stalled += 1;
            continue;
        }
        stalled = 0;
        hist[from].1 -= 1;
        hist[to].1 += 1;
        residual += if residual > 0 { -1 } else { 1 };
    }

    let mut seq = Vec::with_capacity(p.n);
    for (d, c) in hist {
        seq.extend(std::iter::repeat_n(d, c));
    }
    debug_assert_eq!(seq.len(), p.n);
    Ok(seq)
}

/// Random stub matching with degree-preserving repair of self-loops and
/// duplicate edges. Returns edges as `(low, high)` pairs.
fn configuration_model(degrees: &[usize], rng: &mut ChaCha8Rng) -> Result<Vec<(usize, usize)>, GraphError> {
    let mut stubs: Vec<usize> = Vec::with_capacity(degrees.iter().sum());
    for (node, &d) in degrees.iter().enumerate() {
        stubs.extend(std::iter::repeat_n(node, d));
    }
    if stubs.len() % 2 == 1 {
        // Odd total: give one stub to the lowest-degree node.
        let (node, _) = degrees.iter().enumerate().min_by_key(|(_, d)| **d).expect("non-empty");
        stubs.push(node);
    }
    stubs.shuffle(rng);

    let key = |a: usize, b: usize| if a < b { (a, b) } else { (b, a) };
    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(stubs.len() / 2);
    let mut present: HashSet<(usize, usize)> = HashSet::with_capacity(stubs.len() / 2);
    let mut pending = Vec::new();
    for pair in stubs.chunks_exact(2) {
        let (a, b) = (pair[0], pair[1]);
        if a != b && present.insert(key(a, b)) {
            edges.push(key(a, b));
        } else {
            pending.push((a, b));
        }
    }

    for (u, v) in pending {
        let mut placed = false;
        for _ in 0..10_000 {
            if edges.is_empty() {
                break;
            }
            let i = rng.random_range(0..edges.len());
            let (mut x, mut y) = edges[i];
            if rng.random::<bool>() {
                std::mem::swap(&mut x, &mut y);
            }
            // Replace (x, y) with (u, x) and (v, y).
            if u == x || v == y {
                continue;
            }
            let (e1, e2) = (key(u, x), key(v, y));
            if e1 == e2 || present.contains(&e1) || present.contains(&e2) {
                continue;
            }
            present.remove(&edges[i]);
            edges[i] = e1;
            edges.push(e2);
            present.insert(e1);
            present.insert(e2);
            placed = true;
            break;
        }
        if !placed {
            return Err(GraphError::Infeasible(format!("could not place stub pair ({u}, {v})")));
        }
    }
    edges.sort_unstable();
    Ok(edges)
}
