//! Node-removal experiments.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::{NodeId, OverlayGraph};

use super::AnalysisError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RemovalStrategy {
    /// Uniformly random victims from a seeded permutation. Larger fractions
    /// extend the same permutation prefix.
    Random,
    /// Highest initial degree first, ties by smaller NodeId. Degrees are not
    /// recomputed as nodes disappear.
    Targeted,
}

impl RemovalStrategy {
    pub fn name(self) -> &'static str {
        match self {
            RemovalStrategy::Random => "random",
            RemovalStrategy::Targeted => "targeted",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobustnessPoint {
    pub removed_fraction: f64,
    pub removed: usize,
    /// Largest component size over the surviving node count.
    pub largest_component_fraction: f64,
    pub largest_component_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessCurve {
    pub strategy: RemovalStrategy,
    pub points: Vec<RobustnessPoint>,
}

/// For each fraction `f` (sorted ascending), remove `round(f·N)` nodes and
/// measure the largest component among survivors.
pub fn robustness_experiment(
    graph: &OverlayGraph,
    strategy: RemovalStrategy,
    fractions: &[f64],
    seed: u64,
) -> Result<RobustnessCurve, AnalysisError> {
    if let Some(&bad) = fractions.iter().find(|f| !(0.0..1.0).contains(*f)) {
        return Err(AnalysisError::InvalidFraction(bad));
    }
    let mut fractions = fractions.to_vec();
    fractions.sort_by(f64::total_cmp);

    let mut order: Vec<NodeId> = graph.node_ids().collect();
    match strategy {
        RemovalStrategy::Random => order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed)),
        RemovalStrategy::Targeted => order.sort_by_key(|&id| (std::cmp::Reverse(graph.degree(id)), id)),
    }

    let n = order.len();
    let mut removed = vec![false; graph.capacity()];
    let mut done = 0;
    let mut points = Vec::with_capacity(fractions.len());
    for f in fractions {
        let k = ((f * n as f64).round() as usize).min(n);
        for &id in &order[done..k.max(done)] {
            removed[id.0] = true;
        }
        done = done.max(k);
        let size = largest_surviving_component(graph, &removed);
        let survivors = n - done;
        points.push(RobustnessPoint {
            removed_fraction: f,
            removed: done,
            largest_component_fraction: if survivors == 0 { 0.0 } else { size as f64 / survivors as f64 },
            largest_component_size: size,
        });
    }
    Ok(RobustnessCurve { strategy, points })
}

fn largest_surviving_component(graph: &OverlayGraph, removed: &[bool]) -> usize {
    let mut seen = removed.to_vec();
    let mut stack = Vec::new();
    let mut best = 0;
    for start in graph.node_ids() {
        if seen[start.0] {
            continue;
        }
        seen[start.0] = true;
        stack.push(start);
        let mut size = 0;
        while let Some(u) = stack.pop() {
            size += 1;
            for &v in graph.neighbors(u) {
                if !seen[v.0] {
                    seen[v.0] = true;
                    stack.push(v);
                }
            }
        }
        best = best.max(size);
    }
    best
}
