use std::collections::{BTreeMap, VecDeque};

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{GraphError, NodeId, OverlayGraph};

/// Sampled path statistics use this many BFS sources unless told otherwise.
pub const DEFAULT_PATH_SOURCES: usize = 1_000;
/// Graphs smaller than this get exact all-pairs path statistics in `PathMode::auto`.
pub const EXACT_PATH_THRESHOLD: usize = 2_000;

/// Connected components, largest first; ties go to the component holding the
/// smaller node id. Each component is sorted ascending.
pub fn connected_components(graph: &OverlayGraph) -> Vec<Vec<NodeId>> {
    let mut seen = vec![false; graph.capacity()];
    let mut components = Vec::new();
    let mut queue = VecDeque::new();
    for start in graph.node_ids() {
        if seen[start.0] {
            continue;
        }
        seen[start.0] = true;
        queue.push_back(start);
        let mut component = Vec::new();
        while let Some(u) = queue.pop_front() {
            component.push(u);
            for &v in graph.neighbors(u) {
                if !seen[v.0] {
                    seen[v.0] = true;
                    queue.push_back(v);
                }
            }
        }
        component.sort_unstable();
        components.push(component);
    }
    // Components were discovered in ascending order of their smallest id, so a
    // stable sort by size keeps the tie-break.
    components.sort_by_key(|c| std::cmp::Reverse(c.len()));
    components
}

/// Size of the largest component divided by the node count (0 for an empty graph).
pub fn largest_component_fraction(graph: &OverlayGraph) -> f64 {
    if graph.node_count() == 0 {
        return 0.0;
    }
    let largest = connected_components(graph).first().map_or(0, Vec::len);
    largest as f64 / graph.node_count() as f64
}

/// Histogram of node degrees.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DegreeDistribution {
    counts: BTreeMap<usize, usize>,
}

impl DegreeDistribution {
    pub fn from_counts(counts: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut map = BTreeMap::new();
        for (degree, count) in counts {
            if count > 0 {
                *map.entry(degree).or_insert(0) += count;
            }
        }
        DegreeDistribution { counts: map }
    }

    pub fn count(&self, degree: usize) -> usize {
        self.counts.get(&degree).copied().unwrap_or(0)
    }

    /// `(degree, count)` pairs with nonzero count, ascending by degree.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.counts.iter().map(|(&d, &c)| (d, c))
    }

    pub fn total_nodes(&self) -> usize {
        self.counts.values().sum()
    }

    /// Σ degree·count, i.e. twice the edge count of the source graph.
    pub fn degree_sum(&self) -> usize {
        self.counts.iter().map(|(d, c)| d * c).sum()
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.counts.keys().next_back().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn fraction(&self, degree: usize) -> f64 {
        let total = self.total_nodes();
        if total == 0 {
            0.0
        } else {
            self.count(degree) as f64 / total as f64
        }
    }

    /// Total-variation distance between the two normalized histograms.
    pub fn total_variation_distance(&self, other: &DegreeDistribution) -> f64 {
        let mut keys: Vec<usize> = self.counts.keys().chain(other.counts.keys()).copied().collect();
        keys.sort_unstable();
        keys.dedup();
        0.5 * keys.into_iter().map(|d| (self.fraction(d) - other.fraction(d)).abs()).sum::<f64>()
    }
}

pub fn degree_distribution(graph: &OverlayGraph) -> DegreeDistribution {
    let mut counts = BTreeMap::new();
    for id in graph.node_ids() {
        *counts.entry(graph.degree(id)).or_insert(0) += 1;
    }
    DegreeDistribution { counts }
}

/// Connections per node as edge_count / node_count. This is the quantity
/// behind the "3.4 connections per node" figure (170,000 / 50,000).
pub fn average_connections_per_node(graph: &OverlayGraph) -> Result<f64, GraphError> {
    if graph.node_count() == 0 {
        return Err(GraphError::Empty);
    }
    Ok(graph.edge_count() as f64 / graph.node_count() as f64)
}

/// Mean degree, 2·edge_count / node_count. Twice the connections per node.
pub fn mean_degree(graph: &OverlayGraph) -> Result<f64, GraphError> {
    average_connections_per_node(graph).map(|c| 2.0 * c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathMode {
    /// BFS from every node; counts each unordered pair once.
    Exact,
    /// BFS from `sources` distinct nodes drawn uniformly with `seed`; counts
    /// ordered (source, target) pairs.
    Sampled { sources: usize, seed: u64 },
}

impl PathMode {
    /// Exact below [`EXACT_PATH_THRESHOLD`] nodes, otherwise sampled with
    /// [`DEFAULT_PATH_SOURCES`] sources.
    pub fn auto(graph: &OverlayGraph, seed: u64) -> Self {
        if graph.node_count() < EXACT_PATH_THRESHOLD {
            PathMode::Exact
        } else {
            PathMode::Sampled { sources: DEFAULT_PATH_SOURCES, seed }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PathLengthDistribution {
    /// hop distance → number of pairs at that shortest distance
    pub counts: BTreeMap<usize, u64>,
    pub unreachable_pairs: u64,
    pub sampled: bool,
    /// Number of BFS sources used.
    pub sample_size: usize,
}

impl PathLengthDistribution {
    pub fn reachable_pairs(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Smallest distance `d` such that at least a fraction `q` of the
    /// reachable pairs are at most `d` hops apart.
    pub fn pct(&self, q: f64) -> Option<usize> {
        let total = self.reachable_pairs();
        if total == 0 {
            return None;
        }
        let needed = (q.clamp(0.0, 1.0) * total as f64).ceil() as u64;
        let mut acc = 0;
        for (&d, &c) in &self.counts {
            acc += c;
            if acc >= needed {
                return Some(d);
            }
        }
        self.max_distance()
    }

    /// Longest shortest path among the explored pairs.
    pub fn max_distance(&self) -> Option<usize> {
        self.counts.keys().next_back().copied()
    }

    pub fn mean(&self) -> Option<f64> {
        let total = self.reachable_pairs();
        (total > 0).then(|| self.counts.iter().map(|(&d, &c)| d as f64 * c as f64).sum::<f64>() / total as f64)
    }
}

pub fn path_length_distribution(graph: &OverlayGraph, mode: PathMode) -> PathLengthDistribution {
    let ids: Vec<NodeId> = graph.node_ids().collect();
    let mut bfs = Bfs::new(graph.capacity());
    let mut out = PathLengthDistribution::default();
    match mode {
        PathMode::Exact => {
            out.sample_size = ids.len();
            for &s in &ids {
                bfs.run(graph, s);
                let mut reached_higher = 0u64;
                for &t in &bfs.visited {
                    if t > s {
                        reached_higher += 1;
                        *out.counts.entry(bfs.dist[t.0] as usize).or_insert(0) += 1;
                    }
                }
                let higher = ids.iter().filter(|&&t| t > s).count() as u64;
                out.unreachable_pairs += higher - reached_higher;
            }
        }
        PathMode::Sampled { sources, seed } => {
            let sources = sources.max(1).min(ids.len());
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut picked: Vec<usize> = index::sample(&mut rng, ids.len(), sources).into_vec();
            picked.sort_unstable();
            out.sampled = true;
            out.sample_size = picked.len();
            for i in picked {
                let s = ids[i];
                bfs.run(graph, s);
                for &t in &bfs.visited {
                    if t != s {
                        *out.counts.entry(bfs.dist[t.0] as usize).or_insert(0) += 1;
                    }
                }
                out.unreachable_pairs += (ids.len() - bfs.visited.len()) as u64;
            }
        }
    }
    out
}

/// Reusable BFS scratch space.
pub(crate) struct Bfs {
    pub dist: Vec<u32>,
    pub visited: Vec<NodeId>,
}

impl Bfs {
    pub fn new(capacity: usize) -> Self {
        Bfs { dist: vec![u32::MAX; capacity], visited: Vec::new() }
    }

    /// Fills `dist` for every node reachable from `source`; `visited` lists
    /// them in BFS order.
    pub fn run(&mut self, graph: &OverlayGraph, source: NodeId) {
        for v in self.visited.drain(..) {
            self.dist[v.0] = u32::MAX;
        }
        self.dist[source.0] = 0;
        self.visited.push(source);
        let mut head = 0;
        while head < self.visited.len() {
            let u = self.visited[head];
            head += 1;
            let du = self.dist[u.0];
            for &v in graph.neighbors(u) {
                if self.dist[v.0] == u32::MAX {
                    self.dist[v.0] = du + 1;
                    self.visited.push(v);
                }
            }
        }
    }
}
