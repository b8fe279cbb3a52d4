//! Physical topology, overlay placement and per-link stress of one flood.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::io::{self, Write};

use crate::graph::{NodeId, OverlayGraph};
use crate::protocol::{flood_logged, FloodConfig, MessageKind};

use super::MismatchError;

/// Undirected physical network. Routes are shortest paths, ties broken by
/// the lexicographically smallest node sequence from the lower-numbered
/// endpoint, so `route(b, a)` is `route(a, b)` reversed.
#[derive(Debug, Clone, PartialEq)]
pub struct UnderlayGraph {
    names: Vec<String>,
    adjacency: Vec<Vec<usize>>,
}

impl UnderlayGraph {
    pub fn new(names: impl IntoIterator<Item = String>) -> Self {
        let names: Vec<String> = names.into_iter().collect();
        let adjacency = vec![Vec::new(); names.len()];
        UnderlayGraph { names, adjacency }
    }

    pub fn with_size(n: usize) -> Self {
        Self::new((0..n).map(|i| format!("r{i}")))
    }

    /// Duplicate links are ignored.
    pub fn add_link(&mut self, a: usize, b: usize) -> Result<(), MismatchError> {
        let n = self.names.len();
        for x in [a, b] {
            if x >= n {
                return Err(MismatchError::UnknownRouter(x));
            }
        }
        if a == b {
            return Err(MismatchError::InvalidUnderlay(format!("self-link at {}", self.names[a])));
        }
        if !self.adjacency[a].contains(&b) {
            self.adjacency[a].push(b);
            self.adjacency[a].sort_unstable();
            self.adjacency[b].push(a);
            self.adjacency[b].sort_unstable();
        }
        Ok(())
    }

    /// Copy of an overlay's topology, router `i` standing for `NodeId(i)`.
    pub fn from_overlay(graph: &OverlayGraph) -> Self {
        let mut u = Self::with_size(graph.capacity());
        for (a, b) in graph.edges() {
            u.add_link(a.0, b.0).expect("valid overlay edge");
        }
        u
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, router: usize) -> &str {
        &self.names[router]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn links(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(a, ns)| ns.iter().filter(move |&&b| a < b).map(move |&b| (a, b)))
    }

    pub fn is_connected(&self) -> bool {
        if self.names.is_empty() {
            return true;
        }
        self.distances_from(0).iter().all(|d| d.is_some())
    }

    fn distances_from(&self, target: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.names.len()];
        dist[target] = Some(0);
        let mut queue = VecDeque::from([target]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].expect("queued nodes are labeled");
            for &v in &self.adjacency[u] {
                if dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Router sequence from `a` to `b`, both included.
    pub fn route(&self, a: usize, b: usize) -> Result<Vec<usize>, MismatchError> {
        let mut router = Router::new(self);
        router.route(a, b)
    }
}

/// Route computation with per-target distance caching.
struct Router<'a> {
    underlay: &'a UnderlayGraph,
    cache: HashMap<usize, Vec<Option<usize>>>,
}

impl<'a> Router<'a> {
    fn new(underlay: &'a UnderlayGraph) -> Self {
        Router { underlay, cache: HashMap::new() }
    }

    fn route(&mut self, a: usize, b: usize) -> Result<Vec<usize>, MismatchError> {
        let n = self.underlay.len();
        for x in [a, b] {
            if x >= n {
                return Err(MismatchError::UnknownRouter(x));
            }
        }
        let (from, to) = if a <= b { (a, b) } else { (b, a) };
        let dist = self.cache.entry(to).or_insert_with(|| self.underlay.distances_from(to));
        let mut at = from;
        let mut path = vec![at];
        let mut d = dist[at].ok_or(MismatchError::InvalidUnderlay("underlay is disconnected".into()))?;
        while d > 0 {
            // Neighbors are sorted, so the first one closer to `to` is the smallest.
            at = *self.underlay.adjacency[at]
                .iter()
                .find(|&&v| dist[v] == Some(d - 1))
                .expect("a closer neighbor exists on a shortest path");
            path.push(at);
            d -= 1;
        }
        if a > b {
            path.reverse();
        }
        Ok(path)
    }
}

/// Injective overlay node → router map.
#[derive(Debug, Clone, PartialEq)]
pub struct HostPlacement {
    map: BTreeMap<NodeId, usize>,
}

impl HostPlacement {
    pub fn new(pairs: impl IntoIterator<Item = (NodeId, usize)>) -> Result<Self, MismatchError> {
        let mut map = BTreeMap::new();
        let mut used = HashSet::new();
        for (id, router) in pairs {
            if !used.insert(router) {
                return Err(MismatchError::InvalidPlacement(format!("router {router} hosts two overlay nodes")));
            }
            if map.insert(id, router).is_some() {
                return Err(MismatchError::InvalidPlacement(format!("node {id} placed twice")));
            }
        }
        Ok(HostPlacement { map })
    }

    pub fn identity(graph: &OverlayGraph) -> Self {
        HostPlacement { map: graph.node_ids().map(|id| (id, id.0)).collect() }
    }

    pub fn get(&self, id: NodeId) -> Option<usize> {
        self.map.get(&id).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkStress {
    /// Physical link (lower, higher router) → traversals.
    pub counts: BTreeMap<(usize, usize), u64>,
    /// Overlay transmissions of the broadcast kind.
    pub transmissions: u64,
}

impl LinkStress {
    pub fn count(&self, a: usize, b: usize) -> u64 {
        self.counts.get(&(a.min(b), a.max(b))).copied().unwrap_or(0)
    }

    /// Most-stressed link, ties to the smallest link.
    pub fn max_link(&self) -> Option<((usize, usize), u64)> {
        self.counts.iter().map(|(&l, &c)| (l, c)).max_by_key(|&(l, c)| (c, std::cmp::Reverse(l)))
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Columns: link, count. Every physical link is listed.
    pub fn write_csv<W: Write>(&self, underlay: &UnderlayGraph, out: W) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["link", "count"])?;
        for (a, b) in underlay.links() {
            w.write_record([format!("{}-{}", underlay.name(a), underlay.name(b)), self.count(a, b).to_string()])?;
        }
        w.flush()
    }
}

/// Flood a PING from `source` and charge every overlay copy of it to the
/// physical links on its route. Replies are not counted.
pub fn link_stress(
    overlay: &OverlayGraph,
    underlay: &UnderlayGraph,
    placement: &HostPlacement,
    source: NodeId,
    initial_ttl: i32,
) -> Result<LinkStress, MismatchError> {
    for id in overlay.node_ids() {
        let r = placement.get(id).ok_or(MismatchError::UnplacedNode(id))?;
        if r >= underlay.len() {
            return Err(MismatchError::UnknownRouter(r));
        }
    }
    if !underlay.is_connected() {
        return Err(MismatchError::InvalidUnderlay("underlay is disconnected".into()));
    }
    let (_, log) = flood_logged(overlay, source, MessageKind::Ping, initial_ttl, &FloodConfig::default())?;
    let mut router = Router::new(underlay);
    let mut stress = LinkStress { counts: BTreeMap::new(), transmissions: 0 };
    for t in log.iter().filter(|t| t.kind.is_broadcast()) {
        stress.transmissions += 1;
        let path = router.route(placement.map[&t.from], placement.map[&t.to])?;
        for w in path.windows(2) {
            *stress.counts.entry((w[0].min(w[1]), w[0].max(w[1]))).or_default() += 1;
        }
    }
    Ok(stress)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn routes_prefer_smallest_sequence_and_are_symmetric() {
        // Square 0-1-3-2-0: two shortest paths from 0 to 3.
        let mut u = UnderlayGraph::with_size(4);
        for (a, b) in [(0, 1), (1, 3), (3, 2), (2, 0)] {
            u.add_link(a, b).unwrap();
        }
        assert_eq!(u.route(0, 3).unwrap(), vec![0, 1, 3]);
        assert_eq!(u.route(3, 0).unwrap(), vec![3, 1, 0]);
        assert_eq!(u.route(2, 2).unwrap(), vec![2]);
    }

    #[test]
    fn placement_must_be_injective() {
        assert!(HostPlacement::new([(NodeId(0), 1), (NodeId(1), 1)]).is_err());
    }

    #[test]
    fn identity_tree_stresses_each_link_once() {
        let mut g = OverlayGraph::with_synthetic_nodes(6);
        for (a, b) in [(0, 1), (0, 2), (1, 3), (1, 4), (2, 5)] {
            g.add_edge(NodeId(a), NodeId(b)).unwrap();
        }
        let u = UnderlayGraph::from_overlay(&g);
        let s = link_stress(&g, &u, &HostPlacement::identity(&g), NodeId(3), 7).unwrap();
        assert_eq!(s.counts.len(), 5);
        assert!(s.counts.values().all(|&c| c == 1));
    }

    #[test]
    fn unplaced_node_is_reported() {
        let g = OverlayGraph::with_synthetic_nodes(2);
        let u = UnderlayGraph::with_size(2);
        let p = HostPlacement::new([(NodeId(0), 0)]).unwrap();
        assert_eq!(link_stress(&g, &u, &p, NodeId(0), 7), Err(MismatchError::UnplacedNode(NodeId(1))));
    }
}
