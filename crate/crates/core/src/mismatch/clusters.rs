//! Hub-seeded clustering.

use std::collections::{BTreeSet, HashMap};
use std::io::{self, Write};

use crate::graph::{NodeId, OverlayGraph};

use super::{clustering_entropy, label_entropy, LabelDistribution};

pub const DEFAULT_HUB_THRESHOLD: usize = 10;
pub const DEFAULT_MERGE_OVERLAP: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterPartition {
    /// Disjoint clusters, each sorted by NodeId.
    pub clusters: Vec<Vec<NodeId>>,
    pub residual_index: Option<usize>,
}

impl ClusterPartition {
    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    /// Columns: node, cluster.
    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut rows: Vec<(NodeId, usize)> =
            self.clusters.iter().enumerate().flat_map(|(c, ids)| ids.iter().map(move |&id| (id, c))).collect();
        rows.sort_unstable();
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["node", "cluster"])?;
        for (id, c) in rows {
            w.write_record([id.to_string(), c.to_string()])?;
        }
        w.flush()
    }
}

/// One cluster per hub (degree ≥ `hub_threshold`): the hub and its
/// neighbors. Clusters sharing more than `merge_overlap` of the smaller one
/// are merged until none qualify. A node left in several clusters joins the
/// largest, ties going to the cluster with the smaller minimum NodeId. Nodes
/// in no hub cluster form a trailing residual cluster.
pub fn build_clusters(graph: &OverlayGraph, hub_threshold: usize, merge_overlap: f64) -> ClusterPartition {
    let hub_threshold = hub_threshold.max(1);
    let mut clusters: Vec<Option<BTreeSet<NodeId>>> = graph
        .node_ids()
        .filter(|&id| graph.degree(id) >= hub_threshold)
        .map(|hub| Some(std::iter::once(hub).chain(graph.neighbors(hub).iter().copied()).collect()))
        .collect();

    let mut membership: HashMap<NodeId, BTreeSet<usize>> = HashMap::new();
    for (c, members) in clusters.iter().enumerate() {
        for &id in members.as_ref().expect("fresh cluster") {
            membership.entry(id).or_default().insert(c);
        }
    }

    let min_id = |c: &Option<BTreeSet<NodeId>>| c.as_ref().and_then(|s| s.first().copied());
    loop {
        let mut merged_any = false;
        let mut order: Vec<usize> = (0..clusters.len()).filter(|&c| clusters[c].is_some()).collect();
        order.sort_by_key(|&c| (min_id(&clusters[c]), c));
        for i in order {
            // `i` may have been absorbed earlier in this pass.
            while clusters[i].is_some() {
                let Some(j) = first_mergeable(&clusters, &membership, i, merge_overlap) else { break };
                let absorbed = clusters[j].take().expect("live partner");
                let target = clusters[i].as_mut().expect("live cluster");
                for id in absorbed {
                    let m = membership.get_mut(&id).expect("indexed member");
                    m.remove(&j);
                    m.insert(i);
                    target.insert(id);
                }
                merged_any = true;
            }
        }
        if !merged_any {
            break;
        }
    }

    let mut live: Vec<usize> = (0..clusters.len()).filter(|&c| clusters[c].is_some()).collect();
    live.sort_by_key(|&c| (min_id(&clusters[c]), c));
    let rank: HashMap<usize, usize> = live.iter().enumerate().map(|(r, &c)| (c, r)).collect();
    let sizes: Vec<usize> = live.iter().map(|&c| clusters[c].as_ref().map_or(0, BTreeSet::len)).collect();

    let mut out: Vec<Vec<NodeId>> = vec![Vec::new(); live.len()];
    let mut residual = Vec::new();
    for id in graph.node_ids() {
        match membership.get(&id) {
            Some(cs) if !cs.is_empty() => {
                // Ranks follow ascending minimum id, so the first maximum wins ties.
                let best =
                    cs.iter().map(|c| rank[c]).max_by_key(|&r| (sizes[r], std::cmp::Reverse(r))).expect("nonempty");
                out[best].push(id);
            }
            _ => residual.push(id),
        }
    }
    out.retain(|c| !c.is_empty());
    let residual_index = (!residual.is_empty()).then(|| {
        out.push(residual);
        out.len() - 1
    });
    ClusterPartition { clusters: out, residual_index }
}

fn first_mergeable(
    clusters: &[Option<BTreeSet<NodeId>>],
    membership: &HashMap<NodeId, BTreeSet<usize>>,
    i: usize,
    merge_overlap: f64,
) -> Option<usize> {
    let a = clusters[i].as_ref()?;
    let mut shared: HashMap<usize, usize> = HashMap::new();
    for id in a {
        for &c in &membership[id] {
            if c != i {
                *shared.entry(c).or_default() += 1;
            }
        }
    }
    let mut candidates: Vec<(NodeId, usize)> = shared
        .into_iter()
        .filter_map(|(j, common)| {
            let b = clusters[j].as_ref()?;
            let smaller = a.len().min(b.len()) as f64;
            (common as f64 > merge_overlap * smaller).then(|| (*b.first().expect("nonempty"), j))
        })
        .collect();
    candidates.sort_unstable();
    candidates.first().map(|&(_, j)| j)
}

/// Node → domain label for every live node.
pub fn domain_labels(graph: &OverlayGraph) -> HashMap<NodeId, String> {
    graph.nodes().map(|(id, info)| (id, info.domain.clone())).collect()
}

pub fn as_labels(graph: &OverlayGraph) -> HashMap<NodeId, String> {
    graph.nodes().map(|(id, info)| (id, info.as_label.clone())).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyReduction {
    pub whole: f64,
    pub clustered: f64,
    /// (whole − clustered) / whole, or 0 when whole is 0.
    pub reduction: f64,
    pub clusters: usize,
}

/// Relative entropy decrease of domain labels under [`build_clusters`].
pub fn entropy_reduction(graph: &OverlayGraph, hub_threshold: usize) -> EntropyReduction {
    let labels = domain_labels(graph);
    if labels.is_empty() {
        return EntropyReduction { whole: 0.0, clustered: 0.0, reduction: 0.0, clusters: 0 };
    }
    let whole = label_entropy(&LabelDistribution::from_labels(labels.values().map(String::as_str)).expect("nonempty"));
    let partition = build_clusters(graph, hub_threshold, DEFAULT_MERGE_OVERLAP);
    let clustered = clustering_entropy(&partition, &labels).expect("partition covers the labeled graph");
    let reduction = if whole <= 0.0 { 0.0 } else { (whole - clustered) / whole };
    EntropyReduction { whole, clustered, reduction, clusters: partition.len() }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(usize, usize)]) -> OverlayGraph {
        let mut g = OverlayGraph::with_synthetic_nodes(n);
        for &(a, b) in edges {
            g.add_edge(NodeId(a), NodeId(b)).unwrap();
        }
        g
    }

    fn ids(v: &[usize]) -> Vec<NodeId> {
        v.iter().map(|&i| NodeId(i)).collect()
    }

    #[test]
    fn disjoint_stars_and_isolates() {
        let g = graph(10, &[(0, 1), (0, 2), (0, 3), (4, 5), (4, 6), (4, 7)]);
        let p = build_clusters(&g, 3, DEFAULT_MERGE_OVERLAP);
        assert_eq!(p.clusters, vec![ids(&[0, 1, 2, 3]), ids(&[4, 5, 6, 7]), ids(&[8, 9])]);
        assert_eq!(p.residual_index, Some(2));
    }

    #[test]
    fn quarter_overlap_is_not_merged() {
        // h1 = 0 with {1,2,3}; h2 = 4 with {3,5,6}; they share node 3 only.
        let g = graph(7, &[(0, 1), (0, 2), (0, 3), (4, 3), (4, 5), (4, 6)]);
        let p = build_clusters(&g, 3, DEFAULT_MERGE_OVERLAP);
        // Equal sizes, so node 3 goes to the cluster holding node 0.
        assert_eq!(p.clusters, vec![ids(&[0, 1, 2, 3]), ids(&[4, 5, 6])]);
        assert_eq!(p.residual_index, None);
    }

    #[test]
    fn half_overlap_is_merged() {
        // h1 = 0 with {1,2,3}; h2 = 4 with {2,3,5}; shared {2,3} is 50%.
        let g = graph(6, &[(0, 1), (0, 2), (0, 3), (4, 2), (4, 3), (4, 5)]);
        let p = build_clusters(&g, 3, DEFAULT_MERGE_OVERLAP);
        assert_eq!(p.clusters, vec![ids(&[0, 1, 2, 3, 4, 5])]);
    }

    #[test]
    fn no_hubs_gives_single_residual() {
        let g = graph(4, &[(0, 1), (2, 3)]);
        let p = build_clusters(&g, 10, DEFAULT_MERGE_OVERLAP);
        assert_eq!(p.clusters, vec![ids(&[0, 1, 2, 3])]);
        assert_eq!(p.residual_index, Some(0));
    }

    #[test]
    fn uniform_labels_have_zero_reduction() {
        let g = graph(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        assert_eq!(entropy_reduction(&g, 2).reduction, 0.0);
    }

    #[test]
    fn clustered_labels_reduce_entropy() {
        let mut g = graph(8, &[(0, 1), (0, 2), (0, 3), (4, 5), (4, 6), (4, 7)]);
        for i in 0..8 {
            g.info_mut(NodeId(i)).unwrap().domain = if i < 4 { "a.edu".into() } else { "b.com".into() };
        }
        let r = entropy_reduction(&g, 3);
        assert_eq!(r.whole, 2.0);
        assert_eq!(r.clustered, 0.0);
        assert_eq!(r.reduction, 1.0);
    }

    #[test]
    fn csv_is_sorted_by_node() {
        let p = ClusterPartition { clusters: vec![ids(&[2, 0]), ids(&[1])], residual_index: Some(1) };
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "node,cluster\n0,0\n1,1\n2,0\n");
    }
}
