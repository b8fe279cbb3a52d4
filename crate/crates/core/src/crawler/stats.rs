//! Cross-snapshot churn statistics and snapshot-versus-truth comparison.

use std::collections::{HashMap, HashSet};
use std::io::{self, Write};

use crate::graph::{degree_distribution, OverlayGraph};

use super::{endpoint_key, CrawlError, CrawlSnapshot};

pub const DEFAULT_HORIZONS_H: [f64; 5] = [1.0, 2.0, 4.0, 8.0, 24.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurvivalPoint {
    pub horizon_h: f64,
    /// Fraction of nodes seen in every snapshot up to the horizon; None when
    /// no later snapshot falls within it.
    pub survival: Option<f64>,
    /// Base observations pooled into this point.
    pub observed: usize,
}

impl SurvivalPoint {
    pub fn departed(&self) -> Option<f64> {
        self.survival.map(|s| 1.0 - s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChurnReport {
    pub survival: Vec<SurvivalPoint>,
    pub hub_threshold: usize,
    /// Next-snapshot re-observation rate of nodes with degree at least
    /// `hub_threshold`, over the rate for all nodes.
    pub hub_reobservation_ratio: Option<f64>,
}

impl ChurnReport {
    /// Columns: horizon_hours, survival_fraction. Undefined points are blank.
    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["horizon_hours", "survival_fraction"])?;
        for p in &self.survival {
            w.write_record([p.horizon_h.to_string(), p.survival.map(|s| format!("{s:.6}")).unwrap_or_default()])?;
        }
        w.flush()
    }
}

/// Survival over time-ordered snapshots, nodes matched by address and port.
///
/// For each snapshot `i` and horizon `h`, let `j` be the latest snapshot
/// starting no later than `start_i + h`. A node of `i` survives `h` if it is
/// present in every snapshot `i+1..=j`. Counts are pooled over all `i`.
pub fn churn_statistics(
    snapshots: &[CrawlSnapshot],
    horizons_h: &[f64],
    hub_threshold: usize,
) -> Result<ChurnReport, CrawlError> {
    if snapshots.len() < 2 {
        return Err(CrawlError::TooFewSnapshots(snapshots.len()));
    }
    for (i, w) in snapshots.windows(2).enumerate() {
        if w[1].started_at < w[0].finished_at {
            return Err(CrawlError::OverlappingSnapshots {
                index: i + 1,
                started: w[1].started_at,
                previous_finished: w[0].finished_at,
            });
        }
    }
    let members: Vec<HashSet<String>> =
        snapshots.iter().map(|s| s.graph.nodes().map(|(_, info)| endpoint_key(info)).collect()).collect();

    let mut survival = Vec::with_capacity(horizons_h.len());
    for &h in horizons_h {
        let (mut observed, mut survived) = (0usize, 0usize);
        for i in 0..snapshots.len() {
            let limit = snapshots[i].started_at + h * 3_600.0;
            let Some(j) = (i + 1..snapshots.len()).take_while(|&j| snapshots[j].started_at <= limit).last() else {
                continue;
            };
            observed += members[i].len();
            survived += members[i].iter().filter(|k| (i + 1..=j).all(|m| members[m].contains(*k))).count();
        }
        survival.push(SurvivalPoint {
            horizon_h: h,
            survival: (observed > 0).then(|| survived as f64 / observed as f64),
            observed,
        });
    }

    let (mut all, mut all_seen, mut hubs, mut hubs_seen) = (0usize, 0usize, 0usize, 0usize);
    for i in 0..snapshots.len() - 1 {
        let g = &snapshots[i].graph;
        for (id, info) in g.nodes() {
            let seen = members[i + 1].contains(&endpoint_key(info));
            all += 1;
            all_seen += seen as usize;
            if g.degree(id) >= hub_threshold {
                hubs += 1;
                hubs_seen += seen as usize;
            }
        }
    }
    let hub_reobservation_ratio =
        (hubs > 0 && all_seen > 0).then(|| (hubs_seen as f64 / hubs as f64) / (all_seen as f64 / all as f64));
    Ok(ChurnReport { survival, hub_threshold, hub_reobservation_ratio })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityReport {
    pub node_recall: f64,
    pub edge_recall: f64,
    /// Total-variation distance between the degree distributions.
    pub degree_distance: f64,
    pub truth_nodes: usize,
    pub truth_edges: usize,
}

/// Compare a crawl with the true overlay, nodes matched by address and port.
pub fn snapshot_fidelity(truth: &OverlayGraph, snapshot: &CrawlSnapshot) -> FidelityReport {
    let snap = &snapshot.graph;
    let index: HashMap<String, crate::graph::NodeId> =
        snap.nodes().map(|(id, info)| (endpoint_key(info), id)).collect();
    let mapped: HashMap<crate::graph::NodeId, crate::graph::NodeId> =
        truth.nodes().filter_map(|(id, info)| index.get(&endpoint_key(info)).map(|&s| (id, s))).collect();
    let found_edges = truth
        .edges()
        .filter(|(a, b)| matches!((mapped.get(a), mapped.get(b)), (Some(&x), Some(&y)) if snap.has_edge(x, y)))
        .count();
    let ratio = |found: usize, total: usize| if total == 0 { 1.0 } else { found as f64 / total as f64 };
    FidelityReport {
        node_recall: ratio(mapped.len(), truth.node_count()),
        edge_recall: ratio(found_edges, truth.edge_count()),
        degree_distance: degree_distribution(truth).total_variation_distance(&degree_distribution(snap)),
        truth_nodes: truth.node_count(),
        truth_edges: truth.edge_count(),
    }
}
