use std::path::PathBuf;

use clap::Args;
use gnutellab::graph::load_graph;
use gnutellab::mismatch::{
    build_clusters, clustering_entropy, domain_labels, fixtures, intra_as_fraction, label_entropy, link_stress,
    top_as_share, LabelDistribution, DEFAULT_HUB_THRESHOLD, DEFAULT_MERGE_OVERLAP,
};

use super::{create_dir, fmt, write_file, write_metrics};
use crate::config::write_resolved;
use crate::error::CliError;
use crate::Common;

#[derive(Args, Debug)]
pub struct MismatchArgs {
    /// Labeled graph file.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Minimum degree of a cluster hub.
    #[arg(long)]
    hub_threshold: Option<usize>,
    /// Also measure link stress on the eight-host reference topology.
    #[arg(long)]
    fixture: bool,
}

pub fn run(common: &Common, a: &MismatchArgs) -> Result<(), CliError> {
    let (mut r, _seed, out) = common.open("mismatch")?;
    let graph_path = r.optional("graph", a.graph.clone())?;
    let hub_threshold = r.get("hub_threshold", a.hub_threshold, DEFAULT_HUB_THRESHOLD)?;
    let merge_overlap = r.get("merge_overlap", None, DEFAULT_MERGE_OVERLAP)?;
    let top_k = r.get("top_as", None, 10usize)?;
    let fixture = r.get("fixture", a.fixture.then_some(true), false)?;
    let resolved = r.finish()?;
    if graph_path.is_none() && !fixture {
        return Err(CliError::Usage("mismatch: set `graph` and/or `fixture`".into()));
    }

    create_dir(&out)?;
    let mut rows = Vec::new();
    if let Some(path) = &graph_path {
        let g = load_graph(path)?;
        let labels = domain_labels(&g);
        let whole = label_entropy(&LabelDistribution::from_labels(labels.values().map(String::as_str))?);
        let partition = build_clusters(&g, hub_threshold, merge_overlap);
        let clustered = clustering_entropy(&partition, &labels)?;
        let reduction = if whole <= 0.0 { 0.0 } else { (whole - clustered) / whole };
        write_file(&out.join("clusters.csv"), |w| partition.write_csv(w))?;
        rows.push(("whole_entropy".into(), fmt(whole)));
        rows.push(("clustered_entropy".into(), fmt(clustered)));
        rows.push(("entropy_reduction".into(), fmt(reduction)));
        rows.push(("clusters".into(), partition.len().to_string()));
        if g.edge_count() > 0 {
            rows.push(("intra_as_fraction".into(), fmt(intra_as_fraction(&g)?)));
        }
        rows.push((format!("top_{top_k}_as_share"), fmt(top_as_share(&g, top_k)?)));
    }
    if fixture {
        let underlay = fixtures::underlay();
        let (d, e) = fixtures::cross_link();
        for (name, (g, placement)) in
            [("matched", fixtures::matched_overlay()), ("mismatched", fixtures::mismatched_overlay())]
        {
            let stress = link_stress(&g, &underlay, &placement, fixtures::source(), 7)?;
            write_file(&out.join(format!("stress_{name}.csv")), |w| stress.write_csv(&underlay, w))?;
            rows.push((format!("{name}_cross_link_traversals"), stress.count(d, e).to_string()));
        }
    }
    write_metrics(&out.join("mismatch.csv"), &rows)?;
    write_resolved(&resolved, "mismatch", &out.join("config.toml"))?;
    for (k, v) in &rows {
        println!("{k:<30} {v}");
    }
    Ok(())
}
