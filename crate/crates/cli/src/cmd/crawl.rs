use std::path::PathBuf;

use clap::Args;
use gnutellab::crawler::{churn_statistics, crawl, snapshot_fidelity, DEFAULT_HORIZONS_H};
use gnutellab::graph::load_graph;
use gnutellab::sim::run as run_sim;
use gnutellab::{CrawlConfig, CrawlSnapshot, NodeId, StaticNetwork};

use super::simulate::{build_config, SimulateArgs};
use super::{create_dir, fmt, write_file};
use crate::config::{write_resolved, Resolver};
use crate::error::CliError;
use crate::Common;

#[derive(Args, Debug)]
pub struct CrawlArgs {
    /// Static graph file to crawl. Without it a churning network is simulated.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Simulated crawl clients.
    #[arg(long)]
    workers: Option<usize>,
    /// OS threads for simultaneous contacts.
    #[arg(long)]
    threads: Option<usize>,
    /// Crawl start times in hours (simulated networks).
    #[arg(long, value_delimiter = ',')]
    crawl_times_h: Option<Vec<f64>>,
    #[command(flatten)]
    sim: SimulateArgs,
}

pub fn run(common: &Common, a: &CrawlArgs) -> Result<(), CliError> {
    let (mut r, seed, out) = common.open("crawl")?;
    match r.optional("graph", a.graph.clone())? {
        Some(path) => crawl_static(r, a, &path, &out),
        None => crawl_simulated(r, a, seed, &out),
    }
}

fn crawl_config(r: &mut Resolver, a: &CrawlArgs, seeds: Vec<NodeId>) -> Result<CrawlConfig, CliError> {
    let mut c = CrawlConfig::new(seeds, r.get("workers", a.workers, 50)?);
    c.connect_timeout_s = r.get("connect_timeout_s", None, c.connect_timeout_s)?;
    c.listen_timeout_s = r.get("listen_timeout_s", None, c.listen_timeout_s)?;
    c.invasiveness_cap = r.get("invasiveness_cap", None, c.invasiveness_cap)?;
    c.max_duration_s = r.optional("max_duration_s", None)?;
    c.threads = r.get("threads", a.threads, c.threads)?;
    c.validate()?;
    Ok(c)
}

fn crawl_static(mut r: Resolver, a: &CrawlArgs, path: &std::path::Path, out: &std::path::Path) -> Result<(), CliError> {
    let graph = load_graph(path)?;
    let first = graph.node_ids().next().map(|id| vec![id.0]).unwrap_or_default();
    let seeds: Vec<NodeId> = r.get("seeds", None, first)?.into_iter().map(NodeId).collect();
    let config = crawl_config(&mut r, a, seeds)?;
    let resolved = r.finish()?;
    let snap = crawl(&StaticNetwork::new(graph), &config)?;
    let dir = out.join("snapshot");
    create_dir(&dir)?;
    snap.write_dir(&dir)?;
    write_resolved(&resolved, "crawl", &out.join("config.toml"))?;
    report(&snap);
    println!("results in {}", out.display());
    Ok(())
}

fn crawl_simulated(mut r: Resolver, a: &CrawlArgs, seed: u64, out: &std::path::Path) -> Result<(), CliError> {
    // Defaults: a 1,000-node churning network for 24 h with sparse, short
    // pings so the run stays cheap.
    let mut sim = a.sim.clone();
    sim.population = Some(r.get("population", a.sim.population, 1_000)?);
    sim.duration_s = Some(r.get("duration_s", a.sim.duration_s, 24.0 * 3_600.0)?);
    sim.ping_period_s = Some(r.get("ping_period_s", a.sim.ping_period_s, 6.0 * 3_600.0)?);
    sim.ttl = Some(r.get("ttl", a.sim.ttl, 2)?);
    let c = build_config(&mut r, &sim, seed, true)?;
    let times = r.get("crawl_times_h", a.crawl_times_h.clone(), vec![2.0, 6.0, 12.0, 18.0])?;
    let seed_count = r.get("seed_count", None, 20usize)?;
    let horizons = r.get("horizons_h", None, DEFAULT_HORIZONS_H.to_vec())?;
    let hub_threshold = r.get("crawl_hub_threshold", None, 20usize)?;
    let template = crawl_config(&mut r, a, vec![NodeId(0)])?;
    let resolved = r.finish()?;

    let sim_report = run_sim(&c)?;
    let h = &sim_report.history;
    let mut snaps: Vec<CrawlSnapshot> = Vec::new();
    create_dir(out)?;
    let mut fidelity = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Invariant(e.to_string());
    fidelity
        .write_record([
            "snapshot",
            "started_at",
            "finished_at",
            "nodes",
            "node_recall",
            "edge_recall",
            "degree_distance",
        ])
        .map_err(io)?;
    for (i, &t_h) in times.iter().enumerate() {
        let start = t_h * 3_600.0;
        let seeds: Vec<NodeId> =
            h.live_at(start).filter(|&id| h.node(id).is_some_and(|n| !n.known_host)).take(seed_count).collect();
        if seeds.is_empty() {
            return Err(CliError::Input(format!("crawl_times_h: no live nodes to start from at {t_h} h")));
        }
        let mut cc = template.clone();
        cc.initial_nodes = seeds;
        cc.start_s = start;
        let snap = crawl(h, &cc)?;
        let dir = out.join(format!("snapshot_{i}"));
        create_dir(&dir)?;
        snap.write_dir(&dir)?;
        let f = snapshot_fidelity(&h.graph_at(snap.midpoint()), &snap);
        fidelity
            .write_record([
                i.to_string(),
                snap.started_at.to_string(),
                snap.finished_at.to_string(),
                snap.graph.node_count().to_string(),
                fmt(f.node_recall),
                fmt(f.edge_recall),
                fmt(f.degree_distance),
            ])
            .map_err(io)?;
        report(&snap);
        snaps.push(snap);
    }
    let bytes = fidelity.into_inner().map_err(|e| CliError::Invariant(e.to_string()))?;
    write_file(&out.join("fidelity.csv"), |w| std::io::Write::write_all(w, &bytes))?;
    if snaps.len() >= 2 {
        let churn = churn_statistics(&snaps, &horizons, hub_threshold)?;
        write_file(&out.join("churn.csv"), |w| churn.write_csv(w))?;
        if let Some(ratio) = churn.hub_reobservation_ratio {
            println!("hub re-observation ratio {ratio:.3}");
        }
    }
    write_resolved(&resolved, "crawl", &out.join("config.toml"))?;
    println!("results in {}", out.display());
    Ok(())
}

fn report(snap: &CrawlSnapshot) {
    println!(
        "crawl {:.0}-{:.0} s: {} nodes, {} edges, {} reported only",
        snap.started_at,
        snap.finished_at,
        snap.graph.node_count(),
        snap.graph.edge_count(),
        snap.reported_only.len()
    );
    for d in &snap.diagnostics {
        println!("  {d}");
    }
}
