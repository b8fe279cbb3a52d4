use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use gnutellab::analysis::{
    contiguous_upper_degree, fit_multimodal, fit_power_law_range, robustness_experiment, PowerLawFit,
    DEFAULT_KNEE_CANDIDATES,
};
use gnutellab::graph::{
    average_connections_per_node, degree_distribution, largest_component_fraction, load_graph, mean_degree,
    path_length_distribution, PathMode, DEFAULT_PATH_SOURCES, EXACT_PATH_THRESHOLD,
};
use gnutellab::{MessageKind, OverlayGraph, RemovalStrategy};

use super::{create_dir, fmt, write_file, write_metrics};
use crate::config::write_resolved;
use crate::error::CliError;
use crate::Common;

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// Graph file to analyze.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// traffic.csv written by `simulate`.
    #[arg(long)]
    traffic: Option<PathBuf>,
    /// Lower end of the power-law fit window.
    #[arg(long)]
    fit_min_degree: Option<usize>,
    /// BFS sources for path lengths on large graphs.
    #[arg(long)]
    path_sources: Option<usize>,
}

pub fn run(common: &Common, a: &AnalyzeArgs) -> Result<(), CliError> {
    let (mut r, seed, out) = common.open("analyze")?;
    let graph_path = r.optional("graph", a.graph.clone())?;
    let traffic_path = r.optional("traffic", a.traffic.clone())?;
    if graph_path.is_none() && traffic_path.is_none() {
        return Err(CliError::Usage("analyze: set `graph` and/or `traffic`".into()));
    }
    let fit_min = r.get("fit_min_degree", a.fit_min_degree, 5)?;
    let sources = r.get("path_sources", a.path_sources, DEFAULT_PATH_SOURCES)?;
    let fractions = r.get("removal_fractions", None, vec![0.0, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5])?;
    let resolved = r.finish()?;

    create_dir(&out)?;
    let mut rows = Vec::new();
    if let Some(path) = &graph_path {
        analyze_graph(&load_graph(path)?, seed, fit_min, sources, &fractions, &out, &mut rows)?;
    }
    if let Some(path) = &traffic_path {
        analyze_traffic(path, &out, &mut rows)?;
    }
    write_metrics(&out.join("summary.csv"), &rows)?;
    write_resolved(&resolved, "analyze", &out.join("config.toml"))?;
    for (k, v) in &rows {
        println!("{k:<28} {v}");
    }
    Ok(())
}

fn analyze_graph(
    g: &OverlayGraph,
    seed: u64,
    fit_min: usize,
    sources: usize,
    fractions: &[f64],
    out: &Path,
    rows: &mut Vec<(String, String)>,
) -> Result<(), CliError> {
    let dist = degree_distribution(g);
    write_file(&out.join("degree.csv"), |w| {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["degree", "count"])?;
        for (d, c) in dist.iter() {
            w.write_record([d.to_string(), c.to_string()])?;
        }
        w.flush()
    })?;
    let mut row = |k: &str, v: String| rows.push((k.to_string(), v));
    row("nodes", g.node_count().to_string());
    row("edges", g.edge_count().to_string());
    row("connections_per_node", fmt(average_connections_per_node(g)?));
    row("mean_degree", fmt(mean_degree(g)?));
    row("largest_component_fraction", fmt(largest_component_fraction(g)));

    let power = contiguous_upper_degree(&dist, fit_min).and_then(|hi| fit_power_law_range(&dist, fit_min, hi).ok());
    let multi = fit_multimodal(&dist, DEFAULT_KNEE_CANDIDATES).ok();
    write_file(&out.join("fit.csv"), |w| {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["model", "exponent_k", "intercept", "r_squared", "fit_min", "fit_max", "knee"])?;
        let line = |f: &PowerLawFit, model: &str, knee: String| {
            [
                model.to_string(),
                fmt(f.exponent_k),
                fmt(f.intercept),
                fmt(f.r_squared),
                f.fit_range.0.to_string(),
                f.fit_range.1.to_string(),
                knee,
            ]
        };
        if let Some(f) = &power {
            w.write_record(line(f, "power_law", String::new()))?;
        }
        if let Some(m) = &multi {
            w.write_record(line(&m.tail, "multimodal", m.knee.to_string()))?;
        }
        w.flush()
    })?;
    if let Some(f) = &power {
        row("power_law_k", fmt(f.exponent_k));
    }
    if let Some(m) = &multi {
        row("multimodal_knee", m.knee.to_string());
        row("multimodal_tail_k", fmt(m.tail.exponent_k));
        row("flat_head", (!m.degenerate_head).to_string());
    }
    // A flat head means the tail exponent is the one that describes the graph.
    let fitted = match (&multi, &power) {
        (Some(m), _) if !m.degenerate_head => Some(m.tail.exponent_k),
        (_, Some(p)) => Some(p.exponent_k),
        _ => None,
    };
    if let Some(k) = fitted {
        row("fitted_exponent", fmt(k));
    }

    let mode =
        if g.node_count() < EXACT_PATH_THRESHOLD { PathMode::Exact } else { PathMode::Sampled { sources, seed } };
    let paths = path_length_distribution(g, mode);
    write_file(&out.join("paths.csv"), |w| {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["hops", "pairs"])?;
        for (d, c) in &paths.counts {
            w.write_record([d.to_string(), c.to_string()])?;
        }
        w.flush()
    })?;
    if let (Some(p50), Some(p95), Some(max)) = (paths.pct(0.5), paths.pct(0.95), paths.max_distance()) {
        row("path_p50", p50.to_string());
        row("path_p95", p95.to_string());
        row("path_max", max.to_string());
    }

    let mut curves = Vec::new();
    for s in [RemovalStrategy::Random, RemovalStrategy::Targeted] {
        curves.push(robustness_experiment(g, s, fractions, seed)?);
    }
    write_file(&out.join("robustness.csv"), |w| {
        let mut w = csv::Writer::from_writer(w);
        w.write_record([
            "strategy",
            "removed_fraction",
            "removed",
            "largest_component_size",
            "largest_component_fraction",
        ])?;
        for c in &curves {
            for p in &c.points {
                w.write_record([
                    c.strategy.name().to_string(),
                    p.removed_fraction.to_string(),
                    p.removed.to_string(),
                    p.largest_component_size.to_string(),
                    fmt(p.largest_component_fraction),
                ])?;
            }
        }
        w.flush()
    })
}

/// Message and byte shares from a `kind,count,bytes` table.
fn analyze_traffic(path: &Path, out: &Path, rows: &mut Vec<(String, String)>) -> Result<(), CliError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| CliError::io(path, e))?;
    let mut tally: BTreeMap<String, (u64, u64)> = BTreeMap::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| CliError::io(path, e))?;
        let parse = |i: usize| -> Result<u64, CliError> {
            rec.get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| CliError::Input(format!("{}: bad row {:?}", path.display(), rec)))
        };
        let kind = rec.get(0).unwrap_or_default().to_string();
        if MessageKind::from_name(&kind).is_none() {
            return Err(CliError::Input(format!("{}: unknown message kind `{kind}`", path.display())));
        }
        tally.insert(kind, (parse(1)?, parse(2)?));
    }
    let messages: u64 = tally.values().map(|t| t.0).sum();
    let bytes: u64 = tally.values().map(|t| t.1).sum();
    if messages == 0 {
        return Err(CliError::Input(format!("{}: no messages", path.display())));
    }
    let share = |x: u64, total: u64| if total == 0 { 0.0 } else { x as f64 / total as f64 };
    write_file(&out.join("traffic_mix.csv"), |w| {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["kind", "message_fraction", "byte_fraction"])?;
        for (k, &(c, b)) in &tally {
            w.write_record([k.clone(), fmt(share(c, messages)), fmt(share(b, bytes))])?;
        }
        w.flush()
    })?;
    rows.push(("total_messages".into(), messages.to_string()));
    rows.push(("total_bytes".into(), bytes.to_string()));
    for (k, &(c, b)) in &tally {
        rows.push((format!("message_fraction_{k}"), fmt(share(c, messages))));
        rows.push((format!("byte_fraction_{k}"), fmt(share(b, bytes))));
    }
    Ok(())
}
