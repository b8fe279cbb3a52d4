use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use gnutellab::analysis::traffic_estimate;

use super::{create_dir, read_metrics, write_file, write_metrics};
use crate::config::write_resolved;
use crate::error::CliError;
use crate::Common;

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Output directory of an `analyze` run.
    #[arg(long)]
    analysis: Option<PathBuf>,
    /// Output directory of a `mismatch` run.
    #[arg(long)]
    mismatch: Option<PathBuf>,
    /// Bandwidth each connection carries, bits per second.
    #[arg(long)]
    per_connection_bps: Option<f64>,
}

pub fn run(common: &Common, a: &ReportArgs) -> Result<(), CliError> {
    let (mut r, _seed, out) = common.open("report")?;
    let analysis = r.optional("analysis", a.analysis.clone())?.map(|d| d.join("summary.csv"));
    let mismatch = r.optional("mismatch", a.mismatch.clone())?.map(|d| d.join("mismatch.csv"));
    let bps = r.get("per_connection_bps", a.per_connection_bps, 6_000.0)?;
    let resolved = r.finish()?;

    if analysis.is_none() && mismatch.is_none() {
        return Err(CliError::Input(
            "report: no inputs; expected summary.csv from `analyze` (analysis) and/or mismatch.csv from `mismatch` (mismatch)"
                .into(),
        ));
    }
    let missing: Vec<String> = [&analysis, &mismatch]
        .into_iter()
        .flatten()
        .filter(|p| !p.is_file())
        .map(|p| p.display().to_string())
        .collect();
    if !missing.is_empty() {
        return Err(CliError::Input(format!("report: missing input files: {}", missing.join(", "))));
    }

    let mut metrics: BTreeMap<String, String> = BTreeMap::new();
    for path in [&analysis, &mismatch].into_iter().flatten() {
        metrics.extend(read_metrics(path)?);
    }
    let number = |k: &str| -> Result<Option<f64>, CliError> {
        metrics
            .get(k)
            .map(|v| v.parse::<f64>().map_err(|_| CliError::Input(format!("report: `{k}` is not a number: {v}"))))
            .transpose()
    };

    let mut lines = Vec::new();
    let mut rows = Vec::new();
    let mut add = |label: &str, key: &str, text: String, value: String| {
        if !label.is_empty() {
            lines.push(format!("{label:<34} {text}"));
        }
        rows.push((key.to_string(), value));
    };
    if let Some(x) = number("largest_component_fraction")? {
        add("largest component fraction", "largest_component_fraction", format!("{x:.4}"), super::fmt(x));
    }
    if let Some(x) = number("connections_per_node")? {
        add("average connections per node", "connections_per_node", format!("{x:.2}"), super::fmt(x));
    }
    if let Some(x) = metrics.get("path_p95") {
        add("95th percentile path length", "path_p95", format!("{x} hops"), x.clone());
    }
    if let Some(x) = number("fitted_exponent")? {
        add("fitted degree exponent", "fitted_exponent", format!("{x:.2}"), super::fmt(x));
    }
    if let Some(edges) = number("edges")? {
        let t = traffic_estimate(edges, bps);
        add(
            "traffic estimate",
            "aggregate_bps",
            format!("{:.2} Gbps / {:.0} TB/month", t.gbps(), t.terabytes_per_month()),
            t.aggregate_bps.to_string(),
        );
        add("", "bytes_per_month", String::new(), t.bytes_per_month.to_string());
    }
    if let Some(x) = number("entropy_reduction")? {
        add("domain entropy reduction", "entropy_reduction", format!("{x:.4}"), super::fmt(x));
    }
    if let Some(x) = number("intra_as_fraction")? {
        add("intra-AS connection fraction", "intra_as_fraction", format!("{x:.4}"), super::fmt(x));
    }

    create_dir(&out)?;
    let text = lines.join("\n") + "\n";
    write_file(&out.join("report.txt"), |w| std::io::Write::write_all(w, text.as_bytes()))?;
    write_metrics(&out.join("report.csv"), &rows)?;
    write_resolved(&resolved, "report", &out.join("config.toml"))?;
    print!("{text}");
    Ok(())
}
