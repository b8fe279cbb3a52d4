use std::path::PathBuf;

use clap::Args;
use gnutellab::graph::{
    assign_labels, generate_multimodal, generate_preferential_attachment, save_graph, LabelScheme, MultimodalParams,
    WeightedLabels,
};

use crate::config::write_resolved;
use crate::error::CliError;
use crate::Common;

#[derive(Args, Debug)]
pub struct GenerateArgs {
    /// "ba" (preferential attachment) or "multimodal".
    #[arg(long)]
    model: Option<String>,
    /// Node count.
    #[arg(long)]
    n: Option<usize>,
    /// Edges added per new node (ba).
    #[arg(long)]
    m: Option<usize>,
    /// First tail degree (multimodal).
    #[arg(long)]
    knee: Option<usize>,
    #[arg(long)]
    tail_exponent: Option<f64>,
    /// Edges per node (multimodal).
    #[arg(long)]
    avg_connections: Option<f64>,
    /// "none", "independent" or "correlated".
    #[arg(long)]
    labels: Option<String>,
    /// Keep-anchor probability for correlated labels.
    #[arg(long)]
    locality: Option<f64>,
    /// Graph file; defaults to graph.txt in the output directory.
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
}

pub fn run(common: &Common, a: &GenerateArgs) -> Result<(), CliError> {
    let (mut r, seed, out) = common.open("generate")?;
    let model = r.get("model", a.model.clone(), "ba".to_string())?;
    let n = r.require("n", a.n)?;
    let mut graph = match model.as_str() {
        "ba" => {
            let m = r.get("m", a.m, 2)?;
            generate_preferential_attachment(n, m, seed)?
        }
        "multimodal" => {
            let mut p = MultimodalParams::new(n, seed);
            p.knee = r.get("knee", a.knee, p.knee)?;
            p.tail_exponent = r.get("tail_exponent", a.tail_exponent, p.tail_exponent)?;
            p.avg_connections = r.get("avg_connections", a.avg_connections, p.avg_connections)?;
            generate_multimodal(&p)?
        }
        other => return Err(CliError::Input(format!("model: expected `ba` or `multimodal`, got `{other}`"))),
    };
    let scheme = match r.get("labels", a.labels.clone(), "none".to_string())?.as_str() {
        "none" => None,
        "independent" => {
            let domains = WeightedLabels::uniform("dom", r.get("domains", None, 10)?)?;
            let ases = WeightedLabels::uniform("as", r.get("ases", None, 10)?)?;
            Some(LabelScheme::Independent { domains, ases })
        }
        "correlated" => Some(LabelScheme::topology_correlated(r.get("locality", a.locality, 0.9)?)),
        other => {
            return Err(CliError::Input(format!(
                "labels: expected `none`, `independent` or `correlated`, got `{other}`"
            )))
        }
    };
    if let Some(s) = &scheme {
        assign_labels(&mut graph, s, seed.wrapping_add(1))?;
    }
    let path = r.get("output", a.output.clone(), out.join("graph.txt"))?;
    let resolved = r.finish()?;
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        super::create_dir(parent)?;
    }
    save_graph(&graph, &path)?;
    let mut sidecar = path.clone().into_os_string();
    sidecar.push(".config.toml");
    write_resolved(&resolved, "generate", PathBuf::from(sidecar).as_path())?;
    println!("wrote {} ({} nodes, {} edges)", path.display(), graph.node_count(), graph.edge_count());
    Ok(())
}
