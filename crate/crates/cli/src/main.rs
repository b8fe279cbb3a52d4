//! `gnutellab`: run overlay experiments and write their results as CSV and
//! graph files.

mod cmd;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "gnutellab", version, about = "Gnutella overlay simulation and measurement toolkit")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// TOML file with flat settings; a table named after the subcommand
    /// overrides top-level keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random choice in the run.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, env = "GNUTELLAB_OUT")]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic overlay graph.
    Generate(cmd::generate::GenerateArgs),
    /// Run the discrete-event network simulation.
    Simulate(cmd::simulate::SimulateArgs),
    /// Crawl a static graph file or a simulated churning network.
    Crawl(cmd::crawl::CrawlArgs),
    /// Degree fits, robustness and path lengths of a graph; traffic mix of a
    /// simulation.
    Analyze(cmd::analyze::AnalyzeArgs),
    /// Label entropy of hub clusters and underlay link stress.
    Mismatch(cmd::mismatch::MismatchArgs),
    /// Collect headline figures from earlier analyze and mismatch runs.
    Report(cmd::report::ReportArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Generate(a) => cmd::generate::run(&cli.common, a),
        Command::Simulate(a) => cmd::simulate::run(&cli.common, a),
        Command::Crawl(a) => cmd::crawl::run(&cli.common, a),
        Command::Analyze(a) => cmd::analyze::run(&cli.common, a),
        Command::Mismatch(a) => cmd::mismatch::run(&cli.common, a),
        Command::Report(a) => cmd::report::run(&cli.common, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

impl Common {
    /// Resolver for `section` plus the resolved seed and output directory.
    fn open(&self, section: &'static str) -> Result<(config::Resolver, u64, PathBuf), CliError> {
        let mut r = config::Resolver::new(section, self.config.as_deref())?;
        let seed = r.get("seed", self.seed, 1)?;
        let out = r.get("out", self.out.clone(), PathBuf::from("gnutellab-out"))?;
        Ok((r, seed, out))
    }
}
