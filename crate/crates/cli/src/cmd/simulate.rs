use clap::Args;
use gnutellab::graph::save_graph;
use gnutellab::sim::{calibrate_churn, preset, run as run_sim, traffic_report, ChurnModel, ConnectionLimits, PRESETS};
use gnutellab::{MessageKind, SimConfig};

use super::{create_dir, fmt, write_file, write_metrics};
use crate::config::write_resolved;
use crate::error::CliError;
use crate::Common;

#[derive(Args, Debug, Clone)]
pub struct SimulateArgs {
    /// Named scenario: "nov2000" or "mid2001". Other settings override it.
    #[arg(long)]
    pub(crate) preset: Option<String>,
    #[arg(long)]
    pub(crate) population: Option<usize>,
    #[arg(long)]
    pub(crate) duration_s: Option<f64>,
    #[arg(long)]
    pub(crate) ping_period_s: Option<f64>,
    /// Queries per node-hour.
    #[arg(long)]
    pub(crate) query_rate: Option<f64>,
    #[arg(long)]
    pub(crate) ttl: Option<i32>,
}

pub fn run(common: &Common, a: &SimulateArgs) -> Result<(), CliError> {
    let (mut r, seed, out) = common.open("simulate")?;
    let c = build_config(&mut r, a, seed, false)?;
    let resolved = r.finish()?;

    let report = run_sim(&c)?;
    let traffic = traffic_report(&report).ok();

    create_dir(&out)?;
    write_file(&out.join("traffic.csv"), |w| report.write_traffic_csv(w))?;
    write_file(&out.join("links.csv"), |w| report.write_links_csv(w))?;
    write_file(&out.join("sessions.csv"), |w| report.write_sessions_csv(w))?;
    write_file(&out.join("connections.csv"), |w| report.write_connections_csv(w))?;
    for (t, g) in &report.snapshots {
        save_graph(g, out.join(format!("snapshot_{t}s.txt")))?;
    }
    let k = &report.conservation;
    let mut rows = vec![
        ("total_messages".to_string(), report.total_messages().to_string()),
        ("total_bytes".to_string(), report.total_bytes().to_string()),
        ("transmissions".to_string(), k.transmissions.to_string()),
        ("delivered".to_string(), k.delivered.to_string()),
        ("dropped_departed".to_string(), k.dropped_departed.to_string()),
        ("ttl_expired".to_string(), k.ttl_expired.to_string()),
        ("query_hits".to_string(), report.query_hits.to_string()),
        ("sessions".to_string(), report.sessions.len().to_string()),
    ];
    if let Some(t) = &traffic {
        rows.push(("per_connection_bps".to_string(), fmt(t.per_connection_bps())));
        for kind in MessageKind::ALL {
            rows.push((format!("message_fraction_{}", kind.name()), fmt(t.message_fraction(kind))));
            rows.push((format!("byte_fraction_{}", kind.name()), fmt(t.byte_fraction(kind))));
        }
    }
    write_metrics(&out.join("summary.csv"), &rows)?;
    write_resolved(&resolved, "simulate", &out.join("config.toml"))?;

    println!("{} messages, {} bytes over {} s", report.total_messages(), report.total_bytes(), c.duration_s);
    if let Some(t) = traffic {
        println!(
            "QUERY {:.3} of messages; PING+PONG {:.3} of bytes; {:.1} bps per connection",
            t.message_fraction(MessageKind::Query),
            t.byte_fraction(MessageKind::Ping) + t.byte_fraction(MessageKind::Pong),
            t.per_connection_bps()
        );
    }
    println!("results in {}", out.display());
    Ok(())
}

/// Simulation settings shared with `crawl`. Churn is on when a preset or
/// `churn_default` asks for it, unless the `churn` key says otherwise.
pub fn build_config(
    r: &mut crate::config::Resolver,
    a: &SimulateArgs,
    seed: u64,
    churn_default: bool,
) -> Result<SimConfig, CliError> {
    let mut c = match r.optional("preset", a.preset.clone())? {
        Some(name) => preset(&name, seed)
            .ok_or_else(|| CliError::Input(format!("preset: unknown `{name}`, expected one of {PRESETS:?}")))?,
        None => SimConfig::new(r.require("population", a.population)?, r.require("duration_s", a.duration_s)?, seed),
    };
    c.target_population = r.get("population", a.population, c.target_population)?;
    c.duration_s = r.get("duration_s", a.duration_s, c.duration_s)?;
    c.ping_period_s = r.get("ping_period_s", a.ping_period_s, c.ping_period_s)?;
    c.query_rate_per_hour = r.get("query_rate", a.query_rate, c.query_rate_per_hour)?;
    c.initial_ttl = r.get("ttl", a.ttl, c.initial_ttl)?;
    c.known_hosts = r.get("known_hosts", None, c.known_hosts)?;
    c.dial_target = r.get("dial_target", None, c.dial_target)?;
    c.files_per_node = r.get("files_per_node", None, c.files_per_node)?;
    c.hub_threshold = r.get("hub_threshold", None, c.hub_threshold)?;
    c.snapshot_times_s = r.get("snapshot_times_s", None, c.snapshot_times_s.clone())?;
    c.sample_interval_s = r.get("sample_interval_s", None, c.sample_interval_s)?;

    let (limits, weights): (Vec<usize>, Vec<f64>) = c.max_connections.choices.iter().copied().unzip();
    let limits = r.get("connection_limits", None, limits)?;
    let weights = r.get("connection_weights", None, weights)?;
    if limits.len() != weights.len() {
        return Err(CliError::Input("connection_limits and connection_weights differ in length".into()));
    }
    c.max_connections = ConnectionLimits { choices: limits.into_iter().zip(weights).collect() };

    if r.get("churn", None, churn_default || c.churn.is_some())? {
        let q1 = (r.get("session_q1_hours", None, 4.0)?, r.get("session_q1_cdf", None, 0.40)?);
        let q2 = (r.get("session_q2_hours", None, 24.0)?, r.get("session_q2_cdf", None, 0.75)?);
        let mut model = ChurnModel::steady_state(calibrate_churn(q1, q2)?, c.target_population);
        model.hub_availability_boost = r.get("hub_boost", None, model.hub_availability_boost)?;
        c.churn = Some(model);
    } else {
        c.churn = None;
    }
    c.validate()?;
    Ok(c)
}
