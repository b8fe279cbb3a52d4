//! Deterministic discrete-event simulation of a churning servent network.

mod churn;
mod engine;
mod history;
mod report;

use rand::distr::weighted::WeightedIndex;

use crate::protocol::{MessageKind, DEFAULT_MEMORY_CAPACITY, DEFAULT_TTL};

pub use churn::{calibrate_churn, ChurnModel, SessionLaw};
pub use engine::run;
pub use history::{EdgeRecord, NetworkHistory, NodeRecord};
pub use report::{
    traffic_report, ConnectionSample, Conservation, KindTally, LinkCounters, SessionSample, SimReport, TrafficReport,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("quantiles {q1:?} and {q2:?} do not determine a session law")]
    DegenerateQuantiles { q1: (f64, f64), q2: (f64, f64) },
    #[error("report has no messages")]
    EmptyReport,
    #[error("invariant violated: {0}")]
    Invariant(String),
}

/// Wire sizes in bytes. QUERY adds the search string length to `query`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MessageSizes {
    pub ping: u64,
    pub pong: u64,
    pub query: u64,
    pub query_response: u64,
    pub push: u64,
    pub other: u64,
}

impl Default for MessageSizes {
    fn default() -> Self {
        MessageSizes { ping: 23, pong: 37, query: 23, query_response: 100, push: 49, other: 23 }
    }
}

impl MessageSizes {
    /// Fixed part of a message of `kind`.
    pub fn base(&self, kind: MessageKind) -> u64 {
        match kind {
            MessageKind::Ping => self.ping,
            MessageKind::Pong => self.pong,
            MessageKind::Query => self.query,
            MessageKind::QueryResponse => self.query_response,
            MessageKind::Push => self.push,
            MessageKind::Other => self.other,
        }
    }
}

/// Discrete distribution of per-node connection limits.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionLimits {
    pub choices: Vec<(usize, f64)>,
}

impl ConnectionLimits {
    pub fn fixed(limit: usize) -> Self {
        ConnectionLimits { choices: vec![(limit, 1.0)] }
    }

    pub(crate) fn sampler(&self) -> Result<WeightedIndex<f64>, SimError> {
        if self.choices.iter().any(|&(l, _)| l == 0) {
            return Err(SimError::InvalidConfig("connection limits must be positive".into()));
        }
        WeightedIndex::new(self.choices.iter().map(|c| c.1))
            .map_err(|e| SimError::InvalidConfig(format!("connection limit weights: {e}")))
    }
}

impl Default for ConnectionLimits {
    fn default() -> Self {
        ConnectionLimits { choices: vec![(8, 0.5), (16, 0.35), (32, 0.15)] }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub target_population: usize,
    pub max_connections: ConnectionLimits,
    /// Connections a servent tries to keep open by dialing.
    pub dial_target: usize,
    pub initial_ttl: i32,
    /// None disables joins and departures after the initial population.
    pub churn: Option<ChurnModel>,
    pub known_hosts: usize,
    pub ping_period_s: f64,
    pub query_rate_per_hour: f64,
    pub duration_s: f64,
    pub seed: u64,
    pub message_sizes: MessageSizes,
    pub query_catalog: Vec<String>,
    pub files_per_node: usize,
    pub memory_capacity: usize,
    /// Degree at which the hub availability boost applies.
    pub hub_threshold: usize,
    pub snapshot_times_s: Vec<f64>,
    /// Spacing of the connections-per-node series; 0 disables it.
    pub sample_interval_s: f64,
}

impl SimConfig {
    pub fn new(target_population: usize, duration_s: f64, seed: u64) -> Self {
        SimConfig {
            target_population,
            max_connections: ConnectionLimits::default(),
            dial_target: 3,
            initial_ttl: DEFAULT_TTL,
            churn: None,
            known_hosts: 3,
            ping_period_s: 60.0,
            query_rate_per_hour: 0.0,
            duration_s,
            seed,
            message_sizes: MessageSizes::default(),
            query_catalog: default_catalog(),
            files_per_node: 5,
            memory_capacity: DEFAULT_MEMORY_CAPACITY,
            hub_threshold: 10,
            snapshot_times_s: Vec::new(),
            sample_interval_s: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidConfig(m));
        if self.target_population == 0 {
            return bad("target_population must be positive".into());
        }
        if self.known_hosts == 0 {
            return bad("known_hosts must be at least 1".into());
        }
        if self.known_hosts > self.target_population {
            return bad(format!(
                "known_hosts ({}) exceeds target_population ({})",
                self.known_hosts, self.target_population
            ));
        }
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return bad(format!("duration must be positive, got {}", self.duration_s));
        }
        if self.ping_period_s.is_nan() || self.ping_period_s <= 0.0 {
            return bad(format!("ping_period must be positive, got {}", self.ping_period_s));
        }
        if !(self.query_rate_per_hour >= 0.0 && self.query_rate_per_hour.is_finite()) {
            return bad(format!("query_rate must be non-negative, got {}", self.query_rate_per_hour));
        }
        if self.query_rate_per_hour > 0.0 && self.query_catalog.is_empty() {
            return bad("queries need a nonempty catalog".into());
        }
        if self.initial_ttl < 1 {
            return bad(format!("initial_ttl must be at least 1, got {}", self.initial_ttl));
        }
        if self.dial_target == 0 {
            return bad("dial_target must be positive".into());
        }
        if let Some(c) = &self.churn {
            if !(c.arrival_rate >= 0.0 && c.arrival_rate.is_finite()) {
                return bad(format!("arrival_rate must be non-negative, got {}", c.arrival_rate));
            }
            if c.hub_availability_boost.is_nan() || c.hub_availability_boost <= 0.0 {
                return bad(format!("hub_availability_boost must be positive, got {}", c.hub_availability_boost));
            }
        }
        self.max_connections.sampler()?;
        Ok(())
    }
}

const ARTISTS: [&str; 25] = [
    "amber", "basin", "cinder", "delta", "ember", "fable", "garnet", "harbor", "indigo", "juniper", "kestrel", "lumen",
    "mosaic", "nectar", "onyx", "prairie", "quartz", "raven", "sable", "tundra", "umber", "velvet", "willow", "xenon",
    "zephyr",
];
const TITLES: [&str; 40] = [
    "anthem",
    "ballad",
    "canyon",
    "dawn",
    "echoes",
    "fields",
    "ghosts",
    "highway",
    "islands",
    "journey",
    "kingdom",
    "lanterns",
    "meadow",
    "nights",
    "orbit",
    "pilgrim",
    "quarry",
    "rivers",
    "signal",
    "tides",
    "undertow",
    "voyage",
    "wires",
    "yonder",
    "atlas",
    "borealis",
    "comet",
    "drift",
    "eclipse",
    "frontier",
    "glacier",
    "horizon",
    "ivory",
    "jetstream",
    "keystone",
    "lagoon",
    "monsoon",
    "nomad",
    "outpost",
    "paragon",
];

/// 1,000 "artist title" strings used both as shared file stems and queries.
pub fn default_catalog() -> Vec<String> {
    ARTISTS.iter().flat_map(|a| TITLES.iter().map(move |t| format!("{a} {t}"))).collect()
}

pub const PRESETS: [&str; 2] = ["nov2000", "mid2001"];

/// Named scenarios. "nov2000" is dominated by membership traffic (about one
/// query per ping); "mid2001" has sparse pings and about twenty queries per
/// ping.
pub fn preset(name: &str, seed: u64) -> Option<SimConfig> {
    let law = calibrate_churn((4.0, 0.40), (24.0, 0.75)).expect("valid quantiles");
    let mut c = SimConfig::new(150, 600.0, seed);
    c.churn = Some(ChurnModel::steady_state(law, c.target_population));
    c.sample_interval_s = 60.0;
    match name {
        "nov2000" => {
            c.ping_period_s = 60.0;
            c.query_rate_per_hour = 60.0;
        }
        "mid2001" => {
            c.ping_period_s = 300.0;
            c.query_rate_per_hour = 240.0;
        }
        _ => return None,
    }
    Some(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_is_distinct() {
        let c = default_catalog();
        let mut d = c.clone();
        d.sort();
        d.dedup();
        assert_eq!(c.len(), 1_000);
        assert_eq!(d.len(), 1_000);
    }

    #[test]
    fn config_validation() {
        let mut c = SimConfig::new(10, 60.0, 1);
        assert!(c.validate().is_ok());
        c.known_hosts = 11;
        assert!(matches!(c.validate(), Err(SimError::InvalidConfig(m)) if m.contains("known_hosts")));
        let mut c = SimConfig::new(10, 0.0, 1);
        assert!(c.validate().is_err());
        c.duration_s = 10.0;
        c.ping_period_s = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn presets_exist() {
        for p in PRESETS {
            assert!(preset(p, 1).unwrap().validate().is_ok());
        }
        assert!(preset("dec1999", 1).is_none());
    }
}
