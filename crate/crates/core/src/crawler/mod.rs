//! PING-based crawler with a shared frontier and simulated worker pool.

mod stats;
mod target;

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashSet, VecDeque};
use std::fs;
use std::io;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::{save_graph, GraphError, NodeId, NodeInfo, OverlayGraph};
use crate::protocol::{handle, originate, Action, MessageKind, Payload, ServentState};

pub use stats::{churn_statistics, snapshot_fidelity, ChurnReport, FidelityReport, SurvivalPoint, DEFAULT_HORIZONS_H};
pub use target::{CrawlTarget, Observation, StaticNetwork};

/// Seconds a refused connection costs a worker.
pub const REFUSAL_COST_S: f64 = 1.0;
/// Id the crawler uses for itself in protocol exchanges.
pub const CRAWLER_ID: NodeId = NodeId(usize::MAX);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CrawlError {
    #[error("invalid crawl config: {0}")]
    InvalidConfig(String),
    #[error("need at least 2 snapshots, got {0}")]
    TooFewSnapshots(usize),
    #[error("snapshot {index} starts at {started} before the previous one finishes at {previous_finished}")]
    OverlappingSnapshots { index: usize, started: f64, previous_finished: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrawlConfig {
    pub initial_nodes: Vec<NodeId>,
    pub connect_timeout_s: f64,
    pub listen_timeout_s: f64,
    /// Simulated concurrent clients; 1 is a sequential crawl.
    pub workers: usize,
    /// Upper bound on concurrent connections to the network.
    pub invasiveness_cap: usize,
    pub start_s: f64,
    /// No contact starts after `start_s + max_duration_s`.
    pub max_duration_s: Option<f64>,
    /// OS threads that carry out contacts issued at the same instant.
    pub threads: usize,
}

impl CrawlConfig {
    pub fn new(initial_nodes: Vec<NodeId>, workers: usize) -> Self {
        CrawlConfig {
            initial_nodes,
            connect_timeout_s: 20.0,
            listen_timeout_s: 30.0,
            workers,
            invasiveness_cap: workers.max(50),
            start_s: 0.0,
            max_duration_s: None,
            threads: 1,
        }
    }

    pub fn validate(&self) -> Result<(), CrawlError> {
        let bad = |m: String| Err(CrawlError::InvalidConfig(m));
        if self.initial_nodes.is_empty() {
            return bad("initial_nodes must not be empty".into());
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        if self.workers > self.invasiveness_cap {
            return bad(format!("workers ({}) exceed invasiveness_cap ({})", self.workers, self.invasiveness_cap));
        }
        if !(self.connect_timeout_s > 0.0 && self.listen_timeout_s > 0.0) {
            return bad("timeouts must be positive".into());
        }
        if self.threads == 0 {
            return bad("threads must be at least 1".into());
        }
        if !self.start_s.is_finite() || self.max_duration_s.is_some_and(|d| d.is_nan() || d < 0.0) {
            return bad("start and max_duration must be finite and non-negative".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ContactOutcome {
    Confirmed,
    Departed,
    Refused,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContactRecord {
    pub node: NodeId,
    pub started_s: f64,
    pub finished_s: f64,
    pub outcome: ContactOutcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrawlSnapshot {
    pub started_at: f64,
    pub finished_at: f64,
    /// Confirmed nodes and the edges reported between them.
    pub graph: OverlayGraph,
    /// "address:port" of nodes seen but never successfully contacted.
    pub reported_only: BTreeSet<String>,
    /// Every connection attempt, in start order.
    pub contacts: Vec<ContactRecord>,
    pub diagnostics: Vec<String>,
}

impl CrawlSnapshot {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.started_at + self.finished_at)
    }

    /// Writes `graph.txt`, `meta.csv` and `reported_only.csv` into `dir`.
    pub fn write_dir(&self, dir: impl AsRef<Path>) -> Result<(), GraphError> {
        let dir = dir.as_ref();
        let io_err = |path: &Path, e: &dyn std::fmt::Display| GraphError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        };
        fs::create_dir_all(dir).map_err(|e| io_err(dir, &e))?;
        save_graph(&self.graph, dir.join("graph.txt"))?;
        let meta = dir.join("meta.csv");
        fs::File::create(&meta).and_then(|f| self.write_meta(f)).map_err(|e| io_err(&meta, &e))?;
        let reported = dir.join("reported_only.csv");
        fs::File::create(&reported).and_then(|f| self.write_reported(f)).map_err(|e| io_err(&reported, &e))
    }

    /// Columns: endpoint.
    pub fn write_reported<W: io::Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["endpoint"])?;
        for e in &self.reported_only {
            w.write_record([e])?;
        }
        w.flush()
    }

    /// Columns: started_at, finished_at, confirmed, reported_only.
    pub fn write_meta<W: io::Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["started_at", "finished_at", "confirmed", "reported_only"])?;
        w.write_record([
            self.started_at.to_string(),
            self.finished_at.to_string(),
            self.graph.node_count().to_string(),
            self.reported_only.len().to_string(),
        ])?;
        w.flush()
    }
}

pub fn endpoint_key(info: &NodeInfo) -> String {
    format!("{}:{}", info.address, info.port)
}

/// Result of one contact: who answered the ttl-2 PING.
struct ContactResult {
    outcome: ContactOutcome,
    /// The contacted node's own PONG, then its neighbors' in arrival order.
    pongs: Vec<(NodeId, NodeInfo)>,
}

/// Connect to `node`, send a ttl-2 PING and collect the PONGs routed back.
fn contact<T: CrawlTarget + ?Sized>(network: &T, node: NodeId, t: f64) -> ContactResult {
    let neighbors = match network.observe(node, t) {
        Observation::Departed => return ContactResult { outcome: ContactOutcome::Departed, pongs: Vec::new() },
        Observation::Refused => return ContactResult { outcome: ContactOutcome::Refused, pongs: Vec::new() },
        Observation::Accepted(n) => n,
    };
    let Some(info) = network.info(node) else {
        return ContactResult { outcome: ContactOutcome::Departed, pongs: Vec::new() };
    };
    let mut crawler = ServentState::with_memory(CRAWLER_ID, NodeInfo::synthetic(0), 1, 16);
    crawler.connect(node).expect("fresh crawler");
    let mut target = ServentState::with_memory(node, info.clone(), usize::MAX, 16);
    target.connect(CRAWLER_ID).expect("distinct ids");
    let mut peers: Vec<ServentState> = Vec::with_capacity(neighbors.len());
    for &n in &neighbors {
        target.connect(n).expect("distinct ids");
        let peer_info = network.info(n).cloned().unwrap_or_else(|| NodeInfo::synthetic(n.0));
        let mut p = ServentState::with_memory(n, peer_info, usize::MAX, 16);
        p.connect(node).expect("distinct ids");
        peers.push(p);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(node.0 as u64);
    let (_, sends) = originate(&mut crawler, MessageKind::Ping, Payload::Empty, 2, &mut rng).expect("ttl 2");
    let mut in_flight: VecDeque<(NodeId, NodeId, crate::protocol::Message)> =
        sends.into_iter().map(|(to, m)| (CRAWLER_ID, to, m)).collect();
    let mut pongs = Vec::new();
    while let Some((from, to, msg)) = in_flight.pop_front() {
        let state = if to == CRAWLER_ID {
            &mut crawler
        } else if to == node {
            &mut target
        } else {
            let i = neighbors.binary_search(&to).expect("known neighbor");
            &mut peers[i]
        };
        for action in handle(state, msg, from) {
            match action {
                Action::Send { to: next, msg } => in_flight.push_back((to, next, msg)),
                Action::DeliverLocally(m) => {
                    if let Payload::Pong { responder, info } = m.payload {
                        pongs.push((responder, info));
                    }
                }
                Action::Drop(_) => {}
            }
        }
    }
    ContactResult { outcome: ContactOutcome::Confirmed, pongs }
}

const TICKS_PER_SECOND: f64 = 1_000.0;

fn ticks(s: f64) -> u64 {
    (s * TICKS_PER_SECOND).round().max(0.0) as u64
}

/// Crawl `network` from the configured seeds.
///
/// A coordinator owns the frontier and assigns each node at most once to the
/// next idle worker. Contacts take `listen_timeout_s` when accepted,
/// `connect_timeout_s` when the node is gone and [`REFUSAL_COST_S`] when
/// refused. Neighbor lists are observed when a contact starts and enter the
/// frontier when it completes.
pub fn crawl<T: CrawlTarget + Sync + ?Sized>(network: &T, config: &CrawlConfig) -> Result<CrawlSnapshot, CrawlError> {
    config.validate()?;
    let start = ticks(config.start_s.max(0.0));
    let stop = match (config.max_duration_s, network.horizon()) {
        (Some(d), Some(h)) => Some(ticks(config.start_s + d).min(ticks(h))),
        (Some(d), None) => Some(ticks(config.start_s + d)),
        (None, Some(h)) => Some(ticks(h)),
        (None, None) => None,
    };

    let mut frontier: VecDeque<NodeId> = VecDeque::new();
    let mut assigned: HashSet<NodeId> = HashSet::new();
    for &s in &config.initial_nodes {
        if assigned.insert(s) {
            frontier.push_back(s);
        }
    }
    let mut idle = config.workers;
    let mut now = start;
    let mut completions: BinaryHeap<Reverse<(u64, usize)>> = BinaryHeap::new();
    let mut results: Vec<Option<ContactResult>> = Vec::new();
    let mut contacts: Vec<ContactRecord> = Vec::new();
    let mut confirmed: BTreeMap<NodeId, NodeInfo> = BTreeMap::new();
    let mut unreachable: BTreeSet<String> = BTreeSet::new();
    let mut reported: BTreeMap<String, NodeId> = BTreeMap::new();
    let mut witnessed: BTreeSet<(NodeId, NodeId)> = BTreeSet::new();
    let mut diagnostics = Vec::new();
    let mut stopped = false;
    let mut finished = start;

    loop {
        let mut batch: Vec<NodeId> = Vec::new();
        while idle > 0 && !stopped {
            if stop.is_some_and(|s| now >= s) {
                if !frontier.is_empty() {
                    stopped = true;
                }
                break;
            }
            let Some(node) = frontier.pop_front() else { break };
            batch.push(node);
            idle -= 1;
        }
        let t = now as f64 / TICKS_PER_SECOND;
        let outcomes = run_batch(network, &batch, t, config.threads);
        for (node, result) in batch.into_iter().zip(outcomes) {
            let cost = match result.outcome {
                ContactOutcome::Confirmed => config.listen_timeout_s,
                ContactOutcome::Departed => config.connect_timeout_s,
                ContactOutcome::Refused => REFUSAL_COST_S,
            };
            let done = now + ticks(cost).max(1);
            completions.push(Reverse((done, contacts.len())));
            contacts.push(ContactRecord {
                node,
                started_s: t,
                finished_s: done as f64 / TICKS_PER_SECOND,
                outcome: result.outcome,
            });
            results.push(Some(result));
        }

        let Some(Reverse((done, idx))) = completions.pop() else { break };
        now = done;
        finished = done;
        idle += 1;
        let node = contacts[idx].node;
        let result = results[idx].take().expect("completed once");
        match result.outcome {
            ContactOutcome::Confirmed => {
                for (responder, info) in result.pongs {
                    if responder == node {
                        confirmed.insert(node, info);
                        continue;
                    }
                    witnessed.insert((node.min(responder), node.max(responder)));
                    reported.entry(endpoint_key(&info)).or_insert(responder);
                    if assigned.insert(responder) {
                        frontier.push_back(responder);
                    }
                }
            }
            ContactOutcome::Departed | ContactOutcome::Refused => {
                let key = network.info(node).map(endpoint_key).unwrap_or_else(|| format!("node{}", node.0));
                unreachable.insert(key);
            }
        }
    }

    if stopped {
        diagnostics.push(format!("stopped with {} nodes left in the frontier", frontier.len()));
    }
    if confirmed.is_empty() {
        diagnostics.push("all initial nodes were unreachable".into());
    }

    let mut graph = OverlayGraph::new();
    for (&id, info) in &confirmed {
        graph.insert_node(id, info.clone()).expect("distinct confirmed ids");
    }
    for &(a, b) in &witnessed {
        if confirmed.contains_key(&a) && confirmed.contains_key(&b) {
            graph.add_edge(a, b).expect("confirmed endpoints");
        }
    }
    let confirmed_keys: HashSet<String> = confirmed.values().map(endpoint_key).collect();
    let reported_only =
        reported.into_keys().chain(unreachable).filter(|k| !confirmed_keys.contains(k)).collect::<BTreeSet<_>>();

    Ok(CrawlSnapshot {
        started_at: config.start_s.max(0.0),
        finished_at: finished as f64 / TICKS_PER_SECOND,
        graph,
        reported_only,
        contacts,
        diagnostics,
    })
}

fn run_batch<T: CrawlTarget + Sync + ?Sized>(
    network: &T,
    batch: &[NodeId],
    t: f64,
    threads: usize,
) -> Vec<ContactResult> {
    if threads <= 1 || batch.len() < 2 {
        return batch.iter().map(|&n| contact(network, n, t)).collect();
    }
    let chunk = batch.len().div_ceil(threads);
    std::thread::scope(|scope| {
        let handles: Vec<_> = batch
            .chunks(chunk)
            .map(|part| scope.spawn(move || part.iter().map(|&n| contact(network, n, t)).collect::<Vec<_>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("contact worker panicked")).collect()
    })
}
