//! Whole-graph flood in synchronous hop rounds.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::io::{self, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::{NodeId, OverlayGraph};

use super::{
    handle, originate, Action, DropReason, Message, MessageKind, Payload, ProtocolError, ServentState,
    DEFAULT_MEMORY_CAPACITY,
};

#[derive(Debug, Clone)]
pub struct FloodConfig {
    pub memory_capacity: usize,
    pub seed: u64,
    /// Search string for QUERY floods.
    pub query: String,
    pub files: HashMap<NodeId, Vec<String>>,
}

impl Default for FloodConfig {
    fn default() -> Self {
        FloodConfig { memory_capacity: DEFAULT_MEMORY_CAPACITY, seed: 0, query: String::new(), files: HashMap::new() }
    }
}

/// One message copy crossing one overlay link.
#[derive(Debug, Clone, PartialEq)]
pub struct Transmission {
    pub round: usize,
    pub from: NodeId,
    pub to: NodeId,
    pub kind: MessageKind,
    pub ttl: i32,
    pub hops: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReplyRecord {
    pub responder: NodeId,
    /// Hops of the request after the responder's increment, i.e. its
    /// distance from the originator along the arrival path.
    pub request_hops: i32,
    /// Links the reply crossed on its way back.
    pub reverse_hops: i32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FloodTrace {
    pub source: NodeId,
    pub kind: MessageKind,
    pub initial_ttl: i32,
    /// Times each node processed the broadcast (forwarded or replied).
    pub processed: Vec<u32>,
    /// Directed (from, to, kind) → copies sent.
    pub transmissions: BTreeMap<(NodeId, NodeId, MessageKind), u64>,
    pub drops: BTreeMap<DropReason, u64>,
    /// Replies that reached the originator, in arrival order.
    pub replies: Vec<ReplyRecord>,
    /// Replies generated anywhere.
    pub replies_sent: u64,
    pub rounds: usize,
}

impl FloodTrace {
    /// Processed the broadcast, or originated it.
    pub fn reached(&self, id: NodeId) -> bool {
        id == self.source || self.processed.get(id.0).is_some_and(|&c| c > 0)
    }

    pub fn reached_count(&self) -> usize {
        (0..self.processed.len()).filter(|&i| self.reached(NodeId(i))).count()
    }

    pub fn total(&self, kind: MessageKind) -> u64 {
        self.transmissions.iter().filter(|((_, _, k), _)| *k == kind).map(|(_, c)| c).sum()
    }

    pub fn total_transmissions(&self) -> u64 {
        self.transmissions.values().sum()
    }

    /// Columns: edge, direction, kind, count.
    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["edge", "direction", "kind", "count"])?;
        for (&(from, to, kind), count) in &self.transmissions {
            let (lo, hi) = if from < to { (from, to) } else { (to, from) };
            w.write_record([
                format!("{lo}-{hi}"),
                format!("{from}->{to}"),
                kind.name().to_string(),
                count.to_string(),
            ])?;
        }
        w.flush()
    }
}

/// Flood `kind` from `source` with default settings.
pub fn flood(
    graph: &OverlayGraph,
    source: NodeId,
    kind: MessageKind,
    initial_ttl: i32,
) -> Result<FloodTrace, ProtocolError> {
    flood_with(graph, source, kind, initial_ttl, &FloodConfig::default())
}

pub fn flood_with(
    graph: &OverlayGraph,
    source: NodeId,
    kind: MessageKind,
    initial_ttl: i32,
    config: &FloodConfig,
) -> Result<FloodTrace, ProtocolError> {
    run(graph, source, kind, initial_ttl, config, None)
}

/// Like [`flood_with`], also returning every transmission in send order.
pub fn flood_logged(
    graph: &OverlayGraph,
    source: NodeId,
    kind: MessageKind,
    initial_ttl: i32,
    config: &FloodConfig,
) -> Result<(FloodTrace, Vec<Transmission>), ProtocolError> {
    let mut log = Vec::new();
    let trace = run(graph, source, kind, initial_ttl, config, Some(&mut log))?;
    Ok((trace, log))
}

fn run(
    graph: &OverlayGraph,
    source: NodeId,
    kind: MessageKind,
    initial_ttl: i32,
    config: &FloodConfig,
    mut log: Option<&mut Vec<Transmission>>,
) -> Result<FloodTrace, ProtocolError> {
    if !graph.contains(source) {
        return Err(ProtocolError::UnknownNode(source));
    }
    if !kind.is_broadcast() {
        return Err(ProtocolError::NotBroadcast(kind));
    }
    let mut trace = FloodTrace {
        source,
        kind,
        initial_ttl,
        processed: vec![0; graph.capacity()],
        transmissions: BTreeMap::new(),
        drops: BTreeMap::new(),
        replies: Vec::new(),
        replies_sent: 0,
        rounds: 0,
    };
    if initial_ttl <= 0 {
        *trace.drops.entry(DropReason::TtlExpired).or_default() += 1;
        return Ok(trace);
    }

    let mut states: Vec<Option<ServentState>> = vec![None; graph.capacity()];
    for (id, info) in graph.nodes() {
        let mut s = ServentState::with_memory(id, info.clone(), usize::MAX, config.memory_capacity);
        for &n in graph.neighbors(id) {
            s.connect(n).expect("graph has no self-loops");
        }
        if let Some(files) = config.files.get(&id) {
            s.local_files.clone_from(files);
        }
        states[id.0] = Some(s);
    }

    let payload = match kind {
        MessageKind::Query => Payload::Query(config.query.clone()),
        _ => Payload::Empty,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let origin = states[source.0].as_mut().expect("source exists");
    let (_, sends) = originate(origin, kind, payload, initial_ttl, &mut rng)?;

    let mut request_hops: HashMap<NodeId, i32> = HashMap::new();
    let mut current: VecDeque<(NodeId, NodeId, Message)> = VecDeque::new();
    for (to, msg) in sends {
        current.push_back((source, to, msg));
    }
    while !current.is_empty() {
        trace.rounds += 1;
        let mut next = VecDeque::new();
        for (from, to, msg) in current.drain(..) {
            *trace.transmissions.entry((from, to, msg.kind)).or_default() += 1;
            if let Some(log) = log.as_deref_mut() {
                log.push(Transmission { round: trace.rounds, from, to, kind: msg.kind, ttl: msg.ttl, hops: msg.hops });
            }
            let state = states[to.0].as_mut().expect("edge endpoint exists");
            let is_request = msg.kind.is_broadcast();
            let actions = handle(state, msg, from);
            if is_request && !matches!(actions.first(), Some(Action::Drop(_))) {
                trace.processed[to.0] += 1;
            }
            for action in actions {
                match action {
                    Action::Send { to: next_hop, msg } => {
                        if is_request && msg.kind.is_back_propagated() {
                            trace.replies_sent += 1;
                            request_hops.insert(to, msg.ttl);
                        }
                        next.push_back((to, next_hop, msg));
                    }
                    Action::DeliverLocally(msg) => {
                        let responder = match &msg.payload {
                            Payload::Pong { responder, .. } | Payload::QueryResponse { responder, .. } => *responder,
                            _ => continue,
                        };
                        trace.replies.push(ReplyRecord {
                            responder,
                            request_hops: request_hops.get(&responder).copied().unwrap_or(-1),
                            reverse_hops: msg.hops,
                        });
                    }
                    Action::Drop(reason) => *trace.drops.entry(reason).or_default() += 1,
                }
            }
        }
        current = next;
    }
    Ok(trace)
}
