//! Event loop. Time advances in millisecond ticks; each overlay hop takes
//! one tick.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashMap, VecDeque};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp;

use crate::graph::{NodeId, NodeInfo};
use crate::protocol::{handle, originate, Action, Message, MessageKind, Payload, ServentState};

use super::report::kind_index;
use super::{
    ConnectionSample, Conservation, KindTally, LinkCounters, NetworkHistory, NodeRecord, SessionSample, SimConfig,
    SimError, SimReport,
};

const TICKS_PER_SECOND: f64 = 1_000.0;
const HOP_DELAY: u64 = 1;
const HOST_CACHE_SIZE: usize = 64;
const RECENT_JOINERS: usize = 64;

enum Event {
    Arrive,
    Depart { node: NodeId, stamp: u32 },
    Ping { node: NodeId },
    Query { node: NodeId },
    Maintain { node: NodeId },
    Deliver { from: NodeId, to: NodeId, msg: Message },
}

struct Scheduled {
    tick: u64,
    seq: u64,
    event: Event,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        (self.tick, self.seq) == (other.tick, other.seq)
    }
}

impl Eq for Scheduled {}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scheduled {
    // Reversed so the max-heap pops the earliest event first.
    fn cmp(&self, other: &Self) -> Ordering {
        (other.tick, other.seq).cmp(&(self.tick, self.seq))
    }
}

struct SimNode {
    state: ServentState,
    alive: bool,
    known_host: bool,
    stamp: u32,
    join_tick: u64,
    end_tick: Option<u64>,
    boosted: bool,
    session: Option<usize>,
    host_cache: VecDeque<NodeId>,
    edges: HashMap<NodeId, usize>,
}

struct Engine<'c> {
    cfg: &'c SimConfig,
    rng: ChaCha8Rng,
    limits: WeightedIndex<f64>,
    queue: BinaryHeap<Scheduled>,
    seq: u64,
    end: u64,
    nodes: Vec<SimNode>,
    known: Vec<NodeId>,
    recent: VecDeque<NodeId>,
    history: NetworkHistory,
    kinds: BTreeMap<MessageKind, KindTally>,
    links: BTreeMap<(NodeId, NodeId), LinkCounters>,
    conservation: Conservation,
    originated: BTreeMap<MessageKind, u64>,
    query_hits: u64,
    sessions: Vec<SessionSample>,
}

/// Run one simulation. Identical configs give identical reports.
pub fn run(config: &SimConfig) -> Result<SimReport, SimError> {
    config.validate()?;
    let mut engine = Engine {
        cfg: config,
        rng: ChaCha8Rng::seed_from_u64(config.seed),
        limits: config.max_connections.sampler()?,
        queue: BinaryHeap::new(),
        seq: 0,
        end: to_ticks(config.duration_s),
        nodes: Vec::new(),
        known: Vec::new(),
        recent: VecDeque::new(),
        history: NetworkHistory::default(),
        kinds: BTreeMap::new(),
        links: BTreeMap::new(),
        conservation: Conservation::default(),
        originated: BTreeMap::new(),
        query_hits: 0,
        sessions: Vec::new(),
    };
    for i in 0..config.target_population {
        engine.arrive(0, i < config.known_hosts);
    }
    engine.schedule_next_arrival(0);
    engine.run_loop();
    engine.finish()
}

fn to_ticks(seconds: f64) -> u64 {
    (seconds * TICKS_PER_SECOND).round().max(0.0) as u64
}

fn to_seconds(tick: u64) -> f64 {
    tick as f64 / TICKS_PER_SECOND
}

impl Engine<'_> {
    fn push(&mut self, tick: u64, event: Event) {
        self.seq += 1;
        self.queue.push(Scheduled { tick, seq: self.seq, event });
    }

    fn run_loop(&mut self) {
        while let Some(Scheduled { tick, event, .. }) = self.queue.pop() {
            if tick >= self.end && !matches!(event, Event::Deliver { .. }) {
                continue;
            }
            match event {
                Event::Arrive => {
                    self.arrive(tick, false);
                    self.schedule_next_arrival(tick);
                }
                Event::Depart { node, stamp } => {
                    if self.nodes[node.0].alive && self.nodes[node.0].stamp == stamp {
                        self.depart(node, tick);
                    }
                }
                Event::Ping { node } => self.ping(node, tick),
                Event::Query { node } => self.query(node, tick),
                Event::Maintain { node } => {
                    if self.nodes[node.0].alive {
                        self.dial(node, tick);
                    }
                }
                Event::Deliver { from, to, msg } => self.deliver(from, to, msg, tick),
            }
        }
    }

    fn schedule_next_arrival(&mut self, now: u64) {
        let Some(churn) = self.cfg.churn else { return };
        if churn.arrival_rate <= 0.0 {
            return;
        }
        let gap_s: f64 = Exp::new(churn.arrival_rate / 3_600.0).expect("positive rate").sample(&mut self.rng);
        self.push(now + to_ticks(gap_s).max(1), Event::Arrive);
    }

    fn arrive(&mut self, now: u64, known_host: bool) {
        let id = NodeId(self.nodes.len());
        let max_connections = self.cfg.max_connections.choices[self.limits.sample(&mut self.rng)].0;
        let files: Vec<String> = self
            .cfg
            .query_catalog
            .choose_multiple(&mut self.rng, self.cfg.files_per_node)
            .map(|s| format!("{s}.mp3"))
            .collect();
        let mut info = NodeInfo::synthetic(id.0);
        info.files_shared = files.len() as u64;
        info.kbytes_shared = files.iter().map(|_| self.rng.random_range(2_000..6_000u64)).sum();
        let mut state = ServentState::with_memory(id, info.clone(), max_connections, self.cfg.memory_capacity);
        state.local_files = files;

        let mut end_tick = None;
        let mut session = None;
        if let (Some(churn), false) = (self.cfg.churn, known_host) {
            let hours = churn.session.sample_hours(&mut self.rng);
            let end = now + to_ticks(hours * 3_600.0).max(1);
            end_tick = Some(end);
            session = Some(self.sessions.len());
            self.sessions.push(SessionSample {
                node: id,
                start_h: to_seconds(now) / 3_600.0,
                length_h: to_seconds(end - now) / 3_600.0,
                completed: false,
            });
            self.push(end, Event::Depart { node: id, stamp: 0 });
        }
        self.history.join(NodeRecord {
            info,
            joined_s: to_seconds(now),
            left_s: None,
            max_connections,
            known_host,
            pings_originated: 0,
            queries_originated: 0,
        });
        self.nodes.push(SimNode {
            state,
            alive: true,
            known_host,
            stamp: 0,
            join_tick: now,
            end_tick,
            boosted: false,
            session,
            host_cache: VecDeque::new(),
            edges: HashMap::new(),
        });

        if known_host {
            for k in self.known.clone() {
                self.try_connect(id, k, now);
            }
            self.known.push(id);
        } else {
            self.bootstrap(id, now);
            self.recent.push_front(id);
            self.recent.truncate(RECENT_JOINERS);
        }
        self.push(now, Event::Ping { node: id });
        if self.cfg.query_rate_per_hour > 0.0 {
            let gap = self.query_gap();
            self.push(now + gap, Event::Query { node: id });
        }
    }

    fn query_gap(&mut self) -> u64 {
        let s: f64 = Exp::new(self.cfg.query_rate_per_hour / 3_600.0).expect("positive rate").sample(&mut self.rng);
        to_ticks(s).max(1)
    }

    /// Contact one known host, then dial from its list of recent joiners.
    fn bootstrap(&mut self, id: NodeId, now: u64) {
        let Some(&entry) = self.known.choose(&mut self.rng) else { return };
        self.try_connect(id, entry, now);
        let mut candidates: Vec<NodeId> = self.recent.iter().copied().collect();
        candidates.shuffle(&mut self.rng);
        for c in candidates {
            if self.wants_more(id) {
                self.try_connect(id, c, now);
            }
        }
        self.dial(id, now);
    }

    fn wants_more(&self, id: NodeId) -> bool {
        let n = &self.nodes[id.0];
        n.state.neighbors().len() < self.cfg.dial_target.min(n.state.max_connections)
    }

    /// Top up connections from PONG-learned hosts, then recent joiners, then
    /// known hosts.
    fn dial(&mut self, id: NodeId, now: u64) {
        if !self.wants_more(id) {
            return;
        }
        let cached: Vec<NodeId> = self.nodes[id.0].host_cache.iter().copied().collect();
        for c in cached {
            if !self.wants_more(id) {
                return;
            }
            if !self.nodes[c.0].alive {
                self.nodes[id.0].host_cache.retain(|&h| h != c);
                continue;
            }
            self.try_connect(id, c, now);
        }
        let mut fallback: Vec<NodeId> = self.recent.iter().copied().collect();
        fallback.shuffle(&mut self.rng);
        let mut known = self.known.clone();
        known.shuffle(&mut self.rng);
        fallback.extend(known);
        for c in fallback {
            if !self.wants_more(id) {
                return;
            }
            self.try_connect(id, c, now);
        }
    }

    fn try_connect(&mut self, a: NodeId, b: NodeId, now: u64) -> bool {
        if a == b || !self.nodes[a.0].alive || !self.nodes[b.0].alive {
            return false;
        }
        let (na, nb) = (&self.nodes[a.0].state, &self.nodes[b.0].state);
        if na.neighbors().contains(&b) || na.is_full() || nb.is_full() {
            return false;
        }
        self.nodes[a.0].state.connect(b).expect("checked capacity");
        self.nodes[b.0].state.connect(a).expect("checked capacity");
        let idx = self.history.open_edge(a, b, to_seconds(now));
        self.nodes[a.0].edges.insert(b, idx);
        self.nodes[b.0].edges.insert(a, idx);
        self.maybe_boost(a, now);
        self.maybe_boost(b, now);
        true
    }

    fn maybe_boost(&mut self, id: NodeId, now: u64) {
        let Some(churn) = self.cfg.churn else { return };
        let hub_threshold = self.cfg.hub_threshold;
        let node = &mut self.nodes[id.0];
        if churn.hub_availability_boost == 1.0
            || node.boosted
            || node.known_host
            || node.state.neighbors().len() < hub_threshold
        {
            return;
        }
        let Some(end) = node.end_tick else { return };
        node.boosted = true;
        let length = (end - node.join_tick) as f64 * churn.hub_availability_boost;
        let new_end = (node.join_tick + length.round() as u64).max(now + 1);
        node.end_tick = Some(new_end);
        node.stamp += 1;
        let stamp = node.stamp;
        if let Some(s) = node.session {
            self.sessions[s].length_h = to_seconds(new_end - node.join_tick) / 3_600.0;
        }
        self.push(new_end, Event::Depart { node: id, stamp });
    }

    fn depart(&mut self, id: NodeId, now: u64) {
        let t = to_seconds(now);
        self.nodes[id.0].alive = false;
        self.history.leave(id, t);
        if let Some(s) = self.nodes[id.0].session {
            self.sessions[s].completed = true;
        }
        let neighbors: Vec<NodeId> = self.nodes[id.0].state.neighbors().iter().copied().collect();
        for n in neighbors {
            self.nodes[id.0].state.disconnect(n);
            self.nodes[n.0].state.disconnect(id);
            let idx = self.nodes[id.0].edges.remove(&n).expect("indexed edge");
            self.nodes[n.0].edges.remove(&id);
            self.history.close_edge(idx, t);
            if self.wants_more(n) {
                self.push(now + 1, Event::Maintain { node: n });
            }
        }
    }

    fn ping(&mut self, id: NodeId, now: u64) {
        if !self.nodes[id.0].alive {
            return;
        }
        self.dial(id, now);
        let ttl = self.cfg.initial_ttl;
        let (_, sends) = originate(&mut self.nodes[id.0].state, MessageKind::Ping, Payload::Empty, ttl, &mut self.rng)
            .expect("valid ttl");
        *self.originated.entry(MessageKind::Ping).or_default() += 1;
        self.history.node_mut(id).pings_originated += 1;
        for (to, msg) in sends {
            self.transmit(id, to, msg, now);
        }
        let next = now + to_ticks(self.cfg.ping_period_s).max(1);
        if next < self.end {
            self.push(next, Event::Ping { node: id });
        }
    }

    fn query(&mut self, id: NodeId, now: u64) {
        if !self.nodes[id.0].alive {
            return;
        }
        let q = self.cfg.query_catalog.choose(&mut self.rng).expect("validated catalog").clone();
        let ttl = self.cfg.initial_ttl;
        let (_, sends) =
            originate(&mut self.nodes[id.0].state, MessageKind::Query, Payload::Query(q), ttl, &mut self.rng)
                .expect("valid ttl");
        *self.originated.entry(MessageKind::Query).or_default() += 1;
        self.history.node_mut(id).queries_originated += 1;
        for (to, msg) in sends {
            self.transmit(id, to, msg, now);
        }
        let gap = self.query_gap();
        self.push(now + gap, Event::Query { node: id });
    }

    fn transmit(&mut self, from: NodeId, to: NodeId, msg: Message, now: u64) {
        let payload = msg.query_len() as u64;
        let bytes = self.cfg.message_sizes.base(msg.kind) + payload;
        let tally = self.kinds.entry(msg.kind).or_default();
        tally.count += 1;
        tally.bytes += bytes;
        let link = self.links.entry((from.min(to), from.max(to))).or_default();
        link.counts[kind_index(msg.kind)] += 1;
        link.query_payload_bytes += payload;
        self.conservation.transmissions += 1;
        self.push(now + HOP_DELAY, Event::Deliver { from, to, msg });
    }

    fn deliver(&mut self, from: NodeId, to: NodeId, msg: Message, now: u64) {
        let receiver = &self.nodes[to.0];
        if !receiver.alive || !receiver.state.neighbors().contains(&from) {
            self.conservation.dropped_departed += 1;
            return;
        }
        if msg.kind.is_broadcast() && msg.ttl <= 1 {
            self.conservation.ttl_expired += 1;
        } else {
            self.conservation.delivered += 1;
        }
        for action in handle(&mut self.nodes[to.0].state, msg, from) {
            match action {
                Action::Send { to: next, msg } => self.transmit(to, next, msg, now),
                Action::DeliverLocally(msg) => match msg.payload {
                    Payload::Pong { responder, .. } if responder != to => {
                        let cache = &mut self.nodes[to.0].host_cache;
                        cache.retain(|&h| h != responder);
                        cache.push_front(responder);
                        cache.truncate(HOST_CACHE_SIZE);
                    }
                    Payload::QueryResponse { .. } => self.query_hits += 1,
                    _ => {}
                },
                Action::Drop(_) => {}
            }
        }
    }

    fn finish(mut self) -> Result<SimReport, SimError> {
        let duration_s = self.cfg.duration_s;
        self.history.set_horizon(duration_s);
        if !self.conservation.balanced() {
            return Err(SimError::Invariant(format!("message outcomes do not add up: {:?}", self.conservation)));
        }
        for n in self.nodes.iter().filter(|n| n.alive) {
            if n.state.neighbors().len() > n.state.max_connections {
                return Err(SimError::Invariant(format!("node {} exceeds its connection limit", n.state.id)));
            }
        }
        let snapshots = self.cfg.snapshot_times_s.iter().map(|&t| (t, self.history.graph_at(t))).collect();
        let mut connection_series = Vec::new();
        if self.cfg.sample_interval_s > 0.0 {
            let mut k = 0;
            loop {
                let t = k as f64 * self.cfg.sample_interval_s;
                if t > duration_s {
                    break;
                }
                let g = self.history.graph_at(t);
                connection_series.push(ConnectionSample { time_s: t, nodes: g.node_count(), edges: g.edge_count() });
                k += 1;
            }
        }
        let report = SimReport {
            duration_s,
            message_sizes: self.cfg.message_sizes,
            kinds: self.kinds,
            links: self.links,
            conservation: self.conservation,
            originated: self.originated,
            query_hits: self.query_hits,
            sessions: self.sessions,
            snapshots,
            connection_series,
            history: self.history,
        };
        if report.total_bytes() != report.link_recount_bytes() {
            return Err(SimError::Invariant("per-link byte recount differs from per-kind totals".into()));
        }
        Ok(report)
    }
}
