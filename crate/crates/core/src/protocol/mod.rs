//! Per-servent message handling: duplicate suppression, ttl/hops accounting,
//! broadcast forwarding and reverse-path routing of replies.

mod flood;

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use rand::Rng;

use crate::graph::{NodeId, NodeInfo};

pub use flood::{flood, flood_logged, flood_with, FloodConfig, FloodTrace, ReplyRecord, Transmission};

pub const DEFAULT_TTL: i32 = 7;
pub const DEFAULT_MEMORY_CAPACITY: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MessageId(pub u128);

impl MessageId {
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        MessageId(rng.random())
    }
}

impl fmt::Display for MessageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:032x}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MessageKind {
    Ping,
    Pong,
    Query,
    QueryResponse,
    Push,
    Other,
}

impl MessageKind {
    pub const ALL: [MessageKind; 6] = [
        MessageKind::Ping,
        MessageKind::Pong,
        MessageKind::Query,
        MessageKind::QueryResponse,
        MessageKind::Push,
        MessageKind::Other,
    ];

    pub fn is_broadcast(self) -> bool {
        matches!(self, MessageKind::Ping | MessageKind::Query)
    }

    pub fn is_back_propagated(self) -> bool {
        matches!(self, MessageKind::Pong | MessageKind::QueryResponse)
    }

    pub fn name(self) -> &'static str {
        match self {
            MessageKind::Ping => "PING",
            MessageKind::Pong => "PONG",
            MessageKind::Query => "QUERY",
            MessageKind::QueryResponse => "QUERY_RESPONSE",
            MessageKind::Push => "PUSH",
            MessageKind::Other => "OTHER",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name().eq_ignore_ascii_case(name))
    }
}

impl fmt::Display for MessageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Empty,
    Pong { responder: NodeId, info: NodeInfo },
    Query(String),
    QueryResponse { responder: NodeId, files: Vec<String> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub id: MessageId,
    pub kind: MessageKind,
    /// Remaining hop budget. Negative values mark a malformed message.
    pub ttl: i32,
    pub hops: i32,
    pub payload: Payload,
}

impl Message {
    /// Payload length used for size accounting (query string bytes).
    pub fn query_len(&self) -> usize {
        match &self.payload {
            Payload::Query(s) => s.len(),
            _ => 0,
        }
    }
}

/// Where a remembered message came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    /// Originated by this servent.
    Local,
    Via(NodeId),
}

/// Bounded id → arrival-link map, evicting the oldest insertion first.
#[derive(Debug, Clone)]
pub struct RoutingMemory {
    routes: HashMap<MessageId, Route>,
    order: VecDeque<MessageId>,
    capacity: usize,
}

impl RoutingMemory {
    pub fn new(capacity: usize) -> Self {
        RoutingMemory { routes: HashMap::new(), order: VecDeque::new(), capacity: capacity.max(1) }
    }

    /// Returns false (and changes nothing) if `id` is already remembered.
    pub fn insert(&mut self, id: MessageId, route: Route) -> bool {
        if self.routes.contains_key(&id) {
            return false;
        }
        if self.order.len() == self.capacity {
            if let Some(old) = self.order.pop_front() {
                self.routes.remove(&old);
            }
        }
        self.routes.insert(id, route);
        self.order.push_back(id);
        true
    }

    pub fn get(&self, id: MessageId) -> Option<Route> {
        self.routes.get(&id).copied()
    }

    pub fn contains(&self, id: MessageId) -> bool {
        self.routes.contains_key(&id)
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProtocolError {
    #[error("{0} is not a broadcast kind")]
    NotBroadcast(MessageKind),
    #[error("initial ttl must be at least 1, got {0}")]
    InvalidTtl(i32),
    #[error("connection limit {0} reached")]
    ConnectionLimit(usize),
    #[error("cannot connect a servent to itself")]
    SelfConnection,
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
}

#[derive(Debug, Clone)]
pub struct ServentState {
    pub id: NodeId,
    pub info: NodeInfo,
    neighbors: BTreeSet<NodeId>,
    pub max_connections: usize,
    pub memory: RoutingMemory,
    pub local_files: Vec<String>,
}

impl ServentState {
    pub fn new(id: NodeId, info: NodeInfo, max_connections: usize) -> Self {
        Self::with_memory(id, info, max_connections, DEFAULT_MEMORY_CAPACITY)
    }

    pub fn with_memory(id: NodeId, info: NodeInfo, max_connections: usize, memory_capacity: usize) -> Self {
        ServentState {
            id,
            info,
            neighbors: BTreeSet::new(),
            max_connections,
            memory: RoutingMemory::new(memory_capacity),
            local_files: Vec::new(),
        }
    }

    pub fn neighbors(&self) -> &BTreeSet<NodeId> {
        &self.neighbors
    }

    pub fn is_full(&self) -> bool {
        self.neighbors.len() >= self.max_connections
    }

    /// Ok(false) if already connected.
    pub fn connect(&mut self, peer: NodeId) -> Result<bool, ProtocolError> {
        if peer == self.id {
            return Err(ProtocolError::SelfConnection);
        }
        if self.neighbors.contains(&peer) {
            return Ok(false);
        }
        if self.is_full() {
            return Err(ProtocolError::ConnectionLimit(self.max_connections));
        }
        self.neighbors.insert(peer);
        Ok(true)
    }

    pub fn disconnect(&mut self, peer: NodeId) -> bool {
        self.neighbors.remove(&peer)
    }

    /// Local file names containing `query`, case-insensitively.
    pub fn matching_files(&self, query: &str) -> Vec<String> {
        let needle = query.to_lowercase();
        self.local_files.iter().filter(|f| f.to_lowercase().contains(&needle)).cloned().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DropReason {
    Duplicate,
    Unroutable,
    Malformed,
    NotNeighbor,
    /// Origination with a zero hop budget.
    TtlExpired,
}

impl DropReason {
    pub fn name(self) -> &'static str {
        match self {
            DropReason::Duplicate => "duplicate",
            DropReason::Unroutable => "unroutable",
            DropReason::Malformed => "malformed",
            DropReason::NotNeighbor => "not_neighbor",
            DropReason::TtlExpired => "ttl_expired",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    Send { to: NodeId, msg: Message },
    DeliverLocally(Message),
    Drop(DropReason),
}

/// Start a broadcast: remember the fresh id as local and address one copy to
/// every neighbor.
pub fn originate<R: Rng + ?Sized>(
    state: &mut ServentState,
    kind: MessageKind,
    payload: Payload,
    initial_ttl: i32,
    rng: &mut R,
) -> Result<(Message, Vec<(NodeId, Message)>), ProtocolError> {
    if !kind.is_broadcast() {
        return Err(ProtocolError::NotBroadcast(kind));
    }
    if initial_ttl < 1 {
        return Err(ProtocolError::InvalidTtl(initial_ttl));
    }
    let mut id = MessageId::random(rng);
    while state.memory.contains(id) {
        id = MessageId::random(rng);
    }
    state.memory.insert(id, Route::Local);
    let msg = Message { id, kind, ttl: initial_ttl, hops: 0, payload };
    let sends = state.neighbors.iter().map(|&n| (n, msg.clone())).collect();
    Ok((msg, sends))
}

/// Process one message arriving from neighbor `from`. Forwards come before
/// the reply in the returned list.
pub fn handle(state: &mut ServentState, msg: Message, from: NodeId) -> Vec<Action> {
    if msg.ttl < 0 || msg.hops < 0 {
        return vec![Action::Drop(DropReason::Malformed)];
    }
    if !state.neighbors.contains(&from) {
        return vec![Action::Drop(DropReason::NotNeighbor)];
    }
    match msg.kind {
        k if k.is_back_propagated() => route_back(state, msg),
        k if k.is_broadcast() => broadcast(state, msg, from),
        _ => vec![Action::DeliverLocally(msg)],
    }
}

fn route_back(state: &ServentState, mut msg: Message) -> Vec<Action> {
    msg.ttl = (msg.ttl - 1).max(0);
    msg.hops += 1;
    match state.memory.get(msg.id) {
        Some(Route::Local) => vec![Action::DeliverLocally(msg)],
        Some(Route::Via(link)) if state.neighbors.contains(&link) => vec![Action::Send { to: link, msg }],
        _ => vec![Action::Drop(DropReason::Unroutable)],
    }
}

fn broadcast(state: &mut ServentState, mut msg: Message, from: NodeId) -> Vec<Action> {
    let reply_payload = match (&msg.kind, &msg.payload) {
        (MessageKind::Ping, _) => Some(Payload::Pong { responder: state.id, info: state.info.clone() }),
        (MessageKind::Query, Payload::Query(q)) => {
            let files = state.matching_files(q);
            (!files.is_empty()).then_some(Payload::QueryResponse { responder: state.id, files })
        }
        (MessageKind::Query, _) => return vec![Action::Drop(DropReason::Malformed)],
        _ => None,
    };
    if !state.memory.insert(msg.id, Route::Via(from)) {
        return vec![Action::Drop(DropReason::Duplicate)];
    }
    msg.ttl -= 1;
    msg.hops += 1;
    let mut actions = Vec::new();
    if msg.ttl > 0 {
        for &n in state.neighbors.iter().filter(|&&n| n != from) {
            actions.push(Action::Send { to: n, msg: msg.clone() });
        }
    }
    if let Some(payload) = reply_payload {
        let kind = if msg.kind == MessageKind::Ping { MessageKind::Pong } else { MessageKind::QueryResponse };
        let reply = Message { id: msg.id, kind, ttl: msg.hops, hops: 0, payload };
        actions.push(Action::Send { to: from, msg: reply });
    }
    actions
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn servent(id: usize, neighbors: &[usize]) -> ServentState {
        let mut s = ServentState::new(NodeId(id), NodeInfo::synthetic(id), 16);
        for &n in neighbors {
            s.connect(NodeId(n)).unwrap();
        }
        s
    }

    fn ping(ttl: i32, hops: i32) -> Message {
        Message { id: MessageId(42), kind: MessageKind::Ping, ttl, hops, payload: Payload::Empty }
    }

    #[test]
    fn originate_copies_to_every_neighbor() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut s = servent(0, &[1, 2, 3]);
        let (msg, sends) = originate(&mut s, MessageKind::Ping, Payload::Empty, 7, &mut rng).unwrap();
        assert_eq!(sends.len(), 3);
        assert!(sends.iter().all(|(_, m)| m.ttl == 7 && m.hops == 0 && m.id == msg.id));
        assert_eq!(s.memory.get(msg.id), Some(Route::Local));

        let (second, _) = originate(&mut s, MessageKind::Ping, Payload::Empty, 7, &mut rng).unwrap();
        assert_ne!(msg.id, second.id);

        let mut lonely = servent(9, &[]);
        let (_, sends) = originate(&mut lonely, MessageKind::Ping, Payload::Empty, 7, &mut rng).unwrap();
        assert!(sends.is_empty());
    }

    #[test]
    fn originate_rejects_bad_requests() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut s = servent(0, &[1]);
        assert_eq!(
            originate(&mut s, MessageKind::Pong, Payload::Empty, 7, &mut rng).unwrap_err(),
            ProtocolError::NotBroadcast(MessageKind::Pong)
        );
        assert_eq!(
            originate(&mut s, MessageKind::Ping, Payload::Empty, 0, &mut rng).unwrap_err(),
            ProtocolError::InvalidTtl(0)
        );
    }

    #[test]
    fn last_hop_ping_only_replies() {
        let mut s = servent(5, &[1, 2, 3]);
        let actions = handle(&mut s, ping(1, 0), NodeId(1));
        assert_eq!(actions.len(), 1);
        match &actions[0] {
            Action::Send { to, msg } => {
                assert_eq!(*to, NodeId(1));
                assert_eq!(msg.kind, MessageKind::Pong);
                assert_eq!(msg.id, MessageId(42));
                assert_eq!(msg.payload, Payload::Pong { responder: NodeId(5), info: NodeInfo::synthetic(5) });
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_is_dropped_without_reply() {
        let mut s = servent(5, &[1, 2, 3]);
        handle(&mut s, ping(3, 0), NodeId(1));
        assert_eq!(handle(&mut s, ping(3, 0), NodeId(2)), vec![Action::Drop(DropReason::Duplicate)]);
    }

    #[test]
    fn query_forwards_then_answers() {
        let mut s = servent(5, &[1, 2]);
        s.local_files.push("Heartbeat.mp3".into());
        let q = Message {
            id: MessageId(7),
            kind: MessageKind::Query,
            ttl: 3,
            hops: 0,
            payload: Payload::Query("beat".into()),
        };
        let actions = handle(&mut s, q, NodeId(1));
        assert_eq!(actions.len(), 2);
        match &actions[0] {
            Action::Send { to, msg } => {
                assert_eq!((*to, msg.kind, msg.ttl, msg.hops), (NodeId(2), MessageKind::Query, 2, 1));
            }
            other => panic!("unexpected {other:?}"),
        }
        match &actions[1] {
            Action::Send { to, msg } => {
                assert_eq!((*to, msg.kind, msg.id), (NodeId(1), MessageKind::QueryResponse, MessageId(7)));
                assert_eq!(
                    msg.payload,
                    Payload::QueryResponse { responder: NodeId(5), files: vec!["Heartbeat.mp3".into()] }
                );
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn query_without_match_only_forwards() {
        let mut s = servent(5, &[1, 2]);
        s.local_files.push("song.ogg".into());
        let q = Message {
            id: MessageId(7),
            kind: MessageKind::Query,
            ttl: 3,
            hops: 0,
            payload: Payload::Query("beat".into()),
        };
        let actions = handle(&mut s, q, NodeId(1));
        assert_eq!(actions.len(), 1);
    }

    #[test]
    fn replies_follow_memory() {
        let mut s = servent(5, &[1, 2]);
        handle(&mut s, ping(3, 0), NodeId(1));
        let pong = Message { id: MessageId(42), kind: MessageKind::Pong, ttl: 2, hops: 0, payload: Payload::Empty };
        match &handle(&mut s, pong.clone(), NodeId(2))[..] {
            [Action::Send { to, msg }] => assert_eq!((*to, msg.ttl, msg.hops), (NodeId(1), 1, 1)),
            other => panic!("unexpected {other:?}"),
        }
        let stray = Message { id: MessageId(99), ..pong.clone() };
        assert_eq!(handle(&mut s, stray, NodeId(2)), vec![Action::Drop(DropReason::Unroutable)]);

        s.disconnect(NodeId(1));
        assert_eq!(handle(&mut s, pong, NodeId(2)), vec![Action::Drop(DropReason::Unroutable)]);
    }

    #[test]
    fn originator_delivers_reply_locally() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut s = servent(0, &[1]);
        let (msg, _) = originate(&mut s, MessageKind::Ping, Payload::Empty, 7, &mut rng).unwrap();
        let pong = Message { id: msg.id, kind: MessageKind::Pong, ttl: 1, hops: 0, payload: Payload::Empty };
        match &handle(&mut s, pong, NodeId(1))[..] {
            [Action::DeliverLocally(m)] => assert_eq!(m.hops, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_and_foreign_messages() {
        let mut s = servent(5, &[1]);
        assert_eq!(handle(&mut s, ping(-1, 0), NodeId(1)), vec![Action::Drop(DropReason::Malformed)]);
        assert_eq!(handle(&mut s, ping(3, 0), NodeId(8)), vec![Action::Drop(DropReason::NotNeighbor)]);
        let push = Message { kind: MessageKind::Push, ..ping(3, 0) };
        assert!(matches!(handle(&mut s, push, NodeId(1))[..], [Action::DeliverLocally(_)]));
    }

    #[test]
    fn memory_evicts_oldest() {
        let mut m = RoutingMemory::new(2);
        assert!(m.insert(MessageId(1), Route::Local));
        assert!(m.insert(MessageId(2), Route::Via(NodeId(4))));
        assert!(!m.insert(MessageId(2), Route::Local));
        assert!(m.insert(MessageId(3), Route::Local));
        assert_eq!(m.len(), 2);
        assert_eq!(m.get(MessageId(1)), None);
        assert_eq!(m.get(MessageId(2)), Some(Route::Via(NodeId(4))));
    }

    #[test]
    fn connection_limit_enforced() {
        let mut s = ServentState::new(NodeId(0), NodeInfo::synthetic(0), 1);
        assert_eq!(s.connect(NodeId(1)), Ok(true));
        assert_eq!(s.connect(NodeId(1)), Ok(false));
        assert_eq!(s.connect(NodeId(2)), Err(ProtocolError::ConnectionLimit(1)));
        assert_eq!(s.connect(NodeId(0)), Err(ProtocolError::SelfConnection));
    }

    #[test]
    fn kind_names_round_trip() {
        for k in MessageKind::ALL {
            assert_eq!(MessageKind::from_name(k.name()), Some(k));
        }
    }
}
