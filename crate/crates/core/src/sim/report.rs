//! Simulation outputs and traffic summaries.

use std::collections::BTreeMap;
use std::io::{self, Write};

use crate::graph::{NodeId, OverlayGraph};
use crate::protocol::MessageKind;

use super::{MessageSizes, NetworkHistory, SimError};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct KindTally {
    pub count: u64,
    pub bytes: u64,
}

/// Per-link message counts, both directions together.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LinkCounters {
    pub counts: [u64; 6],
    /// Search-string bytes carried by QUERY messages on this link.
    pub query_payload_bytes: u64,
}

impl LinkCounters {
    pub fn count(&self, kind: MessageKind) -> u64 {
        self.counts[kind_index(kind)]
    }
}

pub(crate) fn kind_index(kind: MessageKind) -> usize {
    MessageKind::ALL.iter().position(|&k| k == kind).expect("listed kind")
}

/// Every transmission ends in exactly one of the three outcomes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Conservation {
    pub transmissions: u64,
    /// Arrived at a live neighbor and handled.
    pub delivered: u64,
    /// Receiver had departed, or the link closed while in flight.
    pub dropped_departed: u64,
    /// Arrived carrying the last hop of a broadcast's budget.
    pub ttl_expired: u64,
}

impl Conservation {
    pub fn balanced(&self) -> bool {
        self.delivered + self.dropped_departed + self.ttl_expired == self.transmissions
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SessionSample {
    pub node: NodeId,
    pub start_h: f64,
    /// Scheduled length, including any hub boost.
    pub length_h: f64,
    /// Ended within the simulated interval.
    pub completed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConnectionSample {
    pub time_s: f64,
    pub nodes: usize,
    pub edges: usize,
}

impl ConnectionSample {
    /// Edges per live node.
    pub fn connections_per_node(&self) -> f64 {
        if self.nodes == 0 {
            0.0
        } else {
            self.edges as f64 / self.nodes as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub duration_s: f64,
    pub message_sizes: MessageSizes,
    pub kinds: BTreeMap<MessageKind, KindTally>,
    pub links: BTreeMap<(NodeId, NodeId), LinkCounters>,
    pub conservation: Conservation,
    pub originated: BTreeMap<MessageKind, u64>,
    pub query_hits: u64,
    pub sessions: Vec<SessionSample>,
    pub snapshots: Vec<(f64, OverlayGraph)>,
    pub connection_series: Vec<ConnectionSample>,
    pub history: NetworkHistory,
}

impl SimReport {
    pub fn total_messages(&self) -> u64 {
        self.kinds.values().map(|t| t.count).sum()
    }

    pub fn total_bytes(&self) -> u64 {
        self.kinds.values().map(|t| t.bytes).sum()
    }

    pub fn count(&self, kind: MessageKind) -> u64 {
        self.kinds.get(&kind).map_or(0, |t| t.count)
    }

    /// Bytes recomputed from per-link counters and message sizes.
    pub fn link_recount_bytes(&self) -> u64 {
        self.links
            .values()
            .map(|l| {
                MessageKind::ALL.iter().map(|&k| l.count(k) * self.message_sizes.base(k)).sum::<u64>()
                    + l.query_payload_bytes
            })
            .sum()
    }

    pub fn connection_seconds(&self) -> f64 {
        self.history.connection_seconds(self.duration_s)
    }

    /// Columns: kind, count, bytes. All six kinds are listed.
    pub fn write_traffic_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["kind", "count", "bytes"])?;
        for k in MessageKind::ALL {
            let t = self.kinds.get(&k).copied().unwrap_or_default();
            w.write_record([k.name().to_string(), t.count.to_string(), t.bytes.to_string()])?;
        }
        w.flush()
    }

    /// Columns: edge, kind, count. Zero counts are omitted.
    pub fn write_links_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["edge", "kind", "count"])?;
        for (&(a, b), l) in &self.links {
            for k in MessageKind::ALL {
                if l.count(k) > 0 {
                    w.write_record([format!("{a}-{b}"), k.name().to_string(), l.count(k).to_string()])?;
                }
            }
        }
        w.flush()
    }

    /// Columns: node, start_h, length_h, completed.
    pub fn write_sessions_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["node", "start_h", "length_h", "completed"])?;
        for s in &self.sessions {
            w.write_record([
                s.node.to_string(),
                s.start_h.to_string(),
                s.length_h.to_string(),
                s.completed.to_string(),
            ])?;
        }
        w.flush()
    }

    /// Columns: time_s, nodes, edges, connections_per_node.
    pub fn write_connections_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["time_s", "nodes", "edges", "connections_per_node"])?;
        for s in &self.connection_series {
            w.write_record([
                s.time_s.to_string(),
                s.nodes.to_string(),
                s.edges.to_string(),
                format!("{:.6}", s.connections_per_node()),
            ])?;
        }
        w.flush()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrafficReport {
    pub message_fraction: BTreeMap<MessageKind, f64>,
    pub byte_fraction: BTreeMap<MessageKind, f64>,
    pub total_messages: u64,
    pub total_bytes: u64,
    pub connection_seconds: f64,
    /// Total bytes over connection-seconds.
    pub bytes_per_connection_second: f64,
}

impl TrafficReport {
    pub fn message_fraction(&self, kind: MessageKind) -> f64 {
        self.message_fraction.get(&kind).copied().unwrap_or(0.0)
    }

    pub fn byte_fraction(&self, kind: MessageKind) -> f64 {
        self.byte_fraction.get(&kind).copied().unwrap_or(0.0)
    }

    pub fn per_connection_bps(&self) -> f64 {
        self.bytes_per_connection_second * 8.0
    }
}

pub fn traffic_report(report: &SimReport) -> Result<TrafficReport, SimError> {
    let total_messages = report.total_messages();
    if total_messages == 0 {
        return Err(SimError::EmptyReport);
    }
    let total_bytes = report.total_bytes();
    let mut message_fraction = BTreeMap::new();
    let mut byte_fraction = BTreeMap::new();
    for (&k, t) in &report.kinds {
        message_fraction.insert(k, t.count as f64 / total_messages as f64);
        byte_fraction.insert(k, if total_bytes == 0 { 0.0 } else { t.bytes as f64 / total_bytes as f64 });
    }
    let connection_seconds = report.connection_seconds();
    Ok(TrafficReport {
        message_fraction,
        byte_fraction,
        total_messages,
        total_bytes,
        connection_seconds,
        bytes_per_connection_second: if connection_seconds > 0.0 {
            total_bytes as f64 / connection_seconds
        } else {
            0.0
        },
    })
}
