//! Simulation and analysis toolkit for Gnutella-style flooding overlays.

pub mod analysis;
pub mod crawler;
pub mod graph;
pub mod mismatch;
pub mod protocol;
pub mod sim;

pub use analysis::{AnalysisError, MultiModalFit, PowerLawFit, RemovalStrategy};
pub use crawler::{CrawlConfig, CrawlError, CrawlSnapshot, CrawlTarget, StaticNetwork};
pub use graph::{DegreeDistribution, GraphError, NodeId, NodeInfo, OverlayGraph};
pub use mismatch::{ClusterPartition, HostPlacement, MismatchError, UnderlayGraph};
pub use protocol::{Message, MessageId, MessageKind, ProtocolError};
pub use sim::{ChurnModel, SessionLaw, SimConfig, SimError, SimReport};
