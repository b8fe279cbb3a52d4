use std::path::Path;

use gnutellab::crawler::CrawlError;
use gnutellab::{AnalysisError, GraphError, MismatchError, SimError};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
            CliError::Invariant(_) => 3,
        }
    }

    pub fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Input(format!("{}: {e}", path.display()))
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Invariant(m) => CliError::Invariant(m),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<MismatchError> for CliError {
    fn from(e: MismatchError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<CrawlError> for CliError {
    fn from(e: CrawlError) -> Self {
        CliError::Input(e.to_string())
    }
}
