//! Degree-distribution fits, robustness experiments and traffic estimates.

mod powerlaw;
mod robustness;
mod traffic;

pub use powerlaw::{
    contiguous_upper_degree, fit_multimodal, fit_power_law, fit_power_law_range, MultiModalFit, PowerLawFit,
    DEFAULT_KNEE_CANDIDATES,
};
pub use robustness::{robustness_experiment, RemovalStrategy, RobustnessCurve, RobustnessPoint};
pub use traffic::{traffic_estimate, TrafficEstimate, SECONDS_PER_MONTH};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("need at least {needed} nonzero degree bins in range, found {found}")]
    InsufficientPoints { needed: usize, found: usize },
    #[error("degree histogram is empty")]
    EmptyHistogram,
    #[error("no knee candidate has nonzero bins on both sides")]
    NoValidKnee,
    #[error("removal fraction {0} outside [0, 1)")]
    InvalidFraction(f64),
}
