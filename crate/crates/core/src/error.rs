use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid state space: {0}")]
    InvalidStateSpace(String),
    #[error("invalid belief: {0}")]
    InvalidBelief(String),
    #[error("invalid experiment: {0}")]
    InvalidExperiment(String),
    #[error("invalid garbling kernel: {0}")]
    InvalidKernel(String),
    #[error("signal {signal} is unreachable under the prior")]
    UnreachableSignal { signal: usize },
    #[error("relabeling map is not weakly increasing on the states")]
    NonMonotoneMap,
    #[error("priors are not likelihood-ratio ordered")]
    NotLrOrdered,
    #[error("experiments are not Blackwell ranked: {0}")]
    NotBlackwellRanked(String),
    #[error("garbling LP did not converge after {iterations} pivots")]
    LpNotConverged { iterations: usize },
    #[error("garbling LP solution failed verification (residual {residual:e})")]
    LpNumerical { residual: f64 },
    #[error("no violating index: {0}")]
    NoViolatingIndex(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("integration failed: {0}")]
    IntegrationFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
