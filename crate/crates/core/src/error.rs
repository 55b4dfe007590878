use thiserror::Error;

/// Errors shared by the model, kernel, bound, and chain layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid goal region: {0}")]
    InvalidGoal(String),
    #[error("attractors degenerate: {0}")]
    DegenerateAttractors(String),
    #[error("bound not applicable: {0}")]
    BoundNotApplicable(String),
    #[error("velocity update is a point mass; no density exists")]
    DegenerateDistribution,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("chain construction failed: {0}")]
    DegenerateChain(String),
}

pub type Result<T> = std::result::Result<T, Error>;
