use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("expansion diverged: non-finite coefficient at order {order}")]
    ExpansionDiverged { order: usize },

    #[error("root finder did not converge after {iterations} iterations (residual {residual:e})")]
    RootsNotConverged { iterations: usize, residual: f64 },

    #[error("expected {expected} arguments, got {got}")]
    ArgumentCount { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("{point} is not a fixed point (residual {residual:e})")]
    NotFixedPoint { point: f64, residual: f64 },

    #[error("no sign change found while expanding bracket up to {limit}")]
    BracketNotFound { limit: f64 },

    #[error("identity map: every scanned point is a fixed point")]
    IdentityMap,

    #[error("infeasible parameter: {0}")]
    Infeasible(String),

    #[error("parameter at a singularity: {0}")]
    Singular(String),

    #[error("map is not monotone on the required range: {0}")]
    NotMonotone(String),

    #[error("internal inconsistency: {0}")]
    Inconsistent(String),

    #[error("parse error at offset {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

impl Error {
    /// Errors caused by malformed user input rather than by the computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_) | Error::ArgumentCount { .. } | Error::Parse { .. }
        )
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
