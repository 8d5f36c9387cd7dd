use thiserror::Error;

/// Errors raised by the solvers, oracles and bound assemblers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("marginal sums differ: sum(alpha) = {row_sum}, sum(beta) = {col_sum}")]
    MarginalsMismatch { row_sum: u64, col_sum: u64 },

    #[error("infeasible instance: {0}")]
    Infeasible(String),

    #[error("solver did not converge after {iterations} iterations (residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("resource limit exceeded: {used} > budget {budget}")]
    ResourceLimit { used: u64, budget: u64 },

    #[error("marginal {value} exceeds cap {cap}")]
    BoundExceeded { value: u64, cap: u64 },

    #[error("cell bound matrix is not graphical (entries must be 0 or 1)")]
    NotGraphical,

    #[error("cell bound matrix is not multigraphical (entries must be 0 or inf)")]
    NotMultigraphical,

    #[error("support of the cell bound matrix is disconnected")]
    DisconnectedSupport,

    #[error("binomial entries need a finite cell bound matrix")]
    KInfinite,

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
