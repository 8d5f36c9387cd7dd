//! Command handlers behind the `ctbounds` binary. Each handler returns a
//! [`Report`] together with the process exit code.

pub mod commands;
pub mod instance;
pub mod report;
pub mod reproduce;

pub use commands::{Common, Outcome};
pub use instance::InstanceFile;
pub use report::{Format, Record, Report, Status};

/// Exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const INFEASIBLE: i32 = 2;
    pub const NOT_CONVERGED: i32 = 3;
    pub const BAD_INPUT: i32 = 4;
    pub const BUDGET: i32 = 5;
    pub const DISCONNECTED: i32 = 6;
    pub const MISMATCH: i32 = 7;
    /// Failure to write the report.
    pub const OUTPUT: i32 = 1;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Core(#[from] ctbounds::Error),
    #[error("cannot write report: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => exit::BAD_INPUT,
            CliError::Output(_) => exit::OUTPUT,
            CliError::Core(e) => core_exit_code(e),
        }
    }
}

pub fn core_exit_code(e: &ctbounds::Error) -> i32 {
    use ctbounds::Error::*;
    match e {
        Infeasible(_) => exit::INFEASIBLE,
        NotConverged { .. } => exit::NOT_CONVERGED,
        ResourceLimit { .. } => exit::BUDGET,
        DisconnectedSupport => exit::DISCONNECTED,
        InvalidInput(_) | MarginalsMismatch { .. } | BoundExceeded { .. } | NotGraphical | NotMultigraphical | KInfinite
        | Unsupported(_) => exit::BAD_INPUT,
    }
}
