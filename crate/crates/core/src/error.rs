use std::path::PathBuf;

use thiserror::Error;

use crate::mesh::State;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Why a trial step was thrown away. The driver halves `dt` and retries.
#[derive(Debug, Clone, PartialEq)]
pub enum Rejection {
    VolumeFloor { cell: usize, value: f64 },
    TemperatureFloor { cell: usize, value: f64 },
    NewtonNonconvergence { iterations: usize, residual: f64 },
    NonFinite { field: &'static str, cell: usize },
}

impl std::fmt::Display for Rejection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Rejection::VolumeFloor { cell, value } => {
                write!(f, "specific volume {value:e} at cell {cell} below floor")
            }
            Rejection::TemperatureFloor { cell, value } => {
                write!(f, "temperature {value:e} at cell {cell} below floor")
            }
            Rejection::NewtonNonconvergence {
                iterations,
                residual,
            } => write!(
                f,
                "energy Newton did not converge in {iterations} iterations (residual {residual:e})"
            ),
            Rejection::NonFinite { field, cell } => {
                write!(f, "non-finite {field} at cell {cell}")
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("step rejected: {0}")]
    Rejected(Rejection),

    #[error("tridiagonal solve failed: zero pivot at row {row}")]
    LinearSolve { row: usize },

    #[error("time step {dt:e} underflowed at t = {t}")]
    DtUnderflow { dt: f64, t: f64 },

    #[error("simulation failed at t = {}: {reason}", .last_state.t)]
    SimulationFailure {
        reason: String,
        last_state: Box<State>,
    },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the CLI: 1 validation, 2 simulation failure, 3 IO.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Config(_) | Error::Parse { .. } => 1,
            Error::Rejected(_)
            | Error::LinearSolve { .. }
            | Error::DtUnderflow { .. }
            | Error::SimulationFailure { .. }
            | Error::Invariant(_) => 2,
            Error::Io { .. } => 3,
        }
    }
}
