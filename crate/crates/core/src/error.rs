use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFiniteValue(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid feasible set: {0}")]
    InfeasibleConstruction(String),

    #[error("point lies outside the feasible set (distance {distance:e})")]
    Infeasible { distance: f64 },

    #[error("domain violation: {0}")]
    DomainViolation(String),

    #[error("no closed form and the inner solver does not apply: {0}")]
    NoClosedForm(String),

    #[error("inner solver failed after {iterations} iterations (last step {last_step:e})")]
    InnerFailed { iterations: usize, last_step: f64 },

    #[error("averaging window {first}..={last} is not fully stored")]
    WindowNotStored { first: usize, last: usize },

    #[error("block structure mismatch: {0}")]
    BlockMismatch(String),

    #[error("degenerate rate fit: {usable} usable points (need {required}), {dropped} dropped")]
    DegenerateFit {
        usable: usize,
        required: usize,
        dropped: usize,
    },

    #[error("coupling strength {rho} breaks positive definiteness (limit {limit})")]
    IndefiniteCoupling { rho: f64, limit: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("iteration {iteration}: {source}")]
    AtIteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Config(#[from] crate::harness::ConfigError),

    #[error("i/o failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn at_iteration(iteration: usize, source: Error) -> Self {
        Error::AtIteration {
            iteration,
            source: Box::new(source),
        }
    }

    /// Strips iteration context.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtIteration { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
