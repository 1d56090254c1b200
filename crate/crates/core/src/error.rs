//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A matrix that must be symmetric positive definite is not.
    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    /// Dimension mismatch between arguments.
    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },

    /// An iterative solver failed to converge.
    #[error("{solver} did not converge within {iterations} iterations (residual {residual:.3e})")]
    NoConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    /// A numerical operation produced a non-finite or otherwise unusable value.
    #[error("numerical failure: {context}")]
    Numerical { context: String },

    /// Invalid parameter or state supplied by the caller.
    #[error("invalid argument: {context}")]
    InvalidArgument { context: String },

    /// Time stepping aborted mid-trajectory.
    #[error("propagation failed at t = {time}: {source}")]
    Propagation {
        time: f64,
        #[source]
        source: Box<Error>,
    },

    /// Configuration file could not be parsed.
    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(context: impl Into<String>) -> Self {
        Error::InvalidArgument {
            context: context.into(),
        }
    }

    pub fn numerical(context: impl Into<String>) -> Self {
        Error::Numerical {
            context: context.into(),
        }
    }

    pub fn dimension(context: impl Into<String>) -> Self {
        Error::DimensionMismatch {
            context: context.into(),
        }
    }

    pub fn at_time(self, time: f64) -> Self {
        Error::Propagation {
            time,
            source: Box::new(self),
        }
    }
}
