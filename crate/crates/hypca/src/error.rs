use std::path::PathBuf;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by the cube, stage, solver, benchmark and CLI layers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: expected {expected} bytes, found {actual}")]
    SizeMismatch {
        path: PathBuf,
        expected: u64,
        actual: u64,
    },

    #[error("non-finite value in {context} at index {index}")]
    NonFinite { context: &'static str, index: usize },

    #[error("parse error in {what}: {msg}")]
    Parse { what: String, msg: String },

    #[error("matrix is not symmetric: worst pair ({i}, {j}) differs by {delta:e}")]
    Asymmetric { i: usize, j: usize, delta: f64 },

    #[error(
        "Jacobi did not converge after {sweeps} sweeps (residual off-diagonal norm {residual:e})"
    )]
    NotConverged { sweeps: usize, residual: f64 },

    #[error("FLOP estimate overflows 128-bit arithmetic")]
    FlopOverflow,

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
