use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the model, samplers and I/O layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("parent block of vertex {vertex} is numerically singular")]
    SingularBlock { vertex: usize },

    #[error("invalid shape parameter {0}")]
    InvalidShape(f64),

    #[error("vertex {vertex} has {count} parents, cap is {cap}")]
    CapExceeded { vertex: usize, count: usize, cap: usize },

    #[error("design submatrix for response {response} is rank deficient")]
    RankDeficient { response: usize },

    #[error("residual variance for response {response} is degenerate")]
    DegenerateVariance { response: usize },

    #[error("chain contains no draws")]
    EmptyChain,

    #[error("entry ({0}, {1}) is selected but never active in the chain")]
    NeverActive(usize, usize),

    #[error("requested {count} cells from a grid of {cells}")]
    CountTooLarge { count: usize, cells: usize },

    #[error("reference matrix has zero norm")]
    ZeroReference,

    #[error("series of length {0} is too short")]
    TooShort(usize),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {msg}")]
    Parse { path: PathBuf, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, msg: impl ToString) -> Self {
        Error::Parse {
            path: path.into(),
            msg: msg.to_string(),
        }
    }

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Dimension(_) | Error::Config(_) | Error::CountTooLarge { .. } => 2,
            Error::Io { .. } | Error::Parse { .. } => 4,
            _ => 3,
        }
    }
}
