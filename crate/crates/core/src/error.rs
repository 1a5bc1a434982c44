use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },

    #[error("variance mismatch: {0}")]
    VarianceMismatch(String),

    #[error("matrix is singular (|det| = {det:e})")]
    Singular { det: f64 },

    #[error("degenerate body: {0}")]
    Degenerate(String),

    #[error("origin is not in the interior of the body")]
    OriginNotInterior,

    #[error("curvature undefined: alpha = {alpha:e}")]
    CurvatureUndefined { alpha: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("isotypic decomposition failed: {0}")]
    DecompositionFailed(String),

    #[error("size cap exceeded: {0}")]
    SizeCap(String),

    #[error("rejection sampling exhausted after {0} attempts")]
    RejectionExhausted(usize),

    #[error("inadmissible concave function: {0}")]
    InadmissibleFunction(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn parse(path: impl Into<String>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
