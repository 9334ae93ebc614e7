//! Crate-wide error type and exit-code mapping.

/// Errors produced by grid construction, matrix assembly and the CLI.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid configuration (unknown registry name, bad parameter, ...).
    #[error("configuration error: {0}")]
    Config(String),
    /// A size or memory cap would be exceeded.
    #[error("size cap exceeded: {0}")]
    SizeCap(String),
    /// Matrix/grid dimension mismatch.
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    /// A grid point is not contained in the expected super-grid.
    #[error("containment error: {0}")]
    Containment(String),
    /// A sampled function produced a non-finite value.
    #[error("evaluation error: {0}")]
    Evaluation(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 config, 3 resource cap, 1 otherwise.
    /// (4 is reserved for acceptance-suite failures.)
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::SizeCap(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
