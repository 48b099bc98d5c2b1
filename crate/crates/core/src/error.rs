use thiserror::Error;

/// Every failure the library reports.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate singularity: {0}")]
    DegenerateSingularity(String),
    #[error("Newton refinement did not converge: {0}")]
    NonConvergence(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("input is not Morse: {0}")]
    NonMorseInput(String),
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("path leaves the leaf: {0}")]
    PathLeavesLeaf(String),
    #[error("leaf tracing failed: {0}")]
    TracingFailure(String),
    #[error("inconsistent holonomy: {0}")]
    InconsistentHolonomy(String),
    #[error("invalid rectangle chain: {0}")]
    InvalidChain(String),
    #[error("insufficient area for surgery: {0}")]
    InsufficientArea(String),
    #[error("overlap contains a Bohr-Sommerfeld leaf: {0}")]
    OverlapContainsBS(String),
    #[error("point lies on a coordinate axis: {0}")]
    OnAxis(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
