use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("self-loop ({0},{0}) is not allowed")]
    SelfLoop(usize),

    #[error("node id {id} out of range for p={p}")]
    NodeOutOfRange { id: usize, p: usize },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("infeasible degree sequence: {0}")]
    InfeasibleDegrees(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("empty observation set")]
    EmptyObservation,

    #[error("degenerate cross-validation split: {0}")]
    DegenerateSplit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
