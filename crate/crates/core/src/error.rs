use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("coefficient index maps differ")]
    IndexMismatch,

    #[error("unknown basis column (k={k}, q={q})")]
    UnknownColumn { k: u32, q: u32 },

    #[error("Bessel root search failed for (k={k}, q={q})")]
    BesselRoot { k: usize, q: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid distribution: {0}")]
    Distribution(String),

    #[error("distribution windows differ")]
    WindowMismatch,

    #[error("malformed container: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
