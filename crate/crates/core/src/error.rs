use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("scalar mode mismatch: {0}")]
    ModeMismatch(String),

    #[error("parse error: {0}")]
    Parse(String),

    /// Float-mode boundary classification fell inside the tolerance band.
    #[error("ambiguous classification: {0} (retry in exact mode)")]
    Ambiguity(String),

    #[error("truncation {requested} exceeds available orbit length {available}")]
    Truncation { requested: usize, available: usize },

    #[error("no root of the determinant in (0, 1)")]
    NoRoot,

    #[error("not finitely Markov: {0}")]
    NotFinitelyMarkov(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("level-{0} partition is empty")]
    EmptyPartition(usize),

    /// Numerical rank decision was not separated from the tolerance.
    #[error("ambiguous multiplicity: geometric multiplicity is {low} or {high}")]
    AmbiguousMultiplicity { low: usize, high: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Format(String),
}

impl Error {
    /// Input errors are the caller's fault (exit 2); everything else is an
    /// engine failure (exit 3).
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::InvalidParameter(_) | Error::ModeMismatch(_) | Error::Parse(_))
    }
}
