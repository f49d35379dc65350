use thiserror::Error;

/// Errors raised by the ordering library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Every live rank is blocked in a collective that can never complete.
    #[error("deadlock: {0}")]
    Deadlock(String),

    /// A rank's program panicked; the remaining ranks were aborted.
    #[error("rank {rank} aborted: {message}")]
    RankPanicked { rank: usize, message: String },

    /// A message was addressed outside the process group.
    #[error("destination rank {dest} outside group of size {size}")]
    BadDestination { dest: usize, size: usize },

    /// An operation that needs at least two ranks was called on a singleton group.
    #[error("cannot split a group of size {0}")]
    GroupTooSmall(usize),

    /// Structurally invalid graph input.
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    /// Malformed text input.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A permutation that is not a bijection.
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    /// Separator refinement cannot proceed (e.g. empty separator for banding).
    #[error("empty separator")]
    EmptySeparator,

    /// An internal consistency check failed.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by bad user input rather than internal failures.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidGraph(_)
                | Error::Parse { .. }
                | Error::InvalidPermutation(_)
                | Error::Io(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
