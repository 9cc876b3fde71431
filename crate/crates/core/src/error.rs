use std::ops::RangeInclusive;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the supported domain (pole, negative order, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A table file ended early. `last_complete` is the last node index
    /// read intact, so a run can resume after it.
    #[error("truncated table: expected {expected} nodes, last complete node is {last_complete:?}")]
    Truncated {
        last_complete: Option<usize>,
        expected: usize,
    },

    #[error("precision metadata mismatch: {0}")]
    PrecisionMismatch(String),

    /// Node ranges flagged by the finite-difference scan.
    #[error("data corruption suspected in node ranges {ranges:?}")]
    Corruption { ranges: Vec<RangeInclusive<usize>> },

    /// The input does not carry enough precision for the request.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("interrupted after {completed} of {total} nodes")]
    Interrupted { completed: usize, total: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable class name.
    pub fn class(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Parse { .. } => "parse",
            Error::Truncated { .. } => "truncated",
            Error::PrecisionMismatch(_) => "precision-mismatch",
            Error::Corruption { .. } => "corruption",
            Error::Capacity(_) => "capacity",
            Error::Interrupted { .. } => "interrupted",
            Error::Io(_) => "io",
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
