use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graphs of order {left} and {right} cannot be compared")]
    OrderMismatch { left: usize, right: usize },

    #[error("order {order} exceeds the limit {limit} for {what}")]
    OrderTooLarge {
        order: usize,
        limit: usize,
        what: &'static str,
    },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("equality variable requested for a single position {0}")]
    SamePosition(usize),

    #[error("pattern covers every graph; its negation is the empty clause")]
    UniversalPattern,

    #[error("enumeration needs {needed} instances, budget is {budget}; use the SAT path")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error("break admits {found} graphs, expected {expected}")]
    VerificationFailed { found: u64, expected: u64 },

    #[error("time budget exhausted after {phase}; resume from {state}")]
    Interrupted { phase: &'static str, state: String },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
