use thiserror::Error;

/// Errors raised by graph construction, oracle access, and the learning algorithms.
///
/// `FailureEvent` is the only variant that reflects a bounded-probability
/// statistical failure of a randomized algorithm; every other variant is a
/// usage error or a simulation bug.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("oracle mode error: {0}")]
    Mode(String),
    #[error("vertex sets must be disjoint")]
    Disjointness,
    #[error("simulation integrity error: {0}")]
    Integrity(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("randomized failure event: {0}")]
    FailureEvent(String),
    #[error("query columns are linearly dependent")]
    Rank,
    #[error("target vector lies in the column space of the query matrix")]
    Solvable,
    #[error("graph file parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
