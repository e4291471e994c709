use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input text. `line` is 1-based.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Input data violates a structural invariant (ordering, contiguity, shape).
    #[error("invalid structure: {0}")]
    Structure(String),

    /// A caller-supplied argument is outside its admissible set.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Evaluation requested outside the domain the data covers.
    #[error("outside domain: {0}")]
    Domain(String),

    /// An iteration failed to converge or a result left the representable range.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// The rate's mass ran out before the requested event count was reached.
    #[error("intensity exhausted: {0}")]
    Exhausted(String),

    /// A schedule or sample could not be extended past `completed` items.
    #[error("stopped after {completed} completed items: {msg}")]
    Partial { completed: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
