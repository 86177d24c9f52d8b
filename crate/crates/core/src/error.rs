use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{op}: shape mismatch (expected {expected}, found {found})")]
    ShapeMismatch { op: &'static str, expected: String, found: String },

    #[error("{what}: expected length {expected}, found {found}")]
    LengthMismatch { what: &'static str, expected: usize, found: usize },

    #[error("qubit index {qubit} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },

    #[error("control and target qubit must differ (both {0})")]
    SameQubit(usize),

    #[error("unsupported qubit count {n} (allowed {min}..={max})")]
    QubitCount { n: usize, min: usize, max: usize },

    #[error("rapidity {0} outside the accepted range")]
    RapidityOutOfRange(f64),

    #[error("backward root must be a scalar, got {0} elements")]
    NonScalarRoot(usize),

    #[error("class label {0} is not 0 or 1")]
    InvalidLabel(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("need {needed} jets, only {available} available")]
    InsufficientData { needed: usize, available: usize },

    #[error("checkpoint {path}: {message}")]
    Checkpoint { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
