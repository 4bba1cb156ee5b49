use std::fmt;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("eigensolver did not converge after {iterations} sweeps")]
    NoConvergence { iterations: usize },

    #[error("{qubits} qubits exceeds the supported maximum of {max}")]
    TooManyQubits { qubits: usize, max: usize },

    #[error("qubit index {index} out of range for a {qubits}-qubit circuit")]
    QubitOutOfRange { index: usize, qubits: usize },

    #[error("gate index {index} out of range (valid: {lo}..={hi})")]
    GateIndexOutOfRange { index: usize, lo: usize, hi: usize },

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("fault at gate {gate} is undetectable: fault-free and faulty outputs coincide")]
    UndetectableFault { gate: usize },

    #[error("ambiguous diagnosis: classes {survivors:?} remain after {evaluations} evaluations")]
    AmbiguousDiagnosis { survivors: Vec<usize>, evaluations: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("diagnostic table does not match: {0}")]
    TableMismatch(String),

    #[error("malformed fault spec: {0}")]
    FaultSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// A syntax error in a circuit file, tagged with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError { line, message: message.into() }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}
