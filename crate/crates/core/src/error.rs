use thiserror::Error;

/// Errors raised across the toolkit.
///
/// Variants map onto the failure classes of each stage so that callers (the
/// sweep harness in particular) can tell a bad input file from a numerical
/// failure.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("arity mismatch: expected {expected} values, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("unbound parameter `{0}`")]
    Binding(String),
    #[error("capacity exceeded: {what} needs {requested} qubits, cap is {cap}")]
    Capacity {
        what: &'static str,
        requested: usize,
        cap: usize,
    },
    #[error("observable is not Hermitian: term {term} has coefficient {coefficient}")]
    Observable { term: String, coefficient: String },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("invalid ansatz or optimizer spec: {0}")]
    Spec(String),
    #[error("integral convention error: built Hamiltonian term {term} has imaginary part {imag:e}")]
    IntegralConvention { term: String, imag: f64 },
    #[error("integral error: {0}")]
    Integral(String),
    #[error("constraint violated: {0}")]
    Constraint(String),
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error("unphysical snapshot value: {0}")]
    Physicality(String),
    #[error("topology error: {0}")]
    Topology(String),
    #[error("objective returned a non-finite value at evaluation {evaluation}")]
    NonFinite { evaluation: usize },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
