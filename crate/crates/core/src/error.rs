use thiserror::Error;

/// Errors raised by the lattice, Hamiltonian, simulator and solver layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("index out of range: {0}")]
    Index(String),

    #[error("unsupported parameter: {0}")]
    UnsupportedParameter(String),

    #[error("malformed term: {0}")]
    MalformedTerm(String),

    #[error("matrix too large for dense materialization: {n_qubits} qubits (cap {cap}); use the sector path")]
    TooLarge { n_qubits: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid sector: {0}")]
    InvalidSector(String),

    #[error("non-finite objective value at evaluation {evaluation}")]
    NonFiniteObjective { evaluation: usize },

    #[error("level ordering: {0}")]
    LevelOrder(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
