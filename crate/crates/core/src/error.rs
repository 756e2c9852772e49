use thiserror::Error;

#[derive(Debug, Error)]
pub enum PqcError {
    #[error("invalid register layout: {0}")]
    InvalidLayout(String),

    #[error("capacity exceeded: {what} needs 2^{qubits} amplitudes, limit is 2^{limit}")]
    Capacity {
        what: &'static str,
        qubits: u32,
        limit: u32,
    },

    #[error("coefficients for j1 = {offending:?} are not normalized")]
    Normalization { offending: Vec<u64> },

    #[error("coefficient table shape mismatch: {0}")]
    Shape(String),

    #[error("marked state {marked} out of range [0, {size})")]
    MarkedOutOfRange { marked: u64, size: u64 },

    #[error("qubit {qubit} is not an ancilla or function qubit (m = {m})")]
    InvalidTarget { qubit: u32, m: u32 },

    #[error("operator is not unitary (max deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("bit string has {got} bits, coupling table has {expected}")]
    BitLength { expected: usize, got: usize },

    #[error("coupling configuration does not give distinct frequencies: {0}")]
    NonInjectiveCouplings(String),

    #[error("{0} is not a power of two")]
    NotPowerOfTwo(u64),

    #[error("invalid Grover parameters: {0}")]
    GroverParams(String),

    #[error("resource budget allows n1 <= {max_n1}, requested {n1}")]
    Budget { n1: u32, max_n1: u32 },

    #[error("invalid Shor parameters: {0}")]
    ShorParams(String),

    #[error("no usable peaks for period extraction")]
    NoPeaks,

    #[error("invalid circuit program: {0}")]
    Program(String),

    #[error("thread pool: {0}")]
    ThreadPool(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = PqcError> = std::result::Result<T, E>;
