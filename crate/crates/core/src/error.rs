use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Pauli letter {letter:?} at position {position}")]
    PauliParse { position: usize, letter: char },

    #[error("empty Pauli string")]
    EmptyPauli,

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("qubit count {0} out of range [1, {max}]", max = crate::statevector::MAX_QUBITS)]
    QubitCount(usize),

    #[error("qubit index {index} out of range for {n} qubits")]
    QubitIndex { index: usize, n: usize },

    #[error("CNOT control and target coincide on qubit {0}")]
    CnotSameQubit(usize),

    #[error("parameter index (mu={slot}, l={module}) is not in the circuit")]
    ParamIndex { module: usize, slot: usize },

    #[error("invalid circuit dimensions: {0}")]
    Dimensions(String),

    #[error("invalid outcome probabilities ({plus}, {minus})")]
    Probabilities { plus: f64, minus: f64 },

    #[error("shot budget {total} cannot cover {evals} evaluations")]
    Budget { total: u64, evals: usize },

    #[error("coefficients must sum to 1 (got {0})")]
    CoefficientSum(f64),

    #[error("invalid estimator: {0}")]
    Estimator(String),

    #[error("invalid component request: {0}")]
    Request(String),

    #[error("observable: {0}")]
    Observable(String),

    #[error("Hilbert-space dimension {0} is not a power of two >= 2")]
    Dimension(u64),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("matrix is not positive definite (condition estimate {condition:e})")]
    NotPositiveDefinite { condition: f64 },

    #[error("no crossover within [{lo:e}, {hi:e}]")]
    NoCrossover { lo: f64, hi: f64 },

    #[error("line {line}: {message}")]
    Hamiltonian { line: usize, message: String },

    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for failures of the filesystem or serialization layer rather than of the inputs.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
