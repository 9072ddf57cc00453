use thiserror::Error;

pub type Result<T, E = SimError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("qubit index {index} out of range 1..={n_qubits}")]
    QubitOutOfRange { index: usize, n_qubits: usize },
    #[error("repeated qubit label {0}")]
    RepeatedQubit(usize),
    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("state is not normalised (norm {0})")]
    NotNormalized(f64),
    #[error("qubit list must not be empty")]
    EmptyQubitList,
    #[error("too many qubits: {0}")]
    TooManyQubits(usize),
    #[error("unrecognised label {0:?}")]
    InvalidLabel(String),
    #[error("register state has weight {0:.3e} outside the five-dimensional logical space")]
    OutsideCodeSpace(f64),
    #[error("invalid error location {0}; expected 1..=5")]
    InvalidLocation(usize),
    #[error("rotation axis is not unit norm (|n| = {0})")]
    NonUnitAxis(f64),
    #[error("code construction failed: {0}")]
    Construction(String),
    #[error("parameter {name} = {value} outside [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("invalid NMR system: {0}")]
    InvalidSystem(String),
    #[error("noise schedule mismatch: {0}")]
    Schedule(String),
    #[error("sampling step {dt} s aliases line at {frequency} Hz (Nyquist {nyquist} Hz)")]
    Aliasing { dt: f64, frequency: f64, nyquist: f64 },
    #[error("degenerate fit: {0}")]
    DegenerateFit(&'static str),
    #[error("zero signal: I0 + I1 = 0")]
    ZeroSignal,
    #[error("empty θ grid")]
    EmptyGrid,
    #[error("malformed code document: {0}")]
    MalformedCode(String),
}
