use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vector is not normalized: norm {norm}")]
    Normalization { norm: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian: max deviation {deviation:e}")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive semidefinite: smallest eigenvalue {min_eigenvalue:e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("operator has non-positive trace {trace:e}")]
    NonPositiveTrace { trace: f64 },

    #[error("operator is not a pure state: {reason}")]
    NotPure { reason: String },

    #[error("tensor product of size {entries} entries exceeds the cap of {cap}")]
    TensorCap { entries: usize, cap: usize },

    #[error("inconsistent subsystem dimensions: {0}")]
    InconsistentDims(String),

    #[error("cannot project the zero matrix onto a pure state")]
    ZeroMatrix,

    #[error("corrupted pure state: no diagonal entry above {threshold:e}")]
    CorruptedInput { threshold: f64 },

    #[error("parameter {name} = {value} is out of range: {expected}")]
    OutOfRange { name: &'static str, value: f64, expected: &'static str },

    #[error("dimension {dim} exceeds the supported maximum {max}")]
    DimensionCap { dim: usize, max: usize },

    #[error("measurement records do not cover the setting family: {0}")]
    IncompleteSettings(String),

    #[error("superposition vector vanishes for the given inputs")]
    DegenerateSuperposition,

    #[error("target error {target:e} unreachable within the schedule table (max N = {max_shots})")]
    BudgetExceeded { target: f64, max_shots: u64 },

    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),

    #[error("invalid candidate map: {0}")]
    InvalidMap(String),

    #[error("loop needs refinement: phase step {step:.4} at sample {index}")]
    RefinementNeeded { index: usize, step: f64 },

    #[error("loop point {index} has zero modulus")]
    ZeroModulus { index: usize },

    #[error("invalid loop: {0}")]
    InvalidLoop(String),

    #[error("success probability is zero")]
    ZeroSuccess,

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
