use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("eigensolver did not converge for eigenvalue {index} within {budget} iterations")]
    IterationFailure { index: usize, budget: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian: max |H_ij - conj(H_ji)| = {asymmetry:e}")]
    NotHermitian { asymmetry: f64 },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("state vector is not normalised: norm = {norm}")]
    NotNormalised { norm: f64 },

    #[error("requested dimension {requested} exceeds cap {cap}")]
    DimensionCap { requested: usize, cap: usize },

    #[error("graph is not a forest; cycle through vertices {cycle:?}")]
    NotAForest { cycle: Vec<usize> },

    #[error("diagonal entry {index} is negative ({value})")]
    NegativeDiagonal { index: usize, value: f64 },

    #[error("diagonal entry {index} is nonzero ({value})")]
    NonzeroDiagonal { index: usize, value: f64 },

    #[error("star centred at {center} has zero weight vector")]
    ZeroWeightStar { center: usize },

    #[error("invalid decomposition: {0}")]
    InvalidDecomposition(String),

    #[error("promise violated: |sum s| = {found}, expected {expected}")]
    PromiseViolation { expected: i64, found: i64 },

    #[error("parity violation: B = {b} and M = {m} must have the same parity")]
    Parity { m: u64, b: u64 },

    #[error("unknown witness kind `{0}`")]
    UnknownWitness(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
