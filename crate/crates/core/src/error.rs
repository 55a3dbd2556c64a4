use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("monomial count sigma({n}, {p}) overflows usize")]
    SigmaOverflow { n: usize, p: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        found: usize,
    },

    #[error("matrix is not Schur (spectral radius {radius:.12})")]
    NotSchur { radius: f64 },

    #[error("invalid problem field `{field}`: {reason}")]
    InvalidField { field: String, reason: String },

    #[error("linear program is numerically degenerate after {iterations} pivots")]
    NumericallyDegenerate { iterations: usize },

    #[error("tightened constraint set is infeasible at prediction step {step}")]
    TightenedInfeasible { step: usize },

    #[error("set not finitely determined within {cap} prediction steps")]
    NotFinitelyDetermined { cap: usize },

    #[error("polytope is unbounded along coordinate {coord}")]
    UnboundedCoordinate { coord: usize },

    #[error("no admissible reference for the initial state (violated rows: {violated:?})")]
    InadmissibleInitialState { violated: Vec<usize> },

    #[error("monomial ordering mismatch: expected `{expected}`, found `{found}`")]
    OrderingMismatch { expected: String, found: String },

    #[error("non-finite value in simulation at step {step}")]
    NonFinite { step: usize },

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
