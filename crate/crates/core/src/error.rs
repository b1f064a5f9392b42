use thiserror::Error;

/// Errors produced by the numerical routines in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unsupported dimension {0}; only d = 1 and d = 2 are supported")]
    UnsupportedDimension(usize),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("sample count {found} does not match grid size {expected}")]
    SampleCount { expected: usize, found: usize },

    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),

    #[error("invalid frame configuration: {0}")]
    InvalidFrame(String),

    #[error("frame id {0} lies outside the truncation box")]
    IdOutOfRange(String),

    #[error("support overflow: {0}")]
    SupportOverflow(String),

    #[error("derivative order {0} exceeds the finite-difference limit of 4")]
    DerivativeOrder(usize),

    #[error("Schmidt rank {rank} exceeds the cap {cap} (relative tail mass {tail_mass:.3e})")]
    RankExceeded { rank: usize, cap: usize, tail_mass: f64 },

    #[error("symbol has no evaluator; {0}")]
    NoEvaluator(String),

    #[error("hypotheses violated: {0}")]
    Hypotheses(String),

    #[error("{0}")]
    InvalidInput(String),

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
