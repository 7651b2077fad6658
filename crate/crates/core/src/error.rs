use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("player index {index} out of range for {n} players")]
    PlayerOutOfRange { index: usize, n: usize },
    #[error("dimension mismatch: expected {expected} players, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("second-order term: both factors of a product carry an eps part")]
    EpsilonSquared,
    #[error("scaling factor must be positive, got {0}")]
    NonPositiveScale(String),
    #[error("every matrix entry is zero: every profile is a perceived Nash equilibrium")]
    DegenerateMatrix,
    #[error("unknown {what} `{name}`")]
    Unknown { what: &'static str, name: String },
    #[error("entry ({i}, {j}) is {found}, expected 0 before flipping")]
    StrictFlip { i: usize, j: usize, found: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("{n} players exceeds the enumeration cap of {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error("requires an exact cost model; the sqrt utility only supports float costs")]
    FloatModeOnly,
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
