use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("face A_{{{sign}{axis}}} is not a crossing target: {reason}")]
    InvalidFace {
        axis: usize,
        sign: char,
        reason: &'static str,
    },

    #[error("incompatible curves: {0}")]
    Mismatch(String),

    #[error("need at least 3 box sizes for the systematic-error protocol, got {0}")]
    TooFewSizes(usize),

    #[error("grid too narrow: E^2 minimum sits on the grid boundary at {0}")]
    GridTooNarrow(f64),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("enumeration cap exceeded: {0}")]
    CapExceeded(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
