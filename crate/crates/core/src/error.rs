use thiserror::Error;

/// Error type shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Two objects that must share a shape do not.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Successive quadrature refinements disagree beyond the requested tolerance.
    #[error("quadrature did not converge: {0}")]
    NonConvergence(String),

    /// A symbol family name outside the documented catalogue.
    #[error("unknown symbol family `{0}` (catalogue: constant, coordinate_weight, block_weight, total_weight, ball_indicator, gaussian, phase)")]
    UnknownSymbolFamily(String),

    /// The symbol's invariance group does not contain the requested block group.
    #[error("symbol invariance too small: {0}")]
    InvarianceMismatch(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
