use thiserror::Error;

/// Errors raised by the exact-arithmetic kernel.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An intermediate value left the range of the integer type in use.
    #[error("integer overflow while evaluating {0}")]
    Overflow(&'static str),
    /// A nonzero frequency was required (a denominator would vanish).
    #[error("zero frequency where a nonzero one is required")]
    ZeroFrequency,
    /// The curve parameters describe an excluded degenerate curve.
    #[error("degenerate curve: {0}")]
    DegenerateCurve(&'static str),
    /// The counting window is malformed.
    #[error("invalid window: {0}")]
    InvalidWindow(&'static str),
    #[error("precondition violated: {0}")]
    Precondition(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
