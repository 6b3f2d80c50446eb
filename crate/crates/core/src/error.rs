use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Two operands live on different monomial bases or dimensions.
    #[error("usage error: {0}")]
    Mismatch(String),

    /// A derivative or contraction needs more Taylor degrees than the jet carries.
    #[error("insufficient degree for {operation}: need degree cap {required}, have {available}")]
    InsufficientDegree {
        operation: &'static str,
        required: usize,
        available: usize,
    },

    #[error("metric degenerate at base point")]
    DegenerateMetric,

    #[error("metric is not positive definite{0}")]
    NotPositiveDefinite(String),

    #[error("invalid index: {0}")]
    InvalidIndex(String),

    #[error("unsupported dimension {dimension}: {reason}")]
    UnsupportedDimension { dimension: usize, reason: &'static str },

    /// A quantity has no representation in the chosen backend (for example an
    /// irrational square root on the rational backend).
    #[error("not representable: {0}")]
    NotRepresentable(String),

    /// A radial series would need a negative power of `x` or a second power of `log x`.
    #[error("radial series out of range: {0}")]
    RadialRange(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
