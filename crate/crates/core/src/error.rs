use thiserror::Error;

/// Errors raised by every module of the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A decay certificate with ratio `>= 1`, or a series that never met its tail bound.
    #[error("series does not converge: {0}")]
    NonConvergent(String),

    /// The point is the origin of the torus, where the Green function has its pole.
    #[error("point is zero on the torus")]
    ZeroPoint,

    /// Character index is integral, so the s = 1 Eisenstein value does not exist.
    #[error("character index {0} is integral; the s = 1 value diverges")]
    DivergentInput(String),

    #[error("expected an even integer, got {0}")]
    OddInput(u64),

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("enumeration too large: {0}")]
    Overflow(String),

    #[error("basis rows are linearly dependent")]
    DependentRows,

    #[error("precision of {got} bits is below the required {need} bits")]
    PrecisionTooLow { got: u32, need: u32 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
