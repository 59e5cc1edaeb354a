use thiserror::Error;

use crate::series::ScaledSeries;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Operands that cannot be combined (different primes, bad dimensions, ...).
    #[error("usage error: {0}")]
    Usage(String),

    #[error("{0} is not a unit")]
    NotAUnit(String),

    /// Not enough p-adic digits to carry out the requested computation.
    #[error("precision error: {0}")]
    Precision(String),

    #[error("denominator exponent {e} exceeds the available precision {prec}")]
    DenominatorOverflow { e: u32, prec: u32 },

    #[error("composition requires an inner series with zero constant term")]
    CompositionDomain,

    #[error("truncation order {order} too short: need a visible coefficient of degree {degree}")]
    TruncationTooShort { degree: usize, order: usize },

    #[error("not divisible by {divisor}; remainder {remainder}")]
    NotDivisible {
        divisor: String,
        remainder: Box<ScaledSeries>,
    },

    #[error("not a distinguished polynomial: {0}")]
    NotDistinguished(String),

    #[error("ideal not Gamma-stable: remainder {remainder}")]
    NotStable { remainder: Box<ScaledSeries> },

    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    #[error("integrality violated: {0}")]
    IntegralityViolation(String),

    #[error("fixed-point iteration did not stabilise after {iterations} steps")]
    NoConvergence { iterations: usize },

    #[error("cocycle relation fails for chi-values {c1} and {c2}")]
    CocycleViolation { c1: String, c2: String },

    #[error("module invariant violated: {0}")]
    InvariantViolation(String),

    #[error("hypothesis not met: {0}")]
    HypothesisNotMet(String),

    #[error("invalid input: {0}")]
    Input(String),
}
