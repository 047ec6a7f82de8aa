use thiserror::Error;

use crate::rational::Rational;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("breakpoints must be strictly increasing")]
    UnsortedBreakpoints,
    #[error("breakpoints and values differ in length ({breakpoints} vs {values})")]
    LengthMismatch { breakpoints: usize, values: usize },
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("point {0} lies outside the domain")]
    OutOfDomain(Rational),
    #[error("range of inner map [{lo}, {hi}] escapes the outer domain")]
    RangeEscapesDomain { lo: String, hi: String },
    #[error("map is not a self-map of its domain")]
    NotSelfMap,
    #[error("homeomorphism is not bijective: {0}")]
    NotBijective(String),
    #[error("invalid interval: {0}")]
    InvalidInterval(String),
    #[error("segment count exceeds the ceiling of {limit}")]
    ResourceLimit { limit: usize },
    #[error("map does not have constant absolute slope")]
    NotConstantSlope,
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("sampled lap estimate did not stabilize after {refinements} refinements")]
    NoConvergence { refinements: usize },
    #[error("malformed input: {0}")]
    MalformedInput(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("not an exact rational: {0:?}")]
    NonRationalWeight(String),
    #[error("unsupported gate: {0}")]
    UnsupportedGate(String),
    #[error("entropy must be positive and finite, got {0}")]
    NonPositiveEntropy(f64),
}
