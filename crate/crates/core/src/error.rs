//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("modulus is not irreducible over F_{0}")]
    Reducible(u64),
    #[error("operands live in different rings")]
    RingMismatch,
    #[error("field map is not an embedding")]
    NotEmbedding,
    #[error("nonzero coefficient below the window at degree {0}")]
    WindowOverflow(i64),
    #[error("element is not a unit")]
    NotUnit,
    #[error("precision insufficient to decide")]
    PrecisionInsufficient,
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("no root: {0}")]
    NoRoot(String),
    #[error("coefficient at degree {0} is not p-integral")]
    PrecisionGuardExceeded(String),
    #[error("series valuation too low for substitution")]
    ValuationTooLow,
    #[error("p-series vanishes to the working degree")]
    HeightExceedsPrecision,
    #[error("leading p-series term at degree {0} is not a p-power")]
    NonPPowerLeadingTerm(usize),
    #[error("p-series not in normal form at degree {0}")]
    NotNormalForm(usize),
    #[error("normalization obstructed at degree {0}")]
    NormalizationObstructed(usize),
    #[error("unsupported ring map: {0}")]
    UnsupportedMap(String),
    #[error("isomorphism does not lift: {0}")]
    NoLift(String),
    #[error("endomorphism image is not topologically nilpotent")]
    NotTopologicallyNilpotent,
    #[error("endomorphism is not a Frobenius lift")]
    NotFrobeniusLift,
    #[error("ring carries no guard digit")]
    GuardDigitMissing,
    #[error("polynomial is not of Artin-Schreier shape: {0}")]
    BadShape(String),
    #[error("derived relation differs from the expected one: {0}")]
    DerivationMismatch(String),
    #[error("tower level {0} is not etale")]
    EtaleFailure(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
