//! Error type shared by every layer of the engine.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("quotient leaves the admissible fraction shape: {0}")]
    DivisionOutsideRing(String),
    #[error("zeta evaluation at L^{0} does not converge")]
    NonConvergentEvaluation(i64),
    #[error("point-count specialization needs a zeta numerator")]
    MissingZetaData,
    #[error("zeta numerator is inconsistent at q = {q}: {reason}")]
    InconsistentZeta { q: u64, reason: String },
    #[error("exhaustive search of {0} candidates exceeds the budget")]
    BudgetExceeded(u128),
    #[error("rank mismatch: {0}")]
    RankMismatch(String),
    #[error("invalid flag type: {0}")]
    InvalidFlagType(String),
    #[error("invalid weight datum: {0}")]
    InvalidWeights(String),
    #[error("degree search is unbounded: {0}")]
    UnboundedSearch(String),
    #[error("base-case hypothesis violated: {0}")]
    BaseCaseHypothesisViolated(String),
    #[error("weights are not generic at bound N = {0}")]
    NonGenericWeights(u32),
    #[error("stability parameter lies on a wall: {0}")]
    WallHit(String),
    #[error("ray start is itself a wall: {0}")]
    BaseWallHit(String),
    #[error("result is not a polynomial: {0}")]
    NonPolynomialResult(String),
    #[error("half dimension is not an integer")]
    NonIntegerDimension,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("divergent stratum family: {0}")]
    Divergent(String),
}

pub type Result<T> = std::result::Result<T, Error>;
