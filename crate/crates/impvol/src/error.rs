use thiserror::Error;

/// Error codes shared by normalization, the solver and the oracle.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum IvError {
    #[error("forward, strike and expiry must be positive and finite")]
    NonPositiveInput,
    #[error("price is at or below intrinsic value; no finite positive volatility")]
    PriceBelowIntrinsic,
    #[error("normalized price is at or above its upper bound; volatility is infinite")]
    PriceAtOrAboveUpperBound,
    #[error("probability {0} is outside (0, 1)")]
    ProbabilityOutOfRange(f64),
    #[error("total volatility {0} is below the evaluation floor")]
    DegenerateVolatility(f64),
    #[error("input ({x}, {c}) lies outside the seed's domain")]
    DomainViolation { x: f64, c: f64 },
    #[error("seed guard violated: ln c = {0} must be below -2")]
    GuardViolation(f64),
    #[error("Householder step is not finite")]
    NonFiniteStep,
    #[error("solver produced no usable volatility")]
    DegenerateResult,
    #[error("price {0} is not attained by any volatility the oracle can bracket")]
    BracketFailure(f64),
}
