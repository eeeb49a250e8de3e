//! The erfcx-factored log-price and the derivative ratios used by a
//! Householder-3 step.
//!
//! With `h = x/v`, `t = v/2`,
//! `N+ = erfcx(-(h+t)/sqrt2)` and `N- = erfcx(-(h-t)/sqrt2)`:
//!
//! ```text
//! ln c = -(h^2 + t^2)/2 - ln 2 - x/2 + ln(N+ - N-)
//! ```
//!
//! The Gaussian factor is kept in the exponent, so `ln c` stays finite long
//! after `c` itself would underflow.

use crate::error::IvError;
use crate::math::ErfcxTier;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;
const LN_2: f64 = std::f64::consts::LN_2;
/// `2 / sqrt(2 pi)`.
const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;
/// Below this the objective refuses to evaluate.
pub const MIN_VOLATILITY: f64 = 1e-300;

/// `(h, t) = (x/v, v/2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HtCoords {
    pub h: f64,
    pub t: f64,
}

impl HtCoords {
    #[inline(always)]
    pub fn new(x: f64, v: f64) -> Self {
        let h = if x == 0.0 { 0.0 } else { x / v };
        HtCoords { h, t: 0.5 * v }
    }
}

/// Log-price together with the two erfcx values it was built from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogPrice {
    pub lnc: f64,
    pub n_plus: f64,
    pub n_minus: f64,
}

/// Residual `f = ln c(v) - ln c_target` and the ratios `l'`, `l''/l'`, `l'''/l'`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivativeBundle {
    pub f: f64,
    pub lp: f64,
    pub d2: f64,
    pub d3: f64,
}

#[inline(always)]
fn log_price_unchecked(x: f64, v: f64, tier: ErfcxTier) -> (HtCoords, LogPrice) {
    let ht = HtCoords::new(x, v);
    let (h, t) = (ht.h, ht.t);
    let n_plus = tier.eval(-(h + t) * FRAC_1_SQRT_2);
    let n_minus = tier.eval(-(h - t) * FRAC_1_SQRT_2);
    let lnc = -0.5 * (h * h + t * t) - LN_2 - 0.5 * x + (n_plus - n_minus).ln();
    (ht, LogPrice { lnc, n_plus, n_minus })
}

/// Normalized log-price `ln c(x, v)` for `x <= 0`, `v > 0`.
pub fn log_price(x: f64, v: f64, tier: ErfcxTier) -> Result<LogPrice, IvError> {
    if !(v >= MIN_VOLATILITY) {
        return Err(IvError::DegenerateVolatility(v));
    }
    Ok(log_price_unchecked(x, v, tier).1)
}

/// Residual and derivative ratios at `v`. Uses no erfcx evaluations beyond
/// the two inside the log-price.
#[inline(always)]
pub(crate) fn bundle_unchecked(x: f64, v: f64, lnc_target: f64, tier: ErfcxTier) -> DerivativeBundle {
    let (HtCoords { h, t }, lp) = log_price_unchecked(x, v, tier);
    let l1 = SQRT_2_OVER_PI / (lp.n_plus - lp.n_minus);
    let h2 = h * h;
    let t2 = t * t;
    let d2 = (h + t) * (h - t) / v - l1;
    let w = h2 - t2;
    let d3 = (-3.0 * h2 - t2 + w * w) / (v * v) - 3.0 * l1 * d2 - l1 * l1;
    DerivativeBundle { f: lp.lnc - lnc_target, lp: l1, d2, d3 }
}

pub fn derivative_bundle(x: f64, v: f64, lnc_target: f64, tier: ErfcxTier) -> Result<DerivativeBundle, IvError> {
    if !(v >= MIN_VOLATILITY) {
        return Err(IvError::DegenerateVolatility(v));
    }
    Ok(bundle_unchecked(x, v, lnc_target, tier))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_moneyness_has_zero_h() {
        let ht = HtCoords::new(0.0, 1e-320);
        assert_eq!(ht.h, 0.0);
    }

    #[test]
    fn rejects_tiny_volatility() {
        assert!(log_price(-1.0, 1e-301, ErfcxTier::Exact).is_err());
        assert!(log_price(-1.0, 0.0, ErfcxTier::Exact).is_err());
    }

    #[test]
    fn large_volatility_approaches_one() {
        let lp = log_price(-1.0, 50.0, ErfcxTier::Exact).unwrap();
        assert!(lp.lnc.exp() > 0.999, "{}", lp.lnc);
    }
}
