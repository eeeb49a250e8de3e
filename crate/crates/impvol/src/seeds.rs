//! Initial guesses and the first-match dispatch that picks one.

use std::sync::LazyLock;

use crate::error::IvError;
use crate::math::norm_cdf_inv;
use crate::normalization::NormalizedQuote;

const TWO_PI: f64 = std::f64::consts::TAU;
const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Greatest double strictly below 0.99.
pub const UPPER_GUARD: f64 = 0.989_999_999_999_999_9;
pub const SEED_FLOOR: f64 = 1e-10;

pub const BACHELIER_MAX_C: f64 = 1e-6;
pub const BACHELIER_MAX_ABS_X: f64 = 1e-8;
pub const LI_MAX_ABS_X: f64 = 3.0;
pub const LI_MIN_C: f64 = 0.0005;
pub const NEAR_ATM_MAX_ABS_X: f64 = 0.01;
pub const ASYM_MAX_C: f64 = 0.5;
pub const ASYM_MAX_LNC: f64 = -2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GuessBranch {
    BachelierLimit,
    LiRational,
    NearAtmSmallPrice,
    UpperPrice,
    AsymptoticOtm,
    Fallback,
}

impl GuessBranch {
    pub const ALL: [GuessBranch; 6] = [
        GuessBranch::BachelierLimit,
        GuessBranch::LiRational,
        GuessBranch::NearAtmSmallPrice,
        GuessBranch::UpperPrice,
        GuessBranch::AsymptoticOtm,
        GuessBranch::Fallback,
    ];

    pub fn label(self) -> &'static str {
        match self {
            GuessBranch::BachelierLimit => "bachelier",
            GuessBranch::LiRational => "li",
            GuessBranch::NearAtmSmallPrice => "near-atm",
            GuessBranch::UpperPrice => "upper",
            GuessBranch::AsymptoticOtm => "asym",
            GuessBranch::Fallback => "fallback",
        }
    }
}

/// Coefficients of the degree-(3,3) rational `sum m_ij x^i c^j / sum n_ij x^i c^j`.
///
/// Both arrays are ordered `00 01 02 03 10 11 12 20 21 30` (`i` major).
#[derive(Clone, Debug, PartialEq)]
pub struct LiCoefficients {
    pub m: [f64; 10],
    pub n: [f64; 10],
}

static FITTED: LazyLock<LiCoefficients> = LazyLock::new(|| {
    LiCoefficients::parse(include_str!("../data/li_coefficients.txt")).expect("bundled Li coefficients are well formed")
});

impl LiCoefficients {
    /// The coefficients shipped with the crate.
    pub fn fitted() -> &'static LiCoefficients {
        &FITTED
    }

    /// Parses 20 whitespace-separated values; `#` starts a comment.
    pub fn parse(text: &str) -> Result<LiCoefficients, String> {
        let vals = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .flat_map(str::split_whitespace)
            .map(|s| s.parse::<f64>().map_err(|e| format!("{s:?}: {e}")))
            .collect::<Result<Vec<_>, _>>()?;
        if vals.len() != 20 {
            return Err(format!("expected 20 coefficients, found {}", vals.len()));
        }
        let mut m = [0.0; 10];
        let mut n = [0.0; 10];
        m.copy_from_slice(&vals[..10]);
        n.copy_from_slice(&vals[10..]);
        Ok(LiCoefficients { m, n })
    }

    #[inline]
    fn eval(&self, x: f64, c: f64) -> (f64, f64) {
        let (m, n) = (&self.m, &self.n);
        let p0 = m[0] + c * (m[1] + c * (m[2] + c * m[3]));
        let p1 = m[4] + c * (m[5] + c * m[6]);
        let p2 = m[7] + c * m[8];
        let q0 = n[0] + c * (n[1] + c * (n[2] + c * n[3]));
        let q1 = n[4] + c * (n[5] + c * n[6]);
        let q2 = n[7] + c * n[8];
        let num = p0 + x * (p1 + x * (p2 + x * m[9]));
        let den = q0 + x * (q1 + x * (q2 + x * n[9]));
        (num, den)
    }

    /// Denominator of the rational at `(x, c)`.
    pub fn denominator(&self, x: f64, c: f64) -> f64 {
        self.eval(x, c).1
    }
}

#[inline]
fn in_li_domain(x: f64, c: f64) -> bool {
    x.abs() < LI_MAX_ABS_X && c > LI_MIN_C && c < 1.0 - LI_MIN_C
}

/// Rational seed on `|x| < 3`, `0.0005 < c < 0.9995`.
pub fn li_guess(x: f64, c: f64, coeffs: &LiCoefficients) -> Result<f64, IvError> {
    if !in_li_domain(x, c) {
        return Err(IvError::DomainViolation { x, c });
    }
    let (num, den) = coeffs.eval(x, c);
    Ok(num / den)
}

/// Leading-order deep out-of-the-money seed `-2x / (D + sqrt(D^2 - 2x))`,
/// `D = sqrt(-2 ln c - ln 2pi)`, written without the cancelling difference.
#[inline]
pub fn asym_otm_guess(x: f64, lnc: f64) -> Result<f64, IvError> {
    if !(lnc < ASYM_MAX_LNC) {
        return Err(IvError::GuardViolation(lnc));
    }
    Ok(asym_unchecked(x, lnc))
}

#[inline(always)]
fn asym_unchecked(x: f64, lnc: f64) -> f64 {
    let d2 = -2.0 * lnc - LN_2PI;
    let d = d2.sqrt();
    -2.0 * x / (d + (d2 - 2.0 * x).sqrt())
}

/// `sqrt(x^2 + 2 pi c^2)`.
#[inline]
pub fn near_atm_small_price_guess(x: f64, c: f64) -> f64 {
    (x * x + TWO_PI * c * c).sqrt()
}

/// `-2 Phi^{-1}(q / (1 + e^{-x}))` from `1 - c ~ (1 + e^{-x}) Phi(-v/2)` at large `v`.
/// Exact at `x = 0`.
pub fn upper_price_seed(x: f64, q: f64) -> f64 {
    let p = q / (1.0 + (-x).exp());
    match norm_cdf_inv(p) {
        Ok(z) => -2.0 * z,
        Err(_) => SEED_FLOOR,
    }
}

/// `sqrt(2|x|)`, the volatility at which `d1 = 0`, floored.
#[inline]
pub fn fallback_guess(x: f64) -> f64 {
    (2.0 * x.abs()).sqrt().max(SEED_FLOOR)
}

/// Picks the seed by the first matching guard, in this order: Bachelier box,
/// Li rational, near-ATM small price, upper price, asymptotic OTM, fallback.
///
/// The returned seed is already clamped to `SEED_FLOOR`. For the Bachelier
/// and upper branches it is only a placeholder; those branches seed themselves.
#[inline]
pub fn dispatch_guess(q: &NormalizedQuote) -> (f64, GuessBranch) {
    dispatch_with(q, LiCoefficients::fitted(), UPPER_GUARD)
}

/// Dispatch with explicit coefficients and upper-price guard.
#[inline]
pub fn dispatch_with(q: &NormalizedQuote, li: &LiCoefficients, upper_guard: f64) -> (f64, GuessBranch) {
    let (x, c, lnc) = (q.x(), q.c(), q.lnc());
    let ax = x.abs();
    let (v0, branch) = if c <= BACHELIER_MAX_C && ax <= BACHELIER_MAX_ABS_X {
        (fallback_guess(x), GuessBranch::BachelierLimit)
    } else if ax < LI_MAX_ABS_X && c > LI_MIN_C && c < upper_guard {
        let (num, den) = li.eval(x, c);
        (num / den, GuessBranch::LiRational)
    } else if c <= LI_MIN_C && ax < NEAR_ATM_MAX_ABS_X {
        (near_atm_small_price_guess(x, c), GuessBranch::NearAtmSmallPrice)
    } else if c >= upper_guard {
        (fallback_guess(x), GuessBranch::UpperPrice)
    } else if c <= ASYM_MAX_C && lnc < ASYM_MAX_LNC {
        (asym_unchecked(x, lnc), GuessBranch::AsymptoticOtm)
    } else {
        (fallback_guess(x), GuessBranch::Fallback)
    };
    (v0.max(SEED_FLOOR), branch)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn upper_guard_is_next_down() {
        const { assert!(UPPER_GUARD < 0.99) };
        assert_eq!(f64::from_bits(UPPER_GUARD.to_bits() + 1), 0.99);
    }

    #[test]
    fn fitted_coefficients_load() {
        let li = LiCoefficients::fitted();
        assert!((li.n[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn parse_rejects_wrong_count() {
        assert!(LiCoefficients::parse("1 2 3").is_err());
    }
}
