//! The fixed-count solver: seed, one fast-tier Householder-3 step, two
//! exact-tier steps, and a third exact step only when the residual entering
//! the second one is still large. No convergence loop.

use crate::dd::Dd;
use crate::error::IvError;
use crate::math::{erfcx_exact, norm_pdf, ErfcxTier};
use crate::normalization::{denormalize, normalize, NormalizedQuote, OptionQuote};
use crate::objective::bundle_unchecked;
use crate::oracle::black_price_dd;
use crate::seeds::{asym_otm_guess, dispatch_with, upper_price_seed, GuessBranch, LiCoefficients, SEED_FLOOR, UPPER_GUARD};

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;
const LN_2: f64 = std::f64::consts::LN_2;
const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;
const SQRT_PI_OVER_2: f64 = 1.253_314_137_315_500_3;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;
const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

const UPPER_STEPS: usize = 3;
const BACHELIER_STEPS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Polish {
    Off,
    On,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    /// A third exact step runs when `|f|` entering the second exact step is at least this.
    pub safety_threshold: f64,
    /// Prices at or above this go to the complementary branch.
    pub upper_guard: f64,
    pub polish: Polish,
    pub seed_floor: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { safety_threshold: 1e-4, upper_guard: UPPER_GUARD, polish: Polish::Off, seed_floor: SEED_FLOOR }
    }
}

impl SolverConfig {
    pub fn polished() -> Self {
        SolverConfig { polish: Polish::On, ..Self::default() }
    }
}

/// Solution and diagnostics.
///
/// On the main path `fast_steps == 1` and `exact_steps` is 2 or 3. The
/// Bachelier and upper branches report `fast_steps == exact_steps == 0`.
/// `residual` is `|f|` at the input of the last exact step, which is the
/// quantity the safety rule looks at; it is 0 off the main path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverResult {
    pub sigma: f64,
    pub total_vol: f64,
    pub branch: GuessBranch,
    pub fast_steps: u8,
    pub exact_steps: u8,
    pub safety_fired: bool,
    pub residual: f64,
    pub polished: bool,
}

/// One Householder-3 step on `f(v) = ln c(v) - ln c_target`.
///
/// Returns the next iterate and `f` at the input `v`. A zero or non-finite
/// rational denominator falls back to the Newton step `v + eta`; the result
/// is clamped below at `floor`.
#[inline(always)]
pub fn h3_step_with(x: f64, v: f64, lnc_target: f64, tier: ErfcxTier, floor: f64) -> (f64, f64) {
    let b = bundle_unchecked(x, v, lnc_target, tier);
    let eta = -b.f / b.lp;
    let den = 1.0 + b.d2 * eta + b.d3 * eta * eta * (1.0 / 6.0);
    let mut next = v + eta * (1.0 + 0.5 * b.d2 * eta) / den;
    if den == 0.0 || !next.is_finite() {
        next = v + eta;
    }
    (next.max(floor), b.f)
}

#[inline]
pub fn h3_step(x: f64, v: f64, lnc_target: f64, tier: ErfcxTier) -> (f64, f64) {
    h3_step_with(x, v, lnc_target, tier, SEED_FLOOR)
}

/// The fixed chain on a seeded main-path input.
#[inline(always)]
fn main_path(q: &NormalizedQuote, v0: f64, cfg: &SolverConfig) -> (f64, bool, f64) {
    let (x, lnc, floor) = (q.x(), q.lnc(), cfg.seed_floor);
    let (v1, _) = h3_step_with(x, v0, lnc, ErfcxTier::Fast, floor);
    let (v2, _) = h3_step_with(x, v1, lnc, ErfcxTier::Exact, floor);
    let (v3, f2) = h3_step_with(x, v2, lnc, ErfcxTier::Exact, floor);
    if f2.abs() >= cfg.safety_threshold {
        let (v4, f3) = h3_step_with(x, v3, lnc, ErfcxTier::Exact, floor);
        (v4, true, f3.abs())
    } else {
        (v3, false, f2.abs())
    }
}

/// Halley iteration on `g(v) = ln(1 - c(v)) - ln(1 - c)` for prices near 1.
///
/// `1 - c = e^{-d1^2/2} (M+ + M-)/2` with `M+ = erfcx(d1/sqrt2)` and
/// `M- = erfcx(-d2/sqrt2)`, so `1 - c` is never formed by subtraction.
/// Runs exactly three steps from `max(v_seeded, upper_price_seed)`.
pub fn upper_branch(q: &NormalizedQuote, v_seeded: f64) -> f64 {
    let x = q.x();
    // exact for c >= 0.5
    let qt = 1.0 - q.c();
    let ln_qt = qt.ln();
    let mut v = v_seeded.max(upper_price_seed(x, qt)).max(SEED_FLOOR);
    for _ in 0..UPPER_STEPS {
        let h = x / v;
        let t = 0.5 * v;
        let d1 = h + t;
        let d2 = h - t;
        let m = erfcx_exact(d1 * FRAC_1_SQRT_2) + erfcx_exact(-d2 * FRAC_1_SQRT_2);
        let g = -0.5 * d1 * d1 - LN_2 + m.ln() - ln_qt;
        let gp = -SQRT_2_OVER_PI / m;
        let ratio = d1 * d2 / v - gp;
        let eta = -g / gp;
        let mut next = v + eta / (1.0 + 0.5 * ratio * eta);
        if !(next.is_finite() && next > 0.0) {
            next = v + eta;
        }
        v = next.max(SEED_FLOOR);
    }
    v
}

/// `(ln c, sum)` where `c = e^{-x} phi(a) sum_{k>=1} v^k S_k(a)`,
/// `a = -x/v + v/2` and `S_k` are the repeated normal integrals over `phi(a)`.
/// Only meaningful for tiny `v`, where six terms are plenty.
fn bachelier_log_price(x: f64, v: f64) -> (f64, f64) {
    const TERMS: usize = 6;
    let a = -x / v + 0.5 * v;
    let mut s = [0.0; TERMS + 1];
    if a <= 2.0 {
        s[0] = SQRT_PI_OVER_2 * erfcx_exact(a * FRAC_1_SQRT_2);
        let mut prev = 1.0;
        for k in 1..=TERMS {
            let next = (prev - a * s[k - 1]) / k as f64;
            prev = s[k - 1];
            s[k] = next;
        }
    } else {
        // backward ratios r_{k-1} = 1/(a + k r_k) avoid the cancellation in 1 - a S_0
        let top = TERMS + 20 + (400.0 / (a * a)) as usize;
        let mut r = 0.0;
        let mut ratios = [0.0; TERMS + 1];
        for k in (1..=top).rev() {
            r = 1.0 / (a + k as f64 * r);
            if k - 1 <= TERMS {
                ratios[k - 1] = r;
            }
        }
        s[0] = ratios[0];
        for k in 1..=TERMS {
            s[k] = s[k - 1] * ratios[k];
        }
    }
    let mut sum = 0.0;
    for k in (1..=TERMS).rev() {
        sum = (sum + s[k]) * v;
    }
    (-x - 0.5 * a * a - HALF_LN_2PI + sum.ln(), sum)
}

/// Inversion inside the box `c <= 1e-6`, `|x| <= 1e-8`.
///
/// Newton on `ln v` for the series form of the log-price, whose derivative
/// is simply `v / sum`. Seeded from the larger of the at-the-money relation
/// `v ~ sqrt(2 pi) c` and the deep out-of-the-money seed; the step is capped
/// at a factor `e` and the iteration count is fixed.
pub fn bachelier_limit_branch(q: &NormalizedQuote) -> f64 {
    let (x, c, lnc) = (q.x(), q.c(), q.lnc());
    let atm = SQRT_2PI * c;
    let asym = asym_otm_guess(x, lnc).unwrap_or(0.0);
    let mut v = atm.max(asym).max(f64::MIN_POSITIVE);
    for _ in 0..BACHELIER_STEPS {
        let (ell, sum) = bachelier_log_price(x, v);
        let du = (-(ell - lnc) * sum / v).clamp(-1.0, 1.0);
        if !du.is_finite() || du == 0.0 {
            break;
        }
        v *= du.exp();
    }
    v
}

/// One Newton step against the double-double price:
/// `v - (P(v) - c) / phi(d1)`. Returns `v_in` when the vega underflows.
pub fn polish_newton(q: &NormalizedQuote, v_in: f64) -> f64 {
    let x = q.x();
    let d1 = x / v_in + 0.5 * v_in;
    let vega = norm_pdf(d1);
    if vega == 0.0 || !vega.is_finite() {
        return v_in;
    }
    let r = (black_price_dd(x, v_in) - Dd::new(q.c())).to_f64();
    let next = v_in - r / vega;
    if next.is_finite() && next > 0.0 {
        next
    } else {
        v_in
    }
}

/// Full inversion of a normalized quote.
#[inline]
pub fn solve_normalized(q: &NormalizedQuote, cfg: &SolverConfig) -> Result<SolverResult, IvError> {
    solve_normalized_with(q, cfg, LiCoefficients::fitted())
}

pub fn solve_normalized_with(
    q: &NormalizedQuote,
    cfg: &SolverConfig,
    li: &LiCoefficients,
) -> Result<SolverResult, IvError> {
    let (v0, branch) = dispatch_with(q, li, cfg.upper_guard);
    let v0 = v0.max(cfg.seed_floor);
    let mut out = SolverResult {
        sigma: 0.0,
        total_vol: 0.0,
        branch,
        fast_steps: 0,
        exact_steps: 0,
        safety_fired: false,
        residual: 0.0,
        polished: false,
    };
    let v = match branch {
        GuessBranch::BachelierLimit => bachelier_limit_branch(q),
        GuessBranch::UpperPrice => upper_branch(q, v0),
        _ => {
            let (v, fired, residual) = main_path(q, v0, cfg);
            out.fast_steps = 1;
            out.exact_steps = if fired { 3 } else { 2 };
            out.safety_fired = fired;
            out.residual = residual;
            v
        }
    };
    let v = if cfg.polish == Polish::On && q.c() < cfg.upper_guard {
        out.polished = true;
        polish_newton(q, v)
    } else {
        v
    };
    if !(v.is_finite() && v > 0.0) {
        return Err(IvError::DegenerateResult);
    }
    out.total_vol = v;
    out.sigma = denormalize(v, q.expiry());
    Ok(out)
}

/// Normalizes a call or put quote and inverts it.
pub fn solve(quote: &OptionQuote, cfg: &SolverConfig) -> Result<SolverResult, IvError> {
    let q = normalize(quote)?;
    solve_normalized(&q, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn h3_fixed_point() {
        let x = -0.7;
        let v = 0.45;
        let lnc = crate::objective::log_price(x, v, ErfcxTier::Exact).unwrap().lnc;
        let (next, f) = h3_step(x, v, lnc, ErfcxTier::Exact);
        assert_eq!(f, 0.0);
        assert_eq!(next, v);
    }

    #[test]
    fn bachelier_series_matches_atm_closed_form() {
        let v = 1e-6;
        let (ell, _) = bachelier_log_price(0.0, v);
        let exact = 2.0 * crate::math::norm_cdf(0.5 * v) - 1.0;
        // 2 Phi(v/2) - 1 loses about ten digits; compare loosely
        assert!((ell.exp() / exact - 1.0).abs() < 1e-9);
    }
}
