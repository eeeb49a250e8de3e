//! Reference pricing and inversion in double-double arithmetic.
//!
//! Used to build datasets, to score the solver, and as the price source for
//! the polishing Newton step. Nothing here is on the fast path.

use crate::dd::Dd;
use crate::error::IvError;
use crate::math::erfcx_exact;
use crate::objective::bundle_unchecked;
use crate::ErfcxTier;

/// Relative gap `(N+ - N-)/N+` below which the series form replaces the
/// difference of erfcx values.
const SERIES_SWITCH: f64 = 1e-4;
const MAX_SERIES_TERMS: usize = 200;
const V_LO: f64 = 1e-300;
const V_HI_MAX: f64 = 64.0;
const H_MAX: f64 = 1e6;

/// erfcx in double-double, relative error around 1e-30 on finite inputs.
pub fn erfcx_dd(z: Dd) -> Dd {
    if z.hi < 0.0 {
        let e = z.sqr().exp();
        return e.mul_pow2(2.0) - erfcx_dd(-z);
    }
    if z.hi < 2.0 {
        // e^{z^2} - (2/sqrt(pi)) sum 2^n z^{2n+1} / (2n+1)!!
        let z2 = z.sqr();
        let mut term = z;
        let mut sum = z;
        let mut n = 0.0;
        while term.hi > 1e-34 * sum.hi {
            n += 1.0;
            term = term * z2.mul_pow2(2.0) / (2.0 * n + 1.0);
            sum = sum + term;
        }
        return z2.exp() - Dd::TWO_OVER_SQRT_PI * sum;
    }
    // Laplace continued fraction, evaluated from the tail
    let n = 30 + (900.0 / (z.hi * z.hi)) as usize;
    let mut f = z;
    for k in (1..=n).rev() {
        f = z + Dd::new(0.5 * k as f64) / f;
    }
    Dd::FRAC_1_SQRT_PI / f
}

/// `ln sum_{k>=1} v^k S_k(a)` with `S_k = Hh_k(a)/phi(a)`, `Hh_k` the repeated
/// normal integrals, `a >= 0`.
fn ln_hh_series(a: Dd, v: f64) -> Dd {
    let v = Dd::new(v);
    let mut sum = Dd::ZERO;
    if a.hi <= 2.0 {
        // forward recurrence k S_k = S_{k-2} - a S_{k-1} from S_{-1} = 1
        let mut s_prev = Dd::ONE;
        let mut s = Dd::SQRT_PI_OVER_2 * erfcx_dd(a * Dd::FRAC_1_SQRT_2);
        let mut vk = Dd::ONE;
        for k in 1..=MAX_SERIES_TERMS {
            let next = (s_prev - a * s) / k as f64;
            s_prev = s;
            s = next;
            vk = vk * v;
            let term = vk * s;
            sum = sum + term;
            if k > 2 && term.abs().hi < 1e-34 * sum.hi {
                break;
            }
        }
    } else {
        // backward ratios r_k = S_k / S_{k-1} from r_{k-1} = 1 / (a + k r_k)
        let top = MAX_SERIES_TERMS + 30 + (900.0 / (a.hi * a.hi)) as usize;
        let mut r = vec![Dd::ZERO; MAX_SERIES_TERMS + 1];
        let mut rk = Dd::ZERO;
        for k in (1..=top).rev() {
            rk = (a + rk * k as f64).recip();
            if k - 1 <= MAX_SERIES_TERMS {
                r[k - 1] = rk;
            }
        }
        let mut s = r[0];
        let mut vk = Dd::ONE;
        for (k, rk) in r.iter().enumerate().skip(1) {
            s = s * *rk;
            vk = vk * v;
            let term = vk * s;
            sum = sum + term;
            if k > 2 && term.hi < 1e-34 * sum.hi {
                break;
            }
        }
    }
    sum.ln()
}

/// Natural log of the normalized OTM price `c(x, v)`, `x <= 0`, `v > 0`.
///
/// Returns `-inf` once `|x|/v > 1e6`, where `ln c < -5e11`; squaring `h`
/// in double-double would overflow long before `h` itself does.
pub fn ln_black_hi(x: f64, v: f64) -> Dd {
    if !(v > 0.0) {
        return Dd::new(f64::NEG_INFINITY);
    }
    let xd = Dd::new(x);
    let h = xd / Dd::new(v);
    if h.hi.abs() > H_MAX {
        return Dd::new(f64::NEG_INFINITY);
    }
    let t = Dd::new(0.5 * v);
    let zp = -(h + t) * Dd::FRAC_1_SQRT_2;
    let zm = -(h - t) * Dd::FRAC_1_SQRT_2;
    let np = erfcx_exact(zp.hi);
    let nm = erfcx_exact(zm.hi);
    if np - nm >= SERIES_SWITCH * np {
        let d = erfcx_dd(zp) - erfcx_dd(zm);
        -(h.sqr() + t.sqr()).mul_pow2(0.5) - Dd::LN2 - xd.mul_pow2(0.5) + d.ln()
    } else {
        // c = e^{-x} phi(a) sum v^k S_k(a), a = -x/v + v/2
        let a = t - h;
        -xd - a.sqr().mul_pow2(0.5) - Dd::HALF_LN_2PI + ln_hh_series(a, v)
    }
}

/// Normalized OTM price in double-double.
pub fn black_price_dd(x: f64, v: f64) -> Dd {
    ln_black_hi(x, v).exp()
}

/// Normalized OTM price `c(x, v)`, correctly rounded in all but rare ties.
pub fn black_price_hi(x: f64, v: f64) -> f64 {
    black_price_dd(x, v).to_f64()
}

#[inline]
fn next_above(v: f64) -> f64 {
    f64::from_bits(v.to_bits() + 1)
}

/// Bisection on the bit patterns of positive doubles; returns the endpoint
/// whose log-price is closer to `target`.
fn bisect_bits(x: f64, target: Dd, mut lo: f64, mut hi: f64) -> f64 {
    let mut a = lo.to_bits();
    let mut b = hi.to_bits();
    while b - a > 1 {
        let m = a + (b - a) / 2;
        if ln_black_hi(x, f64::from_bits(m)) < target {
            a = m;
        } else {
            b = m;
        }
    }
    lo = f64::from_bits(a);
    hi = f64::from_bits(b);
    let el = (ln_black_hi(x, lo) - target).abs();
    let eh = (ln_black_hi(x, hi) - target).abs();
    if eh < el {
        hi
    } else {
        lo
    }
}

/// Coarse double-precision root used only to narrow the bracket.
fn coarse_root(x: f64, lnc: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..80 {
        let m = 0.5 * (lo + hi);
        if m <= lo || m >= hi {
            break;
        }
        if bundle_unchecked(x, m, lnc, ErfcxTier::Exact).f < 0.0 {
            lo = m;
        } else {
            hi = m;
        }
    }
    0.5 * (lo + hi)
}

/// Reference total volatility for a log-price target given in double-double.
pub fn iv_reference_ln(x: f64, target: Dd) -> Result<f64, IvError> {
    let c = target.hi.exp();
    if !(target.hi < 0.0) || !target.is_finite() || !(ln_black_hi(x, V_LO) <= target) {
        return Err(IvError::BracketFailure(c));
    }
    let mut hi = 1.0;
    while ln_black_hi(x, hi) < target {
        hi *= 2.0;
        if hi > V_HI_MAX {
            return Err(IvError::BracketFailure(c));
        }
    }
    // narrow with the double-precision objective, then confirm in double-double
    let est = coarse_root(x, target.hi, V_LO, hi);
    let (mut lo, mut up) = (est * (1.0 - 1e-9), est * (1.0 + 1e-9));
    if !(ln_black_hi(x, lo) <= target && ln_black_hi(x, up) >= target) {
        lo = V_LO;
        up = hi;
    }
    if lo == up {
        up = next_above(up);
    }
    Ok(bisect_bits(x, target, lo, up))
}

/// Reference total volatility for a double price: the double `v` whose
/// high-accuracy price is closest to `c`.
pub fn iv_reference(x: f64, c: f64) -> Result<f64, IvError> {
    if !(c > 0.0 && c < 1.0) || !(x <= 0.0) {
        return Err(IvError::BracketFailure(c));
    }
    iv_reference_ln(x, Dd::new(c).ln())
}

/// Reference total volatility for a double-double price.
pub fn iv_reference_dd(x: f64, c: Dd) -> Result<f64, IvError> {
    if !(c.hi > 0.0 && c.hi < 1.0) || !(x <= 0.0) {
        return Err(IvError::BracketFailure(c.hi));
    }
    iv_reference_ln(x, c.ln())
}

/// Error in units of the double spacing at `v_ref`.
#[inline]
pub fn ulp_error(v_hat: f64, v_ref: f64) -> f64 {
    (v_hat - v_ref).abs() / (v_ref.next_up() - v_ref)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ulp_error_definition() {
        assert_eq!(ulp_error(0.2, 0.2), 0.0);
        assert_eq!(ulp_error(0.2f64.next_up(), 0.2), 1.0);
    }

    #[test]
    fn series_and_direct_forms_agree_near_switch() {
        // both forms are valid everywhere the direct one does not cancel badly
        for &(x, v) in &[(-1e-4, 1e-3), (-0.5, 0.01), (-3.0, 0.05)] {
            let xd = Dd::new(x);
            let h = xd / Dd::new(v);
            let t = Dd::new(0.5 * v);
            let zp = -(h + t) * Dd::FRAC_1_SQRT_2;
            let zm = -(h - t) * Dd::FRAC_1_SQRT_2;
            let d = erfcx_dd(zp) - erfcx_dd(zm);
            let direct = -(h.sqr() + t.sqr()).mul_pow2(0.5) - Dd::LN2 - xd.mul_pow2(0.5) + d.ln();
            let a = t - h;
            let series = -xd - a.sqr().mul_pow2(0.5) - Dd::HALF_LN_2PI + ln_hh_series(a, v);
            let rel = ((direct - series).abs().hi / series.abs().hi).abs();
            assert!(rel < 1e-24, "x = {x}, v = {v}: {rel:e}");
        }
    }
}
