//! Reduction of call/put quotes to the out-of-the-money normalized form.

use crate::error::IvError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OptionKind {
    Call,
    Put,
}

/// An undiscounted option quote. Discounting is left to the caller.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptionQuote {
    pub kind: OptionKind,
    pub forward: f64,
    pub strike: f64,
    pub price: f64,
    pub expiry: f64,
}

/// Inversion input in normalized coordinates.
///
/// `x = ln(F*/K*) <= 0` with `F* = min(F, K)`, `K* = max(F, K)`, and `c` is the
/// out-of-the-money price divided by `F*`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalizedQuote {
    x: f64,
    ex: f64,
    c: f64,
    lnc: f64,
    t: f64,
}

impl NormalizedQuote {
    /// Builds a quote directly from normalized coordinates.
    pub fn new(x: f64, c: f64, t: f64) -> Result<Self, IvError> {
        if !(x <= 0.0) || !x.is_finite() || !(t > 0.0) || !t.is_finite() {
            return Err(IvError::NonPositiveInput);
        }
        Self::checked(x, x.exp(), c, t)
    }

    fn checked(x: f64, ex: f64, c: f64, t: f64) -> Result<Self, IvError> {
        if !(c > 0.0) {
            return Err(IvError::PriceBelowIntrinsic);
        }
        if c >= 1.0 {
            return Err(IvError::PriceAtOrAboveUpperBound);
        }
        Ok(NormalizedQuote { x, ex, c, lnc: c.ln(), t })
    }

    #[inline]
    pub fn x(&self) -> f64 {
        self.x
    }

    /// `e^x = F*/K*`.
    #[inline]
    pub fn ex(&self) -> f64 {
        self.ex
    }

    #[inline]
    pub fn c(&self) -> f64 {
        self.c
    }

    #[inline]
    pub fn lnc(&self) -> f64 {
        self.lnc
    }

    #[inline]
    pub fn expiry(&self) -> f64 {
        self.t
    }

    /// Price normalized by the geometric mean of forward and strike, `c e^{x/2}`.
    #[inline]
    pub fn beta(&self) -> f64 {
        self.c * (0.5 * self.x).exp()
    }

    /// Absolute log-moneyness `m = -x`.
    #[inline]
    pub fn m(&self) -> f64 {
        -self.x
    }
}

/// Maps a call or put quote to its out-of-the-money normalized form.
///
/// | quote          | OTM price       | `F*` |
/// |----------------|-----------------|------|
/// | call, `F <= K` | `C`             | `F`  |
/// | call, `F > K`  | `C - (F - K)`   | `K`  |
/// | put, `F < K`   | `P - (K - F)`   | `F`  |
/// | put, `F >= K`  | `P`             | `K`  |
pub fn normalize(q: &OptionQuote) -> Result<NormalizedQuote, IvError> {
    let (f, k, t) = (q.forward, q.strike, q.expiry);
    let positive = |v: f64| v > 0.0 && v.is_finite();
    if !positive(f) || !positive(k) || !positive(t) {
        return Err(IvError::NonPositiveInput);
    }
    let otm = match q.kind {
        OptionKind::Call if f > k => q.price - (f - k),
        OptionKind::Put if f < k => q.price - (k - f),
        _ => q.price,
    };
    let (lo, hi) = if f <= k { (f, k) } else { (k, f) };
    let ex = lo / hi;
    NormalizedQuote::checked(ex.ln(), ex, otm / lo, t)
}

/// Annualized volatility from total volatility, `sigma = v / sqrt(T)`.
#[inline]
pub fn denormalize(v: f64, t: f64) -> f64 {
    v / t.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quote(kind: OptionKind, forward: f64, strike: f64, price: f64) -> OptionQuote {
        OptionQuote { kind, forward, strike, price, expiry: 1.0 }
    }

    #[test]
    fn itm_call_uses_parity() {
        let n = normalize(&quote(OptionKind::Call, 110.0, 100.0, 14.0)).unwrap();
        assert_eq!(n.x(), (100.0f64 / 110.0).ln());
        assert!((n.c() - 0.04).abs() < 1e-16);
    }

    #[test]
    fn itm_put_uses_parity() {
        let n = normalize(&quote(OptionKind::Put, 90.0, 100.0, 12.0)).unwrap();
        assert_eq!(n.x(), 0.9f64.ln());
        assert_eq!(n.c(), 2.0 / 90.0);
    }

    #[test]
    fn bounds_are_strict() {
        let e = normalize(&quote(OptionKind::Call, 110.0, 100.0, 10.0));
        assert_eq!(e, Err(IvError::PriceBelowIntrinsic));
        let e = normalize(&quote(OptionKind::Call, 100.0, 120.0, 100.0));
        assert_eq!(e, Err(IvError::PriceAtOrAboveUpperBound));
        let e = normalize(&quote(OptionKind::Put, 100.0, 0.0, 1.0));
        assert_eq!(e, Err(IvError::NonPositiveInput));
    }

    #[test]
    fn denormalize_examples() {
        assert_eq!(denormalize(0.2, 4.0), 0.1);
        assert_eq!(denormalize(0.0, 3.0), 0.0);
        assert_eq!(denormalize(1.5, 0.25), 3.0);
    }
}
