//! Double-double arithmetic.
//!
//! A value is the unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`, giving
//! roughly 106 bits of significand. Only what the oracle needs is provided.

use std::cmp::Ordering;
use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    pub const LN2: Dd = Dd { hi: std::f64::consts::LN_2, lo: 2.3190468138462996e-17 };
    pub const TWO_OVER_SQRT_PI: Dd = Dd { hi: std::f64::consts::FRAC_2_SQRT_PI, lo: 1.533545961316588e-17 };
    pub const SQRT_PI_OVER_2: Dd = Dd { hi: 1.2533141373155003, lo: -9.164289990229583e-17 };
    pub const HALF_LN_2PI: Dd = Dd { hi: 0.9189385332046728, lo: -3.8782941580672414e-17 };
    pub const FRAC_1_SQRT_2: Dd = Dd { hi: std::f64::consts::FRAC_1_SQRT_2, lo: -4.833646656726457e-17 };
    pub const FRAC_1_SQRT_PI: Dd = Dd { hi: 0.5641895835477563, lo: 7.66772980658294e-18 };

    #[inline]
    pub const fn new(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    /// Exact product of two doubles.
    #[inline]
    pub fn mul_f64s(a: f64, b: f64) -> Dd {
        let (hi, lo) = two_prod(a, b);
        Dd { hi, lo }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.hi.is_finite()
    }

    #[inline]
    pub fn abs(self) -> Dd {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn sqr(self) -> Dd {
        self * self
    }

    pub fn mul_pow2(self, s: f64) -> Dd {
        Dd { hi: self.hi * s, lo: self.lo * s }
    }

    pub fn recip(self) -> Dd {
        Dd::ONE / self
    }

    pub fn sqrt(self) -> Dd {
        if self.hi <= 0.0 {
            return Dd::ZERO;
        }
        let s = self.hi.sqrt();
        let r = self - Dd::mul_f64s(s, s);
        Dd::new(s) + Dd::new(r.hi / (2.0 * s))
    }

    /// `e^self - 1`, accurate for small arguments.
    pub fn exp_m1(self) -> Dd {
        if self.hi.abs() > 0.5 {
            return self.exp() - Dd::ONE;
        }
        let r = self.mul_pow2(1.0 / 1024.0);
        // Taylor series of expm1 on |r| < 5e-4
        let mut term = r;
        let mut sum = r;
        for k in 2..=11 {
            term = term * r / (k as f64);
            sum = sum + term;
        }
        // expm1(2y) = 2 expm1(y) + expm1(y)^2
        for _ in 0..10 {
            sum = sum.mul_pow2(2.0) + sum.sqr();
        }
        sum
    }

    pub fn exp(self) -> Dd {
        if self.hi > 709.8 {
            return Dd::new(f64::INFINITY);
        }
        if self.hi < -746.0 {
            return Dd::ZERO;
        }
        let k = (self.hi / Dd::LN2.hi).round();
        let r = self - Dd::LN2 * k;
        let e = Dd::ONE + r.exp_m1();
        // split the scale so that 2^k never overflows on its own
        let k = k as i32;
        let k1 = k / 2;
        let k2 = k - k1;
        e.mul_pow2(2f64.powi(k1)).mul_pow2(2f64.powi(k2))
    }

    pub fn ln(self) -> Dd {
        if self.hi <= 0.0 {
            return Dd::new(if self.hi == 0.0 { f64::NEG_INFINITY } else { f64::NAN });
        }
        let y = Dd::new(self.hi.ln());
        // one Newton step on e^y = self doubles the number of correct bits
        y + self * (-y).exp() - Dd::ONE
    }

    pub fn powi(self, n: u32) -> Dd {
        let mut acc = Dd::ONE;
        let mut base = self;
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base;
            }
            base = base.sqr();
            n >>= 1;
        }
        acc
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Dd {
        Dd::new(x)
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Mul<f64> for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p, e + self.lo * b);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b * q1;
        let q2 = r.hi / b.hi;
        let r = r - b * q2;
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::new(q3)
    }
}

impl Div<f64> for Dd {
    type Output = Dd;
    fn div(self, b: f64) -> Dd {
        self / Dd::new(b)
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Dd) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            o => o,
        }
    }
}
