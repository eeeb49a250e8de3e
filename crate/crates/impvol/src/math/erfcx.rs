//! Scaled complementary error function `erfcx(z) = exp(z^2) erfc(z)`.
//!
//! Two tiers: a full-precision evaluation derived from W. J. Cody's CALERF
//! (netlib specfun), and a cheap composite that is good to about 2.5 digits
//! and is only used to promote a seed into the basin of fast convergence.

// coefficient tables are kept as published
#![allow(clippy::excessive_precision)]

/// Which erfcx evaluation an objective call should use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ErfcxTier {
    Fast,
    Exact,
}

impl ErfcxTier {
    #[inline(always)]
    pub fn eval(self, z: f64) -> f64 {
        match self {
            ErfcxTier::Fast => erfcx_fast(z),
            ErfcxTier::Exact => erfcx_exact(z),
        }
    }
}

const A: [f64; 5] = [
    3.1611237438705656,
    113.864154151050156,
    377.485237685302021,
    3209.37758913846947,
    0.185777706184603153,
];
const B: [f64; 4] = [23.6012909523441209, 244.024637934444173, 1282.61652607737228, 2844.23683343917062];
const C: [f64; 9] = [
    0.564188496988670089,
    8.88314979438837594,
    66.1191906371416295,
    298.635138197400131,
    881.95222124176909,
    1712.04761263407058,
    2051.07837782607147,
    1230.33935479799725,
    2.15311535474403846e-8,
];
const D: [f64; 8] = [
    15.7449261107098347,
    117.693950891312499,
    537.181101862009858,
    1621.38957456669019,
    3290.79923573345963,
    4362.61909014324716,
    3439.36767414372164,
    1230.33935480374942,
];
const P: [f64; 6] = [
    0.305326634961232344,
    0.360344899949804439,
    0.125781726111229246,
    0.0160837851487422766,
    6.58749161529837803e-4,
    0.0163153871373020978,
];
const Q: [f64; 5] = [
    2.56852019228982242,
    1.87295284992346047,
    0.527905102951428412,
    0.0605183413124413191,
    0.00233520497626869185,
];

const FRAC_1_SQRT_PI: f64 = 0.56418958354775628695;
const THRESH: f64 = 0.46875;
const XNEG: f64 = -26.628;
const XSMALL: f64 = 1.11e-16;
const XHUGE: f64 = 6.71e7;
const XMAX: f64 = 2.53e307;

/// `exp(y*y)` with the square split so that large `y` keeps full relative accuracy.
#[inline]
fn exp_sq(y: f64) -> f64 {
    let ys = (y * 16.0).trunc() / 16.0;
    let del = (y - ys) * (y + ys);
    (ys * ys).exp() * del.exp()
}

/// Full-precision erfcx.
///
/// Relative error is a few ulps on the whole real line. For `z < -26.628`
/// the true value exceeds the double range and `+inf` is returned.
pub fn erfcx_exact(z: f64) -> f64 {
    let y = z.abs();
    if y <= THRESH {
        let ysq = if y > XSMALL { y * y } else { 0.0 };
        let mut num = A[4] * ysq;
        let mut den = ysq;
        for i in 0..3 {
            num = (num + A[i]) * ysq;
            den = (den + B[i]) * ysq;
        }
        let erf = z * (num + A[3]) / (den + B[3]);
        return (1.0 - erf) * ysq.exp();
    }
    let r = if y <= 4.0 {
        let mut num = C[8] * y;
        let mut den = y;
        for i in 0..7 {
            num = (num + C[i]) * y;
            den = (den + D[i]) * y;
        }
        (num + C[7]) / (den + D[7])
    } else if y >= XMAX {
        0.0
    } else if y >= XHUGE {
        FRAC_1_SQRT_PI / y
    } else {
        let ysq = 1.0 / (y * y);
        let mut num = P[5] * ysq;
        let mut den = ysq;
        for i in 0..4 {
            num = (num + P[i]) * ysq;
            den = (den + Q[i]) * ysq;
        }
        let r = ysq * (num + P[4]) / (den + Q[4]);
        (FRAC_1_SQRT_PI - r) / y
    };
    if z >= 0.0 {
        r
    } else if z < XNEG {
        f64::INFINITY
    } else {
        let e = exp_sq(z);
        e + e - r
    }
}

/// Low-accuracy erfcx: A&S 7.1.26 on `[0, 2.5)`, four-term asymptotic series
/// on `[2.5, inf)`, and the reflection `2 exp(z^2) - erfcx(-z)` below zero.
///
/// Worst relative error is about 2.8e-3, reached at the junction `z = 2.5`.
#[inline]
pub fn erfcx_fast(z: f64) -> f64 {
    if z < 0.0 {
        return 2.0 * (z * z).exp() - erfcx_fast(-z);
    }
    if z >= 2.5 {
        let u = 1.0 / (z * z);
        return FRAC_1_SQRT_PI / z * (1.0 - u * (0.5 - u * (0.75 - u * 1.875)));
    }
    let t = 1.0 / (1.0 + 0.3275911 * z);
    t * (0.254829592 + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))))
}
