//! Standard normal density, distribution and quantile.

// coefficient tables are kept as published
#![allow(clippy::excessive_precision)]

use super::erfcx::erfcx_exact;
use crate::error::IvError;

pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
pub const SQRT_2PI: f64 = 2.506_628_274_631_000_7;
const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// `exp(-z*z/2)` with the square split to keep tail accuracy.
#[inline]
fn exp_half_neg_sq(z: f64) -> f64 {
    let zs = (z * 16.0).trunc() / 16.0;
    let del = (z - zs) * (z + zs);
    (-0.5 * zs * zs).exp() * (-0.5 * del).exp()
}

#[inline]
pub fn norm_pdf(z: f64) -> f64 {
    FRAC_1_SQRT_2PI * exp_half_neg_sq(z)
}

/// Upper tail `1 - Phi(|z|)`, never suffering cancellation.
#[inline]
fn upper_tail(z: f64) -> f64 {
    let a = z.abs();
    0.5 * exp_half_neg_sq(a) * erfcx_exact(a * FRAC_1_SQRT_2)
}

/// `Phi(z)`, evaluated through erfcx so the lower tail does not underflow early.
#[inline]
pub fn norm_cdf(z: f64) -> f64 {
    let t = upper_tail(z);
    if z < 0.0 {
        t
    } else {
        1.0 - t
    }
}

const A: [f64; 8] = [
    3.387_132_872_796_366_608,
    1.331_416_678_917_843_774_5e2,
    1.971_590_950_306_551_442_7e3,
    1.373_169_376_550_946_112_5e4,
    4.592_195_393_154_987_145_7e4,
    6.726_577_092_700_870_085_3e4,
    3.343_057_558_358_812_810_5e4,
    2.509_080_928_730_122_672_7e3,
];
const B: [f64; 8] = [
    1.0,
    4.231_333_070_160_091_125_2e1,
    6.871_870_074_920_579_083e2,
    5.394_196_021_424_751_107_7e3,
    2.121_379_430_158_659_586_7e4,
    3.930_789_580_009_271_061e4,
    2.872_908_573_572_194_267_4e4,
    5.226_495_278_852_854_561e3,
];
const C: [f64; 8] = [
    1.423_437_110_749_683_577_34,
    4.630_337_846_156_545_295_9,
    5.769_497_221_460_691_405_5,
    3.647_848_324_763_204_605_04,
    1.270_458_252_452_368_382_58,
    2.417_807_251_774_506_117_7e-1,
    2.272_384_498_926_918_458_33e-2,
    7.745_450_142_783_414_076_4e-4,
];
const D: [f64; 8] = [
    1.0,
    2.053_191_626_637_758_821_87,
    1.676_384_830_183_803_849_4,
    6.897_673_349_851_000_045_5e-1,
    1.481_039_764_274_800_745_9e-1,
    1.519_866_656_361_645_719_66e-2,
    5.475_938_084_995_344_946e-4,
    1.050_750_071_644_416_843_24e-9,
];
const E: [f64; 8] = [
    6.657_904_643_501_103_777_2,
    5.463_784_911_164_114_369_9,
    1.784_826_539_917_291_335_8,
    2.965_605_718_285_048_912_3e-1,
    2.653_218_952_657_612_309_3e-2,
    1.242_660_947_388_078_438_6e-3,
    2.711_555_568_743_487_578_15e-5,
    2.010_334_399_292_288_132_65e-7,
];
const F: [f64; 8] = [
    1.0,
    5.998_322_065_558_879_376_9e-1,
    1.369_298_809_227_358_053_1e-1,
    1.487_536_129_085_061_485_25e-2,
    7.868_691_311_456_132_591e-4,
    1.846_318_317_510_054_681_8e-5,
    1.421_511_758_316_445_888_7e-7,
    2.044_263_103_389_939_785_64e-15,
];

#[inline]
fn poly(c: &[f64; 8], r: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * r + k)
}

/// Wichura's AS241 (PPND16) quantile, about 1e-16 relative before refinement.
fn ppnd16(p: f64) -> f64 {
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let r = (-r.ln()).sqrt();
    let x = if r <= 5.0 {
        let r = r - 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        let r = r - 5.0;
        poly(&E, r) / poly(&F, r)
    };
    if q < 0.0 {
        -x
    } else {
        x
    }
}

/// Quantile for `p <= 0.5`, polished by one Halley step on the lower tail.
fn lower_quantile(p: f64) -> f64 {
    let x = ppnd16(p);
    let pdf = norm_pdf(x);
    if pdf == 0.0 {
        return x;
    }
    let u = (norm_cdf(x) - p) / pdf;
    x - u / (1.0 + 0.5 * x * u)
}

/// Inverse of the standard normal distribution function.
///
/// The upper half is computed as `-lower(1 - p)`; since `1 - p` is exact for
/// `p >= 0.5`, `norm_cdf_inv(1 - p) == -norm_cdf_inv(p)` holds bitwise
/// whenever `1 - p` is itself exact.
pub fn norm_cdf_inv(p: f64) -> Result<f64, IvError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(IvError::ProbabilityOutOfRange(p));
    }
    if p <= 0.5 {
        Ok(lower_quantile(p))
    } else {
        Ok(-lower_quantile(1.0 - p))
    }
}
