mod common;

use common::{num, pair, records, rel, rng, root};
use impvol::dd::Dd;
use impvol::math::norm_cdf;
use impvol::objective::log_price;
use impvol::oracle::{black_price_dd, black_price_hi, iv_reference, iv_reference_dd, ln_black_hi, ulp_error};
use impvol::{ErfcxTier, IvError};
use rand::Rng;

#[test]
fn price_matches_independent_quadrature() {
    let rows = records("quadrature.csv");
    assert_eq!(rows.len(), 100);
    for r in rows {
        let (x, v) = (num(&r, 0), num(&r, 1));
        let want = pair(&r, 2);
        let got = black_price_dd(x, v);
        let e = ((got - want) / want).abs().hi;
        assert!(e <= 1e-20, "x = {x}, v = {v}: {e:e}");
    }
}

#[test]
fn log_price_matches_multiprecision_table() {
    for r in records("black.csv") {
        let (x, v) = (num(&r, 0), num(&r, 1));
        let want = pair(&r, 2);
        let got = ln_black_hi(x, v);
        let e = (got - want).abs().hi;
        assert!(e <= 1e-25 * want.hi.abs().max(1.0), "x = {x}, v = {v}: {e:e}");
    }
}

#[test]
fn at_the_money_price_is_closed_form() {
    for &v in &[1e-3, 0.05, 0.2, 1.0, 3.0] {
        let want = 2.0 * norm_cdf(0.5 * v) - 1.0;
        assert!(rel(black_price_hi(0.0, v), want) <= 4.0 * f64::EPSILON / want.max(1e-3), "v = {v}");
    }
    let r = root("atm_v0.1");
    assert_eq!(black_price_hi(0.0, 0.1), r.c);
}

#[test]
fn price_vanishes_monotonically_with_volatility() {
    for &x in &[-1e-6, -0.3, -2.0] {
        let mut prev = Dd::new(f64::MAX);
        for k in 0..200 {
            let v = 2.0 * 0.9f64.powi(k);
            let l = ln_black_hi(x, v);
            if prev.hi.is_finite() {
                assert!(l < prev, "x = {x}, v = {v}");
            } else {
                assert_eq!(l.hi, f64::NEG_INFINITY, "x = {x}, v = {v}");
            }
            prev = l;
        }
    }
    assert_eq!(black_price_hi(-1.0, 1e-3), 0.0);
}

#[test]
fn microscopic_volatility_never_yields_nan() {
    for e in -300..-8 {
        let v = 10f64.powi(e);
        let l = ln_black_hi(-1e-8, v);
        assert!(!l.hi.is_nan(), "v = {v:e}");
    }
}

#[test]
fn double_objective_agrees_away_from_cancellation() {
    for i in 0..50 {
        for j in 0..50 {
            let x = -8.0 * i as f64 / 49.0;
            let v = 0.01 + 3.0 * j as f64 / 49.0;
            let hi = ln_black_hi(x, v).to_f64();
            if hi < -690.0 {
                continue;
            }
            let lp = log_price(x, v, ErfcxTier::Exact).unwrap();
            if lp.n_plus / (lp.n_plus - lp.n_minus) > 10.0 {
                continue;
            }
            assert!(rel(lp.lnc.exp(), hi.exp()) <= 5e-13, "x = {x}, v = {v}");
        }
    }
}

#[test]
fn reference_inversion_examples() {
    let c = black_price_hi(-0.7, 0.3);
    assert!(ulp_error(iv_reference(-0.7, c).unwrap(), 0.3) <= 1.0);
    let r = root("atm_v0.2");
    assert!(ulp_error(iv_reference(0.0, r.c).unwrap(), 0.2) <= 1.0);
    for name in ["x-1_c0.01", "x-3_c1e-12", "x-13.8_c1e-30", "x-1e-9_c1e-20", "x-1_q0.005"] {
        let r = root(name);
        assert!(ulp_error(iv_reference(r.x, r.c).unwrap(), r.v) <= 1.0, "{name}");
    }
}

#[test]
fn reference_inversion_is_increasing_in_price() {
    for &x in &[0.0, -0.01, -1.0, -5.0] {
        let mut prev = 0.0;
        for k in 1..400 {
            let c = 10f64.powf(-40.0 * (1.0 - k as f64 / 400.0)) * 0.98;
            let v = iv_reference(x, c).unwrap();
            assert!(v > prev, "x = {x}, c = {c:e}");
            prev = v;
        }
    }
}

#[test]
fn reference_inversion_rejects_unattainable_prices() {
    assert!(matches!(iv_reference(-1.0, 0.0), Err(IvError::BracketFailure(_))));
    assert!(matches!(iv_reference(-1.0, 1.0), Err(IvError::BracketFailure(_))));
    assert!(matches!(iv_reference(0.5, 0.1), Err(IvError::BracketFailure(_))));
    // needs v far beyond the bracket cap
    assert!(matches!(iv_reference(-2000.0, 0.9), Err(IvError::BracketFailure(_))));
}

#[test]
fn identity_in_double_double() {
    let mut g = rng(29);
    for _ in 0..10_000 {
        let x = -10f64.powf(g.gen_range(-9.0..1.0));
        let v = 10f64.powf(g.gen_range(-3.0..0.7));
        let c = black_price_dd(x, v);
        if c.hi < 1e-290 {
            continue;
        }
        let back = iv_reference_dd(x, c).unwrap();
        assert!(ulp_error(back, v) <= 1.0, "x = {x}, v = {v}: {back}");
    }
}

/// Rounding the price to a double moves its root by `ulp(c) / (2 c'(v))`;
/// the identity holds within one ulp of `v` plus that displacement.
#[test]
fn identity_through_rounded_price() {
    let mut g = rng(31);
    let mut exact = 0;
    for _ in 0..10_000 {
        let x = -10f64.powf(g.gen_range(-9.0..1.0));
        let v = 10f64.powf(g.gen_range(-3.0..0.7));
        let c = black_price_hi(x, v);
        if !(c > 1e-290 && c < 1.0) {
            continue;
        }
        let back = iv_reference(x, c).unwrap();
        let slope = (black_price_dd(x, v.next_up()) - black_price_dd(x, v)).to_f64();
        let spread = if slope > 0.0 { 0.5 * (c.next_up() - c) / slope } else { f64::INFINITY };
        let e = ulp_error(back, v);
        assert!(e <= 1.0 + spread, "x = {x}, v = {v}: {e} ulp, spread {spread}");
        if e <= 1.0 {
            exact += 1;
        }
    }
    assert!(exact > 5000, "{exact}");
}

#[test]
fn ulp_error_examples() {
    assert_eq!(ulp_error(0.2, 0.2), 0.0);
    assert_eq!(ulp_error(0.2f64.next_up(), 0.2), 1.0);
    let spacing = 0.2f64.next_up() - 0.2;
    assert!((7.0 * spacing - 1.94e-16).abs() < 1e-18);
    assert_eq!(ulp_error(0.2 + 7.0 * spacing, 0.2), 7.0);
}
