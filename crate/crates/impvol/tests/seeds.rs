mod common;

use common::{rel, root};
use impvol::datasets::{build, DatasetName};
use impvol::math::norm_cdf;
use impvol::oracle::iv_reference;
use impvol::seeds::{
    asym_otm_guess, dispatch_guess, fallback_guess, li_guess, near_atm_small_price_guess, upper_price_seed,
    LiCoefficients, SEED_FLOOR, UPPER_GUARD,
};
use impvol::{GuessBranch, IvError, NormalizedQuote};
use proptest::prelude::*;

fn nq(x: f64, c: f64) -> NormalizedQuote {
    NormalizedQuote::new(x, c, 1.0).unwrap()
}

fn branch(x: f64, c: f64) -> GuessBranch {
    dispatch_guess(&nq(x, c)).1
}

#[test]
fn upper_guard_is_the_double_below_099() {
    assert_eq!(UPPER_GUARD, 0.99f64.next_down());
    const { assert!(UPPER_GUARD < 0.99) };
}

#[test]
fn li_seed_examples() {
    let li = LiCoefficients::fitted();
    let r = root("x0_c0.0797");
    assert!(rel(li_guess(r.x, r.c, li).unwrap(), r.v) <= 0.2);
    assert!(rel(li_guess(0.0, 0.0797, li).unwrap(), 0.2) <= 0.2);
    let r = root("x-1_c0.01");
    assert!(rel(li_guess(r.x, r.c, li).unwrap(), r.v) <= 0.35);
}

#[test]
fn li_seed_refuses_points_outside_its_domain() {
    let li = LiCoefficients::fitted();
    for (x, c) in [(-3.0, 0.1), (-0.5, 0.0005), (-0.5, 0.9995), (-4.0, 0.2)] {
        assert_eq!(li_guess(x, c, li), Err(IvError::DomainViolation { x, c }));
    }
}

#[test]
fn li_denominator_positive_on_domain() {
    let li = LiCoefficients::fitted();
    let n = 100;
    for i in 0..n {
        for j in 0..n {
            let x = -3.0 * (i as f64 + 0.5) / n as f64;
            let c = 0.0005 + 0.999 * (j as f64 + 0.5) / n as f64;
            assert!(li.denominator(x, c) > 0.0, "x = {x}, c = {c}");
        }
    }
}

#[test]
fn li_seed_error_envelope() {
    let li = LiCoefficients::fitted();
    let n = 40;
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let x = -3.0 * (i as f64 + 0.5) / n as f64;
            let c = 0.0005 + 0.999 * (j as f64 + 0.5) / n as f64;
            let v = iv_reference(x, c).unwrap();
            let e = rel(li_guess(x, c, li).unwrap(), v);
            assert!(e <= 0.35, "x = {x}, c = {c}: {e}");
            worst = worst.max(e);
        }
    }
    assert!(worst > 0.0);
}

#[test]
fn coefficient_file_round_trips() {
    let text = include_str!("../data/li_coefficients.txt");
    let parsed = LiCoefficients::parse(text).unwrap();
    assert_eq!(&parsed, LiCoefficients::fitted());
    assert!(LiCoefficients::parse("1 2 3").is_err());
}

#[test]
fn asym_seed_examples() {
    let v = asym_otm_guess(-5.0, 1e-8f64.ln()).unwrap();
    assert!((v - 0.79208).abs() < 1e-4, "{v}");
    assert_eq!(asym_otm_guess(0.0, -10.0).unwrap(), 0.0);
    assert_eq!(asym_otm_guess(-1.0, -2.0), Err(IvError::GuardViolation(-2.0)));
}

#[test]
fn asym_seed_improves_as_price_vanishes() {
    let far = root("x-3_c1e-12");
    let near = root("x-3_c1e-3");
    let e_far = rel(asym_otm_guess(far.x, far.c.ln()).unwrap(), far.v);
    let e_near = rel(asym_otm_guess(near.x, near.c.ln()).unwrap(), near.v);
    assert!(e_far < e_near, "{e_far} vs {e_near}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100_000))]

    #[test]
    fn asym_seed_is_never_nan(x in -50.0f64..=0.0, lnc in -700.0f64..-2.0) {
        let v = asym_otm_guess(x, lnc).unwrap();
        prop_assert!(v.is_finite() && v >= 0.0);
    }
}

#[test]
fn near_atm_seed_examples() {
    let v = near_atm_small_price_guess(0.0, 1e-4);
    assert!((v - 2.5066e-4).abs() < 1e-8);
    let v = near_atm_small_price_guess(-0.005, 1e-6);
    assert!((v - 5.0000e-3).abs() < 1e-7);
    let r = root("x0_c1e-4");
    assert!(rel(near_atm_small_price_guess(r.x, r.c), r.v) <= 0.01);
}

#[test]
fn upper_seed_examples() {
    let v = upper_price_seed(0.0, 0.01);
    assert!((v - 5.1517).abs() < 1e-4, "{v}");
    // exact at the money: 2 Phi(v/2) - 1 = 1 - q
    assert!((2.0 * norm_cdf(0.5 * v) - 1.0 - 0.99).abs() < 1e-14);
    let r = root("x-1_q0.005");
    let v = upper_price_seed(r.x, 1.0 - r.c);
    assert!(v > 0.5 * r.v && v < 2.0 * r.v, "{v} vs {}", r.v);
}

#[test]
fn fallback_seed_examples() {
    assert_eq!(fallback_guess(-2.0), 2.0);
    assert_eq!(fallback_guess(0.0), SEED_FLOOR);
    assert_eq!(fallback_guess(-8.0), 4.0);
}

#[test]
fn dispatch_examples() {
    assert_eq!(branch(-1e-9, 1e-7), GuessBranch::BachelierLimit);
    assert_eq!(branch(-1.0, 0.1), GuessBranch::LiRational);
    assert_eq!(branch(-5.0, 0.05), GuessBranch::AsymptoticOtm);
    assert_eq!(branch(-0.005, 1e-4), GuessBranch::NearAtmSmallPrice);
    assert_eq!(branch(-1.0, 0.995), GuessBranch::UpperPrice);
    assert_eq!(branch(-6.0, 0.3), GuessBranch::Fallback);
}

#[test]
fn dispatch_uses_first_match() {
    // near-ATM small price also meets the asymptotic guard
    let (x, c) = (-0.005, 0.0004f64);
    assert!(c.ln() < -2.0 && c <= 0.5);
    assert_eq!(branch(x, c), GuessBranch::NearAtmSmallPrice);
    // the Bachelier box sits inside the near-ATM region
    assert_eq!(branch(-1e-8, 1e-6), GuessBranch::BachelierLimit);
    assert_eq!(branch(-1.1e-8, 1e-6), GuessBranch::NearAtmSmallPrice);
    assert_eq!(branch(-1e-8, 1.1e-6), GuessBranch::NearAtmSmallPrice);
    // a one-ulp-rounded boundary price goes to the upper branch, not to Li
    assert_eq!(branch(-0.5, UPPER_GUARD), GuessBranch::UpperPrice);
    assert_eq!(branch(-0.5, UPPER_GUARD.next_down()), GuessBranch::LiRational);
    // Li starts strictly above 0.0005
    assert_eq!(branch(-0.5, 0.0005), GuessBranch::AsymptoticOtm);
    assert_eq!(branch(-0.005, 0.0005), GuessBranch::NearAtmSmallPrice);
}

#[test]
fn dispatch_seed_is_floored() {
    for (x, c) in [(0.0, 1e-300), (-1e-9, 1e-20), (0.0, 0.3), (-2.9, 0.6), (-7.0, 0.9)] {
        let (v0, _) = dispatch_guess(&nq(x, c));
        assert!(v0 >= SEED_FLOOR, "x = {x}, c = {c}");
    }
}

#[test]
fn branch_labels_are_distinct() {
    let labels: std::collections::HashSet<_> = GuessBranch::ALL.iter().map(|b| b.label()).collect();
    assert_eq!(labels.len(), GuessBranch::ALL.len());
}

fn shares(name: DatasetName) -> [f64; 6] {
    let cases = build(name);
    let mut counts = [0usize; 6];
    for c in &cases {
        let b = branch(c.x, c.c_ref);
        counts[GuessBranch::ALL.iter().position(|&a| a == b).unwrap()] += 1;
    }
    counts.map(|n| n as f64 / cases.len() as f64)
}

#[test]
fn cly3d_branch_shares() {
    let s = shares(DatasetName::Cly3d);
    let idx = |b: GuessBranch| GuessBranch::ALL.iter().position(|&a| a == b).unwrap();
    assert!((s[idx(GuessBranch::LiRational)] - 0.585).abs() <= 0.05, "{s:?}");
    assert!((s[idx(GuessBranch::AsymptoticOtm)] - 0.415).abs() <= 0.05, "{s:?}");
    assert_eq!(s[idx(GuessBranch::Fallback)], 0.0);
}

#[test]
fn seed_quality_over_all_datasets() {
    let mut errors = Vec::new();
    let mut li_max = 0.0f64;
    for name in DatasetName::ALL {
        for c in build(name) {
            let (v0, b) = dispatch_guess(&nq(c.x, c.c_ref));
            match b {
                GuessBranch::LiRational => {
                    let e = rel(v0, c.v_ref);
                    li_max = li_max.max(e);
                    errors.push(e);
                }
                GuessBranch::AsymptoticOtm => errors.push(rel(v0, c.v_ref)),
                _ => {}
            }
        }
    }
    let mean = errors.iter().sum::<f64>() / errors.len() as f64;
    errors.sort_by(f64::total_cmp);
    let median = errors[errors.len() / 2];
    assert!(mean <= 0.2, "mean {mean}");
    assert!(median <= 0.2, "median {median}");
    assert!(li_max <= 0.5, "li max {li_max}");
}
