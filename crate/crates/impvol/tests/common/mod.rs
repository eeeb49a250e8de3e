//! Fixture loading shared by the integration tests.
//!
//! Fixtures are produced by `scripts/gen_fixtures.py`. Every high-precision
//! value is stored as a pair of doubles whose sum carries about 32 digits.

#![allow(dead_code)]

use std::path::PathBuf;

use impvol::dd::Dd;

fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures").join(name)
}

/// All records of a fixture file, header skipped.
pub fn records(name: &str) -> Vec<csv::StringRecord> {
    let mut rdr = csv::Reader::from_path(fixture_path(name)).expect("fixture file");
    rdr.records().map(|r| r.expect("fixture row")).collect()
}

pub fn num(r: &csv::StringRecord, i: usize) -> f64 {
    r[i].parse().expect("numeric field")
}

pub fn pair(r: &csv::StringRecord, i: usize) -> Dd {
    Dd { hi: num(r, i), lo: num(r, i + 1) }
}

pub struct Root {
    pub x: f64,
    pub c: f64,
    pub v: f64,
}

/// A named implied-volatility root from `roots.csv`.
pub fn root(name: &str) -> Root {
    let r = records("roots.csv")
        .into_iter()
        .find(|r| &r[0] == name)
        .unwrap_or_else(|| panic!("no root named {name}"));
    Root { x: num(&r, 1), c: num(&r, 2), v: pair(&r, 3).to_f64() }
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

/// Seeded generator so sampled test grids are reproducible.
pub fn rng(seed: u64) -> rand::rngs::StdRng {
    rand::SeedableRng::seed_from_u64(seed)
}
