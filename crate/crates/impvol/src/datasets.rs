//! Deterministic benchmark grids with reference prices from the oracle.
//!
//! Every case stores `v_ref = sigma sqrt(T)` as generated and
//! `c_ref = round(c(x, v_ref))` from the double-double evaluator.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use crate::oracle::black_price_hi;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DatasetName {
    Cly3d,
    Cly20,
    Cly80,
    Jaeckel,
    Market,
    Corners,
    Stress,
    HighVol,
}

impl DatasetName {
    pub const ALL: [DatasetName; 8] = [
        DatasetName::Cly3d,
        DatasetName::Cly20,
        DatasetName::Cly80,
        DatasetName::Jaeckel,
        DatasetName::Market,
        DatasetName::Corners,
        DatasetName::Stress,
        DatasetName::HighVol,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DatasetName::Cly3d => "CLY3D",
            DatasetName::Cly20 => "CLY20",
            DatasetName::Cly80 => "CLY80",
            DatasetName::Jaeckel => "Jaeckel",
            DatasetName::Market => "Market",
            DatasetName::Corners => "Corners",
            DatasetName::Stress => "Stress",
            DatasetName::HighVol => "HighVol",
        }
    }
}

impl fmt::Display for DatasetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DatasetName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase();
        DatasetName::ALL
            .into_iter()
            .find(|d| d.as_str().to_ascii_lowercase() == key)
            .ok_or_else(|| format!("unknown dataset {s:?}"))
    }
}

/// A one-dimensional grid.
#[derive(Clone, Debug, PartialEq)]
pub enum Axis {
    /// `n` evenly spaced points from `a` to `b` inclusive.
    Linear(f64, f64, usize),
    /// `n` log-spaced points from `a` to `b` inclusive.
    Geometric(f64, f64, usize),
    List(Vec<f64>),
}

impl Axis {
    pub fn points(&self) -> Vec<f64> {
        match *self {
            Axis::Linear(a, b, n) => spaced(a, b, n),
            Axis::Geometric(a, b, n) => {
                let mut p: Vec<f64> = spaced(a.ln(), b.ln(), n).into_iter().map(f64::exp).collect();
                p[0] = a;
                p[n - 1] = b;
                p
            }
            Axis::List(ref v) => v.clone(),
        }
    }
}

fn spaced(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let step = (b - a) / (n - 1) as f64;
    (0..n).map(|i| if i == n - 1 { b } else { a + i as f64 * step }).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub enum Moneyness {
    /// Strikes against a fixed forward.
    Strikes { forward: f64, strikes: Axis },
    /// Strike-to-forward ratios.
    Ratio(Axis),
    /// Log-moneyness values, already `<= 0`.
    LogMoneyness(Axis),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Volatility {
    /// Annualized volatility; total volatility is `sigma sqrt(T)`.
    Sigma(Axis),
    /// Total volatility directly.
    Total(Axis),
}

/// Full tensor product of moneyness, expiry and volatility axes.
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    pub moneyness: Moneyness,
    pub expiries: Axis,
    pub vols: Volatility,
}

impl Lattice {
    fn raw(&self) -> Vec<(f64, f64, f64)> {
        let xs: Vec<f64> = match &self.moneyness {
            Moneyness::Strikes { forward, strikes } => {
                strikes.points().into_iter().map(|k| -(forward / k).ln().abs()).collect()
            }
            Moneyness::Ratio(r) => r.points().into_iter().map(|k| -k.ln().abs()).collect(),
            Moneyness::LogMoneyness(a) => a.points(),
        };
        let ts = self.expiries.points();
        let mut out = Vec::new();
        for &x in &xs {
            for &t in &ts {
                match &self.vols {
                    Volatility::Sigma(a) => out.extend(a.points().into_iter().map(|s| (x, t, s * t.sqrt()))),
                    Volatility::Total(a) => out.extend(a.points().into_iter().map(|v| (x, t, v))),
                }
            }
        }
        out
    }
}

/// Grid definition plus the admissible price window.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetSpec {
    pub name: DatasetName,
    pub lattices: Vec<Lattice>,
    /// Cases priced below this are dropped.
    pub price_floor: f64,
    /// Cases priced at or above this are dropped.
    pub price_cap: f64,
    /// Drop cases priced exactly at the floor.
    pub strict_floor: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BenchmarkCase {
    pub dataset: DatasetName,
    pub x: f64,
    pub t: f64,
    pub v_ref: f64,
    pub c_ref: f64,
}

fn lin(a: f64, b: f64, n: usize) -> Axis {
    Axis::Linear(a, b, n)
}

fn geo(a: f64, b: f64, n: usize) -> Axis {
    Axis::Geometric(a, b, n)
}

fn list(v: &[f64]) -> Axis {
    Axis::List(v.to_vec())
}

fn sigma_lattice(moneyness: Moneyness, expiries: Axis, sigmas: Axis) -> Lattice {
    Lattice { moneyness, expiries, vols: Volatility::Sigma(sigmas) }
}

impl DatasetSpec {
    pub fn new(name: DatasetName) -> DatasetSpec {
        use DatasetName::*;
        let cly = |strikes| Moneyness::Strikes { forward: 100.0, strikes };
        let (lattices, price_floor, price_cap, strict_floor) = match name {
            Cly3d => (vec![sigma_lattice(cly(lin(105.0, 800.0, 40)), lin(0.01, 2.0, 40), lin(0.01, 0.99, 40))], 1e-20, 1.0, false),
            Cly20 => (vec![sigma_lattice(cly(lin(105.0, 180.0, 40)), lin(0.1, 2.0, 40), list(&[0.2]))], 0.0, 1.0, true),
            Cly80 => (vec![sigma_lattice(cly(lin(105.0, 800.0, 40)), lin(0.1, 2.0, 40), list(&[0.8]))], 0.0, 1.0, true),
            Jaeckel => (
                vec![sigma_lattice(
                    Moneyness::Ratio(geo(0.5, 8.0, 61)),
                    list(&[0.05, 0.1, 0.25, 0.5, 1.0]),
                    lin(0.05, 4.0, 17),
                )],
                1e-300,
                1.0,
                false,
            ),
            Market => (
                vec![sigma_lattice(Moneyness::Ratio(geo(0.7, 1.5, 31)), geo(1.0 / 252.0, 5.0, 21), lin(0.1, 1.0, 11))],
                1e-300,
                1.0,
                false,
            ),
            Stress => (
                vec![sigma_lattice(Moneyness::Ratio(geo(0.01, 100.0, 26)), geo(0.001, 10.0, 10), geo(0.05, 1.0, 8))],
                1e-300,
                1.0,
                false,
            ),
            HighVol => (
                vec![sigma_lattice(
                    Moneyness::LogMoneyness(lin(-3.0, -6.0, 12)),
                    list(&[0.75, 1.0, 1.25]),
                    lin(1.0, 2.5, 12),
                )],
                0.05,
                0.95,
                true,
            ),
            Corners => (
                vec![
                    // low volatility, short maturity
                    sigma_lattice(
                        Moneyness::Ratio(list(&[0.9, 0.95, 0.98, 0.99, 1.01, 1.02, 1.05, 1.1])),
                        list(&[1.0 / 365.0, 1.0 / 252.0, 1.0 / 52.0, 1.0 / 12.0]),
                        list(&[0.01, 0.02, 0.05, 0.1]),
                    ),
                    // high volatility, deep out of the money
                    sigma_lattice(
                        Moneyness::Ratio(list(&[10.0, 20.0, 50.0, 100.0, 200.0])),
                        list(&[0.5, 1.0, 2.0, 5.0]),
                        list(&[1.0, 1.5, 2.0, 3.0]),
                    ),
                    // near the money, tiny price
                    Lattice {
                        moneyness: Moneyness::LogMoneyness(list(&[-1e-3, -2e-3, -5e-3, -9e-3])),
                        expiries: list(&[1.0 / 12.0]),
                        vols: Volatility::Total(geo(2e-4, 1.2e-3, 15)),
                    },
                    // price close to the upper bound
                    Lattice {
                        moneyness: Moneyness::LogMoneyness(list(&[0.0, -0.05, -0.2, -0.5, -1.0])),
                        expiries: list(&[1.0]),
                        vols: Volatility::Total(list(&[5.0, 5.5, 6.0, 6.5, 7.0])),
                    },
                ],
                1e-300,
                1.0,
                false,
            ),
        };
        DatasetSpec { name, lattices, price_floor, price_cap, strict_floor }
    }

    fn admits(&self, c: f64) -> bool {
        let above = if self.strict_floor { c > self.price_floor } else { c >= self.price_floor };
        above && c > 0.0 && c < self.price_cap && c < 1.0
    }
}

/// Prices every lattice point and keeps those inside the price window,
/// ordered by `x` then `v_ref`.
pub fn build_dataset(spec: &DatasetSpec) -> Vec<BenchmarkCase> {
    let mut out: Vec<BenchmarkCase> = spec
        .lattices
        .iter()
        .flat_map(Lattice::raw)
        .filter(|&(_, _, v)| v > 0.0)
        .filter_map(|(x, t, v)| {
            let c = black_price_hi(x, v);
            spec.admits(c).then_some(BenchmarkCase { dataset: spec.name, x, t, v_ref: v, c_ref: c })
        })
        .collect();
    out.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.v_ref.total_cmp(&b.v_ref)).then(a.t.total_cmp(&b.t)));
    out
}

pub fn build(name: DatasetName) -> Vec<BenchmarkCase> {
    build_dataset(&DatasetSpec::new(name))
}

pub const CSV_HEADER: [&str; 5] = ["dataset", "x", "T", "v_ref", "c_ref"];

/// Writes cases as CSV; floats use the shortest decimal that round-trips.
pub fn write_csv<W: Write>(cases: &[BenchmarkCase], w: W) -> Result<(), csv::Error> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(CSV_HEADER)?;
    for c in cases {
        wtr.write_record([
            c.dataset.as_str().to_string(),
            c.x.to_string(),
            c.t.to_string(),
            c.v_ref.to_string(),
            c.c_ref.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads cases written by [`write_csv`]. The header must match exactly.
pub fn read_csv<R: Read>(r: R) -> Result<Vec<BenchmarkCase>, String> {
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers().map_err(|e| e.to_string())?;
    if header.iter().ne(CSV_HEADER) {
        return Err(format!("unexpected header {header:?}"));
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        let num = |k: usize| -> Result<f64, String> {
            rec[k].parse::<f64>().map_err(|e| format!("row {}: column {}: {e}", i + 1, CSV_HEADER[k]))
        };
        let case = BenchmarkCase { dataset: rec[0].parse()?, x: num(1)?, t: num(2)?, v_ref: num(3)?, c_ref: num(4)? };
        if !(case.c_ref > 0.0 && case.c_ref < 1.0 && case.v_ref > 0.0 && case.x <= 0.0) {
            return Err(format!("row {}: case out of domain", i + 1));
        }
        out.push(case);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_endpoints_are_exact() {
        assert_eq!(lin(105.0, 800.0, 40).points()[39], 800.0);
        let g = geo(0.5, 8.0, 61).points();
        assert_eq!((g[0], g[60]), (0.5, 8.0));
    }

    #[test]
    fn names_parse_loosely() {
        assert_eq!("cly-3d".parse::<DatasetName>().unwrap(), DatasetName::Cly3d);
        assert_eq!("HighVol".parse::<DatasetName>().unwrap(), DatasetName::HighVol);
        assert!("nope".parse::<DatasetName>().is_err());
    }
}
