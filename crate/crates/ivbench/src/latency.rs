//! Single-threaded timing: ns/call is the minimum over sweeps of the full
//! input list, then the median over independent runs.

use std::fmt::Write as _;
use std::hint::black_box;
use std::io::Write;
use std::time::Instant;

use impvol::math::{erfcx_exact, erfcx_fast};
use impvol::NormalizedQuote;

use crate::registry::Variant;

pub const MIN_SWEEPS: usize = 500;
pub const MIN_RUNS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LatencyConfig {
    pub sweeps: usize,
    pub runs: usize,
}

impl Default for LatencyConfig {
    fn default() -> Self {
        LatencyConfig { sweeps: MIN_SWEEPS, runs: MIN_RUNS }
    }
}

impl LatencyConfig {
    /// Raises both counts to the protocol minimum.
    pub fn at_least_minimum(self) -> Self {
        LatencyConfig { sweeps: self.sweeps.max(MIN_SWEEPS), runs: self.runs.max(MIN_RUNS) }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LatencyReport {
    pub dataset: String,
    pub variant: String,
    pub cases: usize,
    pub ns_per_call: f64,
    pub sweeps: usize,
    pub runs: usize,
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Minimum ns per item over `sweeps` calls of `sweep`.
fn best_sweep(items: usize, sweeps: usize, mut sweep: impl FnMut() -> f64) -> f64 {
    let mut best = f64::INFINITY;
    for _ in 0..sweeps {
        let t0 = Instant::now();
        black_box(sweep());
        let ns = t0.elapsed().as_nanos() as f64 / items as f64;
        best = best.min(ns);
    }
    best
}

fn sweep_solver(variant: &dyn Variant, quotes: &[NormalizedQuote]) -> f64 {
    let mut acc = 0.0;
    for q in black_box(quotes) {
        if let Ok(r) = variant.solve(q) {
            acc += r.total_vol;
        }
    }
    acc
}

/// Times each variant on the same quotes. Runs are interleaved across
/// variants so slow drift in machine state affects them alike.
pub fn measure_variants(
    dataset: &str,
    variants: &[&dyn Variant],
    quotes: &[NormalizedQuote],
    cfg: LatencyConfig,
) -> Vec<LatencyReport> {
    let cfg = cfg.at_least_minimum();
    let n = quotes.len().max(1);
    for v in variants {
        black_box(sweep_solver(*v, quotes));
    }
    let mut per_run = vec![Vec::with_capacity(cfg.runs); variants.len()];
    for _ in 0..cfg.runs {
        for (i, v) in variants.iter().enumerate() {
            per_run[i].push(best_sweep(n, cfg.sweeps, || sweep_solver(*v, quotes)));
        }
    }
    variants
        .iter()
        .zip(per_run)
        .map(|(v, runs)| LatencyReport {
            dataset: dataset.to_string(),
            variant: v.name().to_string(),
            cases: quotes.len(),
            ns_per_call: median(runs),
            sweeps: cfg.sweeps,
            runs: cfg.runs,
        })
        .collect()
}

/// Inputs for the erfcx micro-benchmark, spread over the range the
/// solver evaluates.
pub fn erfcx_inputs(n: usize) -> Vec<f64> {
    (0..n).map(|i| -2.0 + 12.0 * (i as f64 + 0.5) / n as f64).collect()
}

fn sweep_kernel(f: impl Fn(f64) -> f64, zs: &[f64]) -> f64 {
    let mut acc = 0.0;
    for &z in black_box(zs) {
        acc += f(z);
    }
    acc
}

/// `(fast, exact)` ns per erfcx evaluation.
pub fn measure_erfcx(zs: &[f64], cfg: LatencyConfig) -> (LatencyReport, LatencyReport) {
    let cfg = cfg.at_least_minimum();
    let n = zs.len().max(1);
    let (mut fast, mut exact) = (Vec::new(), Vec::new());
    for _ in 0..cfg.runs {
        fast.push(best_sweep(n, cfg.sweeps, || sweep_kernel(erfcx_fast, zs)));
        exact.push(best_sweep(n, cfg.sweeps, || sweep_kernel(erfcx_exact, zs)));
    }
    let report = |name: &str, runs| LatencyReport {
        dataset: "erfcx".to_string(),
        variant: name.to_string(),
        cases: zs.len(),
        ns_per_call: median(runs),
        sweeps: cfg.sweeps,
        runs: cfg.runs,
    };
    (report("erfcx_fast", fast), report("erfcx_exact", exact))
}

pub fn latency_table(reports: &[LatencyReport]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<8} {:<13} {:>6} {:>9} {:>7} {:>5}", "dataset", "variant", "cases", "ns/call", "sweeps", "runs");
    for r in reports {
        let _ = writeln!(
            s,
            "{:<8} {:<13} {:>6} {:>9.1} {:>7} {:>5}",
            r.dataset, r.variant, r.cases, r.ns_per_call, r.sweeps, r.runs
        );
    }
    s
}

pub fn write_latency_csv<W: Write>(reports: &[LatencyReport], w: W) -> Result<(), csv::Error> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["dataset", "variant", "cases", "ns_per_call", "sweeps", "runs"])?;
    for r in reports {
        wtr.write_record([
            r.dataset.clone(),
            r.variant.clone(),
            r.cases.to_string(),
            r.ns_per_call.to_string(),
            r.sweeps.to_string(),
            r.runs.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
