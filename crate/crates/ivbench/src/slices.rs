//! Per-stage errors of the main-path chain on fixed-`x` slices.

use std::io::Write;

use impvol::objective::log_price;
use impvol::oracle::black_price_hi;
use impvol::seeds::{dispatch_guess, SEED_FLOOR};
use impvol::solver::h3_step_with;
use impvol::{ErfcxTier, GuessBranch, NormalizedQuote};

/// Errors below this are written as this.
pub const ERROR_FLOOR: f64 = 1e-18;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

pub const DEFAULT_XS: [f64; 6] = [-0.01, -0.1, -0.5, -1.0, -2.0, -4.0];

#[derive(Clone, Debug, PartialEq)]
pub struct SliceRow {
    pub x: f64,
    pub v_ref: f64,
    pub branch: GuessBranch,
    /// Relative error after the seed, the fast step and each exact step.
    pub stages: [f64; 4],
    /// Relative error in `v` explained by rounding the price to a double
    /// and by evaluating `ln c` in double precision.
    pub noise: f64,
}

impl SliceRow {
    pub fn last(&self) -> f64 {
        self.stages[3]
    }

    /// True when no stage after the fast step increases the error beyond
    /// the rounding noise.
    pub fn settles(&self) -> bool {
        self.stages[2] <= self.stages[1].max(self.noise) && self.stages[3] <= self.stages[2].max(self.noise)
    }
}

/// Stage errors at `(x, v_ref)`, or `None` when the price rounds out of
/// `(0, 1)` or the quote leaves the main path.
pub fn slice_point(x: f64, v_ref: f64) -> Option<SliceRow> {
    let c = black_price_hi(x, v_ref);
    let q = NormalizedQuote::new(x, c, 1.0).ok()?;
    let (v0, branch) = dispatch_guess(&q);
    if matches!(branch, GuessBranch::BachelierLimit | GuessBranch::UpperPrice) {
        return None;
    }
    let lnc = q.lnc();
    let v0 = v0.max(SEED_FLOOR);
    let (v1, _) = h3_step_with(x, v0, lnc, ErfcxTier::Fast, SEED_FLOOR);
    let (v2, _) = h3_step_with(x, v1, lnc, ErfcxTier::Exact, SEED_FLOOR);
    let (v3, _) = h3_step_with(x, v2, lnc, ErfcxTier::Exact, SEED_FLOOR);
    let err = |v: f64| ((v - v_ref).abs() / v_ref).max(ERROR_FLOOR);
    Some(SliceRow { x, v_ref, branch, stages: [err(v0), err(v1), err(v2), err(v3)], noise: noise(x, v_ref, c) })
}

/// `(ulp(c)/c + 4 eps (max(1, |ln c|) + A)) / (v d ln c/dv)`, where
/// `A = (N+ + N-)/(N+ - N-)` amplifies erfcx rounding and
/// `d ln c/dv = phi(d1)/c`.
fn noise(x: f64, v: f64, c: f64) -> f64 {
    let lnc = c.ln();
    let amp = log_price(x, v, ErfcxTier::Exact).map_or(f64::INFINITY, |l| (l.n_plus + l.n_minus) / (l.n_plus - l.n_minus));
    let d1 = x / v + 0.5 * v;
    let ln_phi = -0.5 * d1 * d1 - HALF_LN_2PI;
    let kappa = (lnc - ln_phi).exp() / v;
    ((c.next_up() - c) / c + 4.0 * f64::EPSILON * (lnc.abs().max(1.0) + amp)) * kappa
}

/// `n` log-spaced volatilities in `[v_lo, v_hi]` for each `x`.
pub fn slices(xs: &[f64], v_lo: f64, v_hi: f64, n: usize) -> Vec<SliceRow> {
    let mut rows = Vec::new();
    for &x in xs {
        for i in 0..n {
            let f = if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
            let v = v_lo * (v_hi / v_lo).powf(f);
            rows.extend(slice_point(x, v));
        }
    }
    rows
}

pub fn write_slices_csv<W: Write>(rows: &[SliceRow], w: W) -> Result<(), csv::Error> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["x", "v_ref", "branch", "seed", "fast", "exact1", "exact2", "noise"])?;
    for r in rows {
        let mut rec = vec![r.x.to_string(), r.v_ref.to_string(), r.branch.label().to_string()];
        rec.extend(r.stages.iter().map(|e| format!("{e:e}")));
        rec.push(format!("{:e}", r.noise));
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}
