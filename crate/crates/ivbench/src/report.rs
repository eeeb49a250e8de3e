//! Accuracy, branch-share and seed-quality summaries over a case list.

use std::fmt::Write as _;
use std::io::Write;

use impvol::datasets::BenchmarkCase;
use impvol::oracle::ulp_error;
use impvol::seeds::dispatch_guess;
use impvol::{GuessBranch, NormalizedQuote};

use crate::registry::Variant;

pub fn quote(c: &BenchmarkCase) -> NormalizedQuote {
    NormalizedQuote::new(c.x, c.c_ref, c.t).expect("dataset case outside the normalized domain")
}

fn branch_index(b: GuessBranch) -> usize {
    GuessBranch::ALL.iter().position(|&a| a == b).unwrap()
}

/// Counts per dispatch branch, in [`GuessBranch::ALL`] order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BranchStats {
    pub counts: [usize; 6],
}

impl BranchStats {
    pub fn add(&mut self, b: GuessBranch) {
        self.counts[branch_index(b)] += 1;
    }

    pub fn of_cases(cases: &[BenchmarkCase]) -> Self {
        let mut s = BranchStats::default();
        for c in cases {
            s.add(dispatch_guess(&quote(c)).1);
        }
        s
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn share(&self, b: GuessBranch) -> f64 {
        match self.total() {
            0 => 0.0,
            n => self.counts[branch_index(b)] as f64 / n as f64,
        }
    }

    /// The three-way grouping used for published share tables: the
    /// Bachelier and near-ATM seeds count as asymptotic, the upper-price
    /// seed counts as fallback.
    pub fn li(&self) -> f64 {
        self.share(GuessBranch::LiRational)
    }

    pub fn asym(&self) -> f64 {
        self.share(GuessBranch::AsymptoticOtm)
            + self.share(GuessBranch::NearAtmSmallPrice)
            + self.share(GuessBranch::BachelierLimit)
    }

    pub fn fallback(&self) -> f64 {
        self.share(GuessBranch::Fallback) + self.share(GuessBranch::UpperPrice)
    }
}

/// Order statistic at quantile `p` (nearest rank) of sorted data.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let rank = (p * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

#[derive(Clone, Debug, PartialEq)]
pub struct AccuracyReport {
    pub dataset: String,
    pub variant: String,
    pub count: usize,
    /// Cases where the solver returned an error. Their errors count as infinite.
    pub failures: usize,
    pub max_ulp: f64,
    pub mean_ulp: f64,
    pub median_ulp: f64,
    pub p95_ulp: f64,
    pub max_abs: f64,
    pub max_rel: f64,
    pub branches: BranchStats,
    /// Main-path solves whose step counts are not 1 fast + 2 or 3 exact.
    pub step_violations: usize,
    pub main_path: usize,
    pub safety_fired: usize,
    /// Smallest `|x|` among cases where the safety step fired.
    pub safety_min_abs_x: Option<f64>,
}

impl AccuracyReport {
    pub fn safety_rate(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.safety_fired as f64 / self.count as f64
        }
    }
}

struct Outcome {
    ulp: f64,
    abs: f64,
    rel: f64,
    branch: GuessBranch,
    main_path: bool,
    step_ok: bool,
    safety: bool,
    failed: bool,
    x: f64,
}

fn evaluate_one(variant: &dyn Variant, c: &BenchmarkCase) -> Outcome {
    let q = quote(c);
    match variant.solve(&q) {
        Ok(r) => {
            let main = !matches!(r.branch, GuessBranch::BachelierLimit | GuessBranch::UpperPrice);
            let abs = (r.total_vol - c.v_ref).abs();
            Outcome {
                ulp: ulp_error(r.total_vol, c.v_ref),
                abs,
                rel: abs / c.v_ref,
                branch: r.branch,
                main_path: main,
                step_ok: !main || (r.fast_steps == 1 && (r.exact_steps == 2 || r.exact_steps == 3)),
                safety: r.safety_fired,
                failed: false,
                x: c.x,
            }
        }
        Err(_) => Outcome {
            ulp: f64::INFINITY,
            abs: f64::INFINITY,
            rel: f64::INFINITY,
            branch: dispatch_guess(&q).1,
            main_path: false,
            step_ok: false,
            safety: false,
            failed: true,
            x: c.x,
        },
    }
}

/// Solves every case with `variant`, split across the available cores.
pub fn evaluate(dataset: &str, variant: &dyn Variant, cases: &[BenchmarkCase]) -> AccuracyReport {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let chunk = cases.len().div_ceil(threads).max(1);
    let outcomes: Vec<Outcome> = std::thread::scope(|s| {
        let handles: Vec<_> = cases
            .chunks(chunk)
            .map(|part| s.spawn(move || part.iter().map(|c| evaluate_one(variant, c)).collect::<Vec<_>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    });

    let mut ulps: Vec<f64> = outcomes.iter().map(|o| o.ulp).collect();
    ulps.sort_by(f64::total_cmp);
    let mut report = AccuracyReport {
        dataset: dataset.to_string(),
        variant: variant.name().to_string(),
        count: cases.len(),
        failures: outcomes.iter().filter(|o| o.failed).count(),
        max_ulp: ulps.last().copied().unwrap_or(0.0),
        mean_ulp: ulps.iter().sum::<f64>() / ulps.len().max(1) as f64,
        median_ulp: quantile(&ulps, 0.5),
        p95_ulp: quantile(&ulps, 0.95),
        max_abs: outcomes.iter().map(|o| o.abs).fold(0.0, f64::max),
        max_rel: outcomes.iter().map(|o| o.rel).fold(0.0, f64::max),
        branches: BranchStats::default(),
        step_violations: 0,
        main_path: 0,
        safety_fired: 0,
        safety_min_abs_x: None,
    };
    for o in &outcomes {
        report.branches.add(o.branch);
        report.main_path += o.main_path as usize;
        report.step_violations += !o.step_ok as usize;
        if o.safety {
            report.safety_fired += 1;
            let ax = o.x.abs();
            report.safety_min_abs_x = Some(report.safety_min_abs_x.map_or(ax, |m: f64| m.min(ax)));
        }
    }
    report
}

pub fn accuracy_table(reports: &[AccuracyReport]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<8} {:<13} {:>6} {:>9} {:>9} {:>9} {:>9} {:>10} {:>10} {:>8}",
        "dataset", "variant", "cases", "max ulp", "p95 ulp", "med ulp", "mean ulp", "max abs", "max rel", "safety"
    );
    for r in reports {
        let _ = writeln!(
            s,
            "{:<8} {:<13} {:>6} {:>9.0} {:>9.1} {:>9.1} {:>9.2} {:>10.2e} {:>10.2e} {:>7.3}%",
            r.dataset,
            r.variant,
            r.count,
            r.max_ulp,
            r.p95_ulp,
            r.median_ulp,
            r.mean_ulp,
            r.max_abs,
            r.max_rel,
            100.0 * r.safety_rate()
        );
    }
    s
}

pub fn write_accuracy_csv<W: Write>(reports: &[AccuracyReport], w: W) -> Result<(), csv::Error> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record([
        "dataset",
        "variant",
        "count",
        "failures",
        "max_ulp",
        "mean_ulp",
        "median_ulp",
        "p95_ulp",
        "max_abs",
        "max_rel",
        "li",
        "asym",
        "fallback",
        "safety_rate",
    ])?;
    for r in reports {
        wtr.write_record([
            r.dataset.clone(),
            r.variant.clone(),
            r.count.to_string(),
            r.failures.to_string(),
            r.max_ulp.to_string(),
            r.mean_ulp.to_string(),
            r.median_ulp.to_string(),
            r.p95_ulp.to_string(),
            r.max_abs.to_string(),
            r.max_rel.to_string(),
            r.branches.li().to_string(),
            r.branches.asym().to_string(),
            r.branches.fallback().to_string(),
            r.safety_rate().to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn branch_table(rows: &[(String, BranchStats)]) -> String {
    let mut s = String::new();
    let _ = write!(s, "{:<8} {:>6} {:>7} {:>7} {:>8}", "dataset", "cases", "Li%", "Asym%", "Fallbk%");
    for b in GuessBranch::ALL {
        let _ = write!(s, " {:>9}", b.label());
    }
    s.push('\n');
    for (name, st) in rows {
        let _ = write!(
            s,
            "{:<8} {:>6} {:>7.1} {:>7.1} {:>8.1}",
            name,
            st.total(),
            100.0 * st.li(),
            100.0 * st.asym(),
            100.0 * st.fallback()
        );
        for b in GuessBranch::ALL {
            let _ = write!(s, " {:>9.1}", 100.0 * st.share(b));
        }
        s.push('\n');
    }
    s
}

pub fn write_branch_csv<W: Write>(rows: &[(String, BranchStats)], w: W) -> Result<(), csv::Error> {
    let mut wtr = csv::Writer::from_writer(w);
    let mut header = vec!["dataset".to_string(), "count".into(), "li".into(), "asym".into(), "fallback".into()];
    header.extend(GuessBranch::ALL.iter().map(|b| format!("raw_{}", b.label())));
    wtr.write_record(&header)?;
    for (name, st) in rows {
        let mut rec = vec![name.clone(), st.total().to_string(), st.li().to_string(), st.asym().to_string()];
        rec.push(st.fallback().to_string());
        rec.extend(GuessBranch::ALL.iter().map(|&b| st.share(b).to_string()));
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Relative error of the dispatched seed on cases routed to the Li or
/// asymptotic seeds.
#[derive(Clone, Debug, PartialEq)]
pub struct SeedStats {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub p95: f64,
    pub max: f64,
}

pub fn seed_stats<'a>(cases: impl IntoIterator<Item = &'a BenchmarkCase>) -> SeedStats {
    let mut errors: Vec<f64> = cases
        .into_iter()
        .filter_map(|c| match dispatch_guess(&quote(c)) {
            (v0, GuessBranch::LiRational | GuessBranch::AsymptoticOtm) => Some((v0 - c.v_ref).abs() / c.v_ref),
            _ => None,
        })
        .collect();
    errors.sort_by(f64::total_cmp);
    SeedStats {
        count: errors.len(),
        mean: errors.iter().sum::<f64>() / errors.len().max(1) as f64,
        median: quantile(&errors, 0.5),
        p95: quantile(&errors, 0.95),
        max: errors.last().copied().unwrap_or(f64::NAN),
    }
}
