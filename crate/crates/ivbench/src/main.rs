use std::error::Error;
use std::fs::{self, File};
use std::io::{self, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use impvol::datasets::{build, read_csv, write_csv, BenchmarkCase, DatasetName};
use ivbench::criteria::{run_all, write_criteria_csv};
use ivbench::latency::{erfcx_inputs, latency_table, measure_erfcx, measure_variants, write_latency_csv, LatencyConfig};
use ivbench::registry::{Registry, Variant, DEFAULT_VARIANT};
use ivbench::report::{
    accuracy_table, branch_table, evaluate, quote, write_accuracy_csv, write_branch_csv, BranchStats,
};
use ivbench::slices::{slices, write_slices_csv, DEFAULT_XS};

/// Variants timed when `latency` gets no `--variant`. The polished one is
/// opt-in because the double-double step makes each sweep slow.
const DEFAULT_LATENCY: [&str; 2] = ["flashiv", "looped-h3"];

type Result<T> = std::result::Result<T, Box<dyn Error>>;

#[derive(Parser)]
#[command(name = "ivbench", version, about = "Accuracy and latency harness for the impvol solver")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write benchmark datasets as CSV files.
    Gen {
        #[arg(long, default_value = "all")]
        dataset: Vec<String>,
        /// Output directory.
        #[arg(long, default_value = "data")]
        out: PathBuf,
    },
    /// Per-dataset error statistics for one solver variant.
    Accuracy {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value = DEFAULT_VARIANT)]
        variant: String,
        /// Write the machine-readable report here.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Evaluate every acceptance criterion; exit 1 if any fails.
        #[arg(long)]
        assert: bool,
    },
    /// ns/call per variant, plus the erfcx micro-benchmark.
    Latency {
        #[arg(long, default_value = "CLY3D")]
        dataset: String,
        /// Repeatable; defaults to every registered variant.
        #[arg(long)]
        variant: Vec<String>,
        #[arg(long, default_value_t = 500)]
        sweeps: usize,
        #[arg(long, default_value_t = 3)]
        runs: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Seed-branch shares per dataset.
    Branches {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Relative error after each solver stage on fixed-x slices.
    Slices {
        /// Log-moneyness values; repeatable.
        #[arg(long = "x", allow_negative_numbers = true)]
        xs: Vec<f64>,
        #[arg(long, default_value_t = 0.01)]
        v_min: f64,
        #[arg(long, default_value_t = 3.0)]
        v_max: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Input {
    /// Dataset name, `all`, or a CSV file written by `gen`.
    #[arg(long, default_value = "all")]
    dataset: String,
}

fn load(spec: &str) -> Result<Vec<(String, Vec<BenchmarkCase>)>> {
    if spec.eq_ignore_ascii_case("all") {
        return Ok(DatasetName::ALL.iter().map(|&n| (n.to_string(), build(n))).collect());
    }
    if let Ok(name) = spec.parse::<DatasetName>() {
        if !Path::new(spec).exists() {
            return Ok(vec![(name.to_string(), build(name))]);
        }
    }
    let cases = read_csv(File::open(spec)?).map_err(|e| format!("{spec}: {e}"))?;
    let label = cases.first().map_or_else(|| spec.to_string(), |c| c.dataset.to_string());
    Ok(vec![(label, cases)])
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn gen(names: &[String], out: &Path) -> Result<()> {
    let mut chosen = Vec::new();
    for n in names {
        if n.eq_ignore_ascii_case("all") {
            chosen.extend(DatasetName::ALL);
        } else {
            chosen.push(n.parse::<DatasetName>()?);
        }
    }
    chosen.sort();
    chosen.dedup();
    fs::create_dir_all(out)?;
    for name in chosen {
        let cases = build(name);
        let path = out.join(format!("{name}.csv"));
        write_csv(&cases, create(&path)?)?;
        println!("{}: {} cases", path.display(), cases.len());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    let registry = Registry::builtin();
    match cli.cmd {
        Cmd::Gen { dataset, out } => gen(&dataset, &out)?,
        Cmd::Accuracy { input, variant, csv, assert } => {
            let solver = registry.get(&variant)?;
            let reports: Vec<_> =
                load(&input.dataset)?.iter().map(|(name, cases)| evaluate(name, solver, cases)).collect();
            print!("{}", accuracy_table(&reports));
            if let Some(path) = &csv {
                write_accuracy_csv(&reports, create(path)?)?;
            }
            if assert {
                let criteria = run_all(LatencyConfig::default());
                for c in &criteria {
                    println!("{c}");
                }
                let failed = criteria.iter().filter(|c| !c.passed).count();
                if let Some(path) = &csv {
                    write_criteria_csv(&criteria, create(&path.with_extension("criteria.csv"))?)?;
                }
                println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
                if failed > 0 {
                    return Ok(ExitCode::FAILURE);
                }
            }
        }
        Cmd::Latency { dataset, variant, sweeps, runs, csv } => {
            let names: Vec<String> =
                if variant.is_empty() { DEFAULT_LATENCY.iter().map(|s| s.to_string()).collect() } else { variant };
            let solvers = names.iter().map(|n| registry.get(n)).collect::<std::result::Result<Vec<_>, _>>()?;
            let cfg = LatencyConfig { sweeps, runs }.at_least_minimum();
            let mut reports = Vec::new();
            for (name, cases) in load(&dataset)? {
                let quotes: Vec<_> = cases.iter().map(quote).collect();
                let refs: Vec<&dyn Variant> = solvers.to_vec();
                reports.extend(measure_variants(&name, &refs, &quotes, cfg));
            }
            let (fast, exact) = measure_erfcx(&erfcx_inputs(4096), cfg);
            reports.extend([fast, exact]);
            print!("{}", latency_table(&reports));
            if let Some(path) = &csv {
                write_latency_csv(&reports, create(path)?)?;
            }
        }
        Cmd::Branches { input, csv } => {
            let rows: Vec<_> =
                load(&input.dataset)?.into_iter().map(|(name, cases)| (name, BranchStats::of_cases(&cases))).collect();
            print!("{}", branch_table(&rows));
            if let Some(path) = &csv {
                write_branch_csv(&rows, create(path)?)?;
            }
        }
        Cmd::Slices { xs, v_min, v_max, points, out } => {
            if !(v_min > 0.0 && v_max > v_min) {
                return Err("need 0 < v-min < v-max".into());
            }
            let xs = if xs.is_empty() { DEFAULT_XS.to_vec() } else { xs };
            let rows = slices(&xs, v_min, v_max, points);
            match &out {
                Some(path) => write_slices_csv(&rows, create(path)?)?,
                None => write_slices_csv(&rows, io::stdout().lock())?,
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("ivbench: {e}");
            ExitCode::from(2)
        }
    }
}
