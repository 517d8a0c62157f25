//! Command-line front end: bound curves as CSV/JSON, analytic work ledgers,
//! and simulation reports.
//!
//! Exit codes: 0 success, 2 invalid arguments, 3 solver non-convergence or
//! internal degeneracy, 4 simulation tolerance failure (the report is still
//! written). Angles are accepted as either θ in radians (`--theta`) or as
//! `--cos-theta`, normalized to θ at the boundary; all downstream code sees
//! radians only.

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::f64::consts::FRAC_PI_2;
use std::ffi::OsString;
use std::io::Write;

use crate::bounds::{self, Accuracy, BoundsError};
use crate::cycle::{self, CycleParams};
use crate::gassim::{self, SimConfig};
use crate::tol;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_COMPUTE: i32 = 3;
pub const EXIT_TOLERANCE: i32 = 4;

#[derive(Parser)]
#[command(
    name = "qsd-thermo",
    version,
    about = "Thermodynamic limits on distinguishing two quantum states: \
             bound curves, work ledgers, and a Monte Carlo cycle simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the accuracy bounds on a uniform cos(theta) grid
    Bounds(BoundsArgs),
    /// Print the analytic per-step work ledger for one cycle
    Ledger(LedgerArgs),
    /// Simulate the cycle and compare against the analytic ledger
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct BoundsArgs {
    /// Lower end of the cos(theta) grid, in [0, 1]
    #[arg(long, default_value_t = 0.0)]
    cos_min: f64,
    /// Upper end of the cos(theta) grid, in [cos-min, 1]
    #[arg(long, default_value_t = 1.0)]
    cos_max: f64,
    /// Number of grid points, at least 2
    #[arg(long, default_value_t = 101)]
    steps: u32,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output path, or "-" for standard output
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args)]
#[command(group(ArgGroup::new("angle").required(true).args(["theta", "cos_theta"])))]
struct LedgerArgs {
    /// Overlap angle theta in radians, in [0, pi/2]
    #[arg(long)]
    theta: Option<f64>,
    /// cos(theta) in [0, 1]; alternative to --theta
    #[arg(long)]
    cos_theta: Option<f64>,
    /// Readout accuracy delta in [0, 1]
    #[arg(long)]
    delta: f64,
    /// Particle count N
    #[arg(long, default_value_t = 1.0)]
    n: f64,
    /// Total cylinder volume V
    #[arg(long, default_value_t = 1.0)]
    v: f64,
    /// Temperature T
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    /// Boltzmann constant k_B
    #[arg(long, default_value_t = 1.0)]
    kb: f64,
    /// Output format (this report is JSON-only)
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output path, or "-" for standard output
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args)]
#[command(group(ArgGroup::new("angle").required(true).args(["theta", "cos_theta"])))]
struct SimulateArgs {
    /// Overlap angle theta in radians, in [0, pi/2]
    #[arg(long)]
    theta: Option<f64>,
    /// cos(theta) in [0, 1]; alternative to --theta
    #[arg(long)]
    cos_theta: Option<f64>,
    /// Readout accuracy delta in [0, 1]
    #[arg(long)]
    delta: f64,
    /// Particle count; sampled mode needs an even integer >= 100
    #[arg(long, default_value_t = 100_000.0)]
    particles: f64,
    /// Quadrature panels per moving wall
    #[arg(long, default_value_t = 4096)]
    substeps: u32,
    /// Number of independent seeds
    #[arg(long, default_value_t = 16)]
    seeds: u32,
    /// First seed; runs use seed-base .. seed-base + seeds
    #[arg(long, default_value_t = 0)]
    seed_base: u64,
    /// Replace all random draws by their expectations (deterministic)
    #[arg(long)]
    exact_counts: bool,
    /// Output format (this report is JSON-only)
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output path, or "-" for standard output
    #[arg(long, default_value = "-")]
    out: String,
}

pub fn run() -> i32 {
    run_from(std::env::args_os())
}

/// Testable entry point; returns the process exit code instead of exiting.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            // clap reserves stdout for --help/--version (success)
            let code = if err.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = err.print();
            return code;
        }
    };
    match cli.command {
        Command::Bounds(args) => cmd_bounds(args),
        Command::Ledger(args) => cmd_ledger(args),
        Command::Simulate(args) => cmd_simulate(args),
    }
}

/// Plain-decimal formatting with 12 significant digits.
fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (11 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

fn write_output(out: &str, content: &str) -> std::io::Result<()> {
    if out == "-" {
        std::io::stdout().lock().write_all(content.as_bytes())
    } else {
        std::fs::write(out, content)
    }
}

fn emit(out: &str, content: &str) -> i32 {
    match write_output(out, content) {
        Ok(()) => EXIT_OK,
        Err(err) => {
            eprintln!("error: cannot write {out}: {err}");
            1
        }
    }
}

fn resolve_theta(theta: Option<f64>, cos_theta: Option<f64>) -> Result<f64, String> {
    match (theta, cos_theta) {
        (Some(t), None) => {
            if (0.0..=FRAC_PI_2).contains(&t) {
                Ok(t)
            } else {
                Err(format!("--theta {t} outside [0, pi/2]"))
            }
        }
        (None, Some(c)) => {
            if (0.0..=1.0).contains(&c) {
                Ok(c.acos())
            } else {
                Err(format!("--cos-theta {c} outside [0, 1]"))
            }
        }
        // unreachable behind the clap ArgGroup, kept as a hard error
        _ => Err("exactly one of --theta / --cos-theta is required".to_string()),
    }
}

#[derive(Serialize)]
struct BoundRow {
    cos_theta: f64,
    delta_th: f64,
    delta_qi: f64,
    delta_hol: f64,
    relative_gap: f64,
}

fn cmd_bounds(args: BoundsArgs) -> i32 {
    let rows = match bounds::bound_table(args.cos_min, args.cos_max, args.steps) {
        Ok(rows) => rows,
        Err(err @ (BoundsError::OutOfDomain { .. } | BoundsError::TooFewSteps(_))) => {
            eprintln!("error: {err}");
            return EXIT_USAGE;
        }
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_COMPUTE;
        }
    };
    let content = match args.format {
        Format::Csv => {
            let mut text = String::from("cos_theta,delta_th,delta_qi,delta_hol,relative_gap\n");
            for (cos_theta, row) in &rows {
                text.push_str(&format!(
                    "{},{},{},{},{}\n",
                    fmt_sig(*cos_theta),
                    fmt_sig(row.delta_th.get()),
                    fmt_sig(row.delta_qi.get()),
                    fmt_sig(row.delta_hol.get()),
                    fmt_sig(row.relative_gap),
                ));
            }
            text
        }
        Format::Json => {
            let rows: Vec<BoundRow> = rows
                .iter()
                .map(|(cos_theta, row)| BoundRow {
                    cos_theta: *cos_theta,
                    delta_th: row.delta_th.get(),
                    delta_qi: row.delta_qi.get(),
                    delta_hol: row.delta_hol.get(),
                    relative_gap: row.relative_gap,
                })
                .collect();
            let mut text = serde_json::to_string_pretty(&rows).expect("plain floats");
            text.push('\n');
            text
        }
    };
    emit(&args.out, &content)
}

#[derive(Serialize)]
struct LedgerReport {
    #[serde(flatten)]
    ledger: cycle::WorkLedger,
    second_law: &'static str,
}

fn cmd_ledger(args: LedgerArgs) -> i32 {
    if args.format == Format::Csv {
        eprintln!("error: the ledger report is JSON-only; csv is for tabular output");
        return EXIT_USAGE;
    }
    let theta = match resolve_theta(args.theta, args.cos_theta) {
        Ok(theta) => theta,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_USAGE;
        }
    };
    let delta = match Accuracy::new(args.delta) {
        Ok(delta) => delta,
        Err(err) => {
            eprintln!("error: --delta: {err}");
            return EXIT_USAGE;
        }
    };
    let params = match CycleParams::new(args.n, args.v, args.t, args.kb, theta, delta) {
        Ok(params) => params,
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_USAGE;
        }
    };
    let ledger = cycle::ledger(&params);
    // the margin band scales with the natural work unit N k_B T
    let band = tol::SECOND_LAW_BAND * params.work_scale();
    let second_law = if ledger.total > band {
        "satisfied"
    } else if ledger.total < -band {
        "violated"
    } else {
        "marginal"
    };
    let mut text = serde_json::to_string_pretty(&LedgerReport { ledger, second_law })
        .expect("plain floats");
    text.push('\n');
    emit(&args.out, &text)
}

fn cmd_simulate(args: SimulateArgs) -> i32 {
    if args.format == Format::Csv {
        eprintln!("error: the simulation report is JSON-only; csv is for tabular output");
        return EXIT_USAGE;
    }
    let theta = match resolve_theta(args.theta, args.cos_theta) {
        Ok(theta) => theta,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_USAGE;
        }
    };
    let delta = match Accuracy::new(args.delta) {
        Ok(delta) => delta,
        Err(err) => {
            eprintln!("error: --delta: {err}");
            return EXIT_USAGE;
        }
    };
    let sampled = !args.exact_counts;
    if sampled && args.particles < 100.0 {
        eprintln!("error: --particles {} below the sampled-mode floor of 100", args.particles);
        return EXIT_USAGE;
    }
    if args.seeds == 0 {
        eprintln!("error: --seeds must be at least 1");
        return EXIT_USAGE;
    }
    let params = match CycleParams::new(args.particles, 1.0, 1.0, 1.0, theta, delta) {
        Ok(params) => params,
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_USAGE;
        }
    };
    let seeds: Vec<u64> = (0..args.seeds).map(|i| args.seed_base.wrapping_add(i as u64)).collect();
    let config = match SimConfig::new(params, args.substeps, seeds, sampled) {
        Ok(config) => config,
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_USAGE;
        }
    };
    let report = match gassim::simulate_cycle(&config) {
        Ok(report) => report,
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_COMPUTE;
        }
    };
    let mut text = serde_json::to_string_pretty(&report).expect("plain floats");
    text.push('\n');
    let code = emit(&args.out, &text);
    if code != EXIT_OK {
        return code;
    }
    if report.passed {
        EXIT_OK
    } else {
        eprintln!("simulation deviations exceed tolerances; see the report");
        EXIT_TOLERANCE
    }
}
