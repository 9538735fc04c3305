//! `mgflow` command-line interface.
//!
//! Exit codes: 0 success, 1 configuration/usage problems, 2 runtime or
//! numerical failure, 3 classification-expectation mismatch, 4 verification
//! failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use mgflow::artifacts::{classification_str, parse_classification};
use mgflow::config::parse_config;
use mgflow::oracle::{oracle_csv, OracleParams};
use mgflow::runner::{run_scenario, run_sweep, RunOptions, SweepOptions};
use mgflow::verify::{format_line, run_suite, Suite};

#[derive(Parser)]
#[command(
    name = "mgflow",
    version,
    about = "Heat flow for closed curves in a magnetic field on model surfaces",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one scenario and write its artifacts.
    Run {
        /// Scenario JSON file.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides output.directory).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Require this final classification (exit 3 otherwise):
        /// converged_point, converged_nontrivial, diverged, or timeout.
        #[arg(long)]
        expect: Option<String>,
        /// Continue from checkpoint.json in the output directory, if present.
        #[arg(long)]
        resume: bool,
    },
    /// Run one scenario per value of a numeric config field, concurrently.
    Sweep {
        /// Scenario JSON file (the sweep baseline).
        #[arg(long)]
        config: PathBuf,
        /// Dotted path of the numeric field to vary, e.g. field.b0
        #[arg(long)]
        param: String,
        /// Comma-separated values, e.g. 0.5,1.0,2.0
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        /// Sweep root directory (overrides output.directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a closed-form reference solution as CSV.
    Oracle {
        /// One of: torus-mode, torus-drift, sphere-theta, hyperbolic-theta,
        /// latitude-geodesic, plane-circle.
        #[arg(long)]
        case: String,
        #[command(flatten)]
        params: OracleArgs,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the built-in acceptance suite and report one line per criterion.
    Verify {
        /// "fast" or "full" (full adds refinement studies).
        #[arg(long, default_value = "fast")]
        suite: String,
    },
}

/// Flat oracle parameters; each case validates the subset it needs.
#[derive(Args)]
struct OracleArgs {
    /// Mode index (torus-mode).
    #[arg(long)]
    k: Option<i64>,
    /// First mode amplitude (torus-mode).
    #[arg(long)]
    a: Option<f64>,
    /// Second mode amplitude (torus-mode).
    #[arg(long)]
    b: Option<f64>,
    /// Field strength.
    #[arg(long)]
    b0: Option<f64>,
    /// Graph amplitude (torus-drift).
    #[arg(long)]
    mu: Option<f64>,
    /// Initial or stationary latitude angle.
    #[arg(long)]
    theta0: Option<f64>,
    /// Orbit speed (plane-circle).
    #[arg(long)]
    speed: Option<f64>,
    /// Evaluation time for sampled loops (default 0).
    #[arg(long)]
    t: Option<f64>,
    /// Series horizon for the latitude ODE (default 10).
    #[arg(long)]
    t_end: Option<f64>,
    /// Series step for the latitude ODE (default 1e-3).
    #[arg(long)]
    dt: Option<f64>,
    /// Sample count for loop output (default 256).
    #[arg(long)]
    n: Option<usize>,
    /// "sphere" or "hyperbolic" (latitude-geodesic).
    #[arg(long)]
    geometry: Option<String>,
    /// Parameter period for loop output (default 2π).
    #[arg(long)]
    circle_length: Option<f64>,
}

impl From<OracleArgs> for OracleParams {
    fn from(a: OracleArgs) -> Self {
        OracleParams {
            k: a.k,
            a: a.a,
            b: a.b,
            b0: a.b0,
            mu: a.mu,
            theta0: a.theta0,
            speed: a.speed,
            t: a.t,
            t_end: a.t_end,
            dt: a.dt,
            n: a.n,
            geometry: a.geometry,
            circle_length: a.circle_length,
        }
    }
}

/// An error carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

fn config_failure(message: String) -> Failure {
    Failure { code: 1, message }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, message }) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run { config, out, expect, resume } => cmd_run(config, out, expect, resume),
        Command::Sweep { config, param, values, out } => cmd_sweep(config, param, values, out),
        Command::Oracle { case, params, out } => cmd_oracle(case, params.into(), out),
        Command::Verify { suite } => cmd_verify(suite),
    }
}

fn cmd_run(
    config_path: PathBuf,
    out: Option<PathBuf>,
    expect: Option<String>,
    resume: bool,
) -> Result<(), Failure> {
    let config = parse_config(&config_path).map_err(|e| config_failure(e.to_string()))?;
    let expect = match expect {
        Some(name) => Some(parse_classification(&name).ok_or_else(|| {
            config_failure(format!(
                "--expect: unknown classification {name:?} (expected converged_point, \
                 converged_nontrivial, diverged, or timeout)"
            ))
        })?),
        None => None,
    };
    let opts = RunOptions { out_dir: out, expect, resume };
    let (manifest, out_dir) = run_scenario(&config, &opts)
        .map_err(|e| Failure { code: e.exit_code() as u8, message: e.to_string() })?;
    println!(
        "classification: {} (t = {:.6}); artifacts in {}",
        classification_str(manifest.classification),
        manifest.final_summary.time,
        out_dir.display()
    );
    Ok(())
}

fn sweep_threads() -> Result<usize, Failure> {
    let default = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    match std::env::var("MGFLOW_THREADS") {
        Ok(raw) => match raw.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(config_failure(format!(
                "MGFLOW_THREADS: cannot parse {raw:?} as a positive integer"
            ))),
        },
        Err(std::env::VarError::NotPresent) => Ok(default),
        Err(e) => Err(config_failure(format!("MGFLOW_THREADS: {e}"))),
    }
}

fn cmd_sweep(
    config_path: PathBuf,
    param: String,
    values: Vec<String>,
    out: Option<PathBuf>,
) -> Result<(), Failure> {
    let config = parse_config(&config_path).map_err(|e| config_failure(e.to_string()))?;
    let mut parsed = Vec::with_capacity(values.len());
    for raw in &values {
        let value: f64 = raw
            .trim()
            .parse()
            .map_err(|_| config_failure(format!("sweep.values: cannot parse {raw:?} as a number")))?;
        parsed.push(value);
    }
    let opts = SweepOptions { out_dir: out, threads: sweep_threads()? };
    let (cases, summary) = run_sweep(&config, &param, &parsed, &opts)
        .map_err(|e| Failure { code: e.exit_code() as u8, message: e.to_string() })?;
    for case in &cases {
        println!(
            "{param} = {}: {} ({})",
            case.value,
            classification_str(case.manifest.classification),
            case.dir
        );
    }
    println!("summary: {}", summary.display());
    Ok(())
}

fn cmd_oracle(case: String, params: OracleParams, out: Option<PathBuf>) -> Result<(), Failure> {
    let csv = oracle_csv(&case, &params).map_err(config_failure)?;
    match out {
        Some(path) => std::fs::write(&path, csv).map_err(|e| Failure {
            code: 2,
            message: format!("cannot write {}: {e}", path.display()),
        }),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn cmd_verify(suite_name: String) -> Result<(), Failure> {
    let suite = Suite::from_name(&suite_name).ok_or_else(|| {
        config_failure(format!("--suite: expected \"fast\" or \"full\", got {suite_name:?}"))
    })?;
    let results = run_suite(suite);
    for result in &results {
        println!("{}", format_line(result));
    }
    let passed = results.iter().filter(|r| r.pass).count();
    println!("verify ({suite_name}): {passed}/{} criteria passed", results.len());
    if passed == results.len() {
        Ok(())
    } else {
        Err(Failure { code: 4, message: format!("{} criterion(s) failed", results.len() - passed) })
    }
}
