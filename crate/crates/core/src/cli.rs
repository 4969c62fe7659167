//! The `widelin` command line.
//!
//! Exit codes: 0 on success, 2 for usage, configuration and input errors,
//! 3 for numerical or I/O failures while running.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::check::{format_table, run_checks, Fault};
use crate::config::{split_override, Settings};
use crate::experiments::{run_example1, run_example2, SweepResult, SweepVariable};
use crate::io::{format_h_estimate, read_measurement_csv};
use crate::measurement::{Example2Setup, StatsSource};
use crate::montecarlo::Executor;
use crate::{Error, Result};

pub const OUTPUT_ENV: &str = "WIDELIN_OUTPUT";

#[derive(Debug, Parser)]
#[command(name = "widelin", version, about = "Widely linear estimation experiments and tools")]
pub struct Cli {
    /// Configuration file with `key = value` lines.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Master seed of all random streams.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Monte-Carlo trials per sweep point.
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Worker threads (default: all cores). Does not change results.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output directory (fallback: $WIDELIN_OUTPUT, then the current directory).
    #[arg(long, global = true, value_name = "DIR")]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Sweep {
    /// Magnitude noise variance.
    Mag,
    /// Phase noise variance.
    Phase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Idft,
    Wlls,
    Bwlue,
    Twostep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FaultArg {
    Wlls,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// MSE versus noise improperness for two complex exponentials.
    Example1 {
        /// Setting overrides, e.g. `n_y=30` or `example1.rho_grid=0.1,0.9`.
        #[arg(value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// BMSE of impulse-response estimators versus magnitude or phase noise.
    Example2 {
        #[arg(long, value_enum)]
        sweep: Sweep,
        #[arg(value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Estimate an impulse response from a measurement CSV file.
    Estimate {
        input: PathBuf,
        /// Number of impulse-response taps.
        #[arg(long)]
        nh: usize,
        #[arg(long, value_enum, default_value = "bwlue")]
        method: Method,
    },
    /// Run the invariant self-check.
    Check {
        /// Random instances per relation.
        #[arg(long, default_value_t = 25)]
        instances: usize,
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<FaultArg>,
    },
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Parse { .. } | Error::Validation { .. } | Error::Precondition(_) => 2,
        Error::Dimension(_) => 2,
        Error::Singular { .. } | Error::NotReal { .. } | Error::TrialFailures { .. } | Error::Io(_) => 3,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn settings(cli: &Cli, section: Option<&str>, overrides: &[String]) -> Result<Settings> {
    let mut s = Settings::default();
    if let Some(path) = &cli.config {
        s.apply_file(path)?;
    }
    for o in overrides {
        let (k, v) = split_override(o)?;
        match section {
            Some(sec) => s.set_scoped(sec, k, v)?,
            None => s.set(k, v)?,
        }
    }
    if let Some(seed) = cli.seed {
        s.seed = seed;
    }
    if cli.trials.is_some() {
        s.trials = cli.trials;
    }
    if cli.workers.is_some() {
        s.workers = cli.workers;
    }
    if cli.output.is_some() {
        s.output = cli.output.clone();
    }
    Ok(s)
}

fn output_dir(s: &Settings) -> Result<PathBuf> {
    let dir = s
        .output
        .clone()
        .or_else(|| std::env::var_os(OUTPUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)
        .map_err(|e| Error::Config(format!("cannot create output directory {}: {e}", dir.display())))?;
    Ok(dir)
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn write_sweep(dir: &Path, stem: &str, result: &SweepResult) -> Result<()> {
    write(dir, &format!("{stem}.dat"), &result.to_dat())?;
    write(dir, &format!("{stem}.csv"), &result.to_csv())
}

fn execute(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Example1 { overrides } => {
            let s = settings(cli, Some("example1"), overrides)?;
            let exec = Executor::parallel(s.workers)?;
            let dir = output_dir(&s)?;
            let sweep = s.example1_sweep();
            sweep.validate()?;
            let result = run_example1(&sweep, &s.example1.params, &exec)?;
            write_sweep(&dir, "example1_mse", &result)?;
        }
        Command::Example2 { sweep, overrides } => {
            let s = settings(cli, Some("example2"), overrides)?;
            let exec = Executor::parallel(s.workers)?;
            let dir = output_dir(&s)?;
            let (variable, stem) = match sweep {
                Sweep::Mag => (SweepVariable::SigmaA2, "example2_mag_bmse"),
                Sweep::Phase => (SweepVariable::SigmaPhi2, "example2_phase_bmse"),
            };
            let cfg = s.example2_sweep(variable)?;
            cfg.validate()?;
            s.example2.params.n_white()?;
            let result = run_example2(&cfg, &s.example2.params, &exec)?;
            write_sweep(&dir, stem, &result)?;
        }
        Command::Estimate { input, nh, method } => {
            let s = settings(cli, None, &[])?;
            let dir = output_dir(&s)?;
            let file = read_measurement_csv(input).map_err(|e| match e {
                Error::Io(io) => Error::Config(format!("cannot read {}: {io}", input.display())),
                other => other,
            })?;
            let n_y = file.meas.n_y();
            if *nh == 0 || *nh > 2 * n_y - 1 {
                return Err(Error::Precondition(format!(
                    "--nh {nh} is not identifiable from {n_y} measurements: the real part of {n_y} complex values \
                     and the imaginary part of {} of them give at most 2 N_y - 1 = {} equations",
                    n_y - 1,
                    2 * n_y - 1
                )));
            }
            let setup = Example2Setup::new(*nh, file.sampling_time(), file.noise.clone())?;
            let report = match method {
                Method::Idft => setup.idft(&file.meas),
                Method::Wlls => setup.wlls(&file.meas),
                Method::Bwlue => setup.bwlue(&file.meas, StatsSource::Measurements(&file.meas)),
                Method::Twostep => setup.two_step(&file.meas),
            };
            // any failure past this point is a numerical one
            let report = match report {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {e}");
                    return Ok(3);
                }
            };
            write(&dir, "h_estimate.csv", &format_h_estimate(&report))?;
        }
        Command::Check {
            instances,
            inject_fault,
        } => {
            let s = settings(cli, None, &[])?;
            let fault = inject_fault.map(|f| match f {
                FaultArg::Wlls => Fault::Wlls,
            });
            let outcomes = run_checks(*instances, s.seed, fault);
            print!("{}", format_table(&outcomes));
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            if failed > 0 {
                eprintln!("{failed} check(s) failed");
                return Ok(3);
            }
        }
    }
    Ok(0)
}
