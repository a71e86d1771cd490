//! `motive`: distance scans, spectra, engine curves and a self-test.

mod commands;
mod config;
mod output;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use motive_core::constants::CODATA;

use crate::commands::Run;
use crate::config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Numerical(String),
    Selftest(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) | Self::Io(_) => 1,
            Self::Numerical(_) => 2,
            Self::Selftest(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Usage(m) => write!(f, "usage error: {m}"),
            Self::Io(m) => write!(f, "i/o error: {m}"),
            Self::Numerical(m) => write!(f, "numerical failure: {m}"),
            Self::Selftest(m) => write!(f, "self-test failed: {m}"),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "motive", version, about = "Near-field motive force, heat transfer and friction between plates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output CSV; the manifest goes to PATH.manifest.json.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
    /// Relative tolerance of the outermost integral.
    #[arg(long, global = true, value_name = "X")]
    rel_tol: Option<f64>,
    /// Built-in configuration: fig3 or dilute-engine.
    #[arg(long, global = true, value_name = "NAME")]
    preset: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// F_y, H and Γ over a log-spaced range of gaps.
    Scan,
    /// f(ω), h(ω) and the normalized near-field bound at one gap.
    Spectrum,
    /// Power and efficiency of the dilute engine against velocity.
    Engine,
    /// Fast invariant checks.
    Selftest {
        /// Perturb the constants table to exercise failure reporting.
        #[arg(long, hide = true)]
        corrupt_constants: bool,
    },
}

fn load_config(cli: &Cli, default_preset: &str) -> Result<RunConfig, CliError> {
    let mut cfg = match (&cli.config, &cli.preset) {
        (Some(_), Some(_)) => return Err(CliError::Usage("--config and --preset are mutually exclusive".into())),
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::parse(&text)?
        }
        (None, Some(name)) => RunConfig::preset(name)?,
        (None, None) => RunConfig::preset(default_preset)?,
    };
    if let Some(tol) = cli.rel_tol {
        cfg.quadrature.rel_tol = Some(tol);
    }
    Ok(cfg)
}

fn workers(cli: &Cli, cfg: &RunConfig) -> Result<usize, CliError> {
    let n = cli
        .workers
        .or(cfg.output.workers)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    if n == 0 {
        return Err(CliError::Usage("--workers must be at least 1".into()));
    }
    Ok(n)
}

fn execute(cli: &Cli, flags: &[String]) -> Result<(), CliError> {
    let (name, preset) = match cli.command {
        Command::Scan => ("scan", "fig3"),
        Command::Spectrum => ("spectrum", "fig3"),
        Command::Engine => ("engine", "dilute-engine"),
        Command::Selftest { corrupt_constants } => {
            let consts = if corrupt_constants {
                selftest::corrupted(&CODATA)
            } else {
                CODATA
            };
            let report = selftest::run(&consts);
            for line in report.lines() {
                println!("{line}");
            }
            println!("report sha256 {}", report.hash());
            return if report.passed() {
                Ok(())
            } else {
                Err(CliError::Selftest("one or more checks failed".into()))
            };
        }
    };
    let cfg = load_config(cli, preset)?;
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.output.path.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(format!("motive-{name}.csv")));
    let run = Run {
        config: &cfg,
        flags,
        out: &out,
        workers: workers(cli, &cfg)?,
        consts: CODATA,
    };
    match cli.command {
        Command::Scan => commands::scan(&run),
        Command::Spectrum => commands::spectrum(&run),
        Command::Engine => commands::engine(&run),
        Command::Selftest { .. } => unreachable!(),
    }
}

fn main() -> ExitCode {
    let flags: Vec<String> = std::env::args().skip(1).collect();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(&cli, &flags) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("motive: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
