//! Command-line front end: argument parsing, configuration and exit codes.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::constants::Backend;
pub use commands::{verify_suite, Check, CliError, ExportFormat};
pub use config::{ConfigError, JobConfig, Overrides};

/// Environment variable that overrides `--shards`.
pub const THREADS_ENV: &str = "CYCLOSCAN_THREADS";

#[derive(Parser, Debug)]
#[command(name = "cycloscan", version, about = "Cyclicity and exponent statistics of elliptic curves modulo primes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Job configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides [output] dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    shards: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Comma-separated checkpoint list, e.g. `1e4,1e5,1e6`.
    #[arg(long, global = true, value_parser = parse_checkpoints)]
    checkpoints: Option<Checkpoints>,
    #[arg(long = "m-max", global = true)]
    m_max: Option<u64>,
    #[arg(long, global = true)]
    truncation: Option<u64>,
    #[arg(long, global = true, value_enum)]
    backend: Option<BackendArg>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Scan primes up to x_max, writing records and checkpoints.
    Scan {
        /// Stop after this bound, as if interrupted.
        #[arg(long = "halt-at", hide = true)]
        halt_at: Option<u64>,
    },
    /// Estimate the cyclicity and exponent constants.
    Constants,
    /// Residuals of the dataset against the configured envelopes.
    Compare,
    /// Envelope values on a grid of x; needs no dataset.
    Bounds,
    /// Identity and oracle suite on a fresh scan.
    Verify,
    /// Plot-ready table of x, pi_c, c Li(x), residual and envelope.
    Export {
        #[arg(long, value_enum, default_value = "tsv")]
        format: ExportFormat,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BackendArg {
    Exact,
    Empirical,
    Hybrid,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Exact => Backend::Exact,
            BackendArg::Empirical => Backend::Empirical,
            BackendArg::Hybrid => Backend::Hybrid,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
struct Checkpoints(Vec<u64>);

fn parse_checkpoints(s: &str) -> Result<Checkpoints, String> {
    config::parse_checkpoint_arg(s).map(Checkpoints)
}

fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        },
    }
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let path = cli
        .config
        .ok_or_else(|| CliError::Config("--config PATH is required".into()))?;
    let overrides = Overrides {
        out: cli.out,
        shards: threads_from_env()?.or(cli.shards),
        seed: cli.seed,
        checkpoints: cli.checkpoints.map(|c| c.0),
        m_max: cli.m_max,
        truncation: cli.truncation,
        backend: cli.backend.map(Backend::from),
    };
    let job = JobConfig::load(&path, &overrides)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let lines = match cli.command {
        Command::Scan { halt_at } => commands::cmd_scan(&job, halt_at)?,
        Command::Constants => commands::cmd_constants(&job)?,
        Command::Compare => commands::cmd_compare(&job)?,
        Command::Bounds => commands::cmd_bounds(&job)?,
        Command::Export { format } => commands::cmd_export(&job, format)?,
        Command::Verify => {
            let (lines, failed) = commands::cmd_verify(&job)?;
            emit(out, &lines);
            if failed.is_empty() {
                return Ok(());
            }
            return Err(CliError::Verify(failed.join(", ")));
        }
    };
    emit(out, &lines);
    Ok(())
}

fn emit(out: &mut dyn Write, lines: &[String]) {
    for l in lines {
        let _ = writeln!(out, "{l}");
    }
}

/// Runs the command line `args` (program name first) and returns the exit
/// code. Argument errors exit 2, as clap does.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    match execute(cli, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
