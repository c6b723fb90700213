#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod table;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "dirac-bag", version, about = "Spectra of planar Dirac operators with a large exterior mass")]
#[command(args_override_self = true)]
pub struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Flat key=value file; command-line flags win over its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Worst residual of each projector identity over random normals.
    Identities(commands::IdentitiesArgs),
    /// Internal consistency checks of the Bessel kernels.
    #[command(hide = true)]
    BesselSelftest,
    /// Bag eigenvalues of a disk channel.
    DiskInfty(commands::DiskInftyArgs),
    /// Finite-mass eigenvalues tracked through a list of masses.
    DiskSweep(commands::DiskSweepArgs),
    /// Exact exterior mode against the boundary-layer profile.
    LayerCheck(commands::LayerCheckArgs),
    /// Grid eigenpairs near a shift and their boundary Gram matrix.
    GridSolve(commands::GridSolveArgs),
    /// Fit a sweep CSV in powers of 1/M.
    Fit(commands::FitArgs),
    /// Per-row comparison of a sweep with predicted coefficients.
    Report(commands::ReportArgs),
    /// Run the acceptance checks and print a pass/fail table.
    VerifyAll(commands::VerifyArgs),
}

impl Command {
    fn json_only(&self) -> bool {
        matches!(self, Command::GridSolve(_) | Command::Fit(_))
    }
}

fn parse(argv: &[OsString]) -> Result<Cli, clap::Error> {
    let matches = Cli::command().try_get_matches_from(argv)?;
    Cli::from_arg_matches(&matches)
}

/// Parses `argv`, folding in the config file when one is named.
fn parse_with_config(argv: &[OsString]) -> Result<Result<Cli, clap::Error>, CliError> {
    match config::config_path(argv) {
        Some(path) => Ok(parse(&config::merge(argv, &config::read_entries(&path)?))),
        None => Ok(parse(argv)),
    }
}

/// Clap's message up to the usage block, on one line.
fn one_line(e: &clap::Error) -> String {
    let text = e.to_string();
    let parts: Vec<&str> = text
        .lines()
        .map(str::trim)
        .take_while(|l| !l.starts_with("Usage:") && !l.starts_with("For more information"))
        .filter(|l| !l.is_empty())
        .collect();
    let line = parts.join(" ");
    line.strip_prefix("error: ").unwrap_or(&line).to_string()
}

fn emit(cli: &Cli, bytes: &[u8]) -> Result<(), CliError> {
    match &cli.output {
        Some(path) => std::fs::write(path, bytes)?,
        None => std::io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn run(argv: &[OsString]) -> Result<(), CliError> {
    let cli = match parse_with_config(argv)? {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return Ok(());
            }
            return Err(CliError::Usage(one_line(&e)));
        }
    };
    let format = match (cli.format, cli.command.json_only()) {
        (Some(Format::Csv), true) => {
            return Err(CliError::Usage("this subcommand writes JSON only".into()));
        }
        (Some(f), _) => f,
        (None, true) => Format::Json,
        (None, false) => Format::Csv,
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot set up threads: {e}")))?;
    }
    let out = commands::dispatch(&cli.command, cli.seed, format)?;
    emit(&cli, &out.bytes)?;
    match out.failing {
        Some(what) => Err(CliError::Checks(what)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let argv: Vec<OsString> = std::env::args_os().collect();
    match run(&argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.report());
            ExitCode::from(e.exit_code())
        }
    }
}
