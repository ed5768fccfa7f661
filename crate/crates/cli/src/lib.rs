//! Front end for the `pseudoherm` library: spectra, parameter sweeps,
//! trajectories and the invariant suite, written as CSV or JSON tables.

pub mod config;
pub mod evolve;
pub mod output;
pub mod spectrum;
pub mod sweep;
pub mod verify;

use std::fs::File;
use std::io::{BufWriter, Write};

use pseudoherm::casimir::CasimirParams;
use pseudoherm::fock::C64;
use thiserror::Error;

use config::{Format, RunConfig};
use output::{fmt_num, Table};

pub const TOOL: &str = "pseudoherm";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("exceptional point: {0} (pass --allow-ep to proceed)")]
    Singular(String),
    #[error("computation failed: {0}")]
    Runtime(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Singular(_) => 3,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<pseudoherm::error::Error> for CliError {
    fn from(e: pseudoherm::error::Error) -> Self {
        match e {
            pseudoherm::error::Error::InvalidParams(m) => CliError::Config(m),
            pseudoherm::error::Error::ExceptionalPoint { .. } => CliError::Singular(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    Sweep,
    Evolve,
    Verify,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Sweep => "sweep",
            Command::Evolve => "evolve",
            Command::Verify => "verify",
        }
    }

    pub fn default_format(&self) -> Format {
        match self {
            Command::Verify => Format::Json,
            _ => Format::Csv,
        }
    }
}

/// Result of a command: the table to write and the process exit code.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub table: Table,
    pub exit_code: i32,
}

/// Eigenvalue `epsilon_n` of the Schrödinger operator on the branch used by
/// the spectral solver: `-i |Omega| (n + 1/2) / 2` when `Omega` is imaginary.
pub fn level_energy(p: &CasimirParams, n: usize) -> C64 {
    let e = p.big_omega() * 0.5 * (n as f64 + 0.5);
    if p.omega_sq() < 0.0 {
        e.conj()
    } else {
        e
    }
}

/// Metadata shared by every command: tool, version and the parameter echo.
pub fn header(cmd: Command, cfg: &RunConfig, p: &CasimirParams) -> Table {
    let mut t = Table::default();
    t.meta("tool", TOOL).meta("version", VERSION).meta("command", cmd.name());
    for (k, v) in cfg.physics_entries() {
        t.meta(format!("config.{k}"), v);
    }
    t.meta("delta", fmt_num(p.delta()))
        .meta("g", fmt_num(p.g()))
        .meta("omega_sq", fmt_num(p.omega_sq()))
        .meta("regime", p.regime().as_str());
    t
}

pub fn run(cmd: Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cmd {
        Command::Spectrum => spectrum::run(cfg).map(ok),
        Command::Sweep => sweep::run(cfg).map(ok),
        Command::Evolve => evolve::run(cfg).map(ok),
        Command::Verify => verify::run(cfg).map(|r| Outcome {
            exit_code: if r.passed() { 0 } else { 1 },
            table: r.table(),
        }),
    }
}

fn ok(table: Table) -> Outcome {
    Outcome { table, exit_code: 0 }
}

/// Writes to `cfg.out`, or to stdout when no path is set.
pub fn emit(table: &Table, cmd: Command, cfg: &RunConfig) -> Result<(), CliError> {
    let format = cfg.format.unwrap_or(cmd.default_format());
    match &cfg.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            table.write(format, &mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            table.write(format, &mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

pub(crate) fn guard_ep(cfg: &RunConfig, p: &CasimirParams) -> Result<bool, CliError> {
    let at_ep = p.regime() == pseudoherm::symmetry::Regime::ExceptionalPoint;
    if at_ep && !cfg.allow_ep {
        return Err(CliError::Singular(format!(
            "Delta = {} equals 2 g sqrt(alpha beta)",
            p.delta()
        )));
    }
    Ok(at_ep)
}
