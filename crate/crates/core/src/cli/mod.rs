//! Command-line front end.
//!
//! Every subcommand produces one or more [`Table`]s plus a list of internal
//! checks. Tables go to `--out` (or stdout) as CSV or JSON; the process exits
//! with 0 only when everything was written and every check passed.

mod commands;
mod table;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::classical::PotentialKind;
use crate::error::Error;
use crate::quantum::PhysicalParams;
use crate::spectral::DecayLaw;

pub use commands::execute;
pub use table::{Cell, Format, Table};

/// Environment variable that sets log verbosity (`error`, `warn`, `info`, `debug`, `trace`).
pub const LOG_ENV: &str = "BERNOULLI_LOG";

/// Grid points sit at `ε + i(1 - 2ε)/(R - 1)`.
pub const GRID_EPSILON: f64 = 1e-9;

pub const EXIT_NUMERIC: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_CHECK: u8 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "bernoulli",
    version,
    about = "Classical and quantum dynamics on the Bernoulli manifold"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Mass in nerts.
    #[arg(long = "m", global = true, default_value_t = 8.0)]
    pub m: f64,
    /// Spring constant.
    #[arg(long = "k", global = true, default_value_t = 8.0)]
    pub k: f64,
    #[arg(long, global = true, default_value_t = 1.0)]
    pub hbar: f64,
    /// Anchor probability of the potential.
    #[arg(long, global = true, default_value_t = 0.5)]
    pub qprime: f64,
    /// Number of grid points.
    #[arg(long, global = true, default_value_t = 200)]
    pub resolution: usize,
    /// Highest mode or level index (default depends on the command).
    #[arg(long, global = true)]
    pub nmax: Option<u32>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

impl CommonArgs {
    pub fn params(&self) -> Result<PhysicalParams, Error> {
        PhysicalParams::new(self.m, self.k, self.hbar, self.qprime)
    }

    fn nmax_or(&self, default: u32) -> Result<u32, CliError> {
        match self.nmax.unwrap_or(default) {
            0 => Err(CliError::Argument("--nmax must be at least 1".into())),
            n => Ok(n),
        }
    }
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Laplace-Beltrami eigenfunctions Ψₙ on a q-grid.
    Eigenfunctions {
        /// Explicit mode list; defaults to 1..=nmax (nmax defaults to 4).
        #[arg(long, value_delimiter = ',')]
        modes: Vec<u32>,
    },
    /// Green's function columns G(q; q') for several anchors.
    Greens {
        /// Anchors as decimals or fractions.
        #[arg(long, value_delimiter = ',', default_value = "1/3,1/2,2/3")]
        qprimes: Vec<String>,
        /// Use the truncated eigen-series with this many terms instead of the closed form.
        #[arg(long)]
        terms: Option<u32>,
    },
    /// Heat or wave evolution of an initial profile.
    Evolve {
        #[arg(long, value_enum, default_value_t = EvolveKind::Heat)]
        kind: EvolveKind,
        /// Initial expansion coefficients A₁, A₂, ...
        #[arg(long, value_delimiter = ',', conflicts_with = "initial")]
        coeffs: Vec<f64>,
        /// Initial profile: `mode:<n>`, `parabola` (4q(1-q)) or `tent` (Green's function at q').
        #[arg(long)]
        initial: Option<String>,
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "0,0.1,0.5,1",
            allow_negative_numbers = true
        )]
        times: Vec<f64>,
        #[arg(long, value_enum, default_value_t = DecayArg::Consistent)]
        decay: DecayArg,
    },
    /// Free-particle levels by shooting, against ħ²n²/(2m).
    FreeParticle,
    /// Exact and approximate levels of the quadratic-KL oscillator.
    Oscillator {
        /// Where to write the S(π) sample; defaults to `<out>_condition.<ext>`.
        #[arg(long)]
        condition_out: Option<PathBuf>,
    },
    /// Dirichlet levels for a chosen potential by shooting.
    Shoot {
        #[arg(long, value_enum, default_value_t = ShootPotential::KlQuadratic)]
        potential: ShootPotential,
    },
    /// Classical trajectory with energy bookkeeping.
    Trajectory {
        #[arg(long, default_value = "kl_quadratic", value_parser = parse_potential)]
        potential: PotentialKind,
        #[arg(long, default_value_t = 0.6)]
        q0: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        p0: f64,
        #[arg(long, default_value_t = 100.0)]
        t_end: f64,
        /// Sampling interval; every accepted step when omitted.
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long, default_value_t = crate::classical::DEFAULT_TRAJECTORY_TOL)]
        tol: f64,
        /// Also integrate back from the end with reversed momentum.
        #[arg(long)]
        check_reversal: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum EvolveKind {
    Heat,
    Wave,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum DecayArg {
    Consistent,
    Paper,
}

impl From<DecayArg> for DecayLaw {
    fn from(d: DecayArg) -> Self {
        match d {
            DecayArg::Consistent => DecayLaw::Consistent,
            DecayArg::Paper => DecayLaw::Paper,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum ShootPotential {
    Free,
    KlQuadratic,
    Mathieu,
    Geodesic,
    Harmonic,
}

fn parse_potential(s: &str) -> Result<PotentialKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Numeric(#[from] Error),
    #[error("level n = {n}: {source}")]
    Level { n: u32, source: Error },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Numeric(_) | Self::Level { .. } => EXIT_NUMERIC,
            Self::Argument(_) => EXIT_USAGE,
            Self::Io { .. } => EXIT_IO,
        }
    }
}

/// Where a table goes relative to `--out`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Target {
    Main,
    /// `<stem>_<suffix>.<ext>` next to the main file, or an explicit override.
    Sibling {
        suffix: &'static str,
        path: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// What a command produced. `error` may accompany partial tables.
#[derive(Debug, Default)]
pub struct Output {
    pub tables: Vec<(Target, Table)>,
    pub checks: Vec<Check>,
    pub error: Option<CliError>,
}

fn sibling_path(main: &Path, suffix: &str, format: Format) -> PathBuf {
    let stem = main.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = main
        .extension()
        .and_then(|s| s.to_str())
        .unwrap_or(format.extension());
    main.with_file_name(format!("{stem}_{suffix}.{ext}"))
}

fn write_table(table: &Table, format: Format, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        None => table
            .write(format, io::stdout().lock())
            .map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
        Some(p) => {
            let io_err = |source| CliError::Io {
                path: p.display().to_string(),
                source,
            };
            let file = File::create(p).map_err(io_err)?;
            table.write(format, BufWriter::new(file)).map_err(io_err)?;
            log::info!("wrote {} rows to {}", table.rows().len(), p.display());
            Ok(())
        }
    }
}

/// Write every table and fold errors and checks into an exit code.
pub fn finish(output: Output, common: &CommonArgs) -> u8 {
    let mut code = 0u8;
    for (target, table) in &output.tables {
        let path = match target {
            Target::Main => common.out.clone(),
            Target::Sibling { path: Some(p), .. } => Some(p.clone()),
            Target::Sibling { suffix, path: None } => match &common.out {
                Some(main) => Some(sibling_path(main, suffix, common.format)),
                None => {
                    log::warn!("no --out given; skipping the {suffix} table");
                    continue;
                }
            },
        };
        if let Err(e) = write_table(table, common.format, path.as_deref()) {
            eprintln!("error: {e}");
            code = code.max(e.exit_code());
        }
    }
    for check in &output.checks {
        if check.passed {
            log::info!("check {}: ok ({})", check.name, check.detail);
        } else {
            eprintln!("check failed: {} ({})", check.name, check.detail);
            code = code.max(EXIT_CHECK);
        }
    }
    if let Some(e) = &output.error {
        eprintln!("error: {e}");
        code = code.max(e.exit_code());
    }
    code
}

/// Parse `args` (program name first), run the command and return the exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    let output = execute(&cli.command, &cli.common);
    finish(output, &cli.common)
}

/// Entry point of the `bernoulli` binary.
pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn")).init();
    ExitCode::from(run(std::env::args_os()))
}

#[cfg(test)]
mod tests;
