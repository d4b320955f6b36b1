//! `lindbladkit` command-line front end.
//!
//! Exit codes: 0 success, 1 domain failure (invalid state, failed evolution,
//! not CP under `--require-cp`), 2 usage or parse failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod format;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags or unreadable input. Exit code 2.
    #[error("{0}")]
    Usage(String),
    /// The library rejected the request. Exit code 1.
    #[error("{0}")]
    Domain(String),
}

impl From<lindbladkit::Error> for CliError {
    fn from(e: lindbladkit::Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 1,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "lindbladkit",
    version,
    about = "Open quantum system dynamics toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that a state file holds a valid density matrix.
    Validate {
        path: PathBuf,
        #[arg(long, default_value_t = lindbladkit::states::DEFAULT_TOLERANCE)]
        tol: f64,
    },
    /// Integrate a generator from an initial state and write a CSV trajectory.
    Evolve {
        #[arg(long)]
        generator: PathBuf,
        #[arg(long)]
        initial: PathBuf,
        #[arg(long)]
        t_max: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, value_enum, default_value_t = Method::Rk4)]
        method: Method,
        /// Output CSV; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Choi eigenvalues and complete-positivity verdict of a channel.
    Choi {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, default_value_t = lindbladkit::superop::CP_TOLERANCE)]
        tol: f64,
        /// Exit with code 1 if the map is not completely positive.
        #[arg(long)]
        require_cp: bool,
    },
    /// Reduce a generator to traceless orthonormal operators with rates.
    Canonical {
        #[arg(long)]
        generator: PathBuf,
        /// Output JSON; not written if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = lindbladkit::lindblad::GRAM_TOLERANCE)]
        tol: f64,
    },
    /// Classify a grid of two-level Pauli maps with λ² = λ¹.
    Region {
        #[arg(long, default_value_t = 101)]
        resolution: usize,
        /// Output CSV; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Quantum-jump Monte Carlo ensemble of one of the bundled models.
    Sample(SampleArgs),
    /// Spectral decomposition of a channel or generator superoperator.
    Spectral {
        #[command(flatten)]
        map: MapArgs,
        /// Write the spectral form as a channel JSON file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Kraus operators of one small time step of a generator.
    KrausStep {
        #[arg(long)]
        generator: PathBuf,
        #[arg(long)]
        dt: f64,
        /// Write the Kraus operators as a channel JSON file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Rk4,
    Expm,
}

/// A map given as a channel file, or as a generator (optionally propagated to `--t`).
#[derive(Args)]
struct MapArgs {
    #[arg(
        long,
        conflicts_with = "generator",
        required_unless_present = "generator"
    )]
    channel: Option<PathBuf>,
    #[arg(long)]
    generator: Option<PathBuf>,
    /// Propagation time for `--generator`.
    #[arg(long, requires = "generator")]
    t: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelName {
    #[value(name = "random_phases")]
    RandomPhases,
    #[value(name = "unitary_jump")]
    UnitaryJump,
    #[value(name = "random_unitary")]
    RandomUnitary,
    #[value(name = "state_exchange")]
    StateExchange,
    #[value(name = "state_transitions")]
    StateTransitions,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, value_enum)]
    model: ModelName,
    /// Model parameters as key=value: rate, rates (random_phases), g (diagonal
    /// of G), p (populations). Lists are comma separated.
    #[arg(long, num_args = 0.., value_name = "KEY=VALUE")]
    params: Vec<String>,
    #[arg(long, default_value_t = 10_000)]
    trajectories: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    /// Comma-separated output times.
    #[arg(long, default_value = "1")]
    times: String,
    /// Initial amplitudes, comma separated, each `re` or `re:im`; normalized
    /// before use. Defaults to the first basis state.
    #[arg(long)]
    psi: Option<String>,
    /// Output CSV; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("LINDBLADKIT_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            CliError::Usage(format!(
                "LINDBLADKIT_THREADS must be a positive integer, got {value:?}"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run(cli: Cli) -> Result<u8, CliError> {
    configure_threads()?;
    match cli.command {
        Command::Validate { path, tol } => commands::validate(&path, tol),
        Command::Evolve {
            generator,
            initial,
            t_max,
            dt,
            method,
            out,
        } => commands::evolve(&generator, &initial, t_max, dt, method, out.as_deref()),
        Command::Choi {
            map,
            tol,
            require_cp,
        } => commands::choi(&map, tol, require_cp),
        Command::Canonical {
            generator,
            out,
            tol,
        } => commands::canonical(&generator, out.as_deref(), tol),
        Command::Region { resolution, out } => commands::region(resolution, out.as_deref()),
        Command::Sample(args) => commands::sample(&args),
        Command::Spectral { map, out } => commands::spectral(&map, out.as_deref()),
        Command::KrausStep { generator, dt, out } => {
            commands::kraus_step(&generator, dt, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
