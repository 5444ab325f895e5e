mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use commands::{Failure, Outcome};
use output::{emit, Cell, Format, RunManifest};

/// Scattering, Siegert poles and open-system dynamics in one dimension.
#[derive(Debug, Parser)]
#[command(name = "resonance", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct Io {
    /// Output format (csv for curves, json for pole lists by default).
    #[arg(long, value_enum)]
    out: Option<Format>,
    /// Output file; a `<PATH>.manifest.json` sidecar is written next to it.
    /// Defaults to stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Reflection, transmission and conductance on an energy grid.
    Scatter {
        /// Model file, or `preset:NAME`.
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 0.05)]
        emin: f64,
        #[arg(long, default_value_t = 10.0)]
        emax: f64,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[command(flatten)]
        io: Io,
    },
    /// Siegert poles inside a complex wavenumber window (κ window for lattices).
    Poles {
        #[arg(long)]
        model: String,
        #[arg(long, num_args = 4, value_names = ["REMIN", "REMAX", "IMMIN", "IMMAX"], allow_negative_numbers = true)]
        window: Option<Vec<f64>>,
        /// Maximum bisection depth of the winding-count search.
        #[arg(long, default_value_t = 48)]
        max_depth: usize,
        /// Roots with |Re k| below this are snapped to the imaginary axis.
        #[arg(long, default_value_t = 1e-9)]
        axis_tolerance: f64,
        #[command(flatten)]
        io: Io,
    },
    /// Conservation of the Siegert-state norm in a window expanding with the wave front.
    NormCheck {
        #[arg(long)]
        model: String,
        /// Index into the pole list printed by `poles` with the same window;
        /// defaults to the lowest resonance.
        #[arg(long)]
        pole_index: Option<usize>,
        #[arg(long, num_args = 4, value_names = ["REMIN", "REMAX", "IMMIN", "IMMAX"], allow_negative_numbers = true)]
        window: Option<Vec<f64>>,
        #[arg(long = "L0", default_value_t = 2.0)]
        l0: f64,
        /// Length of the time grid; defaults to 5/|Im E| (10 for real E).
        #[arg(long)]
        tmax: Option<f64>,
        #[arg(long, default_value_t = 501)]
        points: usize,
        /// Largest accepted |N(t)/N(0) - 1|.
        #[arg(long, default_value_t = 1e-8)]
        threshold: f64,
        /// Sampling step of the stored interior wavefunction.
        #[arg(long, default_value_t = 0.01)]
        grid_step: f64,
        #[command(flatten)]
        io: Io,
    },
    /// Poles of the energy-dependent effective Hamiltonian of a lattice model.
    Feshbach {
        #[arg(long)]
        model: String,
        #[arg(long, default_value = "ret")]
        branch: String,
        /// `grid` for the default seed lattice, or a file of `re im` lines.
        #[arg(long, default_value = "grid")]
        seeds: String,
        #[command(flatten)]
        io: Io,
    },
    /// Lead self-energy on both branches at one complex energy.
    Sigma {
        /// Complex energy such as `1.5-0.2i`.
        #[arg(long = "E", allow_hyphen_values = true)]
        energy: String,
        #[arg(long = "J", default_value_t = 1.0)]
        j: f64,
        #[command(flatten)]
        io: Io,
    },
    /// Survival probability on a finite chain and its pole decomposition.
    Dynamics {
        #[arg(long)]
        model: String,
        /// Total chain length (odd, system in the middle).
        #[arg(long, default_value_t = 2001)]
        sites: usize,
        /// The grid covers [-tmax, tmax].
        #[arg(long, default_value_t = 20.0)]
        tmax: f64,
        /// Samples on each side of t = 0.
        #[arg(long, default_value_t = 2000)]
        steps: usize,
        /// Fit the decay rate through the local maxima of P in [LO, HI].
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        fit_window: Option<Vec<f64>>,
        #[command(flatten)]
        io: Io,
    },
    /// Coupled pendulum pair by normal-mode superposition.
    Pendulum {
        #[arg(long, default_value_t = 1.0)]
        omega: f64,
        #[arg(long, default_value_t = 0.1)]
        alpha: f64,
        #[arg(long, num_args = 2, default_values_t = [1.0, 0.0], allow_negative_numbers = true)]
        x0: Vec<f64>,
        #[arg(long, num_args = 2, default_values_t = [0.0, 0.0], allow_negative_numbers = true)]
        v0: Vec<f64>,
        #[arg(long, default_value_t = 100.0)]
        tmax: f64,
        #[arg(long, default_value_t = 1001)]
        points: usize,
        #[command(flatten)]
        io: Io,
    },
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("RESONANCE_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Validation(format!("RESONANCE_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Validation(e.to_string()))
}

fn dispatch(command: Command) -> Result<(Outcome, Io), Failure> {
    Ok(match command {
        Command::Scatter { model, emin, emax, samples, io } => (commands::scatter(&model, emin, emax, samples)?, io),
        Command::Poles { model, window, max_depth, axis_tolerance, io } => {
            (commands::poles(&model, window.as_deref(), max_depth, axis_tolerance)?, io)
        }
        Command::NormCheck { model, pole_index, window, l0, tmax, points, threshold, grid_step, io } => (
            commands::norm_check(&commands::NormCheck {
                model: &model,
                pole_index,
                window: window.as_deref(),
                l0,
                tmax,
                points,
                threshold,
                grid_step,
            })?,
            io,
        ),
        Command::Feshbach { model, branch, seeds, io } => (commands::feshbach(&model, &branch, &seeds)?, io),
        Command::Sigma { energy, j, io } => (commands::sigma(&energy, j)?, io),
        Command::Dynamics { model, sites, tmax, steps, fit_window, io } => {
            (commands::dynamics(&model, sites, tmax, steps, fit_window.as_deref())?, io)
        }
        Command::Pendulum { omega, alpha, x0, v0, tmax, points, io } => {
            (commands::pendulum(omega, alpha, [x0[0], x0[1]], [v0[0], v0[1]], tmax, points)?, io)
        }
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    let start = Instant::now();
    let (outcome, io) = dispatch(cli.command)?;
    let format = io.out.unwrap_or(outcome.default_format);
    let mut parameters = outcome.parameters.clone();
    parameters.push(("out", Cell::Text(format!("{format:?}").to_lowercase())));
    let manifest = RunManifest {
        subcommand: outcome.subcommand,
        model_sha256: outcome.model_sha256.clone(),
        parameters,
        version: env!("CARGO_PKG_VERSION"),
        wall_time_s: Cell::Num(start.elapsed().as_secs_f64()),
    };
    emit(&format.render(&outcome.table), io.output.as_deref(), &manifest)
        .map_err(|e| Failure::Validation(format!("cannot write output: {e}")))?;
    eprintln!("resonance {}: {}", outcome.subcommand, outcome.summary);
    match outcome.failure {
        Some(f) => Err(f),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
