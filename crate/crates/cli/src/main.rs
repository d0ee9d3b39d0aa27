//! `s2re`: data files and verification runs for relative equilibria of three
//! bodies on the sphere. Exit codes: 0 success, 1 usage or input error,
//! 2 a numerical check failed.

mod commands;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use s2re::MassTriple;

#[derive(Parser, Debug)]
#[command(name = "s2re", version, about = "Relative equilibria of three bodies on the sphere")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Masses as `m1,m2,m3`.
    #[arg(long, value_parser = parse_masses, allow_hyphen_values = true)]
    pub masses: Option<MassTriple>,
    /// Draw log-uniform masses in [0.1, 10] from this seed when `--masses` is absent.
    #[arg(long)]
    pub rng_seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write JSON rows instead of CSV.
    #[arg(long)]
    pub json: bool,
    /// Read angle arguments in degrees.
    #[arg(long)]
    pub degrees: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// The four mass-independent shapes with spins, configurations and checks.
    MassIndependent {
        #[command(flatten)]
        common: Common,
        /// Largest allowed residual of the equilibrium equations.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Rotation periods integrated for the drift column.
        #[arg(long, default_value_t = 1)]
        periods: usize,
    },
    /// Grid of the mass-independence fields `f1`, `f2`.
    ScanF {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 400)]
        grid: usize,
    },
    /// Grid of `g` and `A` for the given masses.
    ScanG {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 400)]
        grid: usize,
    },
    /// Trace the curve `g = 0` through a seed shape.
    Continue {
        #[command(flatten)]
        common: Common,
        /// Seed shape as `tau1,tau2`.
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        seed_shape: (f64, f64),
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        #[arg(long, default_value_t = 5000)]
        max_points: usize,
        /// Largest allowed relative residual at solvable points.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Configurations of the mass-independent shapes for one or more mass triples.
    Configs {
        /// Masses as `m1,m2,m3`; repeatable. Defaults to four reference triples.
        #[arg(long, value_parser = parse_masses, allow_hyphen_values = true)]
        masses: Vec<MassTriple>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write JSON rows instead of CSV.
        #[arg(long)]
        json: bool,
    },
    /// Shapes with `A = 0`.
    Azero {
        #[command(flatten)]
        common: Common,
    },
    /// Spin, configuration, residuals and a simulation for one shape.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Shape as `tau1,tau2`.
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        seed_shape: (f64, f64),
        #[arg(long, default_value_t = 1)]
        periods: usize,
        /// Largest allowed drift from rigid rotation.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Integrate the equations of motion and write a trajectory.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Initial state `theta1..3,phi1..3,theta_dot1..3,phi_dot1..3`.
        #[arg(long, value_parser = parse_state, allow_hyphen_values = true, conflicts_with = "seed_shape")]
        state: Option<[f64; 12]>,
        /// Start from the rigidly rotating equilibrium of this shape instead.
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        seed_shape: Option<(f64, f64)>,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
        #[arg(long, default_value_t = 100)]
        sample_every: usize,
    },
}

fn parse_list(s: &str, n: usize) -> Result<Vec<f64>, String> {
    let v = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    if v.len() != n {
        return Err(format!("expected {n} comma-separated numbers, got {}", v.len()));
    }
    if let Some(x) = v.iter().find(|x| !x.is_finite()) {
        return Err(format!("non-finite value {x}"));
    }
    Ok(v)
}

fn parse_masses(s: &str) -> Result<MassTriple, String> {
    let v = parse_list(s, 3)?;
    MassTriple::new(v[0], v[1], v[2]).map_err(|e| e.to_string())
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let v = parse_list(s, 2)?;
    Ok((v[0], v[1]))
}

fn parse_state(s: &str) -> Result<[f64; 12], String> {
    let v = parse_list(s, 12)?;
    Ok(std::array::from_fn(|k| v[k]))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::MassIndependent { common, tol, periods } => commands::mass_independent(&common, tol, periods),
        Command::ScanF { common, grid } => commands::scan_f(&common, grid),
        Command::ScanG { common, grid } => commands::scan_g(&common, grid),
        Command::Continue { common, seed_shape, step, max_points, tol } => {
            commands::continue_curve(&common, seed_shape, step, max_points, tol)
        }
        Command::Configs { masses, out, json } => commands::configs(&masses, out.as_deref(), json),
        Command::Azero { common } => commands::azero(&common),
        Command::Verify { common, seed_shape, periods, tol } => commands::verify(&common, seed_shape, periods, tol),
        Command::Simulate { common, state, seed_shape, dt, steps, sample_every } => {
            commands::simulate(&common, state, seed_shape, dt, steps, sample_every)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("s2re: {f}");
            ExitCode::from(f.code())
        }
    }
}
