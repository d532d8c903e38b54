//! `torusflow`: verification, sweeps, portraits and invariants of the torus
//! family from the command line.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 a numerical check failed.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{parse_range, Overrides, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "torusflow",
    version,
    about = "Hamiltonian flows on the torus: zero census, connection surface, rotation numbers, Dulac maps",
    after_help = "Settings come from built-in defaults, then --config FILE (key=value lines), then flags.\n\
                  Without --out, files go to $TORUSFLOW_OUT_DIR/<name> when that is set, else to stdout.\n\
                  Exit codes: 0 success, 1 usage or I/O error, 2 a numerical check failed."
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// key=value configuration file (flags take precedence)
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Rotation parameter phi [default: 1/3]
    #[arg(long, global = true, allow_negative_numbers = true)]
    phi: Option<f64>,
    /// Coefficient b [default: 2]
    #[arg(long, global = true, allow_negative_numbers = true)]
    b: Option<f64>,
    /// Coefficient c [default: 1]
    #[arg(long, global = true, allow_negative_numbers = true)]
    c: Option<f64>,
    /// Coefficient d [default: solve for the connection value D(phi, b, c)]
    #[arg(long, global = true, allow_negative_numbers = true)]
    d: Option<f64>,
    /// Range of c as LO,HI [default: 0.7,1.1]
    #[arg(long, global = true, value_parser = parse_range, allow_hyphen_values = true)]
    c_range: Option<(f64, f64)>,
    /// Range of d as LO,HI [default: 0.9,1.3]
    #[arg(long, global = true, value_parser = parse_range, allow_hyphen_values = true)]
    d_range: Option<(f64, f64)>,
    /// Grid points per parameter axis [default: 9]
    #[arg(long, global = true)]
    grid_n: Option<usize>,
    /// Newton seeds per torus axis when locating zeros [default: 64]
    #[arg(long, global = true)]
    mesh_n: Option<usize>,
    /// Residual tolerance for zeros [default: 1e-12]
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Largest |n| searched by the equivalence tests [default: 10000]
    #[arg(long, global = true)]
    horizon: Option<u64>,
    /// Tolerance of the equivalence tests [default: 1e-9]
    #[arg(long, global = true)]
    eps: Option<f64>,
    /// Output file
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DulacField {
    /// x' = l2 x, y' = l1 y
    Linear,
    /// x' = x, y' = -mu y + coupling x y
    Perturbed,
    /// A saddle of the torus family
    Torus,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the zero, transversality and connection checks over the parameter box
    Verify {
        /// Also write the per-row table (c, d_star, rho, derivative) here
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Draw level curves, separatrices and zeros as SVG
    Portrait {
        /// Image size in pixels
        #[arg(long, default_value_t = 720)]
        pixels: u32,
    },
    /// Solve the connection value d = D(phi, b, c) along the c range
    Sweep,
    /// Decide whether rho2 = rho1 + n phi (mod 1) for some |n| <= horizon
    #[command(allow_negative_numbers = true)]
    Equiv {
        rho1: f64,
        rho2: f64,
        #[arg(value_name = "PHI")]
        rotation: f64,
    },
    /// Rotation number of a rigid rotation or of the meridian return map
    #[command(allow_negative_numbers = true)]
    Rotation {
        /// Use the rigid rotation x -> x + ALPHA instead of the torus field
        #[arg(long)]
        alpha: Option<f64>,
        /// Number of iterates
        #[arg(long, default_value_t = 200)]
        iters: usize,
        /// Starting point in [0, 1)
        #[arg(long, default_value_t = 0.1)]
        x0: f64,
    },
    /// Sample a Dulac map and fit its exponent
    #[command(allow_negative_numbers = true)]
    Dulac {
        /// Stable eigenvalue (negative), for --field linear
        #[arg(default_value_t = -1.0)]
        lambda1: f64,
        /// Unstable eigenvalue (positive), for --field linear
        #[arg(default_value_t = 2.0)]
        lambda2: f64,
        #[arg(long, value_enum, default_value_t = DulacField::Linear)]
        field: DulacField,
        /// Exponent of the perturbed saddle
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        /// Coupling of the perturbed saddle
        #[arg(long, default_value_t = 0.1)]
        coupling: f64,
        /// Saddle index 1..=3 of the torus field (ordered by x)
        #[arg(long, default_value_t = 1)]
        saddle: usize,
        /// Transversal offset [default: 1, or 0.1 for the torus field]
        #[arg(long)]
        h: Option<f64>,
        /// Smallest entry point
        #[arg(long, default_value_t = 1e-6)]
        x_min: f64,
        /// Largest entry point [default: h/10 for linear, 1e-3 perturbed, 1e-2 torus]
        #[arg(long)]
        x_max: Option<f64>,
        /// Number of log-spaced entry points
        #[arg(long, default_value_t = 12)]
        samples: usize,
    },
    /// Equivalence of two members of the synthetic family
    #[command(name = "synthetic-equiv", allow_negative_numbers = true)]
    SyntheticEquiv {
        rho1: f64,
        phi1: f64,
        rho2: f64,
        phi2: f64,
    },
    /// Integrate one trajectory and export it as CSV
    #[command(allow_negative_numbers = true)]
    Trace {
        /// Start point x (ignored with --saddle)
        #[arg(long, default_value_t = 1.0)]
        x0: f64,
        /// Start point y (ignored with --saddle)
        #[arg(long, default_value_t = 1.0)]
        y0: f64,
        /// Integration time
        #[arg(long, default_value_t = 10.0)]
        time: f64,
        /// Integrate backwards in time
        #[arg(long)]
        backward: bool,
        /// Trace a separatrix of this saddle (1..=3) instead
        #[arg(long)]
        saddle: Option<usize>,
        /// Separatrix branch
        #[arg(long, default_value = "unstable-right")]
        branch: String,
    },
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            phi: self.phi,
            b: self.b,
            c: self.c,
            d: self.d,
            c_range: self.c_range,
            d_range: self.d_range,
            grid_n: self.grid_n,
            mesh_n: self.mesh_n,
            tol: self.tol,
            horizon: self.horizon,
            eps: self.eps,
            out: self.out.clone(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let cfg = match RunConfig::resolve(cli.common.config.as_deref(), &cli.common.overrides()) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    match commands::run(&cli.command, &cfg) {
        Ok(commands::Outcome::Pass) => ExitCode::SUCCESS,
        Ok(commands::Outcome::CheckFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
