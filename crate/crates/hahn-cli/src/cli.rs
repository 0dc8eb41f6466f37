//! Argument grammar. Global flags mirror the run configuration; each
//! subcommand adds only its own operands.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::Format;

#[derive(Parser, Debug)]
#[command(
    name = "hahn",
    version,
    about = "Hahn symmetric quantum calculus: derivatives, series integrals, and variational checks"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Default)]
pub struct GlobalArgs {
    /// Shift ratio q, strictly between 0 and 1 (default 0.5)
    #[arg(long, global = true)]
    pub q: Option<f64>,

    /// Shift offset omega, nonnegative (default 1)
    #[arg(long, global = true)]
    pub omega: Option<f64>,

    /// Left interval endpoint (default 2)
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub a: Option<f64>,

    /// Right interval endpoint (default 6)
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub b: Option<f64>,

    /// Lattice depth: shift iterates kept per endpoint (default 12)
    #[arg(long, global = true)]
    pub depth: Option<u32>,

    /// Series stop tolerance (default 1e-10)
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    /// Series term budget (default 10000)
    #[arg(long = "max-terms", global = true)]
    pub max_terms: Option<u32>,

    /// Report format
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write the report to this path instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Exit 4 when a series fails to converge
    #[arg(long, global = true)]
    pub strict: bool,

    /// TOML config file with run settings; explicit flags win
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Symmetric difference quotient of an expression at a point
    Deriv {
        /// Expression in t, e.g. "t^2" or "sin(q*t)"
        #[arg(long)]
        expr: String,

        /// Evaluation point
        #[arg(long, allow_negative_numbers = true)]
        at: f64,
    },

    /// Series integral of an expression or a point:value table
    Integrate {
        /// Expression in t
        #[arg(long, conflicts_with = "table")]
        expr: Option<String>,

        /// Finitely supported integrand "p1:v1,p2:v2,...", 0 elsewhere
        #[arg(long)]
        table: Option<String>,

        /// Lower limit (defaults to a)
        #[arg(long, allow_negative_numbers = true)]
        from: Option<f64>,

        /// Upper limit (defaults to b)
        #[arg(long, allow_negative_numbers = true)]
        to: Option<f64>,
    },

    /// Euler-Lagrange residual of a trajectory over the interval lattice
    ElCheck {
        /// Lagrangian L(t, u, v) with u = y(sigma t), v = Dy(t)
        #[arg(long)]
        lagrangian: String,

        /// Trajectory y(t)
        #[arg(long)]
        trajectory: String,

        /// Residual pass threshold (default 1e-6)
        #[arg(long = "tol-el")]
        tol_el: Option<f64>,

        /// Boundary value at a (defaults to y(a))
        #[arg(long, allow_negative_numbers = true)]
        alpha: Option<f64>,

        /// Boundary value at b (defaults to y(b))
        #[arg(long, allow_negative_numbers = true)]
        beta: Option<f64>,
    },

    /// First variation of the action along a direction vanishing at a and b
    FirstVariation {
        /// Lagrangian L(t, u, v)
        #[arg(long)]
        lagrangian: String,

        /// Trajectory y(t)
        #[arg(long)]
        trajectory: String,

        /// Variation direction eta(t), must vanish at both endpoints
        #[arg(long)]
        eta: String,
    },

    /// Affine minimizer of the model problem for given boundary values
    Leitmann {
        /// Boundary value at a
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,

        /// Boundary value at b
        #[arg(long, allow_negative_numbers = true)]
        beta: f64,
    },

    /// Sample joint convexity of a Lagrangian over a (u, v) box
    Convexity {
        /// Lagrangian L(t, u, v)
        #[arg(long)]
        lagrangian: String,

        #[arg(long, default_value_t = -2.0, allow_negative_numbers = true)]
        u_min: f64,

        #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
        u_max: f64,

        #[arg(long, default_value_t = -2.0, allow_negative_numbers = true)]
        v_min: f64,

        #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
        v_max: f64,

        /// Grid resolution per axis
        #[arg(long, default_value_t = 9)]
        grid: u32,

        /// Evenly spaced t samples across [a, b]
        #[arg(long, default_value_t = 9)]
        t_samples: u32,
    },

    /// Run the built-in identity suites and print a pass/fail table
    Verify,
}
