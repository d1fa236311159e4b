use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "kerrlab",
    version,
    about = "Null geodesics of the slowly rotating Kerr spacetime"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Spin parameter [default: 3]
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub a: Option<f64>,
    /// Mass parameter [default: 8]
    #[arg(long = "M", global = true)]
    pub m: Option<f64>,
    /// JSON run configuration; flags given on the command line take precedence
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file; standard output when absent
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Local error tolerance of the geodesic integrator [default: 1e-10]
    #[arg(long, global = true)]
    pub ode_tol: Option<f64>,
    /// Relative tolerance of the quadrature oracle [default: 1e-12]
    #[arg(long, global = true)]
    pub quad_tol: Option<f64>,
    /// Residual tolerance of the polynomial root finder [default: 1e-12]
    #[arg(long, global = true)]
    pub root_tol: Option<f64>,
    /// Seed of the randomized checks [default: 1]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Real roots and sign pattern of the radial potential
    Potentials(ConstantsArgs),
    /// Integrate a null geodesic in Kerr-star coordinates
    Integrate(IntegrateArgs),
    /// Spherical photon orbits with negative Carter constant
    Spherical {
        #[command(subcommand)]
        command: SphericalCommand,
    },
    /// Place a null geodesic in the case tree
    Classify(ClassifyArgs),
    /// Evaluate an elliptic integral or the hypergeometric function
    Elliptic(EllipticArgs),
    /// Run the invariant suite and print a JSON report
    Selftest,
}

#[derive(Debug, Args)]
pub struct ConstantsArgs {
    #[arg(long = "E", allow_hyphen_values = true)]
    pub e: f64,
    #[arg(long = "L", allow_hyphen_values = true)]
    pub l: f64,
    /// Carter constant
    #[arg(long = "Q", allow_hyphen_values = true)]
    pub carter_q: f64,
    /// g(v, v); zero for null geodesics
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub q: f64,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long = "E", allow_hyphen_values = true)]
    pub e: f64,
    #[arg(long = "L", allow_hyphen_values = true)]
    pub l: f64,
    #[arg(long = "Q", allow_hyphen_values = true)]
    pub carter_q: f64,
    /// Radius of a spherical orbit with these constants
    #[arg(long, allow_hyphen_values = true)]
    pub r: Option<f64>,
}

#[derive(Debug, Args)]
pub struct IntegrateArgs {
    /// Initial point `t*,r,theta,phi*`
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required_unless_present = "spherical",
        conflicts_with = "spherical"
    )]
    pub init: Vec<f64>,
    /// Initial tangent: `dt*,dr,dtheta,dphi*` (must be null), or `dr,dtheta,dphi*`
    /// completed to a future-directed null vector
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required_unless_present = "spherical",
        conflicts_with = "spherical"
    )]
    pub dir: Vec<f64>,
    /// Start on the spherical orbit of this radius instead of `--init`/`--dir`
    #[arg(long, allow_hyphen_values = true)]
    pub spherical: Option<f64>,
    /// Final affine parameter [default: 100 M]
    #[arg(long, allow_hyphen_values = true)]
    pub smax: Option<f64>,
    /// Integrator tolerance; overrides --ode-tol
    #[arg(long)]
    pub tol: Option<f64>,
    /// Event log destination; next to --out (`.events.json`) or standard error when absent
    #[arg(long)]
    pub events: Option<std::path::PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum SphericalCommand {
    /// Tabulate the orbit family on a Chebyshev grid of the existence window
    Scan {
        #[arg(long, default_value_t = 200)]
        n: usize,
    },
    /// Single orbit at radius r
    At {
        #[arg(long, allow_hyphen_values = true)]
        r: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EllipticFn {
    #[value(name = "K")]
    K,
    #[value(name = "E")]
    E,
    #[value(name = "D")]
    D,
    #[value(name = "F")]
    F,
    #[value(name = "Einc")]
    Einc,
    #[value(name = "2f1")]
    Hyp2f1,
}

#[derive(Debug, Args)]
pub struct EllipticArgs {
    #[arg(long = "fn", value_enum)]
    pub function: EllipticFn,
    /// `k` for K, E, D; `phi k` for F, Einc; `alpha beta gamma x` for 2f1
    #[arg(long, num_args = 1.., value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub args: Vec<f64>,
}
