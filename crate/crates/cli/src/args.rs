use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "qubit-lab",
    version,
    about = "Qubit dynamics, geodesics and residual audits"
)]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve a qubit (exact quantum, Hamilton flow or dissipative flow) and write a trajectory CSV.
    Evolve(EvolveArgs),
    /// Integrate a geodesic of a named connection and write a trajectory CSV.
    Geodesic(GeodesicArgs),
    /// Run the audit suite and write a JSON report.
    Audit(AuditArgs),
    /// Run dissipative evolutions over a grid of (gamma, noise-sigma, az).
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Quantum,
    Classical,
    Dissipative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConnectionName {
    Flat,
    Eq5,
    CotTheta,
    LorentzMz,
}

#[derive(Debug, Clone, Args)]
pub struct FieldArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub ax: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub ay: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub az: f64,
}

#[derive(Debug, Clone, Args)]
pub struct TimeArgs {
    /// Output sample spacing.
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t_final: f64,
    /// Local absolute and relative integrator tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct EvolveArgs {
    /// key = value file with the same names as the flags; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub mode: Mode,
    #[command(flatten)]
    pub field: FieldArgs,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub i0: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub phi0: f64,
    #[command(flatten)]
    pub time: TimeArgs,
    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub friction_factor: f64,
    #[arg(long, default_value_t = 0.0)]
    pub noise_sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub noise_tau: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV path; `-` writes to standard output.
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct GeodesicArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub connection: ConnectionName,
    /// Take the initial velocity from the Hamilton flow at (i0, phi0).
    #[arg(long)]
    pub from_dynamics: bool,
    #[command(flatten)]
    pub field: FieldArgs,
    /// First coordinate (action I).
    #[arg(long, allow_negative_numbers = true, conflicts_with = "theta0")]
    pub i0: Option<f64>,
    /// First coordinate for the spherical chart (polar angle).
    #[arg(long, allow_negative_numbers = true)]
    pub theta0: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub phi0: f64,
    /// Initial velocity (two components).
    #[arg(long, num_args = 2, value_names = ["V1", "V2"], allow_negative_numbers = true)]
    pub v: Option<Vec<f64>>,
    #[command(flatten)]
    pub time: TimeArgs,
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct AuditArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Restrict the report to these check groups.
    #[arg(long = "check", value_delimiter = ',')]
    pub checks: Vec<String>,
    /// Friction values for the dissipative residual grid.
    #[arg(long = "gamma", value_delimiter = ',')]
    pub gammas: Vec<f64>,
    #[arg(long)]
    pub obstruction_samples: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long = "gamma", value_delimiter = ',', required = true)]
    pub gammas: Vec<f64>,
    #[arg(long = "noise-sigma", value_delimiter = ',', required = true)]
    pub sigmas: Vec<f64>,
    #[arg(
        long = "az",
        value_delimiter = ',',
        required = true,
        allow_negative_numbers = true
    )]
    pub azs: Vec<f64>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub ax: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub ay: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub i0: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub phi0: f64,
    #[command(flatten)]
    pub time: TimeArgs,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub friction_factor: f64,
    #[arg(long, default_value_t = 1.0)]
    pub noise_tau: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory for the per-cell CSV files and `index.csv`.
    #[arg(long)]
    pub out_dir: PathBuf,
}
