//! `distortion`: bound tables, phase scans, property suites, minimizer
//! construction and criticality studies.
//!
//! Exit codes: 0 success, 1 usage, 2 property violation, 3 construction or
//! computation failure. Worker threads follow `RAYON_NUM_THREADS`.

mod commands;
mod error;
mod output;
mod scan;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "distortion", version, about = "Distortion energies of planar maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Table of F(s), F^{p/2}(s) and optionally F_f(s).
    Bound(BoundArgs),
    /// Homothety versus twist-minimizer energies across scales.
    Phase(PhaseArgs),
    /// Random-matrix property suite.
    Verify(VerifyArgs),
    /// Build a twist or ODE minimizer and report its energy.
    Construct(ConstructArgs),
    /// Refinement study of discrete Euler-Lagrange / Piola residuals.
    Critical(CriticalArgs),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Args, Debug)]
pub struct OutputArgs {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to a file instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BoundArgs {
    /// Single volume ratio (repeatable).
    #[arg(long = "s", value_name = "S")]
    pub s: Vec<f64>,
    #[arg(long)]
    pub s_min: Option<f64>,
    #[arg(long)]
    pub s_max: Option<f64>,
    /// Number of points between --s-min and --s-max.
    #[arg(long)]
    pub n: Option<usize>,
    /// Log-spaced instead of evenly spaced range.
    #[arg(long)]
    pub log: bool,
    #[arg(long)]
    pub p: Option<f64>,
    /// quadratic | logsq | cubic | quartic | power:<p>
    #[arg(long)]
    pub cost: Option<String>,
    /// TOML file with scan keys (s_min, s_max, n, log, p, cost); flags win.
    #[arg(long)]
    pub scan: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct PhaseArgs {
    /// Single scale (repeatable).
    #[arg(long = "lambda", value_name = "LAMBDA")]
    pub lambda: Vec<f64>,
    #[arg(long)]
    pub lambda_min: Option<f64>,
    #[arg(long)]
    pub lambda_max: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    /// Radial and angular quadrature resolution.
    #[arg(long)]
    pub grid: Option<usize>,
    /// TOML file with scan keys (lambda_min, lambda_max, n, p, grid); flags win.
    #[arg(long)]
    pub scan: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// sandwich_k | sandwich_co | pointwise_bound | polar_identity | dist_k_oracle
    #[arg(long)]
    pub suite: String,
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    #[arg(long, default_value_t = distortion_core::verify::DEFAULT_SEED)]
    pub seed: u64,
    /// Slice parameters in the dist_k oracle grid.
    #[arg(long, default_value_t = 1024)]
    pub oracle_points: usize,
    #[arg(long)]
    pub oracle_tol: Option<f64>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ConstructKind {
    Twist,
    Ode,
}

#[derive(Args, Debug)]
pub struct ConstructArgs {
    #[arg(value_enum)]
    pub kind: ConstructKind,
    /// Twist: target scale in (0, 1/2]. ODE: composition scale (default 1/alpha).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// ODE: constant singular-value sum, > 2.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// ODE: end of the linear core (default 1/alpha).
    #[arg(long)]
    pub t0: Option<f64>,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Radial quadrature resolution.
    #[arg(long, default_value_t = 1024)]
    pub n_r: usize,
    /// Angular quadrature resolution.
    #[arg(long, default_value_t = 64)]
    pub n_theta: usize,
    /// Directory for profile.csv, report.json and SVG shapes.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Export the image of the unit disk as SVG.
    #[arg(long)]
    pub svg: bool,
    /// Extra SVG shapes of scaled twist maps, one per twist parameter.
    #[arg(long, value_delimiter = ',')]
    pub shape_c: Vec<f64>,
    #[arg(long, default_value_t = 12)]
    pub slices: usize,
    #[arg(long, default_value_t = 512)]
    pub samples: usize,
    /// Rows in profile.csv.
    #[arg(long, default_value_t = 256)]
    pub profile_points: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MapSpec {
    Twist,
    Ode,
    Homothety,
    PolyA,
    PolyB,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Analytic,
    Fd,
}

#[derive(Args, Debug)]
pub struct CriticalArgs {
    #[arg(long, value_enum)]
    pub map: MapSpec,
    /// Twist parameter (twist map, scaled into the well K).
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// ODE singular-value sum.
    #[arg(long, default_value_t = 3.0)]
    pub alpha: f64,
    /// Homothety scale, or ODE composition scale (default 1/alpha).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Exponents for the Euler-Lagrange residual (default 2; the polynomial
    /// maps run only the Piola residual unless exponents are given).
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<f64>,
    /// Also run the Piola residual.
    #[arg(long)]
    pub piola: bool,
    /// Number of levels h = 1/32, 1/64, ...
    #[arg(long, default_value_t = 3)]
    pub levels: usize,
    #[arg(long, default_value_t = 0.5)]
    pub half_width: f64,
    #[arg(long, default_value_t = distortion_core::criticality::DEFAULT_EXCLUSION)]
    pub exclusion: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Analytic)]
    pub mode: ModeArg,
    /// Directory for one h,residual,slope CSV per study.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutputArgs,
}

fn run() -> Result<(), CliError> {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return Ok(());
            }
            let msg = e.to_string();
            return Err(CliError::Usage(msg.trim_start_matches("error: ").to_string()));
        }
    };
    match cli.command {
        Command::Bound(a) => commands::bound(a),
        Command::Phase(a) => commands::phase(a),
        Command::Verify(a) => commands::verify(a),
        Command::Construct(a) => commands::construct(a),
        Command::Critical(a) => commands::critical(a),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.to_string().trim_end());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
