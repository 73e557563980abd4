//! `ghlab`: verification harness for Gibbons-Hawking configurations.
//!
//! Exit codes: 0 when every check passes, 1 on a mathematical failure
//! (rejected configuration, threshold breach, failed audit), 2 on usage,
//! I/O or parse errors.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ghlab_core::Point3;

use commands::{direction, generate, geometry, surface, validate, Failure};

#[derive(Debug, Parser)]
#[command(
    name = "ghlab",
    version,
    about = "Checks puncture configurations, projections and surface models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide whether the configuration admits a positive harmonic potential.
    Validate(ValidateArgs),
    /// Finite-difference and algebraic residuals at sampled points.
    VerifyGeometry(GeometryArgs),
    /// Projection report along one direction, or a survey of random directions.
    Direction(DirectionArgs),
    /// Entire product, singularities, chart audits and a residual grid.
    Surface(SurfaceArgs),
    /// Write one of the built-in configuration families.
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    #[value(name = "paper_index", alias = "paper-index")]
    PaperIndex,
    #[value(name = "minimal_genus", alias = "minimal-genus")]
    MinimalGenus,
}

#[derive(Debug, Args)]
pub struct Io {
    /// Configuration file (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub io: Io,
}

#[derive(Debug, Args)]
pub struct GeometryArgs {
    #[command(flatten)]
    pub io: Io,
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Finite-difference step.
    #[arg(long, default_value_t = 1e-3)]
    pub h: f64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("target").required(true).args(["v", "survey"])))]
pub struct DirectionArgs {
    #[command(flatten)]
    pub io: Io,
    /// Direction as X,Y,Z.
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
    pub v: Option<Point3>,
    /// Number of random directions to survey.
    #[arg(long)]
    pub survey: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Clustering tolerance; defaults to 1e-9 times the diameter.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Also estimate the bad-direction caps with this parameter.
    #[arg(long, requires = "v")]
    pub cap: Option<u32>,
    /// Monte Carlo samples for the cap estimate.
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
}

#[derive(Debug, Args)]
pub struct SurfaceArgs {
    #[command(flatten)]
    pub io: Io,
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
    pub v: Point3,
    #[arg(long, value_enum, default_value_t = ModeArg::PaperIndex)]
    pub mode: ModeArg,
    /// Evaluation radius; required by minimal_genus, also bounds the audit disk.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Tail tolerance for minimal_genus.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Seed for the cocycle sample points.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Residual grid resolution per axis.
    #[arg(long, default_value_t = 11)]
    pub grid: usize,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(subcommand)]
    pub kind: GenerateKindArg,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum GenerateKindArg {
    /// Centers (0, 0, ratio^j), j = 1..count, with a geometric tail.
    GeometricZ {
        #[arg(long, default_value_t = 2.0)]
        ratio: f64,
        #[arg(long, default_value_t = 20)]
        count: usize,
    },
    /// Centers (j * spacing, 0, 0), j = 0..count.
    CollinearX {
        #[arg(long, default_value_t = 1.0)]
        spacing: f64,
        #[arg(long, default_value_t = 2)]
        count: usize,
    },
    /// Uniform centers in a ball.
    RandomBall {
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_vec3(s: &str) -> Result<Point3, String> {
    let parts = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    match parts[..] {
        [x, y, z] => Ok(Point3::new(x, y, z)),
        _ => Err(format!("expected X,Y,Z, got {} components", parts.len())),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (result, out) = match &cli.command {
        Command::Validate(a) => (validate::run(a), a.io.out.as_ref()),
        Command::VerifyGeometry(a) => (geometry::run(a), a.io.out.as_ref()),
        Command::Direction(a) => (direction::run(a), a.io.out.as_ref()),
        Command::Surface(a) => (surface::run(a), a.io.out.as_ref()),
        Command::Generate(a) => (generate::run(a), a.out.as_ref()),
    };
    let outcome = match result {
        Ok(o) => o,
        Err(f) => return fail(&f),
    };
    if let Err(f) = commands::emit(&outcome.text, out) {
        return fail(&f);
    }
    match outcome.failure {
        None => ExitCode::SUCCESS,
        Some(message) => {
            eprintln!("ghlab: {message}");
            ExitCode::from(1)
        }
    }
}

fn fail(f: &Failure) -> ExitCode {
    eprintln!("ghlab: {}", f.message());
    ExitCode::from(f.code())
}
