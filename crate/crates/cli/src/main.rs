//! `lamefem` command-line driver.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] lamefem::Error),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("cannot read {path}: {source}")]
    Input {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for bad input, 3 for resonance, 1 for anything else.
    pub fn exit_code(&self) -> u8 {
        use lamefem::Error as E;
        match self {
            CliError::Validation(_) | CliError::Input { .. } => 2,
            CliError::Core(
                E::Parse { .. } | E::Validation(_) | E::InvalidInput(_) | E::Topology(_) | E::Geometry(_),
            ) => 2,
            CliError::Core(E::Resonance { .. }) => 3,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        use lamefem::Error as E;
        match self {
            CliError::Validation(_) | CliError::Core(E::Validation(_)) => "validation",
            CliError::Input { .. } => "input",
            CliError::Output { .. } => "output",
            CliError::Core(E::Parse { .. }) => "parse",
            CliError::Core(E::InvalidInput(_)) => "invalid_input",
            CliError::Core(E::Topology(_)) => "topology",
            CliError::Core(E::Geometry(_)) => "geometry",
            CliError::Core(E::Resonance { .. }) => "resonance",
            CliError::Core(E::NotConverged { .. }) => "not_converged",
            CliError::Core(_) => "internal",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "lamefem", version, about = "Time-harmonic Lamé solver with Helmholtz/Maxwell decoupling checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a tetrahedral box mesh as JSON.
    MeshBox(MeshBoxArgs),
    /// Compute the boundary scalar S and the admissibility verdicts of a mesh.
    AnalyzeBoundary(AnalyzeArgs),
    /// Solve the Lamé problem of a run configuration.
    Solve(SolveArgs),
    /// Compare the coupled solve with the decoupled Helmholtz and Maxwell solves.
    VerifyDecoupling(VerifyArgs),
    /// Errors and observed rates on a sequence of cube meshes.
    Converge(ConvergeArgs),
    /// Locate eigenvalues of the Lamé operator near a grid of shifts.
    ResonanceScan(ScanArgs),
}

#[derive(Debug, Args)]
pub struct SummaryArg {
    /// Run summary JSON; defaults to the main output with extension `.summary.json`.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MeshBoxArgs {
    /// Subdivisions: one count or `nx,ny,nz`.
    #[arg(long)]
    pub n: String,
    /// Edge lengths: one length or `lx,ly,lz`; accepts `pi`, `2pi`, `pi/2`.
    #[arg(long = "L", default_value = "pi")]
    pub lengths: String,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub summary: SummaryArg,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Mesh JSON file.
    pub mesh: PathBuf,
    #[arg(long)]
    pub report: PathBuf,
    /// Largest normal spread (radians) of a flat patch.
    #[arg(long, default_value_t = lamefem::surface::DEFAULT_TOL_FLAT)]
    pub tol_flat: f64,
    /// Largest `|S|` on a fourth-kind admissible boundary.
    #[arg(long, default_value_t = lamefem::surface::DEFAULT_TOL_S)]
    pub tol_s: f64,
    #[command(flatten)]
    pub summary: SummaryArg,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// VTK output; overrides `output.vtk` of the config.
    #[arg(long)]
    pub vtk: Option<PathBuf>,
    /// Solve the equivalent second-kind Fredholm equation with GMRES.
    #[arg(long)]
    pub fredholm: bool,
    #[command(flatten)]
    pub summary: SummaryArg,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Report CSV; overrides `output.csv` of the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub summary: SummaryArg,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Mesh levels, e.g. `2,4,8`; overrides `levels` of the config.
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<usize>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub summary: SummaryArg,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Explicit shifts, e.g. `1.5,2,2.5`.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["from", "to", "steps"])]
    pub sigmas: Option<Vec<f64>>,
    #[arg(long, requires_all = ["to", "steps"])]
    pub from: Option<f64>,
    #[arg(long, requires_all = ["from", "steps"])]
    pub to: Option<f64>,
    #[arg(long, requires_all = ["from", "to"])]
    pub steps: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub summary: SummaryArg,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn exit_codes() {
        let resonance = CliError::Core(lamefem::Error::Resonance {
            shift: 2.0,
            nearest_eigenvalue: Some(2.0),
            detail: String::new(),
        });
        assert_eq!(resonance.exit_code(), 3);
        assert_eq!(CliError::Validation("x".into()).exit_code(), 2);
        assert_eq!(CliError::Core(lamefem::Error::Topology("x".into())).exit_code(), 2);
        let stall = CliError::Core(lamefem::Error::NotConverged { iterations: 1, residual: 1.0 });
        assert_eq!(stall.exit_code(), 1);
        assert_eq!(stall.kind(), "not_converged");
    }

    #[test]
    fn scan_grid_flags_need_each_other() {
        let parse = |args: &[&str]| Cli::try_parse_from(args.iter().copied());
        assert!(parse(&["lamefem", "resonance-scan", "--config", "c.json", "--from", "1"]).is_err());
        assert!(parse(&["lamefem", "resonance-scan", "--config", "c.json", "--sigmas", "1,2", "--from", "1"]).is_err());
        assert!(parse(&["lamefem", "resonance-scan", "--config", "c.json", "--sigmas", "1,2"]).is_ok());
    }
}
