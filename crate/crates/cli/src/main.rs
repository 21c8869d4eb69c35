//! `cutsync`: command-line front end for the synchronization analysis library.

mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cutset_sync::PNorm;

#[derive(Debug, Parser)]
#[command(name = "cutsync", version, about = "Synchronization tests for Kuramoto oscillator networks")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Seed for every randomized operation.
    #[arg(long, global = true, default_value_t = cutset_sync::seed::DEFAULT_SEED)]
    pub seed: u64,
    /// Write the result here (atomically) instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Suppress progress messages on stderr.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    FixedPoint,
    Newton,
    Acyclic,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every applicable synchronization test.
    Analyze {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        omega: PathBuf,
        /// Angle for the γ-dependent tests (repeatable).
        #[arg(long)]
        gamma: Vec<f64>,
        /// Norm for T1/T3 (repeatable; default 1, 2 and inf).
        #[arg(long)]
        p: Vec<PNorm>,
        /// Also estimate the amplification factor numerically with this many starts.
        #[arg(long)]
        alpha_starts: Option<usize>,
        #[arg(long, default_value_t = 500)]
        alpha_iters: usize,
    },
    /// Cutset projection, its norms and spectrum.
    Project {
        #[arg(long)]
        graph: PathBuf,
        /// Also verify the decomposition, resistance identity and minimal angle.
        #[arg(long)]
        check: bool,
    },
    /// Lift phase angles to the zero-mean representative.
    Embed {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        theta: PathBuf,
        /// Report membership in the arc, cohesive and embedded-cohesive sets.
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// Minimum amplification factor: lower bound and numerical estimate.
    Alpha {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value = "inf")]
        p: PNorm,
        #[arg(long)]
        gamma: f64,
        #[arg(long, default_value_t = 100)]
        starts: usize,
        #[arg(long, default_value_t = 500)]
        iters: usize,
        /// Exhaustive grid search (n <= 4 only).
        #[arg(long)]
        brute_force: bool,
        #[arg(long, default_value_t = 21)]
        resolution: usize,
    },
    /// Integrate the Kuramoto dynamics with RK4.
    Simulate {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        omega: PathBuf,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        stride: Option<usize>,
        /// JSON array of initial angles (default all zero).
        #[arg(long)]
        theta0_file: Option<PathBuf>,
        /// Write the sampled trajectory as CSV.
        #[arg(long)]
        emit_trajectory: Option<PathBuf>,
        /// Sync detection window (default: last 10% of the run).
        #[arg(long)]
        window: Option<f64>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Solve for a synchronization manifold.
    Solve {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        omega: PathBuf,
        #[arg(long, value_enum, default_value = "newton")]
        method: Method,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long, default_value = "inf")]
        p: PNorm,
        #[arg(long, default_value_t = 1000)]
        max_iter: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Critical coupling and critical ratios of power-network cases.
    Sweep {
        /// JSON or MATPOWER case file (repeatable).
        #[arg(long, required = true)]
        case: Vec<PathBuf>,
        #[arg(long, default_value_t = 1e-4)]
        bisect_tol: f64,
        /// Include the approximate test based on a numerical alpha estimate.
        #[arg(long)]
        with_at1: bool,
        #[arg(long, default_value_t = 100)]
        starts: usize,
    },
    /// Data for plotting the threshold functions.
    Figures {
        #[arg(long, value_parser = ["g", "hn_comparison"])]
        which: String,
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            return io::report_error(&io::CliError::Usage(e.to_string()));
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => io::report_error(&e),
    }
}
