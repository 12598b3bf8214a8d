//! Command-line driver: minimizes the discrete p-Dirichlet energy under
//! pinned nodes, then archives, contours, and reports on the minimizer.
//!
//! Flags override values from `--config`; every run writes its outputs
//! under the configured directory. Exit codes: 0 success, 1 validation
//! error, 2 divergence, 3 I/O error.

mod config;
mod contour;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use config::{parse_analyses, parse_levels, ExperimentConfig};
use runner::{run_experiment, RunError};

#[derive(Parser, Debug)]
#[command(
    name = "morrey",
    version,
    about = "Gradient descent for extremals of the discrete Morrey inequality"
)]
struct Cli {
    /// Configuration file (flat `key = value` lines).
    #[arg(long, value_name = "path")]
    config: Option<PathBuf>,
    /// Problem dimension (1 or 2).
    #[arg(long)]
    n: Option<usize>,
    /// Domain half-width: the grid covers [-ell, ell]^n.
    #[arg(long)]
    ell: Option<u32>,
    /// Subdivisions per unit length (spacing 1/k).
    #[arg(long)]
    k: Option<u32>,
    /// Energy exponent, p > n.
    #[arg(long)]
    p: Option<f64>,
    /// Fixed descent step size.
    #[arg(long)]
    tau: Option<f64>,
    /// Iteration budget.
    #[arg(long)]
    iters: Option<u64>,
    /// Adaptive step search; bare flag means true.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    adaptive: Option<bool>,
    /// Field archive to resume descent from.
    #[arg(long, value_name = "archive")]
    resume: Option<PathBuf>,
    /// Output directory.
    #[arg(long, value_name = "dir")]
    out: Option<PathBuf>,
    /// Seed for sampled seminorm scans.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated analyses to run (`all`, `none`, or names).
    #[arg(long, value_name = "list")]
    analysis: Option<String>,
    /// Comma-separated contour levels.
    #[arg(long, value_name = "list")]
    levels: Option<String>,
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig, RunError> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::parse(&std::fs::read_to_string(path)?)?,
        None => ExperimentConfig::default(),
    };
    if let Some(n) = cli.n {
        config.n = n;
    }
    if let Some(ell) = cli.ell {
        config.ell = ell;
    }
    if let Some(k) = cli.k {
        config.k = k;
    }
    if let Some(p) = cli.p {
        config.p = p;
    }
    if let Some(tau) = cli.tau {
        config.tau = tau;
    }
    if let Some(iters) = cli.iters {
        config.max_iters = iters;
    }
    if let Some(adaptive) = cli.adaptive {
        config.adaptive = adaptive;
    }
    if let Some(out) = &cli.out {
        config.out_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(text) = &cli.analysis {
        config.analyses = parse_analyses(text).map_err(RunError::Validation)?;
    }
    if let Some(text) = &cli.levels {
        config.levels = parse_levels(text).map_err(RunError::Validation)?;
    }
    Ok(config)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };

    match build_config(&cli).and_then(|config| run_experiment(&config, cli.resume.as_deref())) {
        Ok(summary) => {
            println!("archive: {}", summary.archive_path.display());
            if let Some(path) = &summary.contour_path {
                println!("contours: {}", path.display());
            }
            println!("report: {}", summary.report_path.display());
            println!("iterations: {}", summary.iterations);
            println!("final_energy: {}", summary.final_energy);
            println!("checks: {}", if summary.all_pass { "PASS" } else { "FAIL" });
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
