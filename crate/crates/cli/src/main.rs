//! `kgm`: soliton existence checks, profile solves, identity verification and
//! parameter scans for the nonlinear Klein-Gordon-Maxwell system and Q-balls.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use config::Config;

#[derive(Parser)]
#[command(name = "kgm", version, about, long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the configured model against the non-existence conditions.
    /// Exit code: 0 not excluded, 2 excluded, 3 inconclusive, 1 error.
    Check {
        #[arg(long)]
        config: PathBuf,
        /// Also write check.json here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides checker.tol.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Solve the radial profile and write profile.csv / profile.json.
    /// Exit code: 0 converged, 4 no solution or no convergence, 1 error.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Overrides solver.tol.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Check the scaling identities on a stored profile.
    /// Exit code: 0 all within tolerance, 4 residual failure, 1 error.
    Verify {
        /// Profile file (.json with embedded model hash, or .csv).
        profile: PathBuf,
        #[arg(long)]
        config: PathBuf,
        /// Also write verify.json and the action-curve CSVs here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides verify.tol.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Run the configured parameter sweep. Per-point failures are recorded in
    /// the output, never fatal. Exit code: 0 completed, 1 error.
    Scan {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Overrides checker.tol, solver.tol and verify.tol for every point.
        #[arg(long)]
        tol: Option<f64>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
}

fn run() -> Result<i32> {
    let cli = Cli::parse();
    match cli.command {
        Command::Check { config, out, tol } => {
            let mut cfg = Config::load(&config)?;
            if let Some(t) = tol {
                cfg.checker.tol = t;
            }
            commands::cmd_check(&cfg, out.as_deref())
        }
        Command::Solve { config, out, tol } => {
            let mut cfg = Config::load(&config)?;
            if let Some(t) = tol {
                cfg.solver.tol = t;
            }
            commands::cmd_solve(&cfg, &out)
        }
        Command::Verify { profile, config, out, tol } => {
            let mut cfg = Config::load(&config)?;
            if let Some(t) = tol {
                cfg.verify.tol = t;
            }
            commands::cmd_verify(&profile, &cfg, out.as_deref())
        }
        Command::Scan { config, out, tol, jobs } => {
            let mut cfg = Config::load(&config)?;
            if let Some(t) = tol {
                cfg.checker.tol = t;
                cfg.solver.tol = t;
                cfg.verify.tol = t;
            }
            commands::cmd_scan(&cfg, &out, jobs)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(commands::EXIT_ERROR as u8)
        }
    }
}
