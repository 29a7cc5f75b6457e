// Copyright 2026 The fockstab Developers
// SPDX-License-Identifier: Apache-2.0

//! Command-line front end: `simulate`, `ensemble`, `verify` and `params`.
//!
//! Exit statuses: 0 success, 1 failed verification, 2 configuration error,
//! 3 I/O error.

pub mod commands;
pub mod config;
pub mod error;
pub mod format;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{ConfigFile, DEFAULT_SEED, DEFAULT_TRAJECTORIES};
pub use crate::error::{exit, CliError};

#[derive(Debug, Parser)]
#[command(
    name = "fockstab",
    version,
    about = "Photon-number feedback stabilization simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one closed-loop trajectory and write it as CSV.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        seed: Option<u64>,
        /// Output CSV (standard output if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an ensemble and write per-step statistics.
    Ensemble {
        #[command(flatten)]
        common: CommonArgs,
        /// Master seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trajectories: Option<usize>,
        /// Worker threads (rayon default if omitted). Does not change results.
        #[arg(long)]
        threads: Option<usize>,
        /// Statistics CSV (standard output if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// JSON summary.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Run the exact-inequality checks.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the fully resolved configuration as JSON.
    Params {
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON configuration file; every key is optional.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long = "eta-f")]
    pub eta_f: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Dephasing per photon (rad).
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<f64>,
}

impl CommonArgs {
    /// The configuration file with command-line overrides applied.
    pub fn load(&self) -> Result<ConfigFile, CliError> {
        let mut file = ConfigFile::load(self.config.as_deref())?;
        if self.eta_f.is_some() {
            file.eta_f = self.eta_f;
        }
        if self.steps.is_some() {
            file.steps = self.steps;
        }
        if self.phi.is_some() {
            file.phi = self.phi;
        }
        Ok(file)
    }
}

/// Runs one command and returns the process exit status.
pub fn run(cli: Cli) -> i32 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("fockstab: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Simulate { common, seed, out } => {
            let file = common.load()?;
            let cfg = file.to_experiment()?;
            let seed = seed.or(file.seed).unwrap_or(DEFAULT_SEED);
            let out = out.or(file.out);
            commands::simulate(&cfg, seed, out.as_deref())?;
        }
        Command::Ensemble {
            common,
            seed,
            trajectories,
            threads,
            out,
            summary,
        } => {
            let file = common.load()?;
            let cfg = file.to_experiment()?;
            let seed = seed.or(file.seed).unwrap_or(DEFAULT_SEED);
            let n_traj = trajectories.or(file.n_traj).unwrap_or(DEFAULT_TRAJECTORIES);
            let out = out.or(file.out);
            let summary = summary.or(file.summary);
            commands::ensemble(
                &cfg,
                n_traj,
                seed,
                threads,
                out.as_deref(),
                summary.as_deref(),
            )?;
        }
        Command::Verify {
            common,
            trials,
            seed,
        } => {
            let file = common.load()?;
            let cfg = file.to_experiment()?;
            let seed = seed.or(file.seed).unwrap_or(DEFAULT_SEED);
            let reports = commands::verify(&cfg, trials, seed)?;
            let mut text = String::new();
            for r in &reports {
                text.push_str(&commands::report_line(r));
                text.push('\n');
            }
            commands::emit(None, &text)?;
            if !reports.iter().all(|r| r.passed) {
                return Ok(exit::VERIFICATION_FAILED);
            }
        }
        Command::Params { common } => {
            let file = common.load()?;
            let cfg = file.to_experiment()?;
            cfg.validate()?;
            let resolved = ConfigFile::resolved(
                &cfg,
                file.n_traj.unwrap_or(DEFAULT_TRAJECTORIES),
                file.seed.unwrap_or(DEFAULT_SEED),
            );
            commands::emit(None, &(resolved.to_json() + "\n"))?;
        }
    }
    Ok(exit::SUCCESS)
}
