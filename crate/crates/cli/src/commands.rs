// Copyright 2026 The fockstab Developers
// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use fockstab::ensemble::{run_ensemble, run_ensemble_with_threads};
use fockstab::trajectory::run_trajectory;
use fockstab::verify::{run_all_checks, CheckReport};
use fockstab::{EnsembleStats64, Error, ExperimentConfig64, TrajectoryRecord64};
use serde_json::json;

use crate::config::ConfigFile;
use crate::error::CliError;
use crate::format::real;

pub const TRAJECTORY_HEADER: &str =
    "step,true_outcome,reported_outcome,alpha,fidelity_true,fidelity_est,v_est";
pub const ENSEMBLE_HEADER: &str = "step,mean_fidelity,std_fidelity,q05,q50,q95,mean_overlap_filter";
/// Steps whose mean fidelity is copied into the ensemble summary.
pub const SUMMARY_STEPS: [usize; 3] = [30, 40, 100];

pub fn trajectory_csv(records: &[TrajectoryRecord64]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.step,
            r.true_outcome,
            r.reported_outcome,
            real(r.alpha),
            real(r.fidelity_true),
            real(r.fidelity_est),
            real(r.v_est)
        )
        .expect("writing to a String");
    }
    out
}

pub fn ensemble_csv(stats: &EnsembleStats64) -> String {
    let mut out = String::with_capacity(96 * (stats.steps + 1));
    out.push_str(ENSEMBLE_HEADER);
    out.push('\n');
    for k in 0..stats.steps {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            k + 1,
            real(stats.mean_fidelity[k]),
            real(stats.std_fidelity[k]),
            real(stats.q05[k]),
            real(stats.q50[k]),
            real(stats.q95[k]),
            real(stats.mean_overlap_filter[k])
        )
        .expect("writing to a String");
    }
    out
}

/// Config echo, run parameters and the mean fidelity at [`SUMMARY_STEPS`]
/// (`null` past the end of the run).
pub fn ensemble_summary(
    cfg: &ExperimentConfig64,
    stats: &EnsembleStats64,
    master_seed: u64,
) -> serde_json::Value {
    let mut summary = json!({
        "config": ConfigFile::echo(cfg),
        "phi_r_resolved": cfg.resolved_phi_r(),
        "n_traj": stats.n_traj,
        "master_seed": master_seed,
        "steps": stats.steps,
    });
    for step in SUMMARY_STEPS {
        summary[format!("fidelity_at_{step}")] = json!(stats.fidelity_at(step));
    }
    summary
}

/// Writes to `path`, or to standard output when `path` is `None`.
pub fn emit(path: Option<&Path>, contents: &str) -> Result<(), CliError> {
    match path {
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::io("create", path, e))?;
            let mut w = BufWriter::new(file);
            w.write_all(contents.as_bytes())
                .and_then(|()| w.flush())
                .map_err(|e| CliError::io("write", path, e))
        }
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(contents.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(|e| CliError::io("write", "<stdout>", e))
        }
    }
}

pub fn simulate(cfg: &ExperimentConfig64, seed: u64, out: Option<&Path>) -> Result<(), CliError> {
    cfg.validate()?;
    let records = run_trajectory(cfg, seed)?;
    emit(out, &trajectory_csv(&records))
}

pub fn ensemble(
    cfg: &ExperimentConfig64,
    n_traj: usize,
    master_seed: u64,
    threads: Option<usize>,
    out: Option<&Path>,
    summary: Option<&Path>,
) -> Result<EnsembleStats64, CliError> {
    cfg.validate()?;
    let stats = match threads {
        Some(t) => run_ensemble_with_threads(cfg, n_traj, master_seed, t)?,
        None => run_ensemble(cfg, n_traj, master_seed)?,
    };
    emit(out, &ensemble_csv(&stats))?;
    if let Some(path) = summary {
        let text = serde_json::to_string_pretty(&ensemble_summary(cfg, &stats, master_seed))
            .expect("summary serializes");
        emit(Some(path), &(text + "\n"))?;
    }
    Ok(stats)
}

/// `name  trials  max_violation  threshold  PASS|FAIL`.
pub fn report_line(r: &CheckReport) -> String {
    format!(
        "{:<30}  {:>6}  {:>12.3e}  {:>8.1e}  {}",
        r.name,
        r.trials,
        r.max_violation,
        r.threshold,
        if r.passed { "PASS" } else { "FAIL" }
    )
}

/// Runs every certificate. Degenerate phases are reported as a failed check
/// rather than rejected as a configuration error.
pub fn verify(
    cfg: &ExperimentConfig64,
    trials: usize,
    seed: u64,
) -> Result<Vec<CheckReport>, CliError> {
    match cfg.validate() {
        Ok(()) | Err(Error::DegeneratePhases(_)) => {}
        Err(e) => return Err(e.into()),
    }
    Ok(run_all_checks(cfg, trials, seed)?)
}
