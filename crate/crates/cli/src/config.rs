// Copyright 2026 The fockstab Developers
// SPDX-License-Identifier: Apache-2.0

//! JSON run configuration.
//!
//! Every key is optional. Missing keys take the reference values: `n_max`
//! 15, `n_bar` 3, `phi` 0.3, `phi_r` mid-fringe for `n_bar`, `c1 = 1/(4 n_bar
//! + 1)`, `epsilon` 0.1, `alpha_bar` 0.1, `grid_points` 201, `eta_f` 0,
//! `steps` 100, matched filter, coherent initial state, feedback on.

use std::fs;
use std::path::{Path, PathBuf};

use fockstab::feedback::{default_gain, FeedbackConfig};
use fockstab::filter::FilterInit;
use fockstab::fock::DensityMatrix;
use fockstab::trajectory::{ControlMode, ExperimentConfig, InitialState};
use fockstab::{ExperimentConfig64, Matrix64};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DEFAULT_N_MAX: usize = 15;
pub const DEFAULT_N_BAR: usize = 3;
pub const DEFAULT_PHI: f64 = 0.3;
pub const DEFAULT_STEPS: usize = 100;
pub const DEFAULT_TRAJECTORIES: usize = 1000;
pub const DEFAULT_SEED: u64 = 0;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_bar: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_bar: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_f: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter_init: Option<FilterInitSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<InitialStateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control: Option<ControlSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_traj: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<PathBuf>,
}

/// `"matched"`, `"uniform"` or `{"custom": [[...], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterInitSpec {
    Matched,
    Uniform,
    Custom(Vec<Vec<f64>>),
}

/// `"coherent"`, `{"fock": n}` or `{"custom": [[...], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialStateSpec {
    Coherent,
    Fock(usize),
    Custom(Vec<Vec<f64>>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControlSpec {
    Feedback,
    Off,
}

impl ConfigFile {
    /// Reads and parses `path`; `None` yields the all-defaults document.
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| CliError::io("read", path, e))?;
                Self::parse(&text)
            }
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let key = e.path().to_string();
            let reason = e.inner().to_string();
            if key.is_empty() || key == "." {
                CliError::Config(reason)
            } else {
                CliError::ConfigKey { key, reason }
            }
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Builds the experiment. Matrices are checked here, everything else by
    /// [`ExperimentConfig::validate`].
    pub fn to_experiment(&self) -> Result<ExperimentConfig64, CliError> {
        let n_max = self.n_max.unwrap_or(DEFAULT_N_MAX);
        let n_bar = self.n_bar.unwrap_or(DEFAULT_N_BAR);
        let defaults = FeedbackConfig::<f64>::new(n_bar);
        let feedback = FeedbackConfig {
            n_bar,
            c1: self.c1.unwrap_or_else(|| default_gain(n_bar)),
            epsilon: self.epsilon.unwrap_or(defaults.epsilon),
            alpha_bar: self.alpha_bar.unwrap_or(defaults.alpha_bar),
            grid_points: self.grid_points.unwrap_or(defaults.grid_points),
        };
        let filter_init = match &self.filter_init {
            None | Some(FilterInitSpec::Matched) => FilterInit::Matched,
            Some(FilterInitSpec::Uniform) => FilterInit::Uniform,
            Some(FilterInitSpec::Custom(rows)) => {
                FilterInit::Custom(density_matrix("filter_init", rows, n_max)?)
            }
        };
        let initial_state = match &self.initial_state {
            None | Some(InitialStateSpec::Coherent) => InitialState::Coherent,
            Some(InitialStateSpec::Fock(n)) => InitialState::Fock(*n),
            Some(InitialStateSpec::Custom(rows)) => {
                InitialState::Custom(density_matrix("initial_state", rows, n_max)?)
            }
        };
        Ok(ExperimentConfig {
            n_max,
            n_bar,
            phi: self.phi.unwrap_or(DEFAULT_PHI),
            phi_r: self.phi_r,
            feedback,
            eta_f: self.eta_f.unwrap_or(0.0),
            steps: self.steps.unwrap_or(DEFAULT_STEPS),
            filter_init,
            initial_state,
            control: match self.control {
                None | Some(ControlSpec::Feedback) => ControlMode::Feedback,
                Some(ControlSpec::Off) => ControlMode::Off,
            },
        })
    }

    /// Every experiment key written out; `phi_r` stays absent when it was
    /// left to the mid-fringe default.
    pub fn echo(cfg: &ExperimentConfig64) -> Self {
        Self {
            n_max: Some(cfg.n_max),
            n_bar: Some(cfg.n_bar),
            phi: Some(cfg.phi),
            phi_r: cfg.phi_r,
            c1: Some(cfg.feedback.c1),
            epsilon: Some(cfg.feedback.epsilon),
            alpha_bar: Some(cfg.feedback.alpha_bar),
            grid_points: Some(cfg.feedback.grid_points),
            eta_f: Some(cfg.eta_f),
            steps: Some(cfg.steps),
            filter_init: Some(match &cfg.filter_init {
                FilterInit::Matched => FilterInitSpec::Matched,
                FilterInit::Uniform => FilterInitSpec::Uniform,
                FilterInit::Custom(m) => FilterInitSpec::Custom(m.to_rows()),
            }),
            initial_state: Some(match &cfg.initial_state {
                InitialState::Coherent => InitialStateSpec::Coherent,
                InitialState::Fock(n) => InitialStateSpec::Fock(*n),
                InitialState::Custom(m) => InitialStateSpec::Custom(m.to_rows()),
            }),
            control: Some(match cfg.control {
                ControlMode::Feedback => ControlSpec::Feedback,
                ControlMode::Off => ControlSpec::Off,
            }),
            ..Self::default()
        }
    }

    /// [`echo`](Self::echo) with `phi_r` resolved and the run parameters
    /// filled in.
    pub fn resolved(cfg: &ExperimentConfig64, n_traj: usize, seed: u64) -> Self {
        Self {
            phi_r: Some(cfg.resolved_phi_r()),
            n_traj: Some(n_traj),
            seed: Some(seed),
            ..Self::echo(cfg)
        }
    }
}

fn density_matrix(key: &str, rows: &[Vec<f64>], n_max: usize) -> Result<Matrix64, CliError> {
    let bad = |reason: String| CliError::ConfigKey {
        key: key.into(),
        reason,
    };
    let m =
        Matrix64::from_rows(rows).ok_or_else(|| bad("rows must form a square matrix".into()))?;
    if m.dim() != n_max + 1 {
        return Err(bad(format!(
            "matrix is {0}x{0} but n_max = {n_max} needs {1}x{1}",
            m.dim(),
            n_max + 1
        )));
    }
    DensityMatrix::new(m.clone()).map_err(|e| bad(e.to_string()))?;
    Ok(m)
}
