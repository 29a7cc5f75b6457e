// Copyright 2026 The fockstab Developers
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

use crate::measurement::{Outcome, PhaseReport};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("photon-number truncation n_max must be at least 1, got {0}")]
    InvalidTruncation(usize),

    #[error("target photon number {n_bar} exceeds truncation n_max = {n_max}")]
    TargetOutOfRange { n_bar: usize, n_max: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("outcome {outcome} has probability {probability:e}, below the sampling floor")]
    ZeroProbabilityOutcome { outcome: Outcome, probability: f64 },

    #[error("invalid value for `{key}`: {reason}")]
    InvalidConfig { key: &'static str, reason: String },

    #[error("measurement phases violate the convergence hypotheses: {0}")]
    DegeneratePhases(PhaseReport),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
