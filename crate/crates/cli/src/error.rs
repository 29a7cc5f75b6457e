// Copyright 2026 The fockstab Developers
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use thiserror::Error;

/// Process exit statuses.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const VERIFICATION_FAILED: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const IO: i32 = 3;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("configuration error in `{key}`: {reason}")]
    ConfigKey { key: String, reason: String },

    #[error("cannot {action} {}: {source}", path.display())]
    Io {
        action: &'static str,
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("simulation failed: {0}")]
    Simulation(fockstab::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::ConfigKey { .. } => exit::CONFIG,
            CliError::Io { .. } => exit::IO,
            // A runtime numerical failure is neither bad input nor bad I/O.
            CliError::Simulation(_) => exit::VERIFICATION_FAILED,
        }
    }

    pub fn io(action: &'static str, path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            action,
            path: path.into(),
            source,
        }
    }
}

/// Validation failures are configuration errors that name their key.
impl From<fockstab::Error> for CliError {
    fn from(e: fockstab::Error) -> Self {
        use fockstab::Error as E;
        match e {
            E::InvalidConfig { key, reason } => CliError::ConfigKey {
                key: key.into(),
                reason,
            },
            E::DegeneratePhases(report) => CliError::ConfigKey {
                key: "phi".into(),
                reason: format!(
                    "the measurement phases must satisfy (phi_r+phi)/2 + n*phi != 0 mod pi/2 \
                     for every n and give pairwise distinct cos^2 values; violated: {report}"
                ),
            },
            E::InvalidTruncation(_) => CliError::ConfigKey {
                key: "n_max".into(),
                reason: e.to_string(),
            },
            E::TargetOutOfRange { .. } => CliError::ConfigKey {
                key: "n_bar".into(),
                reason: e.to_string(),
            },
            E::InvalidDensityMatrix(_) | E::DimensionMismatch { .. } => {
                CliError::Config(e.to_string())
            }
            E::ZeroProbabilityOutcome { .. } => CliError::Simulation(e),
        }
    }
}
