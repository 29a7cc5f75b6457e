// Copyright 2026 The fockstab Developers
// SPDX-License-Identifier: Apache-2.0

//! Discrete-time quantum filter.
//!
//! The estimate replays the jump dynamics with the *reported* outcome and the
//! *applied* control:
//!
//! ```text
//! ρᵉˢᵗ_{k+½} = M_s ρᵉˢᵗ_k M_s / tr(M_s ρᵉˢᵗ_k M_s)
//! ρᵉˢᵗ_{k+1} = D(α_k) ρᵉˢᵗ_{k+½} D(−α_k)
//! ```

use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, FockOperators};
use crate::matrix::Matrix;
use crate::measurement::{MeasurementModel, Outcome};
use crate::scalar::Real;

/// How the estimate is initialized.
#[derive(Clone, Debug, PartialEq)]
pub enum FilterInit<T> {
    /// Copy of the system's initial state.
    Matched,
    /// Maximally mixed `I/(n_max+1)`.
    Uniform,
    /// Caller-supplied matrix, validated on use.
    Custom(Matrix<T>),
}

impl<T> FilterInit<T> {
    pub fn kind(&self) -> InitKind {
        match self {
            FilterInit::Matched => InitKind::Matched,
            FilterInit::Uniform => InitKind::Uniform,
            FilterInit::Custom(_) => InitKind::Custom,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitKind {
    Matched,
    Uniform,
    Custom,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FilterState<T> {
    rho_est: DensityMatrix<T>,
    init_kind: InitKind,
}

/// Result of one filter step.
#[derive(Clone, Debug)]
pub struct FilterUpdate<T> {
    /// Post-measurement, pre-control estimate `ρᵉˢᵗ_{k+½}`.
    pub half: DensityMatrix<T>,
    pub next: FilterState<T>,
}

impl<T: Real> FilterState<T> {
    pub fn init(init: &FilterInit<T>, rho_system: &DensityMatrix<T>) -> Result<Self> {
        let rho_est = match init {
            FilterInit::Matched => rho_system.clone(),
            FilterInit::Uniform => DensityMatrix::maximally_mixed(rho_system.n_max())?,
            FilterInit::Custom(m) => {
                if m.dim() != rho_system.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: rho_system.dim(),
                        actual: m.dim(),
                    });
                }
                DensityMatrix::new(m.clone())?
            }
        };
        Ok(Self {
            rho_est,
            init_kind: init.kind(),
        })
    }

    pub fn from_estimate(rho_est: DensityMatrix<T>) -> Self {
        Self {
            rho_est,
            init_kind: InitKind::Custom,
        }
    }

    pub fn estimate(&self) -> &DensityMatrix<T> {
        &self.rho_est
    }

    pub fn init_kind(&self) -> InitKind {
        self.init_kind
    }

    /// Measurement half-step with the reported outcome.
    pub fn condition(
        &self,
        reported: Outcome,
        model: &MeasurementModel<T>,
    ) -> Result<DensityMatrix<T>> {
        model.project(&self.rho_est, reported)
    }

    /// Control half-step from an already conditioned estimate.
    pub fn inject(&self, half: &DensityMatrix<T>, d: &Matrix<T>) -> Self {
        Self {
            rho_est: half.displaced(d),
            init_kind: self.init_kind,
        }
    }

    /// Full step: condition on `reported`, then displace by `alpha`.
    pub fn update(
        &self,
        reported: Outcome,
        alpha: T,
        model: &MeasurementModel<T>,
        ops: &FockOperators<T>,
    ) -> Result<FilterUpdate<T>> {
        let half = self.condition(reported, model)?;
        let next = self.inject(&half, &ops.displacement(alpha));
        Ok(FilterUpdate { half, next })
    }
}
