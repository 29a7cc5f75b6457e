// Copyright 2026 The fockstab Developers
// SPDX-License-Identifier: Apache-2.0

//! Measurement-based feedback stabilization of photon-number states.
//!
//! A cavity mode, truncated to `n_max` photons, is probed by a stream of
//! atoms performing a QND measurement of the photon number. After each
//! detection a coherent pulse `D(α)` is injected, with `α` chosen by a
//! switched Lyapunov law evaluated on a quantum-filter estimate of the
//! cavity state.
//!
//! - [`fock`]: truncated ladder operators, displacement, coherent states.
//! - [`measurement`]: the `(M_g, M_e)` channel and its phase conditions.
//! - [`feedback`]: Lyapunov functions and the linear/argmax/switched laws.
//! - [`filter`]: the discrete-time quantum filter.
//! - [`trajectory`]: the closed-loop Markov chain with detection errors.
//! - [`ensemble`]: reproducible parallel ensembles and their statistics.
//! - [`verify`]: exact-enumeration certificates of the underlying inequalities.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix the scalar to `f64`, which every stated tolerance assumes.

// `!(x <= tol)` is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ensemble;
pub mod error;
pub mod feedback;
pub mod filter;
pub mod fock;
pub mod matrix;
pub mod measurement;
pub mod scalar;
pub mod trajectory;
pub mod verify;

pub use error::{Error, Result};
pub use measurement::Outcome;
pub use scalar::Real;

pub type Matrix64 = matrix::Matrix<f64>;
pub type DensityMatrix64 = fock::DensityMatrix<f64>;
pub type FockOperators64 = fock::FockOperators<f64>;
pub type MeasurementModel64 = measurement::MeasurementModel<f64>;
pub type FeedbackConfig64 = feedback::FeedbackConfig<f64>;
pub type FeedbackLaw64 = feedback::FeedbackLaw<f64>;
pub type FilterState64 = filter::FilterState<f64>;
pub type ExperimentConfig64 = trajectory::ExperimentConfig<f64>;
pub type Experiment64 = trajectory::Experiment<f64>;
pub type TrajectoryRecord64 = trajectory::TrajectoryRecord<f64>;
pub type EnsembleStats64 = ensemble::EnsembleStats<f64>;

pub type DensityMatrix32 = fock::DensityMatrix<f32>;
pub type ExperimentConfig32 = trajectory::ExperimentConfig<f32>;
pub type EnsembleStats32 = ensemble::EnsembleStats<f32>;
