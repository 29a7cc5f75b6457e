// Copyright 2026 The fockstab Developers
// SPDX-License-Identifier: Apache-2.0

//! Closed-loop quantum trajectories.
//!
//! One step of the Markov chain:
//!
//! 1. draw `u ~ U[0,1)`; the true outcome is `g` iff `u < P_g(ρ_k)`;
//! 2. project the true state;
//! 3. draw `v ~ U[0,1)`; the detector reports the flipped outcome iff `v < η_f`;
//! 4. condition the filter on the reported outcome, giving `ρᵉˢᵗ_{k+½}`;
//! 5. choose `α_k` from the switched law using `V(ρᵉˢᵗ_k)` and `ρᵉˢᵗ_{k+½}`;
//! 6. displace both the true state and the estimate by `D(α_k)`.
//!
//! Both uniforms are drawn on every step, in this order, from a single
//! per-trajectory ChaCha8 stream, so a `(config, seed)` pair fixes the whole
//! record stream bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::feedback::{lyapunov_v, Branch, FeedbackConfig, FeedbackLaw};
use crate::filter::{FilterInit, FilterState};
use crate::fock::{coherent_state, DensityMatrix, FockOperators};
use crate::matrix::Matrix;
use crate::measurement::{mid_fringe_phi_r, MeasurementModel, Outcome};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub enum InitialState<T> {
    /// `D(√n̄)|0⟩`.
    Coherent,
    Fock(usize),
    Custom(Matrix<T>),
}

/// Whether the feedback acts at all.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ControlMode {
    #[default]
    Feedback,
    /// `α ≡ 0`: pure repeated QND measurement.
    Off,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig<T> {
    pub n_max: usize,
    pub n_bar: usize,
    /// Dephasing per photon (rad).
    pub phi: T,
    /// Ramsey phase (rad); `None` selects mid-fringe for `n_bar`.
    pub phi_r: Option<T>,
    pub feedback: FeedbackConfig<T>,
    /// False-detection probability.
    pub eta_f: T,
    pub steps: usize,
    pub filter_init: FilterInit<T>,
    pub initial_state: InitialState<T>,
    pub control: ControlMode,
}

impl<T: Real> ExperimentConfig<T> {
    /// Reference setup: `n̄ = 3`, `n_max = 15`, `φ = 0.3` at mid-fringe,
    /// `c₁ = 1/13`, `ε = ᾱ = 0.1`, coherent start, matched filter, no
    /// detection errors, 100 steps.
    pub fn reference() -> Self {
        Self {
            n_max: 15,
            n_bar: 3,
            phi: T::lit(0.3),
            phi_r: None,
            feedback: FeedbackConfig::new(3),
            eta_f: T::zero(),
            steps: 100,
            filter_init: FilterInit::Matched,
            initial_state: InitialState::Coherent,
            control: ControlMode::Feedback,
        }
    }

    pub fn resolved_phi_r(&self) -> T {
        self.phi_r
            .unwrap_or_else(|| mid_fringe_phi_r(self.phi, self.n_bar))
    }

    pub fn measurement_model(&self) -> Result<MeasurementModel<T>> {
        MeasurementModel::new(self.phi, self.resolved_phi_r(), self.n_max)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_max == 0 {
            return Err(Error::InvalidConfig {
                key: "n_max",
                reason: "must be at least 1".into(),
            });
        }
        if self.n_bar > self.n_max {
            return Err(Error::InvalidConfig {
                key: "n_bar",
                reason: format!("target {} exceeds n_max = {}", self.n_bar, self.n_max),
            });
        }
        if self.feedback.n_bar != self.n_bar {
            return Err(Error::InvalidConfig {
                key: "n_bar",
                reason: format!(
                    "feedback targets {} but the experiment targets {}",
                    self.feedback.n_bar, self.n_bar
                ),
            });
        }
        self.feedback.validate()?;
        if !(self.eta_f >= T::zero() && self.eta_f <= T::one()) {
            return Err(Error::InvalidConfig {
                key: "eta_f",
                reason: "false-detection probability must lie in [0, 1]".into(),
            });
        }
        if !self.phi.is_finite() {
            return Err(Error::InvalidConfig {
                key: "phi",
                reason: "must be finite".into(),
            });
        }
        if !self.resolved_phi_r().is_finite() {
            return Err(Error::InvalidConfig {
                key: "phi_r",
                reason: "must be finite".into(),
            });
        }
        if let InitialState::Fock(n) = self.initial_state {
            if n > self.n_max {
                return Err(Error::InvalidConfig {
                    key: "initial_state",
                    reason: format!("Fock state {n} exceeds n_max = {}", self.n_max),
                });
            }
        }
        let report = self.measurement_model()?.validate_phases();
        if !report.is_valid() {
            return Err(Error::DegeneratePhases(report));
        }
        Ok(())
    }
}

/// Joint state of the cavity and the filter.
#[derive(Clone, Debug)]
pub struct LoopState<T> {
    pub rho: DensityMatrix<T>,
    pub filter: FilterState<T>,
    /// Number of completed steps.
    pub step: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord<T> {
    /// 1-based index of the completed step.
    pub step: usize,
    pub true_outcome: Outcome,
    pub reported_outcome: Outcome,
    pub alpha: T,
    /// `tr(ρ_k ρ̄)` after the step.
    pub fidelity_true: T,
    /// `tr(ρᵉˢᵗ_k ρ̄)` after the step.
    pub fidelity_est: T,
    /// `V(ρᵉˢᵗ)` before the step: the value that selected the branch.
    pub v_est: T,
    /// `tr(ρ_k ρᵉˢᵗ_k)` after the step.
    pub overlap: T,
    pub branch: Branch,
    /// The report was impossible under the estimate and was replaced by the
    /// opposite outcome.
    pub report_overridden: bool,
}

/// A validated configuration with its operators and tables built.
#[derive(Clone, Debug)]
pub struct Experiment<T> {
    cfg: ExperimentConfig<T>,
    model: MeasurementModel<T>,
    law: FeedbackLaw<T>,
    rho0: DensityMatrix<T>,
    filter0: FilterState<T>,
}

impl<T: Real> Experiment<T> {
    pub fn new(cfg: ExperimentConfig<T>) -> Result<Self> {
        cfg.validate()?;
        let ops = FockOperators::new(cfg.n_max)?;
        let model = cfg.measurement_model()?;
        let rho0 = match &cfg.initial_state {
            InitialState::Coherent => coherent_state(&ops, cfg.n_bar),
            InitialState::Fock(n) => DensityMatrix::fock(cfg.n_max, *n)?,
            InitialState::Custom(m) => {
                if m.dim() != cfg.n_max + 1 {
                    return Err(Error::DimensionMismatch {
                        expected: cfg.n_max + 1,
                        actual: m.dim(),
                    });
                }
                DensityMatrix::new(m.clone())?
            }
        };
        let filter0 = FilterState::init(&cfg.filter_init, &rho0)?;
        let law = FeedbackLaw::new(ops, cfg.feedback.clone())?;
        Ok(Self {
            cfg,
            model,
            law,
            rho0,
            filter0,
        })
    }

    pub fn config(&self) -> &ExperimentConfig<T> {
        &self.cfg
    }

    pub fn model(&self) -> &MeasurementModel<T> {
        &self.model
    }

    pub fn operators(&self) -> &FockOperators<T> {
        self.law.operators()
    }

    pub fn law(&self) -> &FeedbackLaw<T> {
        &self.law
    }

    pub fn initial_state(&self) -> LoopState<T> {
        LoopState {
            rho: self.rho0.clone(),
            filter: self.filter0.clone(),
            step: 0,
        }
    }

    pub fn step<R: Rng + ?Sized>(
        &self,
        state: &LoopState<T>,
        rng: &mut R,
    ) -> Result<(LoopState<T>, TrajectoryRecord<T>)> {
        let n_bar = self.cfg.n_bar;
        let u = T::lit(rng.random::<f64>());
        let v = T::lit(rng.random::<f64>());

        let p_g = self.model.probability(&state.rho, Outcome::Ground);
        let drawn = if u < p_g {
            Outcome::Ground
        } else {
            Outcome::Excited
        };
        // Only reachable when the drawn outcome carries probability <= 1e-12.
        let (true_outcome, rho_half) = match self.model.project(&state.rho, drawn) {
            Ok(half) => (drawn, half),
            Err(Error::ZeroProbabilityOutcome { .. }) => {
                let other = drawn.flipped();
                (other, self.model.project(&state.rho, other)?)
            }
            Err(e) => return Err(e),
        };

        let mut reported = if v < self.cfg.eta_f {
            true_outcome.flipped()
        } else {
            true_outcome
        };
        let mut report_overridden = false;
        let est_half = match state.filter.condition(reported, &self.model) {
            Ok(half) => half,
            Err(Error::ZeroProbabilityOutcome { .. }) => {
                reported = reported.flipped();
                report_overridden = true;
                state.filter.condition(reported, &self.model)?
            }
            Err(e) => return Err(e),
        };

        let v_est = lyapunov_v(state.filter.estimate(), n_bar);
        let (alpha, branch) = match self.cfg.control {
            ControlMode::Feedback => self.law.switched(v_est, &est_half),
            ControlMode::Off => (T::zero(), Branch::Linear),
        };

        let d = self.law.operators().displacement(alpha);
        let rho = rho_half.displaced(&d);
        let filter = state.filter.inject(&est_half, &d);

        let record = TrajectoryRecord {
            step: state.step + 1,
            true_outcome,
            reported_outcome: reported,
            alpha,
            fidelity_true: rho.get(n_bar, n_bar),
            fidelity_est: filter.estimate().get(n_bar, n_bar),
            v_est,
            overlap: rho.overlap(filter.estimate()),
            branch,
            report_overridden,
        };
        let next = LoopState {
            rho,
            filter,
            step: state.step + 1,
        };
        Ok((next, record))
    }

    /// Runs `cfg.steps` steps, handing every post-step state to `observe`.
    pub fn run_with<F>(&self, seed: u64, mut observe: F) -> Result<Vec<TrajectoryRecord<T>>>
    where
        F: FnMut(&LoopState<T>, &TrajectoryRecord<T>),
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut state = self.initial_state();
        let mut records = Vec::with_capacity(self.cfg.steps);
        for _ in 0..self.cfg.steps {
            let (next, record) = self.step(&state, &mut rng)?;
            observe(&next, &record);
            records.push(record);
            state = next;
        }
        Ok(records)
    }

    pub fn run(&self, seed: u64) -> Result<Vec<TrajectoryRecord<T>>> {
        self.run_with(seed, |_, _| {})
    }

    /// Exact one-step conditional expectations under the switched law.
    pub fn conditional_step_expectation(
        &self,
        rho: &DensityMatrix<T>,
        rho_est: &DensityMatrix<T>,
    ) -> Result<StepExpectation<T>> {
        let v_pre = lyapunov_v(rho_est, self.cfg.n_bar);
        conditional_step_expectation(
            rho,
            rho_est,
            |half: &DensityMatrix<T>, _: &DensityMatrix<T>| self.law.switched(v_pre, half).0,
            &self.model,
            self.law.operators(),
            self.cfg.n_bar,
        )
    }
}

/// Builds the experiment and runs one trajectory.
pub fn run_trajectory<T: Real>(
    cfg: &ExperimentConfig<T>,
    seed: u64,
) -> Result<Vec<TrajectoryRecord<T>>> {
    Experiment::new(cfg.clone())?.run(seed)
}

/// `E[V(ρ_{k+1})]` and `E[tr(ρ_{k+1} ρᵉˢᵗ_{k+1})]` given `(ρ_k, ρᵉˢᵗ_k)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepExpectation<T> {
    pub v: T,
    pub overlap: T,
}

/// Enumerates both outcomes exactly, weighted by the true-state
/// probabilities, with a perfect detector. `policy(ρᵉˢᵗ_{k+½}, ρᵉˢᵗ_k)` gives
/// the control applied on each branch.
pub fn conditional_step_expectation<T, P>(
    rho: &DensityMatrix<T>,
    rho_est: &DensityMatrix<T>,
    policy: P,
    model: &MeasurementModel<T>,
    ops: &FockOperators<T>,
    n_bar: usize,
) -> Result<StepExpectation<T>>
where
    T: Real,
    P: Fn(&DensityMatrix<T>, &DensityMatrix<T>) -> T,
{
    let floor = T::lit(crate::measurement::PROBABILITY_FLOOR);
    let mut expectation = StepExpectation {
        v: T::zero(),
        overlap: T::zero(),
    };
    for s in Outcome::BOTH {
        let (unnormalized, p) = model.unnormalized(rho, s);
        if !(p > floor) {
            continue;
        }
        let half = DensityMatrix::renormalized(unnormalized);
        let est_half = model.project(rho_est, s)?;
        let d = ops.displacement(policy(&est_half, rho_est));
        let next = half.displaced(&d);
        let next_est = est_half.displaced(&d);
        expectation.v += p * lyapunov_v(&next, n_bar);
        expectation.overlap += p * next.overlap(&next_est);
    }
    Ok(expectation)
}
