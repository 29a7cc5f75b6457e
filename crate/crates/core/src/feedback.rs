// Copyright 2026 The fockstab Developers
// SPDX-License-Identifier: Apache-2.0

//! Lyapunov feedback laws.
//!
//! With target `ρ̄ = |n̄⟩⟨n̄|` and `V(ρ) = 1 − tr(ρρ̄)`, the linear law
//! `α = c₁ tr([ρ̄, a† − a] ρ)` pushes `V` down to second order in `α`. Near the
//! other Fock states (where `V ≈ 1`) the drift vanishes, so the switched law
//! falls back to the injection in `[−ᾱ, ᾱ]` that maximizes the fidelity after
//! displacement.

use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, FockOperators};
use crate::matrix::{dot, Matrix};
use crate::scalar::Real;

/// Parameters of the switched law.
#[derive(Clone, Debug, PartialEq)]
pub struct FeedbackConfig<T> {
    /// Target photon number `n̄`.
    pub n_bar: usize,
    /// Gain `c₁ > 0` of the linear branch.
    pub c1: T,
    /// Switching threshold: the linear branch is used while `V ≤ 1 − ε`.
    pub epsilon: T,
    /// Injection bound `ᾱ` of the argmax branch.
    pub alpha_bar: T,
    /// Number of points of the uniform argmax grid over `[−ᾱ, ᾱ]` (odd).
    pub grid_points: usize,
}

impl<T: Real> FeedbackConfig<T> {
    pub const DEFAULT_GRID_POINTS: usize = 201;

    /// `c₁ = 1/(4n̄+1)`, `ε = ᾱ = 1/10`, 201 grid points.
    pub fn new(n_bar: usize) -> Self {
        Self {
            n_bar,
            c1: default_gain(n_bar),
            epsilon: T::lit(0.1),
            alpha_bar: T::lit(0.1),
            grid_points: Self::DEFAULT_GRID_POINTS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key, reason: &str| {
            Err(Error::InvalidConfig {
                key,
                reason: reason.to_owned(),
            })
        };
        if !(self.c1 > T::zero() && self.c1.is_finite()) {
            return bad("c1", "gain must be positive and finite");
        }
        if !(self.epsilon > T::zero() && self.epsilon < T::one()) {
            return bad("epsilon", "switching threshold must lie in (0, 1)");
        }
        if !(self.alpha_bar > T::zero() && self.alpha_bar.is_finite()) {
            return bad("alpha_bar", "injection bound must be positive and finite");
        }
        if self.grid_points < 3 || self.grid_points.is_multiple_of(2) {
            return bad(
                "grid_points",
                "must be odd and at least 3 so that 0 is on the grid",
            );
        }
        Ok(())
    }
}

/// How `c₁` is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GainRule {
    /// `1/(4n̄+1)`, the value used for the reference simulations.
    Simulation,
    /// `1/tr([ρ̄, a†−a]²)`, maximizing the one-step fidelity gain near `ρ̄`
    /// (≈ `1/(4n̄+2)` away from the truncation edge).
    CommutatorTrace,
}

impl GainRule {
    pub fn gain<T: Real>(self, ops: &FockOperators<T>, n_bar: usize) -> T {
        match self {
            GainRule::Simulation => default_gain(n_bar),
            GainRule::CommutatorTrace => T::one() / commutator_square_trace(ops, n_bar),
        }
    }
}

/// `1/(4n̄+1)`.
pub fn default_gain<T: Real>(n_bar: usize) -> T {
    T::one() / T::from_usize_lossy(4 * n_bar + 1)
}

/// `[ρ̄, a† − a]`.
fn target_commutator<T: Real>(ops: &FockOperators<T>, n_bar: usize) -> Matrix<T> {
    let mut target = Matrix::zeros(ops.dim());
    target[(n_bar, n_bar)] = T::one();
    let q = ops.generator();
    &target.matmul(q) - &q.matmul(&target)
}

/// `tr([ρ̄, a†−a] [ρ̄, a†−a])`.
pub fn commutator_square_trace<T: Real>(ops: &FockOperators<T>, n_bar: usize) -> T {
    let c = target_commutator(ops, n_bar);
    c.trace_product(&c)
}

/// `V(ρ) = 1 − ρ[n̄, n̄]`.
pub fn lyapunov_v<T: Real>(rho: &DensityMatrix<T>, n_bar: usize) -> T {
    T::one() - rho.get(n_bar, n_bar)
}

/// `W(ρ) = 1 − ρ[n̄, n̄]²`.
pub fn lyapunov_w<T: Real>(rho: &DensityMatrix<T>, n_bar: usize) -> T {
    let f = rho.get(n_bar, n_bar);
    T::one() - f * f
}

/// `tr([ρ̄, a† − a] ρ)`.
pub fn drift_term<T: Real>(rho: &DensityMatrix<T>, ops: &FockOperators<T>, n_bar: usize) -> T {
    target_commutator(ops, n_bar).trace_product(rho.matrix())
}

pub fn feedback_linear<T: Real>(
    rho_half: &DensityMatrix<T>,
    ops: &FockOperators<T>,
    cfg: &FeedbackConfig<T>,
) -> T {
    cfg.c1 * drift_term(rho_half, ops, cfg.n_bar)
}

/// Grid maximizer of `tr(ρ̄ D(α) ρ D(−α))` over `[−ᾱ, ᾱ]`.
///
/// Builds the grid from scratch; closed loops should hold a [`FeedbackLaw`].
pub fn feedback_argmax<T: Real>(
    rho_half: &DensityMatrix<T>,
    ops: &FockOperators<T>,
    cfg: &FeedbackConfig<T>,
) -> T {
    FeedbackLaw::new(ops.clone(), cfg.clone())
        .expect("feedback configuration")
        .argmax(rho_half)
}

/// Switched law; `v_pre` is `V` of the state before the measurement.
pub fn feedback_switched<T: Real>(
    v_pre: T,
    rho_half: &DensityMatrix<T>,
    ops: &FockOperators<T>,
    cfg: &FeedbackConfig<T>,
) -> T {
    match Branch::select(v_pre, cfg.epsilon) {
        Branch::Linear => feedback_linear(rho_half, ops, cfg),
        Branch::Argmax => feedback_argmax(rho_half, ops, cfg),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Linear,
    Argmax,
}

impl Branch {
    /// Linear while `V ≤ 1 − ε` (boundary included).
    pub fn select<T: Real>(v_pre: T, epsilon: T) -> Self {
        if v_pre <= T::one() - epsilon {
            Branch::Linear
        } else {
            Branch::Argmax
        }
    }
}

/// Symmetric uniform grid over `[−ᾱ, ᾱ]`, ordered by tie-break priority:
/// smallest `|α|` first, negative before positive.
pub fn argmax_grid<T: Real>(alpha_bar: T, grid_points: usize) -> Vec<T> {
    let half = grid_points / 2;
    let h = T::from_usize_lossy(half);
    let mut grid = vec![T::zero()];
    for k in 1..=half {
        let a = alpha_bar * T::from_usize_lossy(k) / h;
        grid.push(-a);
        grid.push(a);
    }
    grid
}

/// Switched law with the argmax grid precomputed.
///
/// Only row `n̄` of each `D(α)` enters the argmax objective
/// `tr(ρ̄ D ρ Dᵀ) = d ρ dᵀ`, so the table stores those rows.
#[derive(Clone, Debug)]
pub struct FeedbackLaw<T> {
    ops: FockOperators<T>,
    cfg: FeedbackConfig<T>,
    commutator: Matrix<T>,
    grid: Vec<(T, Vec<T>)>,
}

impl<T: Real> FeedbackLaw<T> {
    pub fn new(ops: FockOperators<T>, cfg: FeedbackConfig<T>) -> Result<Self> {
        cfg.validate()?;
        ops.check_target(cfg.n_bar)?;
        let grid = argmax_grid(cfg.alpha_bar, cfg.grid_points)
            .into_iter()
            .map(|alpha| (alpha, ops.displacement(alpha).row(cfg.n_bar).to_vec()))
            .collect();
        let commutator = target_commutator(&ops, cfg.n_bar);
        Ok(Self {
            ops,
            cfg,
            commutator,
            grid,
        })
    }

    pub fn config(&self) -> &FeedbackConfig<T> {
        &self.cfg
    }

    pub fn operators(&self) -> &FockOperators<T> {
        &self.ops
    }

    pub fn drift(&self, rho: &DensityMatrix<T>) -> T {
        self.commutator.trace_product(rho.matrix())
    }

    pub fn linear(&self, rho_half: &DensityMatrix<T>) -> T {
        self.cfg.c1 * self.drift(rho_half)
    }

    /// Fidelity after displacing by the `k`-th grid value.
    fn grid_objective(&self, k: usize, rho: &DensityMatrix<T>) -> T {
        let row = &self.grid[k].1;
        dot(row, &rho.matrix().matvec(row))
    }

    /// Argmax over the grid with deterministic tie-breaking.
    pub fn argmax(&self, rho_half: &DensityMatrix<T>) -> T {
        let tie = T::epsilon() * T::lit(16.0);
        let mut best = (self.grid[0].0, self.grid_objective(0, rho_half));
        for k in 1..self.grid.len() {
            let value = self.grid_objective(k, rho_half);
            if value > best.1 + tie {
                best = (self.grid[k].0, value);
            }
        }
        best.0
    }

    /// Grid values and their objective, in priority order.
    pub fn argmax_profile(&self, rho_half: &DensityMatrix<T>) -> Vec<(T, T)> {
        (0..self.grid.len())
            .map(|k| (self.grid[k].0, self.grid_objective(k, rho_half)))
            .collect()
    }

    pub fn switched(&self, v_pre: T, rho_half: &DensityMatrix<T>) -> (T, Branch) {
        let branch = Branch::select(v_pre, self.cfg.epsilon);
        let alpha = match branch {
            Branch::Linear => self.linear(rho_half),
            Branch::Argmax => self.argmax(rho_half),
        };
        (alpha, branch)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{apply_displacement, coherent_state, fidelity};
    use proptest::prelude::*;

    fn ops() -> FockOperators<f64> {
        FockOperators::new(15).unwrap()
    }

    fn target() -> DensityMatrix<f64> {
        DensityMatrix::fock(15, 3).unwrap()
    }

    fn displaced_target(s: f64) -> DensityMatrix<f64> {
        apply_displacement(&target(), &ops().displacement(s))
    }

    /// Entrywise `Σ_ij [ρ̄, q]_ij ρ_ji` with the commutator expanded by hand.
    fn brute_force_drift(rho: &DensityMatrix<f64>, q: &Matrix<f64>, n_bar: usize) -> f64 {
        let d = rho.dim();
        let bar = |i: usize, j: usize| if i == n_bar && j == n_bar { 1.0 } else { 0.0 };
        let mut acc = 0.0;
        for i in 0..d {
            for j in 0..d {
                let mut c = 0.0;
                for k in 0..d {
                    c += bar(i, k) * q[(k, j)] - q[(i, k)] * bar(k, j);
                }
                acc += c * rho.get(j, i);
            }
        }
        acc
    }

    #[test]
    fn lyapunov_values() {
        assert_eq!(lyapunov_v(&target(), 3), 0.0);
        assert_eq!(
            lyapunov_v(&DensityMatrix::<f64>::fock(15, 5).unwrap(), 3),
            1.0
        );
        let coh = coherent_state(&ops(), 3);
        assert!((lyapunov_v(&coh, 3) - 0.7760).abs() < 1e-3);
        assert_eq!(lyapunov_w(&target(), 3), 0.0);
        let half = DensityMatrix::new(Matrix::identity(2).scaled(0.5)).unwrap();
        assert_eq!(lyapunov_w(&half, 1), 0.75);
        let v = lyapunov_v(&coh, 3);
        assert!((lyapunov_w(&coh, 3) - (1.0 - (1.0 - v).powi(2))).abs() < 1e-15);
    }

    #[test]
    fn drift_vanishes_on_target_and_diagonal_states() {
        assert_eq!(drift_term(&target(), &ops(), 3), 0.0);
        let diag = DensityMatrix::maximally_mixed(15).unwrap();
        assert_eq!(drift_term(&diag, &ops(), 3), 0.0);
    }

    #[test]
    fn drift_of_displaced_target_is_negative() {
        let rho = displaced_target(0.05);
        let drift = drift_term(&rho, &ops(), 3);
        assert!(drift < 0.0);
        assert!((drift - brute_force_drift(&rho, ops().generator(), 3)).abs() <= 1e-12);
    }

    #[test]
    fn gains() {
        assert!((default_gain::<f64>(3) - 1.0 / 13.0).abs() < 1e-16);
        assert!((default_gain::<f64>(3) - 0.076923).abs() < 1e-6);
        assert_eq!(default_gain::<f64>(0), 1.0);
        // [ρ̄, q] is symmetric with entries ±q[n̄, n̄±1]: its square traces to
        // 2(n̄ + n̄ + 1) = 4n̄ + 2.
        assert!((commutator_square_trace(&ops(), 3) - 14.0).abs() < 1e-12);
        assert!((GainRule::CommutatorTrace.gain(&ops(), 3) - 1.0 / 14.0).abs() < 1e-14);
        assert_eq!(GainRule::Simulation.gain(&ops(), 3), 1.0 / 13.0);
    }

    #[test]
    fn linear_law_is_restoring() {
        let cfg = FeedbackConfig::new(3);
        assert_eq!(feedback_linear(&target(), &ops(), &cfg), 0.0);
        assert_eq!(
            feedback_linear(&DensityMatrix::maximally_mixed(15).unwrap(), &ops(), &cfg),
            0.0
        );
        let rho = displaced_target(0.05);
        let alpha = feedback_linear(&rho, &ops(), &cfg);
        assert!(alpha < 0.0);
        let after = apply_displacement(&rho, &ops().displacement(alpha));
        assert!(fidelity(&after, 3).unwrap() > fidelity(&rho, 3).unwrap());
    }

    #[test]
    fn argmax_at_target_is_zero() {
        let cfg = FeedbackConfig::new(3);
        assert_eq!(feedback_argmax(&target(), &ops(), &cfg), 0.0);
    }

    #[test]
    fn argmax_from_vacuum_hits_boundary() {
        let cfg = FeedbackConfig::new(3);
        let law = FeedbackLaw::new(ops(), cfg).unwrap();
        let vac = DensityMatrix::fock(15, 0).unwrap();
        let alpha = law.argmax(&vac);
        assert!((alpha.abs() - 0.1).abs() < 1e-15, "alpha = {alpha}");
        let profile = law.argmax_profile(&vac);
        let max = profile.iter().map(|p| p.1).fold(f64::MIN, f64::max);
        let achieved = profile.iter().find(|p| p.0 == alpha).unwrap().1;
        assert!(achieved >= max - 1e-15);
    }

    #[test]
    fn argmax_returns_unique_maximizer() {
        let ops = ops();
        let cfg = FeedbackConfig {
            grid_points: 5,
            ..FeedbackConfig::new(3)
        };
        let law = FeedbackLaw::new(ops.clone(), cfg).unwrap();
        // Displaced by -0.05: the restoring grid value +0.05 is the unique best.
        let rho = displaced_target(-0.05);
        assert!((law.argmax(&rho) - 0.05).abs() < 1e-15);
    }

    #[test]
    fn grid_priority_order() {
        let g = argmax_grid(0.1f64, 5);
        assert_eq!(g, vec![0.0, -0.05, 0.05, -0.1, 0.1]);
    }

    #[test]
    fn switching_boundary() {
        let cfg = FeedbackConfig::<f64>::new(3);
        assert_eq!(Branch::select(0.0, cfg.epsilon), Branch::Linear);
        assert_eq!(Branch::select(1.0, cfg.epsilon), Branch::Argmax);
        assert_eq!(
            Branch::select(1.0 - cfg.epsilon, cfg.epsilon),
            Branch::Linear
        );
        assert_eq!(feedback_switched(0.0, &target(), &ops(), &cfg), 0.0);
        let vac = DensityMatrix::fock(15, 0).unwrap();
        assert!((feedback_switched(1.0, &vac, &ops(), &cfg).abs() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn config_validation() {
        let ok = FeedbackConfig::<f64>::new(3);
        assert!(ok.validate().is_ok());
        for (cfg, key) in [
            (
                FeedbackConfig {
                    c1: 0.0,
                    ..ok.clone()
                },
                "c1",
            ),
            (
                FeedbackConfig {
                    epsilon: 1.0,
                    ..ok.clone()
                },
                "epsilon",
            ),
            (
                FeedbackConfig {
                    alpha_bar: -0.1,
                    ..ok.clone()
                },
                "alpha_bar",
            ),
            (
                FeedbackConfig {
                    grid_points: 200,
                    ..ok.clone()
                },
                "grid_points",
            ),
        ] {
            match cfg.validate() {
                Err(Error::InvalidConfig { key: k, .. }) => assert_eq!(k, key),
                other => panic!("expected config error for {key}, got {other:?}"),
            }
        }
    }

    #[test]
    fn grid_refinement_never_lowers_the_maximum() {
        let ops = ops();
        let rho = coherent_state(&ops, 1);
        let mut last = f64::MIN;
        for points in [11, 21, 41, 81] {
            let cfg = FeedbackConfig {
                grid_points: points,
                ..FeedbackConfig::new(3)
            };
            let law = FeedbackLaw::new(ops.clone(), cfg).unwrap();
            let alpha = law.argmax(&rho);
            let value = fidelity(&rho.displaced(&ops.displacement(alpha)), 3).unwrap();
            assert!(value >= last - 1e-14);
            last = value;
        }
    }

    proptest! {
        #[test]
        fn drift_is_linear_in_the_state(w in 0.0f64..1.0, s1 in -0.5f64..0.5, s2 in -0.5f64..0.5) {
            let ops = ops();
            let r1 = displaced_target(s1);
            let r2 = coherent_state(&ops, 2).displaced(&ops.displacement(s2));
            let mix = DensityMatrix::new(
                &r1.matrix().scaled(w) + &r2.matrix().scaled(1.0 - w),
            ).unwrap();
            let lhs = drift_term(&mix, &ops, 3);
            let rhs = w * drift_term(&r1, &ops, 3) + (1.0 - w) * drift_term(&r2, &ops, 3);
            prop_assert!((lhs - rhs).abs() <= 1e-12);
        }

        #[test]
        fn switched_control_is_bounded(v in 0.0f64..=1.0, s in -1.0f64..1.0) {
            let ops = ops();
            let cfg = FeedbackConfig::new(3);
            let rho = displaced_target(s);
            let alpha = feedback_switched(v, &rho, &ops, &cfg);
            let bound = cfg.alpha_bar.max(cfg.c1 * drift_term(&rho, &ops, 3).abs());
            prop_assert!(alpha.is_finite() && alpha.abs() <= bound + 1e-15);
        }
    }
}
