// Copyright 2026 The fockstab Developers
// SPDX-License-Identifier: Apache-2.0

//! Numerical certificates for the inequalities behind the convergence results.
//!
//! Every check that involves an expectation enumerates both measurement
//! outcomes exactly, so the reported violations carry rounding error only.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::ensemble::trajectory_seed;
use crate::error::Result;
use crate::feedback::{drift_term, FeedbackConfig};
use crate::fock::{DensityMatrix, FockOperators};
use crate::matrix::{dot, Matrix};
use crate::measurement::{MeasurementModel, Outcome, PHASE_MARGIN};
use crate::scalar::Real;
use crate::trajectory::{conditional_step_expectation, ExperimentConfig};

pub const POVM_THRESHOLD: f64 = 1e-14;
pub const MARTINGALE_THRESHOLD: f64 = 1e-10;
pub const LYAPUNOV_THRESHOLD: f64 = 1e-8;
pub const CONTRACTION_THRESHOLD: f64 = 1e-10;
pub const RANK_THRESHOLD: f64 = 1e-10;
/// Gain at which the one-step increase bound is certified.
pub const SMALL_GAIN: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub trials: usize,
    pub max_violation: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl CheckReport {
    pub fn new(name: impl Into<String>, trials: usize, max_violation: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            trials,
            max_violation,
            threshold,
            passed: max_violation <= threshold,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rank {
    Full,
    Low(usize),
}

/// `G Gᵀ / tr(G Gᵀ)` with `G` an `(n_max+1) × r` standard normal matrix.
pub fn random_density<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    n_max: usize,
    rank: Rank,
) -> DensityMatrix<T> {
    let d = n_max + 1;
    let r = match rank {
        Rank::Full => d,
        Rank::Low(r) => {
            assert!((1..=d).contains(&r), "rank {r} outside 1..={d}");
            r
        }
    };
    let g: Vec<Vec<T>> = (0..d)
        .map(|_| (0..r).map(|_| T::lit(rng.sample(StandardNormal))).collect())
        .collect();
    DensityMatrix::renormalized(Matrix::from_fn(d, |i, j| dot(&g[i], &g[j])))
}

/// Ranks cycled through by the sampling checks, so that pure and mixed
/// states are both exercised.
fn cycled_rank(trial: usize, d: usize) -> Rank {
    match trial % 4 {
        0 | 1 => Rank::Full,
        2 => Rank::Low(1),
        _ => Rank::Low(2.min(d)),
    }
}

pub fn check_povm<T: Real>(model: &MeasurementModel<T>) -> CheckReport {
    check_povm_with_threshold(model, POVM_THRESHOLD)
}

pub fn check_povm_with_threshold<T: Real>(
    model: &MeasurementModel<T>,
    threshold: f64,
) -> CheckReport {
    CheckReport::new("povm", 1, model.povm_defect().to_f64_lossy(), threshold)
}

/// `|P_g f(ρ_g) + P_e f(ρ_e) − f(ρ)|` for one state.
pub fn martingale_violation<T: Real>(
    model: &MeasurementModel<T>,
    rho: &DensityMatrix<T>,
    n_bar: usize,
) -> Result<T> {
    let mut expected = T::zero();
    for s in Outcome::BOTH {
        let p = model.probability(rho, s);
        if p > T::lit(crate::measurement::PROBABILITY_FLOOR) {
            expected += p * model.project(rho, s)?.get(n_bar, n_bar);
        }
    }
    Ok((expected - rho.get(n_bar, n_bar)).abs())
}

pub fn check_martingale<T: Real, R: Rng + ?Sized>(
    model: &MeasurementModel<T>,
    n_bar: usize,
    trials: usize,
    rng: &mut R,
) -> Result<CheckReport> {
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let rho = random_density::<T, _>(rng, model.n_max(), Rank::Full);
        worst = worst.max(martingale_violation(model, &rho, n_bar)?.to_f64_lossy());
    }
    Ok(CheckReport::new(
        "martingale",
        trials,
        worst,
        MARTINGALE_THRESHOLD,
    ))
}

/// `max(0, (c₁/2)·drift² − [tr(ρ̄ D(α)ρD(−α)) − tr(ρ̄ρ)])` with `α = c₁·drift`.
pub fn lyapunov_increase_violation<T: Real>(
    rho: &DensityMatrix<T>,
    ops: &FockOperators<T>,
    n_bar: usize,
    c1: T,
) -> T {
    let drift = drift_term(rho, ops, n_bar);
    let alpha = c1 * drift;
    let after = rho.displaced(&ops.displacement(alpha));
    let gain = after.get(n_bar, n_bar) - rho.get(n_bar, n_bar);
    let bound = c1 * T::lit(0.5) * drift * drift;
    (bound - gain).max(T::zero())
}

/// One-step fidelity increase of the linear law at gain [`SMALL_GAIN`], over
/// random states whose fidelity exceeds `cfg.epsilon`.
pub fn check_lyapunov_increase<T: Real, R: Rng + ?Sized>(
    ops: &FockOperators<T>,
    cfg: &FeedbackConfig<T>,
    trials: usize,
    rng: &mut R,
) -> CheckReport {
    let c1 = T::lit(SMALL_GAIN);
    let mut worst = 0.0f64;
    let mut accepted = 0;
    let mut attempt = 0;
    while accepted < trials && attempt < trials.saturating_mul(1000) {
        let rho = random_density::<T, _>(rng, ops.n_max(), cycled_rank(attempt, ops.dim()));
        attempt += 1;
        if rho.get(cfg.n_bar, cfg.n_bar) <= cfg.epsilon {
            continue;
        }
        accepted += 1;
        worst = worst.max(lyapunov_increase_violation(&rho, ops, cfg.n_bar, c1).to_f64_lossy());
    }
    if accepted < trials {
        // Not enough admissible states were found.
        worst = f64::INFINITY;
    }
    CheckReport::new("lyapunov_increase", accepted, worst, LYAPUNOV_THRESHOLD)
}

/// `max(0, tr(ρρᵉˢᵗ) − E[tr(ρ₊ρᵉˢᵗ₊)])` under a constant control `alpha`.
pub fn contraction_violation<T: Real>(
    model: &MeasurementModel<T>,
    ops: &FockOperators<T>,
    rho: &DensityMatrix<T>,
    rho_est: &DensityMatrix<T>,
    alpha: T,
) -> Result<T> {
    let e = conditional_step_expectation(rho, rho_est, |_, _| alpha, model, ops, 0)?;
    Ok((rho.overlap(rho_est) - e.overlap).max(T::zero()))
}

/// Filter contraction over random `(ρ, ρᵉˢᵗ)` pairs, `ρᵉˢᵗ` full rank.
pub fn check_contraction<T: Real, R: Rng + ?Sized>(
    model: &MeasurementModel<T>,
    ops: &FockOperators<T>,
    trials: usize,
    rng: &mut R,
    alphas: &[T],
) -> Result<CheckReport> {
    let mut worst = 0.0f64;
    for t in 0..trials {
        let rho = random_density::<T, _>(rng, model.n_max(), cycled_rank(t, ops.dim()));
        let rho_est = random_density::<T, _>(rng, model.n_max(), Rank::Full);
        for &alpha in alphas {
            let v = contraction_violation(model, ops, &rho, &rho_est, alpha)?;
            worst = worst.max(v.to_f64_lossy());
        }
    }
    Ok(CheckReport::new(
        "contraction",
        trials * alphas.len(),
        worst,
        CONTRACTION_THRESHOLD,
    ))
}

/// Columns `(a†−a)^j |n̄⟩ / ‖·‖`, `j = 0..=n_max`.
pub fn krylov_matrix<T: Real>(ops: &FockOperators<T>, n_bar: usize) -> Matrix<T> {
    krylov_matrix_of(ops.generator(), n_bar)
}

fn krylov_matrix_of<T: Real>(generator: &Matrix<T>, n_bar: usize) -> Matrix<T> {
    let d = generator.dim();
    let mut columns = Vec::with_capacity(d);
    let mut v = vec![T::zero(); d];
    v[n_bar] = T::one();
    for _ in 0..d {
        let norm = dot(&v, &v).sqrt();
        let scale = if norm > T::zero() {
            T::one() / norm
        } else {
            T::zero()
        };
        columns.push(v.iter().map(|&x| x * scale).collect::<Vec<_>>());
        v = generator.matvec(&v);
    }
    Matrix::from_fn(d, |i, j| columns[j][i])
}

/// `σ_min/σ_max` of the column-scaled Krylov matrix.
pub fn krylov_condition<T: Real>(ops: &FockOperators<T>, n_bar: usize) -> T {
    let sv = krylov_matrix(ops, n_bar).singular_values();
    sv[sv.len() - 1] / sv[0]
}

/// Incremental Gram–Schmidt (Arnoldi with re-orthogonalization) on the same
/// Krylov family. Returns the residual norm of each new direction; the family
/// has full rank iff none of them vanishes.
pub fn krylov_residuals<T: Real>(ops: &FockOperators<T>, n_bar: usize) -> Vec<T> {
    let d = ops.dim();
    let mut basis: Vec<Vec<T>> = Vec::with_capacity(d);
    let mut e = vec![T::zero(); d];
    e[n_bar] = T::one();
    basis.push(e);
    let mut residuals = Vec::with_capacity(d - 1);
    for _ in 1..d {
        let mut w = ops
            .generator()
            .matvec(basis.last().expect("non-empty basis"));
        for _pass in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                for (x, &y) in w.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
        }
        let h = dot(&w, &w).sqrt();
        residuals.push(h);
        if h == T::zero() {
            break;
        }
        basis.push(w.iter().map(|&x| x / h).collect());
    }
    residuals
}

pub fn check_rank_controllability<T: Real>(
    ops: &FockOperators<T>,
    n_bar: usize,
) -> Result<CheckReport> {
    ops.check_target(n_bar)?;
    let ratio = krylov_condition(ops, n_bar).to_f64_lossy();
    Ok(rank_report(
        format!("rank_controllability[n_bar={n_bar}]"),
        ratio,
    ))
}

/// Same verdict from the Gram–Schmidt route: smallest residual relative to
/// the largest, against the same threshold.
pub fn check_rank_controllability_gram_schmidt<T: Real>(
    ops: &FockOperators<T>,
    n_bar: usize,
) -> Result<CheckReport> {
    ops.check_target(n_bar)?;
    let residuals = krylov_residuals(ops, n_bar);
    let max = residuals.iter().copied().fold(T::zero(), T::max);
    let min = residuals.iter().copied().fold(T::infinity(), T::min);
    let ratio = if residuals.len() + 1 < ops.dim() || max == T::zero() {
        0.0
    } else {
        (min / max).to_f64_lossy()
    };
    Ok(rank_report(
        format!("rank_controllability_gs[n_bar={n_bar}]"),
        ratio,
    ))
}

/// The violation is `RANK_THRESHOLD − ratio` against a zero threshold, and
/// must be strictly negative: the ratio has to exceed the threshold.
fn rank_report(name: String, ratio: f64) -> CheckReport {
    let mut report = CheckReport::new(name, 1, RANK_THRESHOLD - ratio, 0.0);
    report.passed = ratio > RANK_THRESHOLD;
    report
}

/// Phase non-degeneracy as a report: the violation is the margin minus the
/// smallest separation found, so it is non-positive exactly when valid.
pub fn check_phases<T: Real>(model: &MeasurementModel<T>) -> CheckReport {
    let margin = PHASE_MARGIN;
    let quarter_turn = std::f64::consts::FRAC_PI_2;
    let n_max = model.n_max();
    let mut separation = f64::INFINITY;
    let mut cos2 = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let theta = model.phase(n).to_f64_lossy();
        let r = theta.rem_euclid(quarter_turn);
        separation = separation.min(r.min(quarter_turn - r));
        cos2.push(theta.cos().powi(2));
    }
    for n in 0..=n_max {
        for m in (n + 1)..=n_max {
            separation = separation.min((cos2[n] - cos2[m]).abs());
        }
    }
    let mut report = CheckReport::new("phases", n_max + 1, margin - separation, 0.0);
    report.passed = model.validate_phases().is_valid();
    report
}

/// Every certificate for `cfg`, each with its own stream derived from `seed`.
///
/// The configuration is not validated first, so a degenerate phase choice
/// shows up as a failed `phases` report rather than an error.
pub fn run_all_checks<T: Real>(
    cfg: &ExperimentConfig<T>,
    trials: usize,
    seed: u64,
) -> Result<Vec<CheckReport>> {
    let ops = FockOperators::new(cfg.n_max)?;
    ops.check_target(cfg.n_bar)?;
    let model = cfg.measurement_model()?;
    let rng = |k: u64| ChaCha8Rng::seed_from_u64(trajectory_seed(seed, k));
    let alpha_bar = cfg.feedback.alpha_bar;
    Ok(vec![
        check_phases(&model),
        check_povm(&model),
        check_martingale(&model, cfg.n_bar, trials, &mut rng(0))?,
        check_lyapunov_increase(&ops, &cfg.feedback, trials, &mut rng(1)),
        check_contraction(
            &model,
            &ops,
            trials,
            &mut rng(2),
            &[T::zero(), -alpha_bar, alpha_bar],
        )?,
        check_rank_controllability(&ops, cfg.n_bar)?,
    ])
}
