// Copyright 2026 The fockstab Developers
// SPDX-License-Identifier: Apache-2.0

use fockstab::feedback::{lyapunov_v, Branch, FeedbackConfig};
use fockstab::filter::FilterInit;
use fockstab::fock::DensityMatrix;
use fockstab::measurement::Outcome;
use fockstab::trajectory::{ControlMode, Experiment, ExperimentConfig, InitialState};
use fockstab::ExperimentConfig64;

fn reference() -> ExperimentConfig64 {
    ExperimentConfig::reference()
}

#[test]
fn open_loop_measurement_collapses_onto_a_fock_state() {
    // Neighbouring levels are told apart slowly, so give the chain time.
    let cfg = ExperimentConfig {
        control: ControlMode::Off,
        steps: 1000,
        ..reference()
    };
    let exp = Experiment::new(cfg).unwrap();
    let runs = 200;
    let mut collapsed = 0;
    for seed in 0..runs {
        let mut last = None;
        let records = exp
            .run_with(seed, |state, _| last = Some(state.rho.clone()))
            .unwrap();
        assert!(records.iter().all(|r| r.alpha == 0.0));
        let peak = last.unwrap().diagonal().into_iter().fold(0.0, f64::max);
        if peak > 0.99 {
            collapsed += 1;
        }
    }
    assert!(collapsed * 100 >= 95 * runs, "{collapsed}/{runs} collapsed");
}

#[test]
fn fock_initial_state_at_target_is_never_disturbed() {
    let cfg = ExperimentConfig {
        initial_state: InitialState::Fock(3),
        ..reference()
    };
    for seed in 0..5 {
        for r in Experiment::new(cfg.clone()).unwrap().run(seed).unwrap() {
            assert!(r.alpha.abs() <= 1e-15);
            assert!((r.fidelity_true - 1.0).abs() <= 1e-12);
            assert_eq!(r.branch, Branch::Linear);
        }
    }
}

#[test]
fn matched_filter_follows_the_true_state_from_a_fock_start() {
    let cfg = ExperimentConfig {
        initial_state: InitialState::Fock(5),
        ..reference()
    };
    let exp = Experiment::new(cfg).unwrap();
    for seed in 0..10 {
        let mut worst: f64 = 0.0;
        exp.run_with(seed, |state, r| {
            worst = worst.max(state.rho.max_abs_diff(state.filter.estimate()));
            assert_eq!(r.true_outcome, r.reported_outcome);
        })
        .unwrap();
        assert!(worst <= 1e-9, "seed {seed}: {worst:e}");
    }
}

#[test]
fn reported_outcomes_flip_at_the_configured_rate() {
    let cfg = ExperimentConfig {
        eta_f: 0.25,
        steps: 200,
        ..reference()
    };
    let exp = Experiment::new(cfg).unwrap();
    let (mut flips, mut total) = (0usize, 0usize);
    for seed in 0..50 {
        for r in exp.run(seed).unwrap() {
            total += 1;
            if r.true_outcome != r.reported_outcome && !r.report_overridden {
                flips += 1;
            }
        }
    }
    let rate = flips as f64 / total as f64;
    // 10 000 Bernoulli(1/4) draws: standard error 0.0043.
    assert!((rate - 0.25).abs() < 0.02, "flip rate {rate}");
}

#[test]
fn filter_overlap_is_a_submartingale_along_a_mismatched_run() {
    let cfg = ExperimentConfig {
        filter_init: FilterInit::Uniform,
        steps: 60,
        ..reference()
    };
    let exp = Experiment::new(cfg).unwrap();
    let mut states = vec![exp.initial_state()];
    exp.run_with(3, |state, _| states.push(state.clone()))
        .unwrap();
    for state in &states {
        let est = state.filter.estimate();
        let now = state.rho.overlap(est);
        let next = exp.conditional_step_expectation(&state.rho, est).unwrap();
        assert!(next.overlap >= now - 1e-10, "{} < {}", next.overlap, now);
    }
}

#[test]
fn small_gain_linear_branch_decreases_v_in_expectation() {
    let mut feedback = FeedbackConfig::new(3);
    feedback.c1 = 1e-3;
    let cfg = ExperimentConfig {
        feedback,
        initial_state: InitialState::Fock(2),
        ..reference()
    };
    let exp = Experiment::new(cfg.clone()).unwrap();
    // Mix the target with its neighbours so the linear branch is active.
    let mut diag = vec![0.0; 16];
    diag[2] = 0.3;
    diag[3] = 0.5;
    diag[4] = 0.2;
    let rho = DensityMatrix::new(fockstab::Matrix64::from_diagonal(&diag)).unwrap();
    let v = lyapunov_v(&rho, 3);
    assert!(v <= 1.0 - cfg.feedback.epsilon);
    let next = exp.conditional_step_expectation(&rho, &rho).unwrap();
    assert!(next.v <= v + 1e-12, "{} > {}", next.v, v);
}

#[test]
fn outcome_frequencies_match_the_born_rule_for_a_fock_state() {
    let cfg = ExperimentConfig {
        initial_state: InitialState::Fock(4),
        control: ControlMode::Off,
        steps: 400,
        ..reference()
    };
    let exp = Experiment::new(cfg).unwrap();
    let records = exp.run(11).unwrap();
    let ground = records
        .iter()
        .filter(|r| r.true_outcome == Outcome::Ground)
        .count() as f64
        / records.len() as f64;
    let p = exp
        .model()
        .probability(&DensityMatrix::fock(15, 4).unwrap(), Outcome::Ground);
    // 400 draws, p ≈ 0.22: standard error 0.021.
    assert!((ground - p).abs() < 0.08, "{ground} vs {p}");
}
