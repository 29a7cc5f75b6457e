// Copyright 2026 The fockstab Developers
// SPDX-License-Identifier: Apache-2.0

use fockstab::ensemble::{run_ensemble, run_ensemble_with_threads, trajectory_seed};
use fockstab::trajectory::{run_trajectory, ExperimentConfig};
use fockstab::{ExperimentConfig32, ExperimentConfig64};

fn short(steps: usize) -> ExperimentConfig64 {
    ExperimentConfig {
        steps,
        ..ExperimentConfig::reference()
    }
}

#[test]
fn single_trajectory_ensemble_is_that_trajectory() {
    let cfg = short(40);
    let stats = run_ensemble(&cfg, 1, 99).unwrap();
    let records = run_trajectory(&cfg, trajectory_seed(99, 0)).unwrap();
    for (k, r) in records.iter().enumerate() {
        assert_eq!(stats.mean_fidelity[k], r.fidelity_true);
        assert_eq!(stats.q05[k], r.fidelity_true);
        assert_eq!(stats.q95[k], r.fidelity_true);
        assert_eq!(stats.std_fidelity[k], 0.0);
        assert_eq!(stats.mean_overlap_filter[k], r.overlap);
    }
}

#[test]
fn statistics_match_a_direct_computation() {
    let cfg = short(30);
    let n = 150;
    let stats = run_ensemble(&cfg, n, 5).unwrap();
    let series: Vec<Vec<f64>> = (0..n as u64)
        .map(|i| {
            run_trajectory(&cfg, trajectory_seed(5, i))
                .unwrap()
                .iter()
                .map(|r| r.fidelity_true)
                .collect()
        })
        .collect();
    for k in 0..30 {
        let column: Vec<f64> = series.iter().map(|s| s[k]).collect();
        let mean = column.iter().sum::<f64>() / n as f64;
        let var = column.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((stats.mean_fidelity[k] - mean).abs() <= 1e-12);
        assert!((stats.std_fidelity[k] - var.sqrt()).abs() <= 1e-12);
        assert!(stats.q05[k] <= stats.q50[k] && stats.q50[k] <= stats.q95[k]);
        let below = column.iter().filter(|&&x| x <= stats.q50[k]).count();
        assert!(below >= n / 2, "median at step {}", k + 1);
    }
}

#[test]
fn means_do_not_depend_on_worker_count() {
    let cfg = short(50);
    let one = run_ensemble_with_threads(&cfg, 300, 17, 1).unwrap();
    for threads in [3, 8] {
        assert_eq!(
            run_ensemble_with_threads(&cfg, 300, 17, threads).unwrap(),
            one
        );
    }
}

#[test]
fn mean_fidelity_rises_under_feedback() {
    let stats = run_ensemble(&short(100), 300, 1).unwrap();
    let early = stats.fidelity_at(5).unwrap();
    let late = stats.fidelity_at(100).unwrap();
    assert!(late > early + 0.4, "{early} -> {late}");
    assert!(stats.standard_error_at(100).unwrap() < 0.02);
    assert!(stats.fidelity_at(0).is_none() && stats.fidelity_at(101).is_none());
}

#[test]
fn single_precision_ensemble_agrees_statistically() {
    let cfg64 = short(60);
    let cfg32: ExperimentConfig32 = ExperimentConfig {
        steps: 60,
        ..ExperimentConfig::reference()
    };
    let a = run_ensemble(&cfg64, 400, 3).unwrap();
    let b = run_ensemble(&cfg32, 400, 3).unwrap();
    let gap = (a.fidelity_at(60).unwrap() - f64::from(b.fidelity_at(60).unwrap())).abs();
    assert!(gap < 0.05, "f64/f32 gap {gap}");
    assert!(b
        .mean_fidelity
        .iter()
        .all(|f| (0.0..=1.0 + 1e-5).contains(f)));
}

#[test]
fn zero_trajectories_is_a_config_error() {
    let err = run_ensemble(&short(10), 0, 1).unwrap_err();
    assert!(err.to_string().contains("n_traj"), "{err}");
}
