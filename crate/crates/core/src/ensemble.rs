// Copyright 2026 The fockstab Developers
// SPDX-License-Identifier: Apache-2.0

//! Parallel Monte-Carlo ensembles of closed-loop trajectories.
//!
//! Trajectory `i` is seeded with [`trajectory_seed`]`(master_seed, i)`, so the
//! per-trajectory streams do not depend on which worker runs them. Results are
//! collected in index order and reduced in fixed-size chunks, which makes the
//! statistics bit-identical for any thread count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::trajectory::{Experiment, ExperimentConfig};

/// Trajectories per reduction chunk. Part of the reproducibility contract.
pub const CHUNK: usize = 64;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer applied to `master + (index + 1)·γ`, with
/// `γ = 0x9E3779B97F4A7C15` and the multipliers `0xBF58476D1CE4E5B9`,
/// `0x94D049BB133111EB` (shifts 30, 27, 31).
pub fn trajectory_seed(master_seed: u64, index: u64) -> u64 {
    let mut z = master_seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-step running count, mean and sum of squared deviations.
#[derive(Clone, Debug, PartialEq)]
pub struct Accumulator<T> {
    pub count: usize,
    pub mean: Vec<T>,
    pub m2: Vec<T>,
}

impl<T: Real> Accumulator<T> {
    pub fn new(steps: usize) -> Self {
        Self {
            count: 0,
            mean: vec![T::zero(); steps],
            m2: vec![T::zero(); steps],
        }
    }

    /// Welford update with one series.
    pub fn push(&mut self, series: &[T]) {
        assert_eq!(series.len(), self.mean.len(), "series length");
        self.count += 1;
        let n = T::from_usize_lossy(self.count);
        for ((mean, m2), &x) in self.mean.iter_mut().zip(&mut self.m2).zip(series) {
            let delta = x - *mean;
            *mean += delta / n;
            *m2 += delta * (x - *mean);
        }
    }

    /// Sample variance (`n − 1` denominator); zero below two samples.
    pub fn variance(&self) -> Vec<T> {
        if self.count < 2 {
            return vec![T::zero(); self.mean.len()];
        }
        let denom = T::from_usize_lossy(self.count - 1);
        self.m2.iter().map(|&m| m / denom).collect()
    }
}

/// Pairwise merge of accumulators over disjoint sample sets.
pub fn welford_merge<T: Real>(a: &Accumulator<T>, b: &Accumulator<T>) -> Accumulator<T> {
    if a.count == 0 {
        return b.clone();
    }
    if b.count == 0 {
        return a.clone();
    }
    assert_eq!(a.mean.len(), b.mean.len(), "series length");
    let na = T::from_usize_lossy(a.count);
    let nb = T::from_usize_lossy(b.count);
    let n = na + nb;
    let mut out = Accumulator::new(a.mean.len());
    out.count = a.count + b.count;
    for k in 0..a.mean.len() {
        let delta = b.mean[k] - a.mean[k];
        out.mean[k] = (na * a.mean[k] + nb * b.mean[k]) / n;
        out.m2[k] = a.m2[k] + b.m2[k] + delta * delta * na * nb / n;
    }
    out
}

/// Per-step ensemble statistics; index `k` holds step `k + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleStats<T> {
    pub steps: usize,
    pub n_traj: usize,
    pub mean_fidelity: Vec<T>,
    pub std_fidelity: Vec<T>,
    pub q05: Vec<T>,
    pub q50: Vec<T>,
    pub q95: Vec<T>,
    /// Mean of `tr(ρ_k ρᵉˢᵗ_k)`.
    pub mean_overlap_filter: Vec<T>,
}

impl<T: Real> EnsembleStats<T> {
    /// Mean fidelity after `step` steps (1-based).
    pub fn fidelity_at(&self, step: usize) -> Option<T> {
        step.checked_sub(1)
            .and_then(|k| self.mean_fidelity.get(k).copied())
    }

    /// Standard error of the mean at `step` (1-based).
    pub fn standard_error_at(&self, step: usize) -> Option<T> {
        let k = step.checked_sub(1)?;
        let sd = *self.std_fidelity.get(k)?;
        Some(sd / T::from_usize_lossy(self.n_traj).sqrt())
    }
}

/// Linear-interpolation quantile of sorted samples.
pub fn quantile_sorted<T: Real>(sorted: &[T], p: f64) -> T {
    let n = sorted.len();
    assert!(n > 0, "quantile of empty sample");
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = T::lit(h - lo as f64);
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

struct Series<T> {
    fidelity: Vec<T>,
    overlap: Vec<T>,
}

/// Runs `n_traj` trajectories on the current rayon pool.
pub fn run_ensemble<T: Real>(
    cfg: &ExperimentConfig<T>,
    n_traj: usize,
    master_seed: u64,
) -> Result<EnsembleStats<T>> {
    if n_traj == 0 {
        return Err(Error::InvalidConfig {
            key: "n_traj",
            reason: "at least one trajectory is required".into(),
        });
    }
    let exp = Experiment::new(cfg.clone())?;
    let series: Vec<Series<T>> = (0..n_traj as u64)
        .into_par_iter()
        .map(|i| {
            let records = exp.run(trajectory_seed(master_seed, i))?;
            Ok(Series {
                fidelity: records.iter().map(|r| r.fidelity_true).collect(),
                overlap: records.iter().map(|r| r.overlap).collect(),
            })
        })
        .collect::<Result<_>>()?;
    Ok(aggregate(cfg.steps, &series))
}

/// [`run_ensemble`] on a dedicated pool of `threads` workers.
pub fn run_ensemble_with_threads<T: Real>(
    cfg: &ExperimentConfig<T>,
    n_traj: usize,
    master_seed: u64,
    threads: usize,
) -> Result<EnsembleStats<T>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidConfig {
            key: "threads",
            reason: e.to_string(),
        })?;
    pool.install(|| run_ensemble(cfg, n_traj, master_seed))
}

fn aggregate<T: Real>(steps: usize, series: &[Series<T>]) -> EnsembleStats<T> {
    let chunk_stats = |pick: fn(&Series<T>) -> &Vec<T>| {
        series
            .par_chunks(CHUNK)
            .map(|chunk| {
                let mut acc = Accumulator::new(steps);
                for s in chunk {
                    acc.push(pick(s));
                }
                acc
            })
            .collect::<Vec<_>>()
            .iter()
            .fold(Accumulator::new(steps), |acc, part| {
                welford_merge(&acc, part)
            })
    };
    let fidelity = chunk_stats(|s| &s.fidelity);
    let overlap = chunk_stats(|s| &s.overlap);

    let quantiles: Vec<[T; 3]> = (0..steps)
        .into_par_iter()
        .map(|k| {
            let mut column: Vec<T> = series.iter().map(|s| s.fidelity[k]).collect();
            column.sort_by(|a, b| a.partial_cmp(b).expect("finite fidelity"));
            [
                quantile_sorted(&column, 0.05),
                quantile_sorted(&column, 0.50),
                quantile_sorted(&column, 0.95),
            ]
        })
        .collect();

    EnsembleStats {
        steps,
        n_traj: series.len(),
        std_fidelity: fidelity.variance().into_iter().map(T::sqrt).collect(),
        mean_fidelity: fidelity.mean,
        q05: quantiles.iter().map(|q| q[0]).collect(),
        q50: quantiles.iter().map(|q| q[1]).collect(),
        q95: quantiles.iter().map(|q| q[2]).collect(),
        mean_overlap_filter: overlap.mean,
    }
}
