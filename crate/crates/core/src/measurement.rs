// Copyright 2026 The fockstab Developers
// SPDX-License-Identifier: Apache-2.0

//! QND photon-number measurement by dispersive atoms.
//!
//! Each atom is detected in `g` or `e`. The measurement operators are diagonal
//! in the Fock basis,
//!
//! ```text
//! M_g = cos((φ_R + φ)/2 + Nφ),   M_e = sin((φ_R + φ)/2 + Nφ),
//! ```
//!
//! so they commute with `N` and every Fock state is a fixed point of the
//! back-action.

use std::fmt;

use crate::error::{Error, Result};
use crate::fock::DensityMatrix;
use crate::matrix::Matrix;
use crate::scalar::Real;

/// Outcome probabilities below this are treated as impossible.
pub const PROBABILITY_FLOOR: f64 = 1e-12;

/// Default margin (radians) for [`MeasurementModel::validate_phases`].
pub const PHASE_MARGIN: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    /// Atom detected in `g`.
    Ground,
    /// Atom detected in `e`.
    Excited,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::Ground, Outcome::Excited];

    pub fn flipped(self) -> Self {
        match self {
            Outcome::Ground => Outcome::Excited,
            Outcome::Excited => Outcome::Ground,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Outcome::Ground => 'g',
            Outcome::Excited => 'e',
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Findings of the phase non-degeneracy test.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PhaseReport {
    /// Photon numbers whose phase is within the margin of `0 mod π/2`.
    pub zero_mod_half_pi: Vec<usize>,
    /// Pairs `(n, m)`, `n < m`, whose `cos²` values are within the margin.
    pub degenerate_pairs: Vec<(usize, usize)>,
}

impl PhaseReport {
    pub fn is_valid(&self) -> bool {
        self.zero_mod_half_pi.is_empty() && self.degenerate_pairs.is_empty()
    }
}

impl fmt::Display for PhaseReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return write!(f, "phases non-degenerate");
        }
        let mut parts = Vec::new();
        if !self.zero_mod_half_pi.is_empty() {
            parts.push(format!(
                "(phi_r+phi)/2 + n*phi = 0 mod pi/2 for n in {:?}",
                self.zero_mod_half_pi
            ));
        }
        if !self.degenerate_pairs.is_empty() {
            const SHOWN: usize = 6;
            let pairs = &self.degenerate_pairs;
            let mut shown = format!("{:?}", &pairs[..pairs.len().min(SHOWN)]);
            if pairs.len() > SHOWN {
                shown.push_str(&format!(" and {} more", pairs.len() - SHOWN));
            }
            parts.push(format!("cos^2 values coincide for pairs {shown}"));
        }
        write!(f, "{}", parts.join("; "))
    }
}

/// The pair `(M_g, M_e)` and the Ramsey phases generating it.
#[derive(Clone, Debug)]
pub struct MeasurementModel<T> {
    phi: T,
    phi_r: T,
    m_g: Vec<T>,
    m_e: Vec<T>,
}

impl<T: Real> MeasurementModel<T> {
    /// `phi` is the dephasing per photon, `phi_r` the Ramsey phase.
    pub fn new(phi: T, phi_r: T, n_max: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::InvalidTruncation(n_max));
        }
        let phase = |n: usize| (phi_r + phi) * T::lit(0.5) + T::from_usize_lossy(n) * phi;
        let (m_g, m_e) = (0..=n_max)
            .map(|n| (phase(n).cos(), phase(n).sin()))
            .unzip();
        Ok(Self {
            phi,
            phi_r,
            m_g,
            m_e,
        })
    }

    /// Model with the Ramsey phase at mid-fringe for target `n_bar`.
    pub fn mid_fringe(phi: T, n_bar: usize, n_max: usize) -> Result<Self> {
        Self::new(phi, mid_fringe_phi_r(phi, n_bar), n_max)
    }

    pub fn phi(&self) -> T {
        self.phi
    }

    pub fn phi_r(&self) -> T {
        self.phi_r
    }

    pub fn n_max(&self) -> usize {
        self.m_g.len() - 1
    }

    /// `(φ_R + φ)/2 + nφ`.
    pub fn phase(&self, n: usize) -> T {
        (self.phi_r + self.phi) * T::lit(0.5) + T::from_usize_lossy(n) * self.phi
    }

    /// Diagonal of `M_s`.
    pub fn diagonal(&self, outcome: Outcome) -> &[T] {
        match outcome {
            Outcome::Ground => &self.m_g,
            Outcome::Excited => &self.m_e,
        }
    }

    pub fn operator(&self, outcome: Outcome) -> Matrix<T> {
        Matrix::from_diagonal(self.diagonal(outcome))
    }

    /// `max |M_g² + M_e² − I|`.
    pub fn povm_defect(&self) -> T {
        self.m_g
            .iter()
            .zip(&self.m_e)
            .map(|(&g, &e)| (g * g + e * e - T::one()).abs())
            .fold(T::zero(), T::max)
    }

    pub fn validate_phases(&self) -> PhaseReport {
        self.validate_phases_with_margin(T::lit(PHASE_MARGIN))
    }

    /// Checks that no phase is `0 mod π/2` and that the `cos²` values are
    /// pairwise distinct, both by more than `margin`.
    pub fn validate_phases_with_margin(&self, margin: T) -> PhaseReport {
        let quarter_turn = T::FRAC_PI_2();
        let n_max = self.n_max();
        let zero_mod_half_pi = (0..=n_max)
            .filter(|&n| {
                let theta = self.phase(n);
                let r = theta - (theta / quarter_turn).floor() * quarter_turn;
                r.min(quarter_turn - r) <= margin
            })
            .collect();
        let cos2: Vec<T> = self.m_g.iter().map(|&c| c * c).collect();
        let degenerate_pairs = (0..=n_max)
            .flat_map(|n| ((n + 1)..=n_max).map(move |m| (n, m)))
            .filter(|&(n, m)| (cos2[n] - cos2[m]).abs() <= margin)
            .collect();
        PhaseReport {
            zero_mod_half_pi,
            degenerate_pairs,
        }
    }

    /// `(P_g, P_e) = (tr(M_g ρ M_g), tr(M_e ρ M_e))`.
    pub fn probabilities(&self, rho: &DensityMatrix<T>) -> (T, T) {
        let diag = rho.diagonal();
        let weigh = |m: &[T]| diag.iter().zip(m).map(|(&p, &c)| p * c * c).sum::<T>();
        (weigh(&self.m_g), weigh(&self.m_e))
    }

    pub fn probability(&self, rho: &DensityMatrix<T>, outcome: Outcome) -> T {
        let (pg, pe) = self.probabilities(rho);
        match outcome {
            Outcome::Ground => pg,
            Outcome::Excited => pe,
        }
    }

    /// Unnormalized back-action `M_s ρ M_s` and its trace.
    pub(crate) fn unnormalized(&self, rho: &DensityMatrix<T>, outcome: Outcome) -> (Matrix<T>, T) {
        let m = self.diagonal(outcome);
        let out = Matrix::from_fn(rho.dim(), |i, j| m[i] * rho.get(i, j) * m[j]);
        let p = out.trace();
        (out, p)
    }

    /// `M_s ρ M_s / tr(M_s ρ M_s)`.
    pub fn project(&self, rho: &DensityMatrix<T>, outcome: Outcome) -> Result<DensityMatrix<T>> {
        if rho.n_max() != self.n_max() {
            return Err(Error::DimensionMismatch {
                expected: self.n_max() + 1,
                actual: rho.dim(),
            });
        }
        let (out, p) = self.unnormalized(rho, outcome);
        if !(p > T::lit(PROBABILITY_FLOOR)) {
            return Err(Error::ZeroProbabilityOutcome {
                outcome,
                probability: p.to_f64_lossy(),
            });
        }
        Ok(DensityMatrix::renormalized(out))
    }
}

/// Ramsey phase solving `(φ_R + φ)/2 + n̄φ = π/4`.
pub fn mid_fringe_phi_r<T: Real>(phi: T, n_bar: usize) -> T {
    T::FRAC_PI_2() - T::from_usize_lossy(2 * n_bar + 1) * phi
}
