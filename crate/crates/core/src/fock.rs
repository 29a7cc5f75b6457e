// Copyright 2026 The fockstab Developers
// SPDX-License-Identifier: Apache-2.0

//! Truncated Fock-space algebra.
//!
//! The cavity mode lives on `span{|0⟩, …, |n_max⟩}`. All quantities are real:
//! the phase of a Fock state is arbitrary and is fixed to zero, so density
//! matrices are real symmetric and the displacement `D(α) = exp(α(a† − a))`
//! is a real orthogonal matrix.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{tol, Real};

/// Poisson tail mass above the truncation at which [`coherent_state`] warns.
pub const TAIL_MASS_WARNING: f64 = 1e-3;

/// Real symmetric, positive semidefinite, unit-trace matrix on the truncated
/// Fock space.
#[derive(Clone, PartialEq)]
pub struct DensityMatrix<T> {
    m: Matrix<T>,
}

impl<T: Real> DensityMatrix<T> {
    /// Validates `m` against the density-matrix invariants.
    ///
    /// Symmetry to 1e-12, unit trace to 1e-10 and smallest eigenvalue no
    /// lower than -1e-10 (tolerances widen to a few ulps for `f32`).
    pub fn new(m: Matrix<T>) -> Result<Self> {
        if m.dim() < 2 {
            return Err(Error::InvalidDensityMatrix(format!(
                "dimension {} is below 2",
                m.dim()
            )));
        }
        let asym = m.asymmetry();
        if !(asym <= tol::<T>(1e-12)) {
            return Err(Error::InvalidDensityMatrix(format!(
                "not symmetric (max |ρ - ρᵀ| = {asym:e})"
            )));
        }
        let trace = m.trace();
        if !((trace - T::one()).abs() <= tol::<T>(1e-10)) {
            return Err(Error::InvalidDensityMatrix(format!(
                "trace is {trace}, expected 1"
            )));
        }
        let min_eig = m.symmetric_eigenvalues()[0];
        if !(min_eig >= -tol::<T>(1e-10)) {
            return Err(Error::InvalidDensityMatrix(format!(
                "not positive semidefinite (smallest eigenvalue {min_eig:e})"
            )));
        }
        Ok(Self { m })
    }

    /// Symmetrizes and trace-normalizes without further checks.
    pub(crate) fn renormalized(mut m: Matrix<T>) -> Self {
        m.symmetrize();
        let t = m.trace();
        Self {
            m: m.scaled(T::one() / t),
        }
    }

    /// The Fock state `|n⟩⟨n|`.
    pub fn fock(n_max: usize, n: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::InvalidTruncation(n_max));
        }
        if n > n_max {
            return Err(Error::TargetOutOfRange { n_bar: n, n_max });
        }
        let mut m = Matrix::zeros(n_max + 1);
        m[(n, n)] = T::one();
        Ok(Self { m })
    }

    /// The maximally mixed state `I/(n_max+1)`.
    pub fn maximally_mixed(n_max: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::InvalidTruncation(n_max));
        }
        let d = n_max + 1;
        Ok(Self {
            m: Matrix::identity(d).scaled(T::one() / T::from_usize_lossy(d)),
        })
    }

    /// Pure state `ψψᵀ/|ψ|²`.
    pub fn pure(psi: &[T]) -> Result<Self> {
        let norm2: T = psi.iter().map(|&x| x * x).sum();
        if psi.len() < 2 || !(norm2 > T::zero()) {
            return Err(Error::InvalidDensityMatrix(
                "state vector must be non-zero with at least two entries".into(),
            ));
        }
        Ok(Self::renormalized(Matrix::outer(psi)))
    }

    #[inline]
    pub fn matrix(&self) -> &Matrix<T> {
        &self.m
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    #[inline]
    pub fn n_max(&self) -> usize {
        self.m.dim() - 1
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.m[(i, j)]
    }

    pub fn diagonal(&self) -> Vec<T> {
        self.m.diagonal()
    }

    /// `tr(ρσ)`.
    pub fn overlap(&self, other: &Self) -> T {
        self.m.trace_product(&other.m)
    }

    /// `tr(ρ²)`.
    pub fn purity(&self) -> T {
        self.overlap(self)
    }

    /// `tr(Nρ)`.
    pub fn mean_photon_number(&self) -> T {
        self.diagonal()
            .iter()
            .enumerate()
            .map(|(n, &p)| T::from_usize_lossy(n) * p)
            .sum()
    }

    pub fn eigenvalues(&self) -> Vec<T> {
        self.m.symmetric_eigenvalues()
    }

    /// `max |ρ - σ|` entrywise.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        (&self.m - &other.m).max_abs()
    }

    /// `D ρ Dᵀ`; see [`apply_displacement`].
    pub fn displaced(&self, d: &Matrix<T>) -> Self {
        apply_displacement(self, d)
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.m[(i, j)] == T::zero()))
    }
}

impl<T: std::fmt::Debug> std::fmt::Debug for DensityMatrix<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "DensityMatrix({:?})", self.m)
    }
}

/// Ladder operators on the truncated space.
#[derive(Clone, Debug)]
pub struct FockOperators<T> {
    n_max: usize,
    a: Matrix<T>,
    number: Matrix<T>,
    generator: Matrix<T>,
}

impl<T: Real> FockOperators<T> {
    /// Builds `a`, `N` and `a† − a` for truncation `n_max ≥ 1`.
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::InvalidTruncation(n_max));
        }
        let d = n_max + 1;
        let mut a = Matrix::zeros(d);
        for n in 1..d {
            a[(n - 1, n)] = T::from_usize_lossy(n).sqrt();
        }
        let number = Matrix::from_diagonal(&(0..d).map(T::from_usize_lossy).collect::<Vec<_>>());
        let generator = &a.transpose() - &a;
        Ok(Self {
            n_max,
            a,
            number,
            generator,
        })
    }

    #[inline]
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n_max + 1
    }

    /// Annihilation operator `a`.
    pub fn annihilation(&self) -> &Matrix<T> {
        &self.a
    }

    /// Photon-number operator `N = diag(0, …, n_max)`.
    pub fn number(&self) -> &Matrix<T> {
        &self.number
    }

    /// Displacement generator `a† − a` (antisymmetric).
    pub fn generator(&self) -> &Matrix<T> {
        &self.generator
    }

    /// `D(α) = exp(α(a† − a))` on the truncated space.
    pub fn displacement(&self, alpha: T) -> Matrix<T> {
        if alpha == T::zero() {
            return Matrix::identity(self.dim());
        }
        self.generator.scaled(alpha).expm()
    }

    pub fn check_target(&self, n_bar: usize) -> Result<()> {
        if n_bar > self.n_max {
            Err(Error::TargetOutOfRange {
                n_bar,
                n_max: self.n_max,
            })
        } else {
            Ok(())
        }
    }
}

/// Conjugation `D ρ Dᵀ`, re-symmetrized and trace-renormalized.
pub fn apply_displacement<T: Real>(rho: &DensityMatrix<T>, d: &Matrix<T>) -> DensityMatrix<T> {
    DensityMatrix::renormalized(d.conjugate(rho.matrix()))
}

/// Coherent state `D(√n̄)|0⟩⟨0|D(−√n̄)`.
///
/// Logs a warning when the Poisson mass above the truncation exceeds
/// [`TAIL_MASS_WARNING`]; the state is still returned.
pub fn coherent_state<T: Real>(ops: &FockOperators<T>, n_bar: usize) -> DensityMatrix<T> {
    let tail = poisson_tail_mass(n_bar as f64, ops.n_max());
    if tail > TAIL_MASS_WARNING {
        log::warn!(
            "coherent state with mean {n_bar} loses Poisson mass {tail:.3e} above n_max = {}",
            ops.n_max()
        );
    }
    let d = ops.displacement(T::from_usize_lossy(n_bar).sqrt());
    DensityMatrix::renormalized(Matrix::outer(&d.column(0)))
}

/// `P(X > n_max)` for `X ~ Poisson(mean)`.
pub fn poisson_tail_mass(mean: f64, n_max: usize) -> f64 {
    let mut term = (-mean).exp();
    let mut head = term;
    for n in 1..=n_max {
        term *= mean / n as f64;
        head += term;
    }
    (1.0 - head).max(0.0)
}

/// `tr(ρ ρ̄) = ρ[n̄, n̄]` for the target `ρ̄ = |n̄⟩⟨n̄|`.
pub fn fidelity<T: Real>(rho: &DensityMatrix<T>, n_bar: usize) -> Result<T> {
    if n_bar > rho.n_max() {
        return Err(Error::TargetOutOfRange {
            n_bar,
            n_max: rho.n_max(),
        });
    }
    Ok(rho.get(n_bar, n_bar))
}
