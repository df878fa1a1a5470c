//! Distances between density matrices and the positive/negative split of
//! their difference.

use serde::{Deserialize, Serialize};

use crate::states::{eig_unchecked, ComplexMatrix, DensityMatrix, Spectrum};
use crate::tolerance;
use crate::{Error, Result};

fn check_dims(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<usize> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), sigma.dim()));
    }
    Ok(rho.dim())
}

/// `Δ = ρ − σ = Δ₊ − Δ₋` with `Δ₊, Δ₋ ≥ 0` on orthogonal supports.
///
/// Built from one diagonalization of `Δ`: strictly positive eigenpairs form
/// `Δ₊`, negated strictly negative ones form `Δ₋`. Eigenvalues with
/// `|δ| ≤ 1e-12` go to neither part.
#[derive(Debug, Clone)]
pub struct SignedDecomposition {
    delta: ComplexMatrix,
    delta_spectrum: Spectrum,
    delta_plus: ComplexMatrix,
    delta_minus: ComplexMatrix,
    plus_spectrum: Spectrum,
    minus_spectrum: Spectrum,
}

impl SignedDecomposition {
    pub fn new(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<Self> {
        let d = check_dims(rho, sigma)?;
        let delta = rho.matrix() - sigma.matrix();
        let delta_spectrum = eig_unchecked(&delta);
        let values = delta_spectrum.eigenvalues();
        let vectors = delta_spectrum.eigenvectors();

        let plus_values: Vec<f64> = values
            .iter()
            .map(|&v| if v > tolerance::ZERO_EIGENVALUE { v } else { 0.0 })
            .collect();
        // Reversed order puts the most negative δ first.
        let minus_values: Vec<f64> = values
            .iter()
            .rev()
            .map(|&v| if v < -tolerance::ZERO_EIGENVALUE { -v } else { 0.0 })
            .collect();
        let minus_vectors = ComplexMatrix::from_fn(d, d, |i, k| vectors[(i, d - 1 - k)]);

        let plus_spectrum = Spectrum::from_eigenpairs(plus_values, vectors.clone())?;
        let minus_spectrum = Spectrum::from_eigenpairs(minus_values, minus_vectors)?;
        Ok(SignedDecomposition {
            delta_plus: plus_spectrum.reconstruct(),
            delta_minus: minus_spectrum.reconstruct(),
            delta,
            delta_spectrum,
            plus_spectrum,
            minus_spectrum,
        })
    }

    pub fn dim(&self) -> usize {
        self.delta.nrows()
    }

    /// `ρ − σ`.
    pub fn delta(&self) -> &ComplexMatrix {
        &self.delta
    }

    /// Full sorted spectrum of `Δ`, signs included.
    pub fn delta_spectrum(&self) -> &Spectrum {
        &self.delta_spectrum
    }

    pub fn delta_plus(&self) -> &ComplexMatrix {
        &self.delta_plus
    }

    pub fn delta_minus(&self) -> &ComplexMatrix {
        &self.delta_minus
    }

    pub fn plus_spectrum(&self) -> &Spectrum {
        &self.plus_spectrum
    }

    pub fn minus_spectrum(&self) -> &Spectrum {
        &self.minus_spectrum
    }

    pub fn trace_plus(&self) -> f64 {
        self.plus_spectrum.eigenvalues().iter().sum()
    }

    pub fn trace_minus(&self) -> f64 {
        self.minus_spectrum.eigenvalues().iter().sum()
    }

    pub fn rank_plus(&self, tol: f64) -> usize {
        self.plus_spectrum.numerical_rank(tol)
    }

    pub fn rank_minus(&self, tol: f64) -> usize {
        self.minus_spectrum.numerical_rank(tol)
    }

    /// `½ Σ|δ_j|` over every eigenvalue of `Δ`.
    pub fn trace_distance(&self) -> f64 {
        0.5 * self.delta_spectrum.eigenvalues().iter().map(|v| v.abs()).sum::<f64>()
    }

    /// `Σ δ_j²`, the spectral route to `D_HS`. Cross-check only.
    pub fn hs_distance_spectral(&self) -> f64 {
        self.delta_spectrum.eigenvalues().iter().map(|v| v * v).sum()
    }

    /// `Σ (δ⁺_j)² + (δ⁻_j)²` from the two parts.
    pub fn hs_distance_from_parts(&self) -> f64 {
        let sq = |s: &Spectrum| s.eigenvalues().iter().map(|v| v * v).sum::<f64>();
        sq(&self.plus_spectrum) + sq(&self.minus_spectrum)
    }
}

pub fn signed_decomposition(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<SignedDecomposition> {
    SignedDecomposition::new(rho, sigma)
}

/// `D(ρ, σ) = ½ Tr|ρ − σ|`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dims(rho, sigma)?;
    let spectrum = eig_unchecked(&(rho.matrix() - sigma.matrix()));
    Ok(0.5 * spectrum.eigenvalues().iter().map(|v| v.abs()).sum::<f64>())
}

/// `D_HS(ρ, σ) = Tr[(ρ − σ)²] = Σ|ρ_ij − σ_ij|²`, entrywise.
pub fn hs_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dims(rho, sigma)?;
    Ok(rho
        .matrix()
        .iter()
        .zip(sigma.matrix().iter())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum())
}

/// `D² / D_HS`, or `None` when `D_HS ≤ 1e-12`.
pub fn q_ratio(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<Option<f64>> {
    let hs = hs_distance(rho, sigma)?;
    let d = trace_distance(rho, sigma)?;
    Ok(q_from(d, hs))
}

pub(crate) fn q_from(trace_distance: f64, hs_distance: f64) -> Option<f64> {
    (hs_distance > tolerance::Q_DEGENERACY).then(|| trace_distance * trace_distance / hs_distance)
}

/// `D`, `D_HS` and `Q` for one pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistancePair {
    pub trace_distance: f64,
    pub hs_distance: f64,
    pub q_ratio: Option<f64>,
}

impl DistancePair {
    pub fn compute(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<Self> {
        let hs_distance = hs_distance(rho, sigma)?;
        let trace_distance = trace_distance(rho, sigma)?;
        Ok(DistancePair {
            trace_distance,
            hs_distance,
            q_ratio: q_from(trace_distance, hs_distance),
        })
    }
}
