//! Density matrices and their spectra.
//!
//! A [`DensityMatrix`] is validated once, at construction: Hermitian, unit
//! trace, positive semidefinite. Its [`Spectrum`] is computed at most once and
//! cached; every spectral functional reads the cache.

use std::sync::OnceLock;

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use crate::tolerance;
use crate::{Error, Result};

pub type C64 = Complex<f64>;

/// Dense `d×d` complex matrix, column-major.
pub type ComplexMatrix = DMatrix<C64>;

/// Eigenvalues in decreasing order with matching eigenvector columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: ComplexMatrix,
}

impl Spectrum {
    /// Assemble a spectrum from eigenpairs, sorting into decreasing order.
    pub fn from_eigenpairs(eigenvalues: Vec<f64>, eigenvectors: ComplexMatrix) -> Result<Self> {
        let d = eigenvalues.len();
        if eigenvectors.nrows() != d || eigenvectors.ncols() != d {
            return Err(Error::DimensionMismatch(d, eigenvectors.ncols()));
        }
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eigenvalues[b].total_cmp(&eigenvalues[a]));
        let sorted = order.iter().map(|&j| eigenvalues[j]).collect();
        let vectors = ComplexMatrix::from_fn(d, d, |i, k| eigenvectors[(i, order[k])]);
        Ok(Spectrum {
            eigenvalues: sorted,
            eigenvectors: vectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvalues, largest first.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Unitary whose `j`-th column is the eigenvector of `eigenvalues()[j]`.
    pub fn eigenvectors(&self) -> &ComplexMatrix {
        &self.eigenvectors
    }

    /// Largest eigenvalue (0 for an empty spectrum).
    pub fn max(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// `U diag(λ) U†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let mut scaled = self.eigenvectors.clone();
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            scaled.column_mut(k).scale_mut(lambda);
        }
        &scaled * self.eigenvectors.adjoint()
    }

    /// Number of eigenvalues above `tol · λ_1`.
    pub fn numerical_rank(&self, tol: f64) -> usize {
        numerical_rank(self, tol)
    }

    fn clamp_roundoff(&mut self) -> Result<()> {
        let d = self.dim() as f64;
        let floor = -d * tolerance::NEGATIVE_CLAMP * self.max().abs().max(f64::MIN_POSITIVE);
        for lambda in &mut self.eigenvalues {
            if *lambda < 0.0 {
                if *lambda < floor {
                    return Err(Error::NotPositive {
                        min_eigenvalue: *lambda,
                    });
                }
                *lambda = 0.0;
            }
        }
        Ok(())
    }
}

/// Largest entry modulus.
pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `max|M − M†|` over entries.
pub fn hermitian_deviation(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn check_square(m: &ComplexMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.nrows() == 0 {
        return Err(Error::Empty);
    }
    Ok(m.nrows())
}

fn check_hermitian(m: &ComplexMatrix) -> Result<()> {
    let deviation = hermitian_deviation(m);
    if deviation > tolerance::HERMITIAN * max_abs(m) {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(())
}

/// Full eigendecomposition of a Hermitian matrix, eigenvalues decreasing.
///
/// The input is symmetrized as `(M + M†)/2` after the Hermiticity check so the
/// solver sees an exactly Hermitian matrix.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<Spectrum> {
    check_square(m)?;
    check_hermitian(m)?;
    Ok(eig_unchecked(m))
}

pub(crate) fn eig_unchecked(m: &ComplexMatrix) -> Spectrum {
    let symmetric = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(symmetric);
    Spectrum::from_eigenpairs(eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
        .expect("solver returns square eigenvector matrix")
}

/// Count of eigenvalues with `λ_j > tol · λ_1`. Zero only for the zero matrix.
pub fn numerical_rank(spectrum: &Spectrum, tol: f64) -> usize {
    let top = spectrum.max();
    if top <= 0.0 {
        return 0;
    }
    let cutoff = tol * top;
    spectrum.eigenvalues().iter().take_while(|&&l| l > cutoff).count()
}

/// Hermitian, positive semidefinite, unit-trace matrix with a cached spectrum.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    spectrum: OnceLock<Spectrum>,
    rank_tolerance: f64,
}

impl DensityMatrix {
    /// Validate and wrap `matrix`. Diagonalizes once to check positivity; the
    /// spectrum is kept.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        check_square(&matrix)?;
        check_hermitian(&matrix)?;
        check_trace(&matrix)?;
        let mut spectrum = eig_unchecked(&matrix);
        spectrum.clamp_roundoff()?;
        Ok(DensityMatrix {
            matrix,
            spectrum: OnceLock::from(spectrum),
            rank_tolerance: tolerance::DEFAULT_RANK_TOL,
        })
    }

    /// `U diag(λ) U†` from known eigenpairs. `eigenvectors` must be unitary.
    pub(crate) fn from_eigenpairs(eigenvalues: Vec<f64>, eigenvectors: ComplexMatrix) -> Result<Self> {
        let mut spectrum = Spectrum::from_eigenpairs(eigenvalues, eigenvectors)?;
        spectrum.clamp_roundoff()?;
        let matrix = spectrum.reconstruct();
        check_trace(&matrix)?;
        Ok(DensityMatrix {
            matrix,
            spectrum: OnceLock::from(spectrum),
            rank_tolerance: tolerance::DEFAULT_RANK_TOL,
        })
    }

    /// Wrap a matrix that is PSD by construction (e.g. `G G† / Tr`). The
    /// spectrum is computed lazily.
    pub(crate) fn from_psd_unchecked(matrix: ComplexMatrix) -> Self {
        debug_assert!(check_trace(&matrix).is_ok());
        DensityMatrix {
            matrix,
            spectrum: OnceLock::new(),
            rank_tolerance: tolerance::DEFAULT_RANK_TOL,
        }
    }

    /// `|ψ⟩⟨ψ|` for the normalized `psi`.
    pub fn pure(psi: &DVector<C64>) -> Result<Self> {
        let norm = psi.norm();
        if psi.is_empty() {
            return Err(Error::Empty);
        }
        if !norm.is_finite() || norm <= 0.0 {
            return Err(Error::InvalidParameter(format!("state vector norm {norm}")));
        }
        let unit = psi.unscale(norm);
        Ok(Self::from_psd_unchecked(&unit * unit.adjoint()))
    }

    /// Diagonal state with the given probabilities.
    pub fn from_diagonal(probabilities: &[f64]) -> Result<Self> {
        let d = probabilities.len();
        if d == 0 {
            return Err(Error::Empty);
        }
        Self::from_eigenpairs(probabilities.to_vec(), ComplexMatrix::identity(d, d))
    }

    /// `I/d`.
    pub fn maximally_mixed(d: usize) -> Result<Self> {
        projector_state(d, d, 0)
    }

    /// Same state with a different relative rank cutoff.
    pub fn with_rank_tolerance(mut self, tol: f64) -> Self {
        self.rank_tolerance = tol;
        self
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn rank_tolerance(&self) -> f64 {
        self.rank_tolerance
    }

    /// Cached spectrum; negative roundoff is clamped to 0.
    pub fn spectrum(&self) -> &Spectrum {
        self.spectrum.get_or_init(|| {
            let mut s = eig_unchecked(&self.matrix);
            for lambda in &mut s.eigenvalues {
                *lambda = lambda.max(0.0);
            }
            s
        })
    }

    /// Numerical rank at this state's tolerance.
    pub fn rank(&self) -> usize {
        numerical_rank(self.spectrum(), self.rank_tolerance)
    }

    pub fn rank_with_tolerance(&self, tol: f64) -> usize {
        numerical_rank(self.spectrum(), tol)
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    /// `Tr(ρ²)` as the squared Frobenius norm.
    pub fn purity(&self) -> f64 {
        purity(self)
    }

    /// `1 − Tr(ρ²)`.
    pub fn linear_entropy(&self) -> f64 {
        linear_entropy(self)
    }

    /// `U ρ U†`. `u` must be unitary.
    pub fn conjugate(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch(self.dim(), u.nrows()));
        }
        let rotated = u * &self.matrix * u.adjoint();
        let rotated = (&rotated + rotated.adjoint()).scale(0.5);
        Ok(DensityMatrix::from_psd_unchecked(rotated).with_rank_tolerance(self.rank_tolerance))
    }
}

impl PartialEq for DensityMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

fn check_trace(m: &ComplexMatrix) -> Result<()> {
    let trace: f64 = m.diagonal().iter().map(|z| z.re).sum();
    if trace.is_nan() || (trace - 1.0).abs() > tolerance::TRACE {
        return Err(Error::BadTrace { trace });
    }
    Ok(())
}

/// `Tr(ρ²) = Σ|ρ_ij|²`; no diagonalization.
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.matrix.iter().map(|z| z.norm_sqr()).sum()
}

/// `S_L(ρ) = 1 − Tr(ρ²)`.
pub fn linear_entropy(rho: &DensityMatrix) -> f64 {
    1.0 - purity(rho)
}

/// `Π/r` where `Π` projects onto basis vectors `offset .. offset + r`.
pub fn projector_state(d: usize, r: usize, offset: usize) -> Result<DensityMatrix> {
    if d == 0 {
        return Err(Error::Empty);
    }
    if r == 0 || offset.checked_add(r).is_none_or(|end| end > d) {
        return Err(Error::InvalidRank { rank: r, dim: d });
    }
    let weight = 1.0 / r as f64;
    let probabilities: Vec<f64> = (0..d)
        .map(|i| if (offset..offset + r).contains(&i) { weight } else { 0.0 })
        .collect();
    DensityMatrix::from_diagonal(&probabilities)
}
