//! Seeded random states.
//!
//! # Reproducibility contract
//!
//! Every draw comes from an [`RngStream`]: ChaCha20 seeded with
//! `ChaCha20Rng::seed_from_u64(seed)` and switched to stream `stream_index`
//! with `set_stream`. A given `(seed, stream_index)` always yields the same
//! sequence, so sample `i` of an ensemble depends only on `(seed, i)` and not
//! on how samples are scheduled across threads.
//!
//! Variates:
//!
//! - uniform `[0, 1)`: the top 53 bits of one `next_u64`, times `2⁻⁵³`;
//! - standard complex Gaussian: one Box–Muller pair from two uniforms,
//!   `u₁ ∈ (0, 1]`, `u₂ ∈ [0, 1)`, `ρ = √(−2 ln u₁)`, giving
//!   `ρ cos 2πu₂ + i ρ sin 2πu₂` (real and imaginary parts each `N(0, 1)`);
//! - integers: `rand`'s `random_range` over the inclusive range.
//!
//! Complex matrices are filled column by column.

use nalgebra::DVector;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::states::{ComplexMatrix, DensityMatrix, C64};
use crate::{Error, Result};

/// Deterministic random stream identified by `(seed, stream_index)`.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_index: u64,
    rng: ChaCha20Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_index: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream_index);
        RngStream {
            seed,
            stream_index,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[lo, hi]`.
    pub fn uniform_int(&mut self, lo: usize, hi: usize) -> usize {
        self.rng.random_range(lo..=hi)
    }

    /// Standard complex Gaussian via Box–Muller.
    pub fn complex_normal(&mut self) -> C64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = std::f64::consts::TAU * u2;
        C64::new(radius * angle.cos(), radius * angle.sin())
    }

    /// `rows × cols` matrix of independent standard complex Gaussians.
    pub fn ginibre(&mut self, rows: usize, cols: usize) -> ComplexMatrix {
        let entries: Vec<C64> = (0..rows * cols).map(|_| self.complex_normal()).collect();
        ComplexMatrix::from_vec(rows, cols, entries)
    }
}

/// Haar-random pure state `|ψ⟩⟨ψ|`.
pub fn haar_pure(d: usize, rng: &mut RngStream) -> Result<DensityMatrix> {
    if d == 0 {
        return Err(Error::Empty);
    }
    let psi = DVector::from_iterator(d, (0..d).map(|_| rng.complex_normal()));
    DensityMatrix::pure(&psi)
}

/// `G G† / Tr(G G†)` with `G` a `d × r` complex Ginibre matrix.
pub fn ginibre_fixed_rank(d: usize, r: usize, rng: &mut RngStream) -> Result<DensityMatrix> {
    if r == 0 || r > d {
        return Err(Error::InvalidRank { rank: r, dim: d });
    }
    let g = rng.ginibre(d, r);
    let gram = &g * g.adjoint();
    let trace: f64 = gram.diagonal().iter().map(|z| z.re).sum();
    let m = gram.unscale(trace);
    let m = (&m + m.adjoint()).scale(0.5);
    Ok(DensityMatrix::from_psd_unchecked(m))
}

/// Haar unitary: QR of a Ginibre matrix, with `Q`'s columns rephased by
/// `R_jj / |R_jj|`.
pub fn haar_unitary(d: usize, rng: &mut RngStream) -> Result<ComplexMatrix> {
    if d == 0 {
        return Err(Error::Empty);
    }
    let z = rng.ginibre(d, d);
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        let modulus = rjj.norm();
        let phase = if modulus > 0.0 {
            rjj / modulus
        } else {
            C64::new(1.0, 0.0)
        };
        for entry in q.column_mut(j).iter_mut() {
            *entry *= phase;
        }
    }
    Ok(q)
}

/// Support size and target purity behind one rank/purity draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankPurityDraw {
    pub rank: usize,
    pub target_purity: f64,
}

/// Spectrum of support size `s` (padded with zeros to `d`) with purity `p`:
/// `λ₁ = (1 + (s−1)t)/s`, `λ₂..λ_s = (1−t)/s`, `t = √((ps − 1)/(s − 1))`.
pub fn rank_purity_spectrum(d: usize, s: usize, purity: f64) -> Result<Vec<f64>> {
    if s == 0 || s > d {
        return Err(Error::InvalidRank { rank: s, dim: d });
    }
    let sf = s as f64;
    if !(purity >= 1.0 / sf - 1e-12 && purity <= 1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!("purity {purity} outside [1/{s}, 1]")));
    }
    let t = if s == 1 {
        0.0
    } else {
        ((purity * sf - 1.0) / (sf - 1.0)).clamp(0.0, 1.0).sqrt()
    };
    let mut spectrum = vec![0.0; d];
    spectrum[0] = (1.0 + (sf - 1.0) * t) / sf;
    for lambda in spectrum.iter_mut().take(s).skip(1) {
        *lambda = (1.0 - t) / sf;
    }
    Ok(spectrum)
}

fn rank_purity_state(d: usize, s: usize, rng: &mut RngStream) -> Result<(DensityMatrix, RankPurityDraw)> {
    let lo = 1.0 / s as f64;
    let target_purity = lo + (1.0 - lo) * rng.uniform();
    let spectrum = rank_purity_spectrum(d, s, target_purity)?;
    let u = haar_unitary(d, rng)?;
    let state = DensityMatrix::from_eigenpairs(spectrum, u)?;
    Ok((state, RankPurityDraw { rank: s, target_purity }))
}

/// Rank uniform on `{1..d}`, purity uniform on `[1/s, 1]`, Haar-rotated.
pub fn fig1_sigma(d: usize, rng: &mut RngStream) -> Result<DensityMatrix> {
    Ok(fig1_sigma_draw(d, rng)?.0)
}

/// [`fig1_sigma`] together with the drawn rank and target purity.
pub fn fig1_sigma_draw(d: usize, rng: &mut RngStream) -> Result<(DensityMatrix, RankPurityDraw)> {
    if d == 0 {
        return Err(Error::Empty);
    }
    let s = rng.uniform_int(1, d);
    rank_purity_state(d, s, rng)
}

/// Rank uniform on `{1..⌊d/4⌋}`, Ginibre state of that rank. Needs `d ≥ 4`.
pub fn fig1_rho(d: usize, rng: &mut RngStream) -> Result<DensityMatrix> {
    if d < 4 {
        return Err(Error::InvalidParameter(format!("fig1_rho needs d >= 4, got {d}")));
    }
    let r = rng.uniform_int(1, d / 4);
    ginibre_fixed_rank(d, r, rng)
}

/// How the rank of each sample is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RankLaw {
    Fixed(usize),
    /// Uniform on `lo..=hi`.
    UniformIn(usize, usize),
}

/// How the spectrum is chosen once the rank is fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PurityLaw {
    /// Whatever the Ginibre construction gives.
    EnsembleNatural,
    /// Purity uniform on `[1/r, 1]` via [`rank_purity_spectrum`].
    UniformGivenRank,
}

/// A seeded random-state ensemble. Sample `i` uses stream `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub dim: usize,
    pub rank_law: RankLaw,
    pub purity_law: PurityLaw,
    pub seed: u64,
}

impl EnsembleSpec {
    /// The `σ` ensemble: rank and purity both uniform.
    pub fn figure1_sigma(dim: usize, seed: u64) -> Self {
        EnsembleSpec {
            dim,
            rank_law: RankLaw::UniformIn(1, dim),
            purity_law: PurityLaw::UniformGivenRank,
            seed,
        }
    }

    /// The `ρ` ensemble: Ginibre with rank uniform on `1..=d/4`.
    pub fn figure1_rho(dim: usize, seed: u64) -> Self {
        EnsembleSpec {
            dim,
            rank_law: RankLaw::UniformIn(1, (dim / 4).max(1)),
            purity_law: PurityLaw::EnsembleNatural,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim;
        if d == 0 {
            return Err(Error::Empty);
        }
        match self.rank_law {
            RankLaw::Fixed(r) if r == 0 || r > d => Err(Error::InvalidRank { rank: r, dim: d }),
            RankLaw::UniformIn(lo, hi) if lo == 0 || lo > hi || hi > d => Err(Error::InvalidParameter(format!(
                "rank range {lo}..={hi} invalid for d={d}"
            ))),
            _ => Ok(()),
        }
    }

    /// Draw one state from `rng`.
    pub fn sample_with(&self, rng: &mut RngStream) -> Result<DensityMatrix> {
        self.validate()?;
        let rank = match self.rank_law {
            RankLaw::Fixed(r) => r,
            RankLaw::UniformIn(lo, hi) => rng.uniform_int(lo, hi),
        };
        match self.purity_law {
            PurityLaw::EnsembleNatural => ginibre_fixed_rank(self.dim, rank, rng),
            PurityLaw::UniformGivenRank => Ok(rank_purity_state(self.dim, rank, rng)?.0),
        }
    }

    /// Sample `index` of this ensemble.
    pub fn sample(&self, index: u64) -> Result<DensityMatrix> {
        self.sample_with(&mut RngStream::new(self.seed, index))
    }

    /// Samples `0..n`, generated in parallel; identical to sequential generation.
    pub fn samples(&self, n: usize) -> Result<Vec<DensityMatrix>> {
        (0..n as u64).into_par_iter().map(|i| self.sample(i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{hermitian_eig, max_abs};

    #[test]
    fn stream_is_reproducible() {
        let mut a = RngStream::new(5, 3);
        let mut b = RngStream::new(5, 3);
        let mut c = RngStream::new(5, 4);
        let xa: Vec<u64> = (0..8).map(|_| a.next_u64()).collect();
        let xb: Vec<u64> = (0..8).map(|_| b.next_u64()).collect();
        let xc: Vec<u64> = (0..8).map(|_| c.next_u64()).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
    }

    #[test]
    fn box_muller_moments() {
        let mut rng = RngStream::new(11, 0);
        let n = 200_000;
        let (mut mean, mut var) = (C64::new(0.0, 0.0), 0.0);
        for _ in 0..n {
            let z = rng.complex_normal();
            mean += z;
            var += z.norm_sqr();
        }
        mean /= n as f64;
        var /= n as f64;
        assert!(mean.norm() < 0.01, "{mean}");
        assert!((var - 2.0).abs() < 0.02, "{var}");
    }

    #[test]
    fn haar_pure_d1_is_one() {
        let rho = haar_pure(1, &mut RngStream::new(0, 0)).unwrap();
        assert!((rho.matrix()[(0, 0)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn haar_pure_is_pure() {
        let rho = haar_pure(4, &mut RngStream::new(7, 0)).unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-12);
        assert!((rho.trace() - 1.0).abs() < 1e-12);
        assert_eq!(rho.rank(), 1);
    }

    #[test]
    fn haar_pure_draws_differ() {
        let mut rng = RngStream::new(1, 0);
        let first = haar_pure(3, &mut rng).unwrap();
        for _ in 0..100 {
            let next = haar_pure(3, &mut rng).unwrap();
            // Tr(ρσ) = |⟨ψ|φ⟩|²
            let overlap: f64 = (first.matrix() * next.matrix()).trace().re;
            assert!(overlap < 1.0 - 1e-9);
        }
    }

    #[test]
    fn ginibre_rank_and_trace() {
        let rho = ginibre_fixed_rank(2, 2, &mut RngStream::new(1, 0)).unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-12);
        assert_eq!(rho.rank(), 2);
        let pure = ginibre_fixed_rank(5, 1, &mut RngStream::new(1, 1)).unwrap();
        assert!((pure.purity() - 1.0).abs() < 1e-12);
        let rho = ginibre_fixed_rank(16, 4, &mut RngStream::new(42, 0)).unwrap();
        assert_eq!(rho.rank_with_tolerance(1e-10), 4);
        let below = rho
            .spectrum()
            .eigenvalues()
            .iter()
            .filter(|&&l| l <= 1e-10 * rho.spectrum().max())
            .count();
        assert_eq!(below, 12);
        assert!(ginibre_fixed_rank(3, 4, &mut RngStream::new(0, 0)).is_err());
        assert!(ginibre_fixed_rank(3, 0, &mut RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let u = haar_unitary(1, &mut RngStream::new(0, 0)).unwrap();
        assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-15);
        let u = haar_unitary(4, &mut RngStream::new(3, 0)).unwrap();
        let err = &u.adjoint() * &u - ComplexMatrix::identity(4, 4);
        assert!(max_abs(&err) <= 1e-10);
    }

    #[test]
    fn conjugation_preserves_spectrum() {
        let rho = ginibre_fixed_rank(6, 3, &mut RngStream::new(9, 0)).unwrap();
        let u = haar_unitary(6, &mut RngStream::new(9, 1)).unwrap();
        let rotated = rho.conjugate(&u).unwrap();
        let before = rho.spectrum().eigenvalues();
        let after = hermitian_eig(rotated.matrix()).unwrap();
        for (a, b) in before.iter().zip(after.eigenvalues()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn rank_purity_spectrum_hits_target() {
        for s in 1..=6 {
            for k in 0..=10 {
                let lo = 1.0 / s as f64;
                let p = lo + (1.0 - lo) * k as f64 / 10.0;
                let spec = rank_purity_spectrum(8, s, p).unwrap();
                let sum: f64 = spec.iter().sum();
                let purity: f64 = spec.iter().map(|x| x * x).sum();
                assert!((sum - 1.0).abs() < 1e-14);
                assert!((purity - p).abs() < 1e-12, "s={s} p={p} got {purity}");
                assert!(spec.windows(2).all(|w| w[0] >= w[1]));
            }
        }
        assert!(rank_purity_spectrum(4, 2, 0.3).is_err());
        assert!(rank_purity_spectrum(4, 5, 0.5).is_err());
    }

    #[test]
    fn fig1_sigma_invariants() {
        let mut rng = RngStream::new(2024, 0);
        for _ in 0..200 {
            let (sigma, draw) = fig1_sigma_draw(8, &mut rng).unwrap();
            assert!((sigma.purity() - draw.target_purity).abs() < 1e-9);
            if draw.target_purity < 1.0 - 1e-6 {
                assert_eq!(sigma.rank_with_tolerance(1e-10), draw.rank);
            }
            assert!((sigma.trace() - 1.0).abs() < 1e-10);
        }
        let one = fig1_sigma(1, &mut rng).unwrap();
        assert!((one.matrix()[(0, 0)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fig1_rho_rank_range() {
        for i in 0..50 {
            let rho = fig1_rho(16, &mut RngStream::new(3, i)).unwrap();
            assert!((1..=4).contains(&rho.rank()));
            let rho4 = fig1_rho(4, &mut RngStream::new(3, i)).unwrap();
            assert_eq!(rho4.rank(), 1);
        }
        assert!(fig1_rho(3, &mut RngStream::new(0, 0)).is_err());
        let a = fig1_rho(16, &mut RngStream::new(77, 5)).unwrap();
        let b = fig1_rho(16, &mut RngStream::new(77, 5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ensemble_parallel_matches_sequential() {
        let spec = EnsembleSpec::figure1_sigma(5, 99);
        let par = spec.samples(32).unwrap();
        let seq: Vec<_> = (0..32).map(|i| spec.sample(i).unwrap()).collect();
        assert_eq!(par, seq);
    }

    #[test]
    fn ensemble_validation() {
        let mut spec = EnsembleSpec::figure1_rho(8, 0);
        assert!(spec.validate().is_ok());
        spec.rank_law = RankLaw::Fixed(9);
        assert!(spec.validate().is_err());
        spec.rank_law = RankLaw::UniformIn(3, 2);
        assert!(spec.validate().is_err());
        spec.rank_law = RankLaw::Fixed(3);
        spec.purity_law = PurityLaw::UniformGivenRank;
        assert_eq!(spec.sample(0).unwrap().rank(), 3);
    }
}
