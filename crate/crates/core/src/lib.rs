//! Trace distance, Hilbert–Schmidt distance, and the bounds relating them.
//!
//! For two density matrices `rho` and `sigma` the crate computes
//!
//! - `D = ½ Tr|rho − sigma|` (trace distance),
//! - `D_HS = Tr[(rho − sigma)²]` (Hilbert–Schmidt distance, no diagonalization),
//! - `Q = D² / D_HS`,
//!
//! and every upper bound on `D²` expressed through `D_HS`: the norm-equivalence
//! bound `(d/4)·D_HS`, the rank-sum bound `((r_ρ + r_σ)/4)·D_HS`, the
//! reduced-rank bound `R·D_HS` with `R = r_ρ r_σ / (r_ρ + r_σ)`, and the two
//! additive linear-entropy bounds. Lower bound is `½·D_HS`.
//!
//! Modules:
//!
//! - [`states`]: density matrices, Hermitian eigendecomposition, rank, purity.
//! - [`metrics`]: distances and the positive/negative split of `rho − sigma`.
//! - [`bounds`]: the bound functions and per-pair [`bounds::BoundReport`].
//! - [`sampling`]: seeded random states (Haar, Ginibre, the rank/purity ensemble).
//! - [`experiments`]: ensemble sweeps, closed-form example tables, the
//!   counterexample search for `D² ≤ D_HS / Tr(rho²)`.
//! - [`cli`]: command-line front end and CSV/JSON output.

#![forbid(unsafe_code)]

pub mod bounds;
pub mod cli;
pub mod experiments;
pub mod metrics;
pub mod sampling;
pub mod states;
pub mod tolerance;

pub use bounds::{build_report, BoundReport};
pub use metrics::{hs_distance, q_ratio, signed_decomposition, trace_distance, SignedDecomposition};
pub use states::{ComplexMatrix, DensityMatrix, Spectrum};

use thiserror::Error;

/// Errors raised while validating inputs.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("empty matrix")]
    Empty,

    #[error("dimension mismatch: {0}x{0} vs {1}x{1}")]
    DimensionMismatch(usize, usize),

    #[error("matrix is not Hermitian (max |M - M^H| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("trace is not 1 (got {trace})")]
    BadTrace { trace: f64 },

    #[error("invalid rank {rank} for dimension {dim}")]
    InvalidRank { rank: usize, dim: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
