//! Numerical thresholds shared across the crate.

/// Hermiticity check: `max|M − M†| ≤ HERMITIAN · max|M_ij|`.
pub const HERMITIAN: f64 = 1e-10;

/// Absolute slack on `Tr(rho) = 1`.
pub const TRACE: f64 = 1e-10;

/// Negative eigenvalues down to `−d · NEGATIVE_CLAMP · λ_max` are roundoff and read as 0.
pub const NEGATIVE_CLAMP: f64 = 1e-12;

/// Default relative cutoff for numerical rank: `λ_j > tol · λ_1`.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Eigenvalues of `rho − sigma` with `|δ| ≤ ZERO_EIGENVALUE` belong to neither part.
pub const ZERO_EIGENVALUE: f64 = 1e-12;

/// `Q` is undefined when `D_HS ≤ Q_DEGENERACY`.
pub const Q_DEGENERACY: f64 = 1e-12;

/// Additive slack for bound comparisons on computed values.
pub const BOUND_SLACK: f64 = 1e-9;

/// Slack for eigenvalue interlacing (Weyl) checks.
pub const WEYL: f64 = 1e-10;

/// Bound slack for dimension `d`: [`BOUND_SLACK`], scaled by `d/64` above 64.
pub fn bound_slack(dim: usize) -> f64 {
    if dim > 64 {
        BOUND_SLACK * dim as f64 / 64.0
    } else {
        BOUND_SLACK
    }
}
