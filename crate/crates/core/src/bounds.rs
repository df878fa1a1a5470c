//! Upper and lower bounds on `D²` in terms of `D_HS`, and the per-pair report.
//!
//! All bound functions return the right-hand side for `D²`:
//!
//! | bound | value |
//! |---|---|
//! | lower | `½ · D_HS` |
//! | norm equivalence | `(d/4) · D_HS` |
//! | rank sum | `((r_ρ + r_σ)/4) · D_HS` |
//! | reduced rank | `R · D_HS`, `R = r_ρ r_σ / (r_ρ + r_σ)` |
//! | entropy (sum) | `½ (D_HS + S_L(ρ) + S_L(σ))` |
//! | entropy (min) | `D_HS + min(S_L(ρ), S_L(σ))` |

use serde::{Deserialize, Serialize};

use crate::metrics::{hs_distance, q_from, SignedDecomposition};
use crate::states::{DensityMatrix, Spectrum};
use crate::tolerance;
use crate::{Error, Result};

/// `r_ρ r_σ / (r_ρ + r_σ)`.
pub fn reduced_rank(rank_rho: usize, rank_sigma: usize) -> Result<f64> {
    if rank_rho == 0 || rank_sigma == 0 {
        return Err(Error::InvalidParameter(format!(
            "reduced rank needs positive ranks, got ({rank_rho}, {rank_sigma})"
        )));
    }
    let (a, b) = (rank_rho as f64, rank_sigma as f64);
    Ok(a * b / (a + b))
}

pub fn lower_bound_half_hs(hs: f64) -> f64 {
    0.5 * hs
}

/// `(d/4) · D_HS`.
pub fn norm_equivalence_upper(dim: usize, hs: f64) -> f64 {
    dim as f64 / 4.0 * hs
}

/// `((r_ρ + r_σ)/4) · D_HS`.
pub fn rank_sum_upper(rank_rho: usize, rank_sigma: usize, hs: f64) -> f64 {
    (rank_rho + rank_sigma) as f64 / 4.0 * hs
}

/// `R · D_HS`.
pub fn theorem1_upper(rank_rho: usize, rank_sigma: usize, hs: f64) -> Result<f64> {
    Ok(reduced_rank(rank_rho, rank_sigma)? * hs)
}

/// `½ (D_HS + S_L(ρ) + S_L(σ))`.
pub fn entropy_upper_p2(hs: f64, sl_rho: f64, sl_sigma: f64) -> f64 {
    0.5 * (hs + sl_rho + sl_sigma)
}

/// `D_HS + min(S_L(ρ), S_L(σ))`.
pub fn entropy_upper_p3(hs: f64, sl_rho: f64, sl_sigma: f64) -> f64 {
    hs + sl_rho.min(sl_sigma)
}

/// Ranks compared by the positive/negative-part rank check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lemma1Check {
    pub holds: bool,
    pub rank_plus: usize,
    pub rank_minus: usize,
    pub rank_rho: usize,
    pub rank_sigma: usize,
}

/// `rank(Δ₊) ≤ rank(ρ)` and `rank(Δ₋) ≤ rank(σ)`, ranks of the parts taken at `tol`.
pub fn check_lemma1(sd: &SignedDecomposition, rank_rho: usize, rank_sigma: usize, tol: f64) -> Lemma1Check {
    let rank_plus = sd.rank_plus(tol);
    let rank_minus = sd.rank_minus(tol);
    Lemma1Check {
        holds: rank_plus <= rank_rho && rank_minus <= rank_sigma,
        rank_plus,
        rank_minus,
        rank_rho,
        rank_sigma,
    }
}

/// Eigenvalue domination from `ρ = Δ + σ` and `σ = −Δ + ρ`:
/// `r_j ≥ δ_j − tol` and `s_j ≥ δ̄_j − tol` for all `j`, all lists decreasing,
/// `δ̄` the spectrum of `−Δ`.
pub fn check_weyl(rho_spec: &Spectrum, sigma_spec: &Spectrum, delta_spec: &Spectrum, tol: f64) -> bool {
    let d = delta_spec.dim();
    if rho_spec.dim() != d || sigma_spec.dim() != d {
        return false;
    }
    let delta = delta_spec.eigenvalues();
    let rho_ok = rho_spec.eigenvalues().iter().zip(delta).all(|(r, dl)| *r >= dl - tol);
    let sigma_ok = sigma_spec
        .eigenvalues()
        .iter()
        .zip(delta.iter().rev())
        .all(|(s, dl)| *s >= -dl - tol);
    rho_ok && sigma_ok
}

/// Distances, ranks, entropies and every bound for one `(ρ, σ)` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub dim: usize,
    pub rank_tol: f64,
    pub rank_rho: usize,
    pub rank_sigma: usize,
    pub reduced_rank: f64,
    pub trace_distance: f64,
    pub hs_distance: f64,
    pub q_ratio: Option<f64>,
    pub linear_entropy_rho: f64,
    pub linear_entropy_sigma: f64,
    pub lower_bound_half_hs: f64,
    pub upper_norm_equiv: f64,
    pub upper_rank_sum: f64,
    pub upper_theorem1: f64,
    pub upper_entropy_p2: f64,
    pub upper_entropy_p3: f64,
    pub best_upper: f64,
    pub lemma1: Lemma1Check,
    pub lemma1_ok: bool,
    pub weyl_ok: bool,
}

impl BoundReport {
    /// `D²`.
    pub fn trace_distance_sq(&self) -> f64 {
        self.trace_distance * self.trace_distance
    }

    /// Every upper bound, labelled.
    pub fn upper_bounds(&self) -> [(&'static str, f64); 5] {
        [
            ("norm_equiv", self.upper_norm_equiv),
            ("rank_sum", self.upper_rank_sum),
            ("theorem1", self.upper_theorem1),
            ("entropy_p2", self.upper_entropy_p2),
            ("entropy_p3", self.upper_entropy_p3),
        ]
    }

    /// Recompute `best_upper` from the individual bounds.
    pub fn refresh_best_upper(&mut self) {
        self.best_upper = self
            .upper_bounds()
            .iter()
            .map(|&(_, v)| v)
            .fold(f64::INFINITY, f64::min);
    }

    /// Every failed bound or check, as a short message. Empty when the pair is
    /// consistent with all bounds at `slack`.
    pub fn violations(&self, slack: f64) -> Vec<String> {
        let mut out = Vec::new();
        let d2 = self.trace_distance_sq();
        if self.lower_bound_half_hs > d2 + slack {
            out.push(format!(
                "lower bound: D^2={d2:e} < D_HS/2={:e}",
                self.lower_bound_half_hs
            ));
        }
        for (name, value) in self.upper_bounds() {
            if d2 > value + slack {
                out.push(format!("{name}: D^2={d2:e} > {value:e}"));
            }
        }
        if let Some(q) = self.q_ratio {
            let cap = self.reduced_rank.min(self.dim as f64 / 4.0);
            if q < 0.5 - slack || q > cap + slack {
                out.push(format!("Q chain: Q={q:e} outside [1/2, {cap:e}]"));
            }
        }
        if self.upper_theorem1 > self.upper_rank_sum + 1e-12 {
            out.push("ordering: R*D_HS > rank-sum bound".to_string());
        }
        if self.reduced_rank > self.rank_rho.min(self.rank_sigma) as f64 {
            out.push("ordering: R > min(rank)".to_string());
        }
        if !self.lemma1_ok {
            out.push(format!("lemma1: {:?}", self.lemma1));
        }
        if !self.weyl_ok {
            out.push("weyl: eigenvalue domination failed".to_string());
        }
        out
    }
}

/// Report with ranks at `rho`'s rank tolerance.
pub fn build_report(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<BoundReport> {
    build_report_with_tol(rho, sigma, rho.rank_tolerance())
}

/// Report with all ranks (states and both parts of `Δ`) taken at `rank_tol`.
pub fn build_report_with_tol(rho: &DensityMatrix, sigma: &DensityMatrix, rank_tol: f64) -> Result<BoundReport> {
    let sd = SignedDecomposition::new(rho, sigma)?;
    let dim = rho.dim();
    let hs = hs_distance(rho, sigma)?;
    let trace_distance = sd.trace_distance();
    let rank_rho = rho.rank_with_tolerance(rank_tol);
    let rank_sigma = sigma.rank_with_tolerance(rank_tol);
    let sl_rho = rho.linear_entropy();
    let sl_sigma = sigma.linear_entropy();
    let lemma1 = check_lemma1(&sd, rank_rho, rank_sigma, rank_tol);
    let weyl_ok = check_weyl(rho.spectrum(), sigma.spectrum(), sd.delta_spectrum(), tolerance::WEYL);

    let mut report = BoundReport {
        dim,
        rank_tol,
        rank_rho,
        rank_sigma,
        reduced_rank: reduced_rank(rank_rho, rank_sigma)?,
        trace_distance,
        hs_distance: hs,
        q_ratio: q_from(trace_distance, hs),
        linear_entropy_rho: sl_rho,
        linear_entropy_sigma: sl_sigma,
        lower_bound_half_hs: lower_bound_half_hs(hs),
        upper_norm_equiv: norm_equivalence_upper(dim, hs),
        upper_rank_sum: rank_sum_upper(rank_rho, rank_sigma, hs),
        upper_theorem1: theorem1_upper(rank_rho, rank_sigma, hs)?,
        upper_entropy_p2: entropy_upper_p2(hs, sl_rho, sl_sigma),
        upper_entropy_p3: entropy_upper_p3(hs, sl_rho, sl_sigma),
        best_upper: f64::INFINITY,
        lemma1_ok: lemma1.holds,
        lemma1,
        weyl_ok,
    };
    report.refresh_best_upper();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::signed_decomposition;
    use crate::states::projector_state;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn reduced_rank_examples() {
        close(reduced_rank(1, 1).unwrap(), 0.5, 0.0);
        close(reduced_rank(1, 16).unwrap(), 16.0 / 17.0, 1e-16);
        close(reduced_rank(2, 2).unwrap(), 1.0, 0.0);
        assert!(reduced_rank(0, 3).is_err());
        assert!(reduced_rank(3, 0).is_err());
    }

    #[test]
    fn norm_equivalence_examples() {
        assert_eq!(norm_equivalence_upper(4, 1.0), 1.0);
        assert_eq!(norm_equivalence_upper(16, 0.5), 2.0);
        assert_eq!(norm_equivalence_upper(2, 0.0), 0.0);
    }

    #[test]
    fn rank_sum_examples() {
        assert_eq!(rank_sum_upper(1, 1, 1.0), 0.5);
        // Pure vs I/16: D_HS = 15/16
        close(rank_sum_upper(1, 16, 15.0 / 16.0), 17.0 / 4.0 * 15.0 / 16.0, 1e-15);
        assert_eq!(rank_sum_upper(2, 2, 0.0), 0.0);
    }

    #[test]
    fn theorem1_examples() {
        close(theorem1_upper(1, 16, 1.0).unwrap(), 16.0 / 17.0, 1e-16);
        assert_eq!(theorem1_upper(2, 2, 1.0).unwrap(), 1.0);
        assert_eq!(theorem1_upper(3, 5, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn entropy_examples() {
        // ρ = Π/2, σ = I/4 in d = 4: D_HS = 0.25, S_L = 0.5, 0.75
        assert_eq!(entropy_upper_p2(0.25, 0.5, 0.75), 0.75);
        assert_eq!(entropy_upper_p3(0.25, 0.5, 0.75), 0.75);
        assert_eq!(entropy_upper_p2(1.0, 0.0, 0.0), 0.5);
        assert_eq!(entropy_upper_p3(0.7, 0.0, 0.4), 0.7);
        assert_eq!(entropy_upper_p2(0.0, 0.0, 0.0), 0.0);
        assert_eq!(entropy_upper_p3(0.0, 0.0, 0.0), 0.0);
    }

    #[test]
    fn lemma1_examples() {
        let rho = projector_state(2, 1, 0).unwrap();
        let sigma = projector_state(2, 1, 1).unwrap();
        let sd = signed_decomposition(&rho, &sigma).unwrap();
        let check = check_lemma1(&sd, 1, 1, 1e-10);
        assert!(check.holds);
        assert_eq!((check.rank_plus, check.rank_minus), (1, 1));

        let rho = projector_state(4, 2, 0).unwrap();
        let sigma = DensityMatrix::maximally_mixed(4).unwrap();
        let sd = signed_decomposition(&rho, &sigma).unwrap();
        let check = check_lemma1(&sd, rho.rank(), sigma.rank(), 1e-10);
        assert!(check.holds);
        assert_eq!(
            (check.rank_plus, check.rank_minus, check.rank_rho, check.rank_sigma),
            (2, 2, 2, 4)
        );

        // Under-reported ranks must fail.
        assert!(!check_lemma1(&sd, 1, 4, 1e-10).holds);
    }

    #[test]
    fn weyl_examples() {
        let rho = projector_state(4, 2, 0).unwrap();
        let sd = signed_decomposition(&rho, &rho).unwrap();
        assert!(check_weyl(rho.spectrum(), rho.spectrum(), sd.delta_spectrum(), 1e-10));

        // r = (½,½,0,0), s = (¼,¼,¼,¼), δ = (¼,¼,−¼,−¼), δ̄ = (¼,¼,−¼,−¼)
        let sigma = DensityMatrix::maximally_mixed(4).unwrap();
        let sd = signed_decomposition(&rho, &sigma).unwrap();
        assert!(check_weyl(rho.spectrum(), sigma.spectrum(), sd.delta_spectrum(), 1e-10));
        // A rank-1 spectrum cannot dominate δ = (¼, ¼, −¼, −¼).
        let pure = projector_state(4, 1, 0).unwrap();
        assert!(!check_weyl(
            pure.spectrum(),
            sigma.spectrum(),
            sd.delta_spectrum(),
            1e-10
        ));
    }

    #[test]
    fn report_orthogonal_projectors_saturate() {
        let rho = projector_state(8, 2, 0).unwrap();
        let sigma = projector_state(8, 2, 2).unwrap();
        let report = build_report(&rho, &sigma).unwrap();
        close(report.trace_distance, 1.0, 1e-14);
        close(report.hs_distance, 1.0, 1e-14);
        close(report.reduced_rank, 1.0, 0.0);
        close(report.q_ratio.unwrap(), 1.0, 1e-14);
        close(report.upper_theorem1, report.trace_distance_sq(), 1e-14);
        close(report.best_upper, 1.0, 1e-14);
        assert!(report.violations(1e-9).is_empty());
    }

    #[test]
    fn report_pure_versus_mixed_d16() {
        let rho = projector_state(16, 1, 0).unwrap();
        let sigma = DensityMatrix::maximally_mixed(16).unwrap();
        let report = build_report(&rho, &sigma).unwrap();
        close(report.q_ratio.unwrap(), 0.9375, 1e-12);
        close(report.reduced_rank, 16.0 / 17.0, 1e-16);
        assert_eq!(report.upper_entropy_p3, report.hs_distance);
        assert!(report.violations(1e-9).is_empty());
    }

    #[test]
    fn report_equal_states() {
        let rho = projector_state(6, 3, 1).unwrap();
        let report = build_report(&rho, &rho).unwrap();
        assert_eq!(report.trace_distance, 0.0);
        assert_eq!(report.hs_distance, 0.0);
        assert_eq!(report.q_ratio, None);
        assert!(report.lemma1_ok && report.weyl_ok);
        assert!(report.violations(1e-9).is_empty());
    }

    #[test]
    fn corrupted_report_is_flagged() {
        let rho = projector_state(8, 2, 0).unwrap();
        let sigma = projector_state(8, 2, 2).unwrap();
        let mut report = build_report(&rho, &sigma).unwrap();
        report.upper_theorem1 -= 1.0;
        report.refresh_best_upper();
        let v = report.violations(1e-9);
        assert!(v.iter().any(|m| m.starts_with("theorem1")), "{v:?}");
    }
}
