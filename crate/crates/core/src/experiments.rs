//! Ensemble experiments: the `Q`-versus-`R` sweep, closed-form example
//! tables, the counterexample search for `D² ≤ D_HS / Tr(ρ²)`, and the full
//! bound verification sweep.
//!
//! Sample `i` of every experiment is drawn from `RngStream::new(seed, i)`
//! (or a per-dimension offset of `i`), so results do not depend on how rayon
//! schedules the work.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{build_report_with_tol, reduced_rank, BoundReport};
use crate::metrics::{hs_distance, trace_distance, SignedDecomposition};
use crate::sampling::{
    fig1_rho, fig1_sigma, ginibre_fixed_rank, haar_pure, haar_unitary, rank_purity_spectrum, RngStream,
};
use crate::states::{projector_state, DensityMatrix};
use crate::tolerance;
use crate::{Error, Result};

/// One point of the `Q`-versus-`R` scatter, plus the certificate columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub index: u64,
    pub d: usize,
    pub rank_rho: usize,
    pub rank_sigma: usize,
    #[serde(rename = "R")]
    pub reduced_rank: f64,
    #[serde(rename = "trace_dist")]
    pub trace_distance: f64,
    #[serde(rename = "hs_dist")]
    pub hs_distance: f64,
    #[serde(rename = "Q")]
    pub q_ratio: f64,
    #[serde(rename = "ub_theorem1")]
    pub upper_theorem1: f64,
    #[serde(rename = "ub_norm_equiv")]
    pub upper_norm_equiv: f64,
    #[serde(rename = "ub_rank_sum")]
    pub upper_rank_sum: f64,
    #[serde(rename = "ub_entropy_p2")]
    pub upper_entropy_p2: f64,
    #[serde(rename = "ub_entropy_p3")]
    pub upper_entropy_p3: f64,
    pub lemma1_ok: bool,
    pub weyl_ok: bool,
}

impl SampleRecord {
    fn from_report(index: u64, report: &BoundReport) -> Self {
        SampleRecord {
            index,
            d: report.dim,
            rank_rho: report.rank_rho,
            rank_sigma: report.rank_sigma,
            reduced_rank: report.reduced_rank,
            trace_distance: report.trace_distance,
            hs_distance: report.hs_distance,
            q_ratio: report.q_ratio.unwrap_or(f64::NAN),
            upper_theorem1: report.upper_theorem1,
            upper_norm_equiv: report.upper_norm_equiv,
            upper_rank_sum: report.upper_rank_sum,
            upper_entropy_p2: report.upper_entropy_p2,
            upper_entropy_p3: report.upper_entropy_p3,
            lemma1_ok: report.lemma1_ok,
            weyl_ok: report.weyl_ok,
        }
    }
}

/// A failed check with everything needed to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub dim: usize,
    pub index: u64,
    pub seed: u64,
    pub messages: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub n_samples: usize,
    pub violations: usize,
    pub failures: Vec<Violation>,
    /// Largest `Q / R` seen.
    pub max_q_over_r: f64,
    pub min_q: f64,
    /// Pairs redrawn because `D_HS ≤ 1e-12`.
    pub redraws: usize,
    pub runtime_seconds: f64,
    pub seed: u64,
}

impl ExperimentSummary {
    fn new(seed: u64) -> Self {
        ExperimentSummary {
            n_samples: 0,
            violations: 0,
            failures: Vec::new(),
            max_q_over_r: f64::NEG_INFINITY,
            min_q: f64::INFINITY,
            redraws: 0,
            runtime_seconds: 0.0,
            seed,
        }
    }

    fn absorb(&mut self, outcome: PairOutcome) {
        self.n_samples += 1;
        self.redraws += outcome.redraws;
        if let Some(q) = outcome.q_ratio {
            self.min_q = self.min_q.min(q);
            self.max_q_over_r = self.max_q_over_r.max(q / outcome.reduced_rank);
        }
        if let Some(v) = outcome.violation {
            self.violations += 1;
            self.failures.push(v);
        }
    }
}

struct PairOutcome {
    q_ratio: Option<f64>,
    reduced_rank: f64,
    redraws: usize,
    violation: Option<Violation>,
}

/// Records sorted by `(R, index)` and their summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Figure1Run {
    pub records: Vec<SampleRecord>,
    pub summary: ExperimentSummary,
}

/// `n` pairs with `ρ` of rank `1..=d/4` and `σ` of uniform rank and purity.
pub fn run_figure1(d: usize, n: usize, seed: u64) -> Result<Figure1Run> {
    run_figure1_with_tol(d, n, seed, tolerance::DEFAULT_RANK_TOL)
}

pub fn run_figure1_with_tol(d: usize, n: usize, seed: u64, rank_tol: f64) -> Result<Figure1Run> {
    if !(4..=64).contains(&d) {
        return Err(Error::InvalidParameter(format!("figure1 needs 4 <= d <= 64, got {d}")));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("figure1 needs at least one sample".into()));
    }
    let start = Instant::now();
    let slack = tolerance::bound_slack(d);
    let evaluated: Vec<(SampleRecord, PairOutcome)> = (0..n as u64)
        .into_par_iter()
        .map(|index| {
            let mut rng = RngStream::new(seed, index);
            let mut redraws = 0;
            loop {
                let rho = fig1_rho(d, &mut rng)?.with_rank_tolerance(rank_tol);
                let sigma = fig1_sigma(d, &mut rng)?.with_rank_tolerance(rank_tol);
                let report = build_report_with_tol(&rho, &sigma, rank_tol)?;
                if report.q_ratio.is_none() {
                    redraws += 1;
                    continue;
                }
                let messages = report.violations(slack);
                let outcome = PairOutcome {
                    q_ratio: report.q_ratio,
                    reduced_rank: report.reduced_rank,
                    redraws,
                    violation: (!messages.is_empty()).then_some(Violation {
                        dim: d,
                        index,
                        seed,
                        messages,
                    }),
                };
                return Ok((SampleRecord::from_report(index, &report), outcome));
            }
        })
        .collect::<Result<_>>()?;

    let mut summary = ExperimentSummary::new(seed);
    let mut records = Vec::with_capacity(n);
    for (record, outcome) in evaluated {
        summary.absorb(outcome);
        records.push(record);
    }
    records.sort_by(|a, b| a.reduced_rank.total_cmp(&b.reduced_rank).then(a.index.cmp(&b.index)));
    summary.runtime_seconds = start.elapsed().as_secs_f64();
    Ok(Figure1Run { records, summary })
}

/// Largest `Q` among records sharing one value of `R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeBin {
    pub reduced_rank: f64,
    pub count: usize,
    pub max_q: f64,
}

/// Upper envelope of `Q` per distinct `R`. Expects records sorted by `R`.
pub fn q_envelope(records: &[SampleRecord]) -> Vec<EnvelopeBin> {
    let mut bins: Vec<EnvelopeBin> = Vec::new();
    for rec in records {
        match bins.last_mut() {
            Some(bin) if bin.reduced_rank == rec.reduced_rank => {
                bin.count += 1;
                bin.max_q = bin.max_q.max(rec.q_ratio);
            }
            _ => bins.push(EnvelopeBin {
                reduced_rank: rec.reduced_rank,
                count: 1,
                max_q: rec.q_ratio,
            }),
        }
    }
    bins
}

/// `D`, `D_HS`, `Q` triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceTriple {
    pub trace_distance: f64,
    pub hs_distance: f64,
    pub q_ratio: f64,
}

impl DistanceTriple {
    fn max_residual(&self, other: &DistanceTriple) -> f64 {
        (self.trace_distance - other.trace_distance)
            .abs()
            .max((self.hs_distance - other.hs_distance).abs())
            .max((self.q_ratio - other.q_ratio).abs())
    }
}

/// One row of the closed-form comparison table.
///
/// Family `2` is `ρ = Π_r / r` against `σ = I/d`; family `3` is `Π_r / r`
/// against `Π_s / s` with orthogonal supports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleRow {
    pub example: u8,
    pub d: usize,
    pub r: usize,
    pub s: usize,
    pub reduced_rank: f64,
    pub computed: Option<DistanceTriple>,
    pub closed_form: Option<DistanceTriple>,
    pub skipped: Option<String>,
}

impl ExampleRow {
    /// Largest absolute gap between computed and closed-form values.
    pub fn residual(&self) -> Option<f64> {
        Some(self.computed?.max_residual(&self.closed_form?))
    }
}

fn computed_triple(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<(DistanceTriple, f64)> {
    let report = build_report_with_tol(rho, sigma, tolerance::DEFAULT_RANK_TOL)?;
    let triple = DistanceTriple {
        trace_distance: report.trace_distance,
        hs_distance: report.hs_distance,
        q_ratio: report.q_ratio.unwrap_or(f64::NAN),
    };
    Ok((triple, report.reduced_rank))
}

/// Closed forms against computed values for every `r < d` (family 2) and
/// every `r + s ≤ d` (family 3). `r = d` in family 2 is a skipped row.
pub fn examples_table(d: usize) -> Result<Vec<ExampleRow>> {
    if d < 4 {
        return Err(Error::InvalidParameter(format!("examples need d >= 4, got {d}")));
    }
    let df = d as f64;
    let mut rows = Vec::new();
    let sigma = DensityMatrix::maximally_mixed(d)?;
    for r in 1..=d {
        let rf = r as f64;
        let big_r = reduced_rank(r, d)?;
        if r == d {
            rows.push(ExampleRow {
                example: 2,
                d,
                r,
                s: d,
                reduced_rank: big_r,
                computed: None,
                closed_form: None,
                skipped: Some("states equal".into()),
            });
            continue;
        }
        let rho = projector_state(d, r, 0)?;
        let (computed, _) = computed_triple(&rho, &sigma)?;
        let closed = DistanceTriple {
            trace_distance: (df - rf) / df,
            hs_distance: (df - rf) / (df * rf),
            q_ratio: big_r * (df * df - rf * rf) / (df * df),
        };
        rows.push(ExampleRow {
            example: 2,
            d,
            r,
            s: d,
            reduced_rank: big_r,
            computed: Some(computed),
            closed_form: Some(closed),
            skipped: None,
        });
    }
    for r in 1..d {
        for s in 1..=(d - r) {
            let (rf, sf) = (r as f64, s as f64);
            let big_r = reduced_rank(r, s)?;
            let rho = projector_state(d, r, 0)?;
            let sigma = projector_state(d, s, r)?;
            let (computed, _) = computed_triple(&rho, &sigma)?;
            let closed = DistanceTriple {
                trace_distance: 1.0,
                hs_distance: (rf + sf) / (rf * sf),
                q_ratio: big_r,
            };
            rows.push(ExampleRow {
                example: 3,
                d,
                r,
                s,
                reduced_rank: big_r,
                computed: Some(computed),
                closed_form: Some(closed),
                skipped: None,
            });
        }
    }
    Ok(rows)
}

/// `D² − D_HS / Tr(ρ²)`; positive means the conjectured bound fails.
pub fn conjecture_margin(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    let d = trace_distance(rho, sigma)?;
    let hs = hs_distance(rho, sigma)?;
    Ok(d * d - hs / rho.purity())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CandidateKind {
    /// Both states from the uniform rank/purity ensemble.
    RandomPair,
    /// Near-pure `ρ` with mass moved flat off its support (see [`conjecture_candidate`]).
    Structured,
}

/// A pair violating `D² ≤ D_HS / Tr(ρ²)`, reproducible from `(d, seed, index)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub d: usize,
    pub seed: u64,
    pub index: u64,
    pub kind: CandidateKind,
    pub trace_distance: f64,
    pub hs_distance: f64,
    pub purity_rho: f64,
    pub margin: f64,
}

impl Counterexample {
    /// Regenerate the pair from its coordinates and recompute the margin.
    pub fn recompute_margin(&self) -> Result<f64> {
        let (rho, sigma, _) = conjecture_candidate(self.d, self.seed, self.index)?
            .ok_or_else(|| Error::InvalidParameter("candidate no longer generated".into()))?;
        conjecture_margin(&rho, &sigma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SearchOutcome {
    Found(Counterexample),
    Exhausted { tried: u64, skipped_pure: u64 },
}

/// Candidate `index` of the search.
///
/// Even indices (and every index when `d < 3`) draw both states from the
/// uniform rank/purity ensemble; a rank-1 `ρ` is skipped (`None`) since
/// `Tr(ρ²) = 1` reduces the conjecture to the proven `D² ≤ D_HS`.
///
/// Odd indices build a structured pair in a Haar-random basis: `ρ` has support
/// `m ∈ {2..d−1}` with purity uniform on `[1/m, 1]`; `σ` lowers each of `ρ`'s
/// `m` nonzero eigenvalues by `ε = u·λ_m` and spreads the removed `mε` evenly
/// over the other `k = d − m` directions. Then `D = mε`,
/// `D_HS = mε² + (mε)²/k`, and the conjecture fails exactly when
/// `Tr(ρ²) > 1/m + 1/k`, which high-purity draws reach once `k ≥ 3`.
pub fn conjecture_candidate(
    d: usize,
    seed: u64,
    index: u64,
) -> Result<Option<(DensityMatrix, DensityMatrix, CandidateKind)>> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("search needs d >= 2, got {d}")));
    }
    let mut rng = RngStream::new(seed, index);
    if index.is_multiple_of(2) || d < 3 {
        let rho = fig1_sigma(d, &mut rng)?;
        if rho.rank() < 2 {
            return Ok(None);
        }
        let sigma = fig1_sigma(d, &mut rng)?;
        return Ok(Some((rho, sigma, CandidateKind::RandomPair)));
    }

    let m = rng.uniform_int(2, d - 1);
    let k = d - m;
    let lo = 1.0 / m as f64;
    let purity = lo + (1.0 - lo) * rng.uniform();
    let rho_spectrum = rank_purity_spectrum(d, m, purity)?;
    let smallest = rho_spectrum[m - 1];
    let eps = (1.0 - rng.uniform()) * smallest;
    let moved = m as f64 * eps / k as f64;
    let sigma_spectrum: Vec<f64> = rho_spectrum
        .iter()
        .enumerate()
        .map(|(j, &l)| if j < m { l - eps } else { moved })
        .collect();
    let u = haar_unitary(d, &mut rng)?;
    let rho = DensityMatrix::from_eigenpairs(rho_spectrum, u.clone())?;
    let sigma = DensityMatrix::from_eigenpairs(sigma_spectrum, u)?;
    Ok(Some((rho, sigma, CandidateKind::Structured)))
}

const SEARCH_CHUNK: u64 = 1024;

/// Search candidates `0..budget` for the first violation of
/// `D² ≤ D_HS / Tr(ρ²)`. Deterministic: the lowest violating index wins.
pub fn find_conjecture_counterexample(d: usize, budget: u64, seed: u64) -> Result<SearchOutcome> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("search needs d >= 2, got {d}")));
    }
    if budget == 0 {
        return Err(Error::InvalidParameter("search budget must be at least 1".into()));
    }
    let slack = tolerance::bound_slack(d);
    let mut skipped_pure = 0;
    let mut start = 0;
    while start < budget {
        let end = (start + SEARCH_CHUNK).min(budget);
        let results: Vec<Option<Option<Counterexample>>> = (start..end)
            .into_par_iter()
            .map(|index| -> Result<Option<Option<Counterexample>>> {
                let Some((rho, sigma, kind)) = conjecture_candidate(d, seed, index)? else {
                    return Ok(None);
                };
                let td = trace_distance(&rho, &sigma)?;
                let hs = hs_distance(&rho, &sigma)?;
                let purity_rho = rho.purity();
                let margin = td * td - hs / purity_rho;
                Ok(Some((margin > slack).then_some(Counterexample {
                    d,
                    seed,
                    index,
                    kind,
                    trace_distance: td,
                    hs_distance: hs,
                    purity_rho,
                    margin,
                })))
            })
            .collect::<Result<_>>()?;
        skipped_pure += results.iter().filter(|r| r.is_none()).count() as u64;
        if let Some(found) = results.into_iter().flatten().flatten().next() {
            return Ok(SearchOutcome::Found(found));
        }
        start = end;
    }
    Ok(SearchOutcome::Exhausted {
        tried: budget,
        skipped_pure,
    })
}

/// Knobs for [`verify_sweep_with`]; the defaults give the plain sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub rank_tol: f64,
    /// Use `σ = ρ` for every pair.
    pub force_equal: bool,
    /// Subtracted from every reduced-rank bound before checking. Harness self-test.
    pub corrupt_theorem1_by: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            rank_tol: tolerance::DEFAULT_RANK_TOL,
            force_equal: false,
            corrupt_theorem1_by: 0.0,
        }
    }
}

/// Pair families cycled through by the verification sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PairFamily {
    Figure1,
    GinibreRanks,
    PurePure,
    PureVersusMixed,
}

impl PairFamily {
    fn of(index: u64) -> Self {
        match index % 4 {
            0 => PairFamily::Figure1,
            1 => PairFamily::GinibreRanks,
            2 => PairFamily::PurePure,
            _ => PairFamily::PureVersusMixed,
        }
    }
}

fn sweep_pair(d: usize, family: PairFamily, rng: &mut RngStream) -> Result<(DensityMatrix, DensityMatrix)> {
    Ok(match family {
        PairFamily::Figure1 if d >= 4 => (fig1_rho(d, rng)?, fig1_sigma(d, rng)?),
        PairFamily::Figure1 | PairFamily::GinibreRanks => {
            let r = rng.uniform_int(1, d);
            let s = rng.uniform_int(1, d);
            (ginibre_fixed_rank(d, r, rng)?, ginibre_fixed_rank(d, s, rng)?)
        }
        PairFamily::PurePure => (haar_pure(d, rng)?, haar_pure(d, rng)?),
        PairFamily::PureVersusMixed => (haar_pure(d, rng)?, fig1_sigma(d, rng)?),
    })
}

fn sweep_checks(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    family: PairFamily,
    options: &SweepOptions,
) -> Result<(BoundReport, Vec<String>)> {
    let d = rho.dim();
    let slack = tolerance::bound_slack(d);
    let mut report = build_report_with_tol(rho, sigma, options.rank_tol)?;
    if options.corrupt_theorem1_by != 0.0 {
        report.upper_theorem1 -= options.corrupt_theorem1_by;
        report.refresh_best_upper();
    }
    let mut messages = report.violations(slack);

    let d2 = report.trace_distance_sq();
    if family == PairFamily::PurePure && !options.force_equal {
        let gap = (d2 - 0.5 * report.hs_distance).abs();
        if gap > 1e-10 {
            messages.push(format!("pure identity: |D^2 - D_HS/2| = {gap:e}"));
        }
    }

    let sd = SignedDecomposition::new(rho, sigma)?;
    let trace_gap = (sd.trace_plus() - sd.trace_minus())
        .abs()
        .max((sd.trace_plus() - report.trace_distance).abs());
    if trace_gap > 1e-10 {
        messages.push(format!("Tr(D+) = Tr(D-) = D failed by {trace_gap:e}"));
    }
    let hs_gap = (sd.hs_distance_from_parts() - report.hs_distance).abs();
    if hs_gap > 1e-10 {
        messages.push(format!("spectral D_HS differs by {hs_gap:e}"));
    }

    let swapped_d = trace_distance(sigma, rho)?;
    let swapped_hs = hs_distance(sigma, rho)?;
    let sym_gap = (swapped_d - report.trace_distance)
        .abs()
        .max((swapped_hs - report.hs_distance).abs());
    if sym_gap > 1e-12 {
        messages.push(format!("symmetry broken by {sym_gap:e}"));
    }
    Ok((report, messages))
}

/// Run every bound and structural check over `n_per_dim` pairs per dimension.
pub fn verify_sweep(dims: &[usize], n_per_dim: usize, seed: u64) -> Result<ExperimentSummary> {
    verify_sweep_with(dims, n_per_dim, seed, &SweepOptions::default())
}

pub fn verify_sweep_with(
    dims: &[usize],
    n_per_dim: usize,
    seed: u64,
    options: &SweepOptions,
) -> Result<ExperimentSummary> {
    if dims.is_empty() {
        return Err(Error::InvalidParameter("verify needs at least one dimension".into()));
    }
    if let Some(&bad) = dims.iter().find(|&&d| d == 0) {
        return Err(Error::InvalidParameter(format!("invalid dimension {bad}")));
    }
    let start = Instant::now();
    let mut summary = ExperimentSummary::new(seed);
    for (slot, &d) in dims.iter().enumerate() {
        let base = slot as u64 * n_per_dim as u64;
        let outcomes: Vec<PairOutcome> = (0..n_per_dim as u64)
            .into_par_iter()
            .map(|i| {
                let index = base + i;
                let family = PairFamily::of(i);
                let mut rng = RngStream::new(seed, index);
                let (rho, sigma) = sweep_pair(d, family, &mut rng)?;
                let sigma = if options.force_equal { rho.clone() } else { sigma };
                let (report, messages) = sweep_checks(&rho, &sigma, family, options)?;
                Ok(PairOutcome {
                    q_ratio: report.q_ratio,
                    reduced_rank: report.reduced_rank,
                    redraws: 0,
                    violation: (!messages.is_empty()).then_some(Violation {
                        dim: d,
                        index,
                        seed,
                        messages,
                    }),
                })
            })
            .collect::<Result<_>>()?;
        outcomes.into_iter().for_each(|o| summary.absorb(o));
    }
    summary.runtime_seconds = start.elapsed().as_secs_f64();
    Ok(summary)
}
