//! Python bindings for `hsbound`.
//!
//! Matrices cross the boundary as nested lists of Python `complex` (row-major).
//! Random constructors take `(seed, stream)` and reproduce the Rust streams
//! exactly.

use hsbound::bounds;
use hsbound::experiments::{self, SearchOutcome};
use hsbound::metrics;
use hsbound::sampling::{self, RngStream};
use hsbound::states::{self, ComplexMatrix, C64};
use nalgebra::DVector;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn value_error(e: hsbound::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Row-major nested lists into a dense matrix.
pub fn matrix_from_rows(rows: &[Vec<C64>]) -> Result<ComplexMatrix, hsbound::Error> {
    let n = rows.len();
    if let Some(bad) = rows.iter().find(|r| r.len() != n) {
        return Err(hsbound::Error::NotSquare {
            rows: n,
            cols: bad.len(),
        });
    }
    Ok(ComplexMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// Dense matrix into row-major nested lists.
pub fn matrix_to_rows(m: &ComplexMatrix) -> Vec<Vec<C64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

#[pyclass(name = "DensityMatrix", frozen, module = "pyhsbound")]
pub struct PyDensityMatrix {
    inner: states::DensityMatrix,
}

impl From<states::DensityMatrix> for PyDensityMatrix {
    fn from(inner: states::DensityMatrix) -> Self {
        PyDensityMatrix { inner }
    }
}

#[pymethods]
impl PyDensityMatrix {
    /// Validate a Hermitian, PSD, unit-trace matrix given as rows.
    #[new]
    fn new(rows: Vec<Vec<C64>>) -> PyResult<Self> {
        let m = matrix_from_rows(&rows).map_err(value_error)?;
        Ok(states::DensityMatrix::new(m).map_err(value_error)?.into())
    }

    /// `Π/r` on basis vectors `offset .. offset + r`.
    #[staticmethod]
    #[pyo3(signature = (d, r, offset = 0))]
    fn projector(d: usize, r: usize, offset: usize) -> PyResult<Self> {
        Ok(states::projector_state(d, r, offset).map_err(value_error)?.into())
    }

    #[staticmethod]
    fn maximally_mixed(d: usize) -> PyResult<Self> {
        Ok(states::DensityMatrix::maximally_mixed(d).map_err(value_error)?.into())
    }

    #[staticmethod]
    fn pure(amplitudes: Vec<C64>) -> PyResult<Self> {
        let psi = DVector::from_vec(amplitudes);
        Ok(states::DensityMatrix::pure(&psi).map_err(value_error)?.into())
    }

    #[staticmethod]
    fn from_diagonal(probabilities: Vec<f64>) -> PyResult<Self> {
        Ok(states::DensityMatrix::from_diagonal(&probabilities)
            .map_err(value_error)?
            .into())
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[pyo3(signature = (tol = None))]
    fn rank(&self, tol: Option<f64>) -> usize {
        match tol {
            Some(t) => self.inner.rank_with_tolerance(t),
            None => self.inner.rank(),
        }
    }

    fn purity(&self) -> f64 {
        self.inner.purity()
    }

    fn linear_entropy(&self) -> f64 {
        self.inner.linear_entropy()
    }

    /// Eigenvalues, largest first.
    fn eigenvalues(&self) -> Vec<f64> {
        self.inner.spectrum().eigenvalues().to_vec()
    }

    fn to_list(&self) -> Vec<Vec<C64>> {
        matrix_to_rows(self.inner.matrix())
    }

    fn __repr__(&self) -> String {
        format!("DensityMatrix(dim={}, rank={})", self.inner.dim(), self.inner.rank())
    }
}

#[pyclass(name = "BoundReport", frozen, get_all, module = "pyhsbound")]
pub struct PyBoundReport {
    dim: usize,
    rank_tol: f64,
    rank_rho: usize,
    rank_sigma: usize,
    reduced_rank: f64,
    trace_distance: f64,
    hs_distance: f64,
    q_ratio: Option<f64>,
    linear_entropy_rho: f64,
    linear_entropy_sigma: f64,
    lower_bound_half_hs: f64,
    upper_norm_equiv: f64,
    upper_rank_sum: f64,
    upper_theorem1: f64,
    upper_entropy_p2: f64,
    upper_entropy_p3: f64,
    best_upper: f64,
    lemma1_ok: bool,
    weyl_ok: bool,
}

impl From<bounds::BoundReport> for PyBoundReport {
    fn from(r: bounds::BoundReport) -> Self {
        PyBoundReport {
            dim: r.dim,
            rank_tol: r.rank_tol,
            rank_rho: r.rank_rho,
            rank_sigma: r.rank_sigma,
            reduced_rank: r.reduced_rank,
            trace_distance: r.trace_distance,
            hs_distance: r.hs_distance,
            q_ratio: r.q_ratio,
            linear_entropy_rho: r.linear_entropy_rho,
            linear_entropy_sigma: r.linear_entropy_sigma,
            lower_bound_half_hs: r.lower_bound_half_hs,
            upper_norm_equiv: r.upper_norm_equiv,
            upper_rank_sum: r.upper_rank_sum,
            upper_theorem1: r.upper_theorem1,
            upper_entropy_p2: r.upper_entropy_p2,
            upper_entropy_p3: r.upper_entropy_p3,
            best_upper: r.best_upper,
            lemma1_ok: r.lemma1_ok,
            weyl_ok: r.weyl_ok,
        }
    }
}

#[pyclass(name = "SampleRecord", frozen, get_all, module = "pyhsbound")]
pub struct PySampleRecord {
    index: u64,
    d: usize,
    rank_rho: usize,
    rank_sigma: usize,
    reduced_rank: f64,
    trace_distance: f64,
    hs_distance: f64,
    q_ratio: f64,
    upper_theorem1: f64,
    upper_norm_equiv: f64,
    upper_rank_sum: f64,
    upper_entropy_p2: f64,
    upper_entropy_p3: f64,
    lemma1_ok: bool,
    weyl_ok: bool,
}

impl From<experiments::SampleRecord> for PySampleRecord {
    fn from(r: experiments::SampleRecord) -> Self {
        PySampleRecord {
            index: r.index,
            d: r.d,
            rank_rho: r.rank_rho,
            rank_sigma: r.rank_sigma,
            reduced_rank: r.reduced_rank,
            trace_distance: r.trace_distance,
            hs_distance: r.hs_distance,
            q_ratio: r.q_ratio,
            upper_theorem1: r.upper_theorem1,
            upper_norm_equiv: r.upper_norm_equiv,
            upper_rank_sum: r.upper_rank_sum,
            upper_entropy_p2: r.upper_entropy_p2,
            upper_entropy_p3: r.upper_entropy_p3,
            lemma1_ok: r.lemma1_ok,
            weyl_ok: r.weyl_ok,
        }
    }
}

#[pyfunction]
fn trace_distance(rho: &PyDensityMatrix, sigma: &PyDensityMatrix) -> PyResult<f64> {
    metrics::trace_distance(&rho.inner, &sigma.inner).map_err(value_error)
}

#[pyfunction]
fn hs_distance(rho: &PyDensityMatrix, sigma: &PyDensityMatrix) -> PyResult<f64> {
    metrics::hs_distance(&rho.inner, &sigma.inner).map_err(value_error)
}

/// `D² / D_HS`, `None` when the states coincide.
#[pyfunction]
fn q_ratio(rho: &PyDensityMatrix, sigma: &PyDensityMatrix) -> PyResult<Option<f64>> {
    metrics::q_ratio(&rho.inner, &sigma.inner).map_err(value_error)
}

#[pyfunction]
fn reduced_rank(rank_rho: usize, rank_sigma: usize) -> PyResult<f64> {
    bounds::reduced_rank(rank_rho, rank_sigma).map_err(value_error)
}

#[pyfunction]
fn norm_equivalence_upper(d: usize, hs: f64) -> f64 {
    bounds::norm_equivalence_upper(d, hs)
}

#[pyfunction]
fn rank_sum_upper(rank_rho: usize, rank_sigma: usize, hs: f64) -> f64 {
    bounds::rank_sum_upper(rank_rho, rank_sigma, hs)
}

#[pyfunction]
fn theorem1_upper(rank_rho: usize, rank_sigma: usize, hs: f64) -> PyResult<f64> {
    bounds::theorem1_upper(rank_rho, rank_sigma, hs).map_err(value_error)
}

#[pyfunction]
fn entropy_upper_p2(hs: f64, sl_rho: f64, sl_sigma: f64) -> f64 {
    bounds::entropy_upper_p2(hs, sl_rho, sl_sigma)
}

#[pyfunction]
fn entropy_upper_p3(hs: f64, sl_rho: f64, sl_sigma: f64) -> f64 {
    bounds::entropy_upper_p3(hs, sl_rho, sl_sigma)
}

#[pyfunction]
#[pyo3(signature = (rho, sigma, rank_tol = None))]
fn build_report(rho: &PyDensityMatrix, sigma: &PyDensityMatrix, rank_tol: Option<f64>) -> PyResult<PyBoundReport> {
    let tol = rank_tol.unwrap_or(rho.inner.rank_tolerance());
    let report = bounds::build_report_with_tol(&rho.inner, &sigma.inner, tol).map_err(value_error)?;
    Ok(report.into())
}

#[pyfunction]
#[pyo3(signature = (d, seed, stream = 0))]
fn haar_pure(d: usize, seed: u64, stream: u64) -> PyResult<PyDensityMatrix> {
    let mut rng = RngStream::new(seed, stream);
    Ok(sampling::haar_pure(d, &mut rng).map_err(value_error)?.into())
}

#[pyfunction]
#[pyo3(signature = (d, r, seed, stream = 0))]
fn ginibre_fixed_rank(d: usize, r: usize, seed: u64, stream: u64) -> PyResult<PyDensityMatrix> {
    let mut rng = RngStream::new(seed, stream);
    Ok(sampling::ginibre_fixed_rank(d, r, &mut rng)
        .map_err(value_error)?
        .into())
}

#[pyfunction]
#[pyo3(signature = (d, seed, stream = 0))]
fn haar_unitary(d: usize, seed: u64, stream: u64) -> PyResult<Vec<Vec<C64>>> {
    let mut rng = RngStream::new(seed, stream);
    Ok(matrix_to_rows(
        &sampling::haar_unitary(d, &mut rng).map_err(value_error)?,
    ))
}

#[pyfunction]
#[pyo3(signature = (d, seed, stream = 0))]
fn fig1_sigma(d: usize, seed: u64, stream: u64) -> PyResult<PyDensityMatrix> {
    let mut rng = RngStream::new(seed, stream);
    Ok(sampling::fig1_sigma(d, &mut rng).map_err(value_error)?.into())
}

#[pyfunction]
#[pyo3(signature = (d, seed, stream = 0))]
fn fig1_rho(d: usize, seed: u64, stream: u64) -> PyResult<PyDensityMatrix> {
    let mut rng = RngStream::new(seed, stream);
    Ok(sampling::fig1_rho(d, &mut rng).map_err(value_error)?.into())
}

/// Records sorted by `R` plus a summary dict.
#[pyfunction]
fn run_figure1<'py>(
    py: Python<'py>,
    d: usize,
    n: usize,
    seed: u64,
) -> PyResult<(Vec<PySampleRecord>, Bound<'py, PyDict>)> {
    let run = py
        .detach(|| experiments::run_figure1(d, n, seed))
        .map_err(value_error)?;
    let summary = summary_dict(py, &run.summary)?;
    Ok((run.records.into_iter().map(Into::into).collect(), summary))
}

fn summary_dict<'py>(py: Python<'py>, s: &experiments::ExperimentSummary) -> PyResult<Bound<'py, PyDict>> {
    let dict = PyDict::new(py);
    dict.set_item("n_samples", s.n_samples)?;
    dict.set_item("violations", s.violations)?;
    dict.set_item("max_q_over_r", s.max_q_over_r)?;
    dict.set_item("min_q", s.min_q)?;
    dict.set_item("redraws", s.redraws)?;
    dict.set_item("runtime_seconds", s.runtime_seconds)?;
    dict.set_item("seed", s.seed)?;
    let failures: Vec<(usize, u64, u64, Vec<String>)> = s
        .failures
        .iter()
        .map(|f| (f.dim, f.index, f.seed, f.messages.clone()))
        .collect();
    dict.set_item("failures", failures)?;
    Ok(dict)
}

#[pyfunction]
fn verify_sweep<'py>(py: Python<'py>, dims: Vec<usize>, n_per_dim: usize, seed: u64) -> PyResult<Bound<'py, PyDict>> {
    let summary = py
        .detach(|| experiments::verify_sweep(&dims, n_per_dim, seed))
        .map_err(value_error)?;
    summary_dict(py, &summary)
}

/// Rows of `(example, d, r, s, R, computed, closed_form, residual, skipped)`;
/// `computed`/`closed_form` are `(D, D_HS, Q)` tuples or `None`.
#[pyfunction]
#[allow(clippy::type_complexity)]
fn examples_table(
    d: usize,
) -> PyResult<
    Vec<(
        u8,
        usize,
        usize,
        usize,
        f64,
        Option<(f64, f64, f64)>,
        Option<(f64, f64, f64)>,
        Option<f64>,
        Option<String>,
    )>,
> {
    let rows = experiments::examples_table(d).map_err(value_error)?;
    let triple = |t: Option<experiments::DistanceTriple>| t.map(|t| (t.trace_distance, t.hs_distance, t.q_ratio));
    Ok(rows
        .into_iter()
        .map(|row| {
            let residual = row.residual();
            (
                row.example,
                row.d,
                row.r,
                row.s,
                row.reduced_rank,
                triple(row.computed),
                triple(row.closed_form),
                residual,
                row.skipped,
            )
        })
        .collect())
}

/// A dict describing the first violating pair, or `None` when the budget runs out.
#[pyfunction]
fn find_conjecture_counterexample<'py>(
    py: Python<'py>,
    d: usize,
    budget: u64,
    seed: u64,
) -> PyResult<Option<Bound<'py, PyDict>>> {
    let outcome = py
        .detach(|| experiments::find_conjecture_counterexample(d, budget, seed))
        .map_err(value_error)?;
    match outcome {
        SearchOutcome::Exhausted { .. } => Ok(None),
        SearchOutcome::Found(cx) => {
            let dict = PyDict::new(py);
            dict.set_item("d", cx.d)?;
            dict.set_item("seed", cx.seed)?;
            dict.set_item("index", cx.index)?;
            dict.set_item("kind", format!("{:?}", cx.kind))?;
            dict.set_item("trace_distance", cx.trace_distance)?;
            dict.set_item("hs_distance", cx.hs_distance)?;
            dict.set_item("purity_rho", cx.purity_rho)?;
            dict.set_item("margin", cx.margin)?;
            dict.set_item("recomputed_margin", cx.recompute_margin().map_err(value_error)?)?;
            Ok(Some(dict))
        }
    }
}

#[pymodule]
pub fn pyhsbound(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDensityMatrix>()?;
    m.add_class::<PyBoundReport>()?;
    m.add_class::<PySampleRecord>()?;
    m.add_function(wrap_pyfunction!(trace_distance, m)?)?;
    m.add_function(wrap_pyfunction!(hs_distance, m)?)?;
    m.add_function(wrap_pyfunction!(q_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(reduced_rank, m)?)?;
    m.add_function(wrap_pyfunction!(norm_equivalence_upper, m)?)?;
    m.add_function(wrap_pyfunction!(rank_sum_upper, m)?)?;
    m.add_function(wrap_pyfunction!(theorem1_upper, m)?)?;
    m.add_function(wrap_pyfunction!(entropy_upper_p2, m)?)?;
    m.add_function(wrap_pyfunction!(entropy_upper_p3, m)?)?;
    m.add_function(wrap_pyfunction!(build_report, m)?)?;
    m.add_function(wrap_pyfunction!(haar_pure, m)?)?;
    m.add_function(wrap_pyfunction!(ginibre_fixed_rank, m)?)?;
    m.add_function(wrap_pyfunction!(haar_unitary, m)?)?;
    m.add_function(wrap_pyfunction!(fig1_sigma, m)?)?;
    m.add_function(wrap_pyfunction!(fig1_rho, m)?)?;
    m.add_function(wrap_pyfunction!(run_figure1, m)?)?;
    m.add_function(wrap_pyfunction!(verify_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(examples_table, m)?)?;
    m.add_function(wrap_pyfunction!(find_conjecture_counterexample, m)?)?;
    Ok(())
}
