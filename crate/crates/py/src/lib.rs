//! Python bindings for the farofangs crate.
//!
//! The module mirrors the Rust API: `FeatureAllocation` wraps the bit-packed
//! binary matrix, and the free functions cover the loss, the search, and the
//! baseline estimators. Errors surface as `ValueError`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use farofangs::fangs as search;
use farofangs::fangs::SearchConfig;
use farofangs::io;
use farofangs::matrix::SampleSet;
use farofangs::LossParams;

fn err(e: farofangs::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn params(a: f64) -> PyResult<LossParams> {
    LossParams::new(a).map_err(err)
}

/// A binary feature allocation matrix: rows are items, columns are features.
#[pyclass(name = "FeatureAllocation", from_py_object)]
#[derive(Clone)]
struct PyFeatureAllocation {
    inner: farofangs::FeatureAllocation,
}

#[pymethods]
impl PyFeatureAllocation {
    #[new]
    fn new(rows: Vec<Vec<u8>>) -> PyResult<Self> {
        farofangs::FeatureAllocation::from_rows(&rows)
            .map(|inner| Self { inner })
            .map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    fn to_rows(&self) -> Vec<Vec<u32>> {
        self.inner
            .to_rows()
            .into_iter()
            .map(|row| row.into_iter().map(u32::from).collect())
            .collect()
    }

    fn total_ones(&self) -> u64 {
        self.inner.total_ones()
    }

    /// Canonical form: zero columns stripped, remaining columns sorted in
    /// decreasing top-down binary order. Two matrices encode the same
    /// allocation exactly when their canonical forms are equal.
    fn left_order(&self) -> Self {
        Self {
            inner: self.inner.left_order(),
        }
    }

    /// Pairwise shared-feature counts, as an n x n list of lists.
    fn adjacency(&self) -> Vec<Vec<u32>> {
        let adj = self.inner.adjacency();
        (0..self.inner.n())
            .map(|i| (0..self.inner.n()).map(|j| adj.get(i, j)).collect())
            .collect()
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!(
            "FeatureAllocation(n={}, k={})",
            self.inner.n(),
            self.inner.k()
        )
    }
}

fn to_sample_set(samples: Vec<PyFeatureAllocation>) -> PyResult<SampleSet> {
    SampleSet::new(samples.into_iter().map(|s| s.inner).collect()).map_err(err)
}

/// Minimum generalized Hamming distance over column alignments.
/// Returns `(loss, alignment, k_aligned)` where `alignment[j]` is the column
/// of the second matrix matched to column `j` of the first.
#[pyfunction]
#[pyo3(signature = (x, y, a = 1.0))]
fn faro_loss(
    x: &PyFeatureAllocation,
    y: &PyFeatureAllocation,
    a: f64,
) -> PyResult<(f64, Vec<usize>, usize)> {
    let r = farofangs::faro_loss(&x.inner, &y.inner, params(a)?).map_err(err)?;
    Ok((r.loss, r.alignment.perm, r.k_aligned))
}

/// Monte Carlo expected loss of a candidate against a list of samples.
#[pyfunction]
#[pyo3(signature = (candidate, samples, a = 1.0))]
fn expected_loss(
    candidate: &PyFeatureAllocation,
    samples: Vec<PyFeatureAllocation>,
    a: f64,
) -> PyResult<f64> {
    let set = to_sample_set(samples)?;
    farofangs::expected_loss(&candidate.inner, &set, params(a)?).map_err(err)
}

/// Greedy search for the expected-loss minimizer. Returns a dict with the
/// estimate, its expected loss, the wall-clock seconds, the accepted flip
/// count, and the per-baseline initialization losses.
#[pyfunction]
#[pyo3(signature = (samples, a = 1.0, n_init = 16, n_sweet = 4, n_iter = 1000, seed = 0, threads = 0))]
fn fangs<'py>(
    py: Python<'py>,
    samples: Vec<PyFeatureAllocation>,
    a: f64,
    n_init: usize,
    n_sweet: usize,
    n_iter: usize,
    seed: u64,
    threads: usize,
) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
    let set = to_sample_set(samples)?;
    let cfg = SearchConfig {
        n_init,
        n_sweet,
        n_iter,
        a,
        seed,
        threads,
    };
    let r = search::fangs(&set, &cfg).map_err(err)?;
    let out = pyo3::types::PyDict::new(py);
    out.set_item("estimate", PyFeatureAllocation { inner: r.estimate })?;
    out.set_item("expected_loss", r.expected_loss)?;
    out.set_item("seconds", r.seconds)?;
    out.set_item("n_accepted_flips", r.n_accepted_flips)?;
    out.set_item("baseline_losses", r.baseline_losses)?;
    Ok(out)
}

/// Pick the sample with the lowest expected loss against all samples.
#[pyfunction]
#[pyo3(signature = (samples, a = 1.0))]
fn draws_method(
    samples: Vec<PyFeatureAllocation>,
    a: f64,
) -> PyResult<(PyFeatureAllocation, f64)> {
    let set = to_sample_set(samples)?;
    let (z, loss) = search::draws_method(&set, params(a)?).map_err(err)?;
    Ok((PyFeatureAllocation { inner: z }, loss))
}

/// Sequentially aligned elementwise mode of the samples.
#[pyfunction]
#[pyo3(signature = (samples, a = 1.0))]
fn sifa_estimate(samples: Vec<PyFeatureAllocation>, a: f64) -> PyResult<PyFeatureAllocation> {
    let set = to_sample_set(samples)?;
    search::sifa_estimate(&set, params(a)?)
        .map(|inner| PyFeatureAllocation { inner })
        .map_err(err)
}

/// Pairwise similarity matrix: fraction of samples in which items i and j
/// share at least one feature.
#[pyfunction]
fn psm(samples: Vec<PyFeatureAllocation>) -> PyResult<Vec<Vec<f64>>> {
    Ok(search::psm(&to_sample_set(samples)?))
}

#[pyfunction]
fn psm_score(candidate: &PyFeatureAllocation, psm: Vec<Vec<f64>>) -> f64 {
    search::psm_score(&candidate.inner, &psm)
}

/// Parse one or more blank-line separated matrix blocks.
#[pyfunction]
fn parse_samples(text: &str) -> PyResult<Vec<PyFeatureAllocation>> {
    let set = io::parse_samples_str(text).map_err(err)?;
    Ok(set
        .samples()
        .iter()
        .map(|z| PyFeatureAllocation { inner: z.clone() })
        .collect())
}

#[pyfunction]
fn format_matrix(z: &PyFeatureAllocation) -> String {
    io::format_matrix(&z.inner)
}

#[pyfunction]
fn format_samples(samples: Vec<PyFeatureAllocation>) -> PyResult<String> {
    Ok(io::format_samples(&to_sample_set(samples)?))
}

#[pymodule]
fn farofangs_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFeatureAllocation>()?;
    m.add_function(wrap_pyfunction!(faro_loss, m)?)?;
    m.add_function(wrap_pyfunction!(expected_loss, m)?)?;
    m.add_function(wrap_pyfunction!(fangs, m)?)?;
    m.add_function(wrap_pyfunction!(draws_method, m)?)?;
    m.add_function(wrap_pyfunction!(sifa_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(psm, m)?)?;
    m.add_function(wrap_pyfunction!(psm_score, m)?)?;
    m.add_function(wrap_pyfunction!(parse_samples, m)?)?;
    m.add_function(wrap_pyfunction!(format_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(format_samples, m)?)?;
    Ok(())
}
