use std::fs;

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use ::ndorder as core;

fn to_py(e: core::Error) -> PyErr {
    match e {
        core::Error::Io(m) => PyOSError::new_err(m),
        e if e.is_input_error() => PyValueError::new_err(e.to_string()),
        e => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Undirected graph with integer vertex and edge weights.
#[pyclass(name = "Graph", module = "ndorder", frozen)]
struct PyGraph {
    inner: core::Graph,
}

#[pymethods]
impl PyGraph {
    /// Builds a graph on `n` vertices from 0-based `(u, v)` pairs.
    #[new]
    #[pyo3(signature = (n, edges = Vec::new()))]
    fn new(n: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        Ok(PyGraph { inner: core::Graph::from_edges(n, &edges).map_err(to_py)? })
    }

    /// Builds a graph from per-vertex neighbor lists and optional vertex weights.
    #[staticmethod]
    #[pyo3(signature = (lists, weights = None))]
    fn from_adjacency(lists: Vec<Vec<usize>>, weights: Option<Vec<i64>>) -> PyResult<Self> {
        let vwgt = weights.unwrap_or_else(|| vec![1; lists.len()]);
        Ok(PyGraph { inner: core::Graph::from_adjacency_weighted(&lists, vwgt).map_err(to_py)? })
    }

    /// Parses Chaco or Matrix Market text.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(PyGraph { inner: core::io::read_graph(text).map_err(to_py)? })
    }

    #[getter]
    fn vertex_count(&self) -> usize {
        self.inner.vertex_count()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    #[getter]
    fn vertex_weights(&self) -> Vec<i64> {
        self.inner.vwgt.clone()
    }

    fn neighbors(&self, v: usize) -> PyResult<Vec<usize>> {
        if v >= self.inner.vertex_count() {
            return Err(PyValueError::new_err(format!("vertex {v} out of range")));
        }
        Ok(self.inner.neighbors(v).to_vec())
    }

    /// Edges as `(u, v)` pairs with `u < v`.
    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edge_list()
    }

    fn to_chaco(&self) -> String {
        core::io::write_chaco(&self.inner)
    }

    fn to_matrix_market(&self) -> String {
        core::io::write_matrix_market(&self.inner)
    }

    fn __len__(&self) -> usize {
        self.inner.vertex_count()
    }

    fn __repr__(&self) -> String {
        format!("Graph(vertices={}, edges={})", self.inner.vertex_count(), self.inner.edge_count())
    }
}

/// Ordering strategy parameters.
#[pyclass(name = "Params", module = "ndorder", from_py_object)]
#[derive(Clone)]
struct PyParams {
    #[pyo3(get, set)]
    fold_min: usize,
    #[pyo3(get, set)]
    coarsest_size: usize,
    #[pyo3(get, set)]
    match_passes: usize,
    #[pyo3(get, set)]
    match_stop_fraction: f64,
    #[pyo3(get, set)]
    ratio_max: f64,
    #[pyo3(get, set)]
    band_width: Option<usize>,
    #[pyo3(get, set)]
    balance_tol: f64,
    #[pyo3(get, set)]
    fm_backtrack: usize,
    #[pyo3(get, set)]
    fm_pass_max: usize,
    #[pyo3(get, set)]
    perturb_moves: usize,
    #[pyo3(get, set)]
    band_max: usize,
    #[pyo3(get, set)]
    tries: usize,
    #[pyo3(get, set)]
    nd_cutoff: usize,
}

impl From<core::Params> for PyParams {
    fn from(p: core::Params) -> Self {
        PyParams {
            fold_min: p.fold_min,
            coarsest_size: p.coarsest_size,
            match_passes: p.match_passes,
            match_stop_fraction: p.match_stop_fraction,
            ratio_max: p.ratio_max,
            band_width: p.band_width,
            balance_tol: p.balance_tol,
            fm_backtrack: p.fm_backtrack,
            fm_pass_max: p.fm_pass_max,
            perturb_moves: p.perturb_moves,
            band_max: p.band_max,
            tries: p.tries,
            nd_cutoff: p.nd_cutoff,
        }
    }
}

impl From<&PyParams> for core::Params {
    fn from(p: &PyParams) -> Self {
        core::Params {
            fold_min: p.fold_min,
            coarsest_size: p.coarsest_size,
            match_passes: p.match_passes,
            match_stop_fraction: p.match_stop_fraction,
            ratio_max: p.ratio_max,
            band_width: p.band_width,
            balance_tol: p.balance_tol,
            fm_backtrack: p.fm_backtrack,
            fm_pass_max: p.fm_pass_max,
            perturb_moves: p.perturb_moves,
            band_max: p.band_max,
            tries: p.tries,
            nd_cutoff: p.nd_cutoff,
        }
    }
}

#[pymethods]
impl PyParams {
    #[new]
    fn new() -> Self {
        core::Params::default().into()
    }

    fn __repr__(&self) -> String {
        format!("Params({})", core::Params::from(self).describe())
    }
}

/// Factorization statistics of an ordering.
#[pyclass(name = "Stats", module = "ndorder", frozen)]
struct PyStats {
    inner: core::ElimStats,
}

#[pymethods]
impl PyStats {
    #[getter]
    fn nnz(&self) -> u64 {
        self.inner.nnz
    }

    #[getter]
    fn opc(&self) -> u64 {
        self.inner.opc
    }

    #[getter]
    fn fill_ratio(&self) -> f64 {
        self.inner.fill_ratio()
    }

    /// Nonzeros of every factor column, diagonal included.
    #[getter]
    fn column_counts(&self) -> Vec<usize> {
        self.inner.counts.clone()
    }

    fn metrics_line(&self) -> String {
        self.inner.metrics_line()
    }

    fn __repr__(&self) -> String {
        format!("Stats({})", self.inner.metrics_line())
    }
}

/// Computes a nested dissection ordering; returns the inverse permutation
/// (the `k`-th entry is the vertex eliminated `k`-th).
#[pyfunction]
#[pyo3(signature = (graph, procs = 1, seed = 0, params = None, schedule = "parallel"))]
fn order(
    py: Python<'_>,
    graph: &PyGraph,
    procs: usize,
    seed: u64,
    params: Option<PyParams>,
    schedule: &str,
) -> PyResult<Vec<usize>> {
    let schedule = match schedule {
        "parallel" => core::Schedule::Parallel,
        "sequential" => core::Schedule::Sequential,
        other => return Err(PyValueError::new_err(format!("unknown schedule '{other}'"))),
    };
    if procs == 0 {
        return Err(PyValueError::new_err("procs must be at least 1"));
    }
    let params = params.as_ref().map(core::Params::from).unwrap_or_default();
    let opts = core::OrderOptions { procs, seed, schedule, params };
    let g = graph.inner.clone();
    let perm = py.detach(move || core::order_graph(&g, &opts)).map_err(to_py)?;
    Ok(perm.into_vec())
}

/// Symbolic Cholesky factorization statistics of `graph` under `perm`.
#[pyfunction]
fn evaluate(graph: &PyGraph, perm: Vec<usize>) -> PyResult<PyStats> {
    let perm = core::InvPerm::new(perm).map_err(to_py)?;
    Ok(PyStats { inner: core::symbolic_factor(&graph.inner, &perm).map_err(to_py)? })
}

/// Reads a Chaco or Matrix Market file.
#[pyfunction]
fn read_graph(path: &str) -> PyResult<PyGraph> {
    let text = fs::read_to_string(path).map_err(|e| PyOSError::new_err(format!("{path}: {e}")))?;
    PyGraph::parse(&text)
}

/// Formats an inverse permutation file.
#[pyfunction]
#[pyo3(signature = (perm, header = Vec::new()))]
fn format_perm(perm: Vec<usize>, header: Vec<String>) -> PyResult<String> {
    let perm = core::InvPerm::new(perm).map_err(to_py)?;
    Ok(core::io::write_perm(&perm, &header))
}

/// Parses an inverse permutation file.
#[pyfunction]
fn parse_perm(text: &str) -> PyResult<Vec<usize>> {
    Ok(core::io::read_perm(text).map_err(to_py)?.into_vec())
}

#[pyfunction]
fn grid2d(k: usize) -> PyGraph {
    PyGraph { inner: core::gen::grid2d(k) }
}

#[pyfunction]
fn grid3d(k: usize) -> PyGraph {
    PyGraph { inner: core::gen::grid3d(k) }
}

#[pyfunction]
fn path(n: usize) -> PyGraph {
    PyGraph { inner: core::gen::path(n) }
}

#[pyfunction]
fn star(n: usize) -> PyGraph {
    PyGraph { inner: core::gen::star(n) }
}

#[pyfunction]
fn complete(n: usize) -> PyGraph {
    PyGraph { inner: core::gen::complete(n) }
}

#[pyfunction]
#[pyo3(signature = (n, m, seed = 0))]
fn random(n: usize, m: usize, seed: u64) -> PyGraph {
    PyGraph { inner: core::gen::random(n, m, seed) }
}

#[pymodule]
fn ndorder(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyParams>()?;
    m.add_class::<PyStats>()?;
    m.add_function(wrap_pyfunction!(order, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(read_graph, m)?)?;
    m.add_function(wrap_pyfunction!(format_perm, m)?)?;
    m.add_function(wrap_pyfunction!(parse_perm, m)?)?;
    m.add_function(wrap_pyfunction!(grid2d, m)?)?;
    m.add_function(wrap_pyfunction!(grid3d, m)?)?;
    m.add_function(wrap_pyfunction!(path, m)?)?;
    m.add_function(wrap_pyfunction!(star, m)?)?;
    m.add_function(wrap_pyfunction!(complete, m)?)?;
    m.add_function(wrap_pyfunction!(random, m)?)?;
    Ok(())
}
