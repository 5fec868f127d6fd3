//! Python bindings: a `Graph` class wrapping the metric graph together with
//! the heat-content evaluators and the spectral oracle.
//!
//! Usage from Python:
//!
//!     import graphheat
//!     g = graphheat.Graph.lasso(1.0, 2.0)
//!     value, error = g.heat_content(0.5)
//!     cut = g.midpoint_loop_cut(1)
//!     assert abs(cut.heat_content(0.5)[0] - value) < 1e-9

// `!(x > 0.0)` rejects NaN inputs, unlike `x <= 0.0`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use graphheat_core::graph::{EdgeId, GraphPoint, MetricGraph, RegionSpec, VertexId, VertexKind};
use graphheat_core::heat::{self, EvalConfig, EvalError, Method};
use graphheat_core::special;
use graphheat_core::spectral::SpectralModel;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn eval_err(e: EvalError) -> PyErr {
    match e {
        EvalError::BudgetExceeded(msg) => PyRuntimeError::new_err(format!("budget exceeded: {msg}")),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn graph_err(e: graphheat_core::graph::GraphError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn spectral_err(e: graphheat_core::spectral::SpectralError) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn parse_method(method: &str) -> PyResult<Method> {
    match method {
        "path-sum" | "path_sum" => Ok(Method::PathSum),
        "spectral" => Ok(Method::Spectral),
        "auto" => Ok(Method::Auto),
        other => Err(PyValueError::new_err(format!("unknown method {other:?}"))),
    }
}

fn config(tol: f64, method: &str, threads: usize) -> PyResult<EvalConfig> {
    if !(tol > 0.0) {
        return Err(PyValueError::new_err("tolerance must be positive"));
    }
    Ok(EvalConfig {
        tolerance: tol,
        method: parse_method(method)?,
        threads,
        ..EvalConfig::default()
    })
}

/// A compact metric graph with Dirichlet boundary vertices.
#[pyclass(from_py_object)]
#[derive(Clone)]
struct Graph {
    inner: MetricGraph,
}

#[pymethods]
impl Graph {
    /// Build from vertex kinds (`"dirichlet"`/`"standard"`) and
    /// `(u, v, length)` edge triples.
    #[new]
    fn new(vertices: Vec<String>, edges: Vec<(usize, usize, f64)>) -> PyResult<Self> {
        let kinds = vertices
            .iter()
            .map(|k| match k.as_str() {
                "dirichlet" => Ok(VertexKind::Dirichlet),
                "standard" => Ok(VertexKind::Standard),
                other => Err(PyValueError::new_err(format!("unknown vertex kind {other:?}"))),
            })
            .collect::<PyResult<Vec<_>>>()?;
        let n = kinds.len();
        if let Some(&(u, v, _)) = edges.iter().find(|&&(u, v, _)| u >= n || v >= n) {
            return Err(PyValueError::new_err(format!("edge ({u}, {v}) endpoint out of range")));
        }
        Ok(Graph { inner: MetricGraph::new(kinds, edges) })
    }

    /// Interval `[0, length]`; Dirichlet conditions per endpoint.
    #[staticmethod]
    #[pyo3(signature = (length, dirichlet_left=true, dirichlet_right=false))]
    fn interval(length: f64, dirichlet_left: bool, dirichlet_right: bool) -> Self {
        Graph { inner: MetricGraph::interval(length, (dirichlet_left, dirichlet_right)) }
    }

    /// Equilateral star with `dirichlet_leaves` absorbing outer vertices.
    #[staticmethod]
    fn star(arms: usize, arm_length: f64, dirichlet_leaves: usize) -> Self {
        Graph { inner: MetricGraph::star(arms, arm_length, dirichlet_leaves) }
    }

    /// Pendant edge from a Dirichlet vertex into a loop.
    #[staticmethod]
    fn lasso(pendant: f64, loop_length: f64) -> Self {
        Graph { inner: MetricGraph::lasso(pendant, loop_length) }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Graph { inner: MetricGraph::from_json_str(text).map_err(graph_err)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json_string()
    }

    fn validate(&self) -> Vec<String> {
        self.inner.validate().problems
    }

    fn volume(&self) -> f64 {
        self.inner.volume()
    }

    fn num_vertices(&self) -> usize {
        self.inner.num_vertices()
    }

    fn num_edges(&self) -> usize {
        self.inner.num_edges()
    }

    fn num_dirichlet(&self) -> usize {
        self.inner.num_dirichlet()
    }

    fn degree(&self, vertex: usize) -> PyResult<usize> {
        self.inner.degree(VertexId(vertex)).map_err(graph_err)
    }

    fn shortest_distance(&self, x: (usize, f64), y: (usize, f64)) -> PyResult<f64> {
        self.inner
            .shortest_distance(GraphPoint::new(EdgeId(x.0), x.1), GraphPoint::new(EdgeId(y.0), y.1))
            .map_err(graph_err)
    }

    /// Structural equality up to relabeling.
    fn same_shape(&self, other: &Graph) -> bool {
        self.inner.same_shape(&other.inner)
    }

    // -- surgery -----------------------------------------------------------

    fn subdivide(&self, edge: usize, offset: f64) -> PyResult<Graph> {
        Ok(Graph { inner: self.inner.subdivide(EdgeId(edge), offset).map_err(graph_err)? })
    }

    fn suppress_degree_two(&self) -> Graph {
        Graph { inner: self.inner.suppress_degree_two() }
    }

    fn midpoint_loop_cut(&self, edge: usize) -> PyResult<Graph> {
        Ok(Graph { inner: self.inner.midpoint_loop_cut(EdgeId(edge)).map_err(graph_err)? })
    }

    fn mirror(&self, reflection_vertices: Vec<usize>, copies: usize) -> PyResult<Graph> {
        let set: Vec<VertexId> = reflection_vertices.into_iter().map(VertexId).collect();
        Ok(Graph { inner: self.inner.mirror(&set, copies).map_err(graph_err)? })
    }

    fn attach_pendant(&self, at: usize, pendant: &Graph, root: usize) -> PyResult<Graph> {
        Ok(Graph {
            inner: self
                .inner
                .attach_pendant(VertexId(at), &pendant.inner, VertexId(root))
                .map_err(graph_err)?,
        })
    }

    /// Mark a standard degree-1 vertex as Dirichlet; returns the components.
    fn add_dirichlet(&self, vertex: usize) -> PyResult<Vec<Graph>> {
        Ok(self
            .inner
            .add_dirichlet(VertexId(vertex))
            .map_err(graph_err)?
            .into_iter()
            .map(|inner| Graph { inner })
            .collect())
    }

    fn lengthen_edge(&self, edge: usize, amount: f64) -> PyResult<Graph> {
        Ok(Graph { inner: self.inner.lengthen_edge(EdgeId(edge), amount).map_err(graph_err)? })
    }

    fn scale(&self, factor: f64) -> PyResult<Graph> {
        Ok(Graph { inner: self.inner.scale(factor).map_err(graph_err)? })
    }

    // -- evaluators ---------------------------------------------------------

    /// Heat content at time `t`. Returns `(value, error_bound)`.
    #[pyo3(signature = (t, tol=1e-10, method="auto", threads=1))]
    fn heat_content(&self, t: f64, tol: f64, method: &str, threads: usize) -> PyResult<(f64, f64)> {
        let hv = heat::heat_content(&self.inner, t, &config(tol, method, threads)?)
            .map_err(eval_err)?;
        Ok((hv.value, hv.error_bound))
    }

    /// Pointwise heat kernel `p_t(x, y)` with `x`, `y` given as
    /// `(edge, offset)`. Returns `(value, error_bound)`.
    #[pyo3(signature = (x, y, t, tol=1e-10))]
    fn heat_kernel(&self, x: (usize, f64), y: (usize, f64), t: f64, tol: f64) -> PyResult<(f64, f64)> {
        let hv = heat::heat_kernel(
            &self.inner,
            GraphPoint::new(EdgeId(x.0), x.1),
            GraphPoint::new(EdgeId(y.0), y.1),
            t,
            &config(tol, "path-sum", 1)?,
        )
        .map_err(eval_err)?;
        Ok((hv.value, hv.error_bound))
    }

    /// Heat flux out of a region given as `(edge, a, b)` intervals.
    /// Returns `(value, error_bound)`.
    #[pyo3(signature = (region, t, tol=1e-10))]
    fn boundary_flux(&self, region: Vec<(usize, f64, f64)>, t: f64, tol: f64) -> PyResult<(f64, f64)> {
        let spec = RegionSpec::new(region.into_iter().map(|(e, a, b)| (EdgeId(e), a, b)).collect());
        let hv = heat::boundary_flux(&self.inner, &spec, t, &config(tol, "path-sum", 1)?)
            .map_err(eval_err)?;
        Ok((hv.value, hv.error_bound))
    }

    /// Derivative of `Q_t` under lengthening `edge`, with certified bound.
    #[pyo3(signature = (edge, t, tol=1e-10))]
    fn hadamard_derivative(&self, edge: usize, t: f64, tol: f64) -> PyResult<(f64, f64)> {
        let hv = heat::hadamard_derivative(&self.inner, EdgeId(edge), t, &config(tol, "path-sum", 1)?)
            .map_err(eval_err)?;
        Ok((hv.value, hv.error_bound))
    }

    fn small_time_bound(&self, t: f64) -> PyResult<f64> {
        heat::small_time_bound(&self.inner, t).map_err(eval_err)
    }

    /// Independent spectral value of `Q_t` at mesh size `h`.
    #[pyo3(signature = (t, h=2.5e-3))]
    fn spectral_heat_content(&self, t: f64, h: f64) -> PyResult<f64> {
        let model = SpectralModel::build(&self.inner, h).map_err(spectral_err)?;
        model
            .eigen_heat_content(t, 1e-12 * self.inner.volume())
            .map_err(spectral_err)
    }

    #[pyo3(signature = (h=2.5e-3))]
    fn lambda_1(&self, h: f64) -> PyResult<f64> {
        let model = SpectralModel::build(&self.inner, h).map_err(spectral_err)?;
        model.lambda_1().map_err(spectral_err)
    }

    #[pyo3(signature = (h=2.5e-3))]
    fn torsional_rigidity(&self, h: f64) -> PyResult<f64> {
        let model = SpectralModel::build(&self.inner, h).map_err(spectral_err)?;
        model.torsional_rigidity().map_err(spectral_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph(vertices={}, edges={}, volume={}, dirichlet={})",
            self.inner.num_vertices(),
            self.inner.num_edges(),
            self.inner.volume(),
            self.inner.num_dirichlet(),
        )
    }
}

/// Complementary error function.
#[pyfunction]
fn erfc(x: f64) -> f64 {
    special::erfc(x)
}

/// Integrated-Gaussian kernel `H(x) = e^{-x²}/√π − x·erfc(x)`.
#[pyfunction]
fn h_kernel(x: f64) -> f64 {
    special::h(x)
}

/// Certified bound on the truncated path-sum tail.
#[pyfunction]
fn path_tail_bound(d_max: usize, l_min: f64, t: f64, cutoff: f64) -> f64 {
    special::path_tail_bound(d_max, l_min, t, cutoff)
}

#[pymodule]
fn graphheat(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Graph>()?;
    m.add_function(wrap_pyfunction!(erfc, m)?)?;
    m.add_function(wrap_pyfunction!(h_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(path_tail_bound, m)?)?;
    Ok(())
}
