//! Python bindings: graphs, port numberings, colorings, GNN forward passes,
//! local simulation, exact oracles and single-leaf training.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use portgnn::experiments::{run_program, ProgramName};
use portgnn::gnn::{forward, node_features, FeatureSpec, Model, ModelConfig, ModelKind};
use portgnn::graph::{
    consistent_port_numbering, generate as generate_graph, shuffled_port_numbering, weak_two_coloring as weak2,
    Coloring, DegreeBound, GraphFile, GraphKind,
};
use portgnn::local::{verify_single_leaf as verify_leaf, Labeling};
use portgnn::oracles::{self, Problem};
use portgnn::rl::{self, TrainConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn err(e: portgnn::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn kind_of(name: &str) -> PyResult<ModelKind> {
    match name {
        "vvc" => Ok(ModelKind::Vvc),
        "mb" => Ok(ModelKind::Mb),
        "sb" => Ok(ModelKind::Sb),
        _ => Err(PyValueError::new_err(format!("model kind must be vvc, mb or sb, got {name:?}"))),
    }
}

/// Simple undirected graph on nodes `1..=n`.
#[pyclass(name = "Graph", frozen)]
struct PyGraph {
    inner: portgnn::graph::Graph,
}

#[pymethods]
impl PyGraph {
    #[new]
    fn new(n: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        portgnn::graph::Graph::new(n, &edges).map(|inner| Self { inner }).map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges().to_vec()
    }

    fn neighbors(&self, v: usize) -> PyResult<Vec<usize>> {
        self.check(v)?;
        Ok(self.inner.neighbors(v).to_vec())
    }

    fn degree(&self, v: usize) -> PyResult<usize> {
        self.check(v)?;
        Ok(self.inner.degree(v))
    }

    fn max_degree(&self) -> usize {
        self.inner.max_degree()
    }

    fn is_connected(&self) -> bool {
        self.inner.is_connected()
    }

    fn to_json(&self) -> PyResult<String> {
        GraphFile::from_graph(&self.inner).to_json().map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let file: GraphFile = serde_json::from_str(text).map_err(|e| err(e.into()))?;
        file.graph().map(|inner| Self { inner }).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Graph(n={}, m={})", self.inner.n(), self.inner.m())
    }
}

impl PyGraph {
    fn check(&self, v: usize) -> PyResult<()> {
        if v == 0 || v > self.inner.n() {
            return Err(err(portgnn::Error::InvalidNode {
                node: v,
                n: self.inner.n(),
            }));
        }
        Ok(())
    }
}

/// A consistent port numbering of a particular graph.
#[pyclass(name = "PortNumbering", frozen)]
struct PyPorts {
    inner: portgnn::graph::PortNumbering,
    n: usize,
}

#[pymethods]
impl PyPorts {
    /// `(neighbor, back_port)` behind port `i` of `v`, or None past `deg(v)`.
    fn lookup(&self, v: usize, i: usize) -> Option<(usize, usize)> {
        if v == 0 || v > self.n {
            return None;
        }
        self.inner.lookup(v, i)
    }

    /// Every `((v, i), (u, j))` with `p(v, i) = (u, j)`.
    fn assignments(&self) -> Vec<((usize, usize), (usize, usize))> {
        self.inner
            .assignments()
            .into_iter()
            .map(|(a, b)| ((a.node, a.index), (b.node, b.index)))
            .collect()
    }
}

/// Graph from a named family: star k, path n, cycle n, random n, bipartite a b.
#[pyfunction]
#[pyo3(signature = (family, size, size2=None, delta=3, seed=0))]
fn generate(family: &str, size: usize, size2: Option<usize>, delta: usize, seed: u64) -> PyResult<PyGraph> {
    let kind = match family {
        "star" => GraphKind::Star { k: size },
        "path" => GraphKind::Path { n: size },
        "cycle" => GraphKind::Cycle { n: size },
        "random" => GraphKind::RandomBounded { n: size, delta },
        "bipartite" => GraphKind::RandomBipartite {
            a: size,
            b: size2.ok_or_else(|| PyValueError::new_err("bipartite needs size2"))?,
            delta,
        },
        _ => return Err(PyValueError::new_err(format!("unknown family {family:?}"))),
    };
    generate_graph(kind, seed).map(|inner| PyGraph { inner }).map_err(err)
}

/// Canonical numbering, or a seeded shuffle of the edge order.
#[pyfunction]
#[pyo3(signature = (g, seed=None))]
fn port_numbering(g: &PyGraph, seed: Option<u64>) -> PyPorts {
    let inner = match seed {
        None => consistent_port_numbering(&g.inner),
        Some(s) => shuffled_port_numbering(&g.inner, s),
    };
    PyPorts { inner, n: g.inner.n() }
}

#[pyfunction]
fn weak_two_coloring(g: &PyGraph) -> PyResult<Vec<u8>> {
    weak2(&g.inner).map(|c| c.as_slice().to_vec()).map_err(err)
}

#[pyfunction]
fn is_weak_two_coloring(g: &PyGraph, colors: Vec<u8>) -> PyResult<bool> {
    if colors.len() != g.inner.n() {
        return Ok(false);
    }
    Ok(Coloring::new(colors).map_err(err)?.is_weak_two_coloring(&g.inner))
}

/// Two-layer SB, MB or VVC model with uniform initialization.
#[pyclass(name = "Model", frozen)]
struct PyModel {
    inner: Model,
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    #[pyo3(signature = (kind, delta, width=16, seed=0, scale=0.1))]
    fn random(kind: &str, delta: usize, width: usize, seed: u64, scale: f64) -> PyResult<Self> {
        let cfg = ModelConfig::two_layer(kind_of(kind)?, delta, delta, width);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Model::random(&cfg, scale, &mut rng).map(|inner| Self { inner }).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Model::from_json(text).map(|inner| Self { inner }).map_err(err)
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(err)
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind.name()
    }

    fn num_params(&self) -> usize {
        self.inner.num_params()
    }

    /// Readout vectors on one-hot degree features; VVC models need ports.
    #[pyo3(signature = (g, ports=None))]
    fn forward(&self, g: &PyGraph, ports: Option<&PyPorts>) -> PyResult<Vec<Vec<f64>>> {
        let delta = DegreeBound::new(self.inner.delta).map_err(err)?;
        let x = node_features(&g.inner, FeatureSpec::Degree, None, delta).map_err(err)?;
        forward(&self.inner, &g.inner, ports.map(|p| &p.inner), &x).map_err(err)
    }
}

/// Runs a registered program (`single_leaf`, `constant[:k]`, `identity`,
/// `degree_sum`, `distinct_degrees`, `gnn:<checkpoint path>`).
#[pyfunction]
#[pyo3(signature = (g, program, ports=None))]
fn simulate(g: &PyGraph, program: &str, ports: Option<&PyPorts>) -> PyResult<Vec<usize>> {
    let prog: ProgramName = program.parse().map_err(err)?;
    let p = ports.map_or_else(|| consistent_port_numbering(&g.inner), |p| p.inner.clone());
    run_program(&g.inner, &p, &prog, None)
        .map(|l| l.as_slice().to_vec())
        .map_err(err)
}

#[pyfunction]
fn verify_single_leaf(g: &PyGraph, labels: Vec<usize>) -> PyResult<bool> {
    verify_leaf(&g.inner, &Labeling::new(labels)).map_err(err)
}

#[pyfunction]
fn min_dominating_set(g: &PyGraph) -> PyResult<Vec<usize>> {
    oracles::min_dominating_set(&g.inner)
        .map(|s| s.as_slice().to_vec())
        .map_err(err)
}

#[pyfunction]
fn min_vertex_cover(g: &PyGraph) -> PyResult<Vec<usize>> {
    oracles::min_vertex_cover(&g.inner)
        .map(|s| s.as_slice().to_vec())
        .map_err(err)
}

#[pyfunction]
fn max_matching(g: &PyGraph) -> PyResult<Vec<(usize, usize)>> {
    oracles::max_matching(&g.inner)
        .map(|m| m.as_slice().to_vec())
        .map_err(err)
}

/// Exact ratio as a string such as `"3/2"` or `"inf"`; problem is
/// `mds`, `mvc` or `matching`.
#[pyfunction]
fn approx_ratio(candidate_size: usize, opt_size: usize, problem: &str) -> PyResult<String> {
    let problem = match problem {
        "mds" => Problem::DominatingSet,
        "mvc" => Problem::VertexCover,
        "matching" => Problem::Matching,
        _ => return Err(PyValueError::new_err(format!("unknown problem {problem:?}"))),
    };
    oracles::approx_ratio(candidate_size, opt_size, problem.sense())
        .map(|r| r.to_string())
        .map_err(err)
}

/// Single-leaf REINFORCE training; returns `(successes, report_json)`.
#[pyfunction]
#[pyo3(signature = (kind, iterations=None, trials=None, seed=0))]
fn train(py: Python<'_>, kind: &str, iterations: Option<usize>, trials: Option<usize>, seed: u64) -> PyResult<(usize, String)> {
    let defaults = TrainConfig::default();
    let cfg = TrainConfig {
        iterations: iterations.unwrap_or(defaults.iterations),
        trials: trials.unwrap_or(defaults.trials),
        seed,
        ..defaults
    };
    let kind = kind_of(kind)?;
    let report = py.detach(|| rl::train(&cfg, kind)).map_err(err)?;
    let json = serde_json::to_string(&report).map_err(|e| err(e.into()))?;
    Ok((report.successes(), json))
}

#[pymodule]
fn pyportgnn(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyPorts>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(port_numbering, m)?)?;
    m.add_function(wrap_pyfunction!(weak_two_coloring, m)?)?;
    m.add_function(wrap_pyfunction!(is_weak_two_coloring, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(verify_single_leaf, m)?)?;
    m.add_function(wrap_pyfunction!(min_dominating_set, m)?)?;
    m.add_function(wrap_pyfunction!(min_vertex_cover, m)?)?;
    m.add_function(wrap_pyfunction!(max_matching, m)?)?;
    m.add_function(wrap_pyfunction!(approx_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    Ok(())
}
