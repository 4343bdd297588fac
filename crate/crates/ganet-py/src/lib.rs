//! Python bindings for the graph attention operator kit: graph
//! construction and I/O, the three attention operators, the cost model,
//! gradient checking, and the node-classification trainer.
//!
//! Feature matrices cross the boundary as lists of channel rows
//! (d rows, each of length N), matching the JSON schema.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ganet::graph;
use ganet::net::{AttentionKind, GamConfig, GanetConfig, Readout};
use ganet::ops::{self, Activation, HgaoParams};
use ganet::profile::{self, OperatorKind};
use ganet::tensor::{DenseMatrix, SeededRng};
use ganet::train::{train_node_classifier, TrainConfig};

fn err<T>(e: ganet::Error) -> PyResult<T> {
    Err(PyValueError::new_err(e.to_string()))
}

fn matrix_from_rows(rows: Vec<Vec<f64>>) -> PyResult<DenseMatrix> {
    DenseMatrix::from_rows(&rows).or_else(err)
}

fn matrix_to_rows(m: &DenseMatrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|r| m.row(r)).collect()
}

/// Undirected graph with CSR adjacency, features, labels, and split masks.
#[pyclass(name = "Graph", from_py_object)]
#[derive(Clone)]
struct PyGraph {
    inner: graph::Graph,
}

#[pymethods]
impl PyGraph {
    /// Build from undirected edge pairs and a channels x nodes feature
    /// matrix given as rows.
    #[new]
    fn new(num_nodes: usize, edges: Vec<(usize, usize)>, features: Vec<Vec<f64>>) -> PyResult<Self> {
        let features = matrix_from_rows(features)?;
        graph::Graph::from_edges(num_nodes, &edges, features)
            .map(|inner| Self { inner })
            .or_else(err)
    }

    /// Stochastic-block-model generator; labels are block ids and masks
    /// default to the 10/20/70 train/val/test split.
    #[staticmethod]
    #[pyo3(signature = (blocks, p_in, p_out, noise=0.0, seed=0))]
    fn generate_sbm(
        blocks: Vec<usize>,
        p_in: f64,
        p_out: f64,
        noise: f64,
        seed: u64,
    ) -> PyResult<Self> {
        let mut rng = SeededRng::new(seed);
        graph::generate_sbm(&mut rng, &blocks, p_in, p_out, noise)
            .map(|inner| Self { inner })
            .or_else(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        graph::graph_from_json(text).map(|inner| Self { inner }).or_else(err)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        graph::load_graph(path).map(|inner| Self { inner }).or_else(err)
    }

    fn to_json(&self) -> PyResult<String> {
        graph::graph_to_json(&self.inner).or_else(err)
    }

    fn save(&self, path: &str) -> PyResult<()> {
        graph::save_graph(&self.inner, path).or_else(err)
    }

    /// Copy with exactly one self-loop per node (idempotent). Attention
    /// operators require self-loops.
    fn add_self_loops(&self) -> Self {
        Self {
            inner: graph::add_self_loops(&self.inner),
        }
    }

    #[getter]
    fn num_nodes(&self) -> usize {
        self.inner.num_nodes()
    }

    /// Stored directed entries (undirected edges count twice).
    #[getter]
    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    #[getter]
    fn channels(&self) -> usize {
        self.inner.channels()
    }

    #[getter]
    fn features(&self) -> Vec<Vec<f64>> {
        matrix_to_rows(self.inner.features())
    }

    #[getter]
    fn labels(&self) -> Option<Vec<usize>> {
        self.inner.labels().map(|l| l.to_vec())
    }

    fn neighbors(&self, node: usize) -> PyResult<Vec<usize>> {
        if node >= self.inner.num_nodes() {
            return Err(PyValueError::new_err(format!("node {node} out of range")));
        }
        Ok(self.inner.neighbors(node).to_vec())
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph(num_nodes={}, edge_count={}, channels={})",
            self.inner.num_nodes(),
            self.inner.edge_count(),
            self.inner.channels()
        )
    }
}

/// Soft graph attention over the graph's neighborhoods. Returns the output
/// feature rows.
#[pyfunction]
fn gao_forward(x: Vec<Vec<f64>>, g: &PyGraph) -> PyResult<Vec<Vec<f64>>> {
    let x = matrix_from_rows(x)?;
    ops::gao_forward(&x, &g.inner, None)
        .map(|(o, _)| matrix_to_rows(&o))
        .or_else(err)
}

/// Hard top-k graph attention with projection vector `p` and budget `k`.
#[pyfunction]
fn hgao_forward(x: Vec<Vec<f64>>, g: &PyGraph, p: Vec<f64>, k: usize) -> PyResult<Vec<Vec<f64>>> {
    let x = matrix_from_rows(x)?;
    let params = HgaoParams {
        p,
        k,
        transforms: None,
    };
    ops::hgao_forward(&x, &g.inner, &params)
        .map(|(o, _)| matrix_to_rows(&o))
        .or_else(err)
}

/// Channel-wise attention; the adjacency is not used.
#[pyfunction]
fn cgao_forward(x: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
    let x = matrix_from_rows(x)?;
    ops::cgao_forward(&x)
        .map(|(o, _)| matrix_to_rows(&o))
        .or_else(err)
}

fn parse_op(op: &str) -> PyResult<OperatorKind> {
    op.parse().or_else(err)
}

/// Closed-form multiply-add count for one operator application.
#[pyfunction]
#[pyo3(signature = (op, n, d, k=8))]
fn count_madd(op: &str, n: usize, d: usize, k: usize) -> PyResult<u64> {
    Ok(profile::count_madd(parse_op(op)?, n, d, k))
}

/// Modeled peak intermediate memory in bytes (4-byte entries).
#[pyfunction]
fn model_memory(op: &str, n: usize, d: usize) -> PyResult<u64> {
    Ok(profile::model_memory(parse_op(op)?, n, d))
}

/// The three-size reference comparison table as a list of dicts.
#[pyfunction]
#[pyo3(signature = (skip_wall=true, repeats=5, seed=0))]
fn table3(py: Python<'_>, skip_wall: bool, repeats: usize, seed: u64) -> PyResult<Py<PyAny>> {
    let rows = profile::table3_report(repeats, skip_wall, seed).or_else(err)?;
    let json = serde_json::to_string(&rows).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let loads = py.import("json")?.getattr("loads")?;
    Ok(loads.call1((json,))?.unbind())
}

/// Finite-difference gradient check; returns a dict with the max relative
/// error and skip counts.
#[pyfunction]
#[pyo3(signature = (op, nodes=6, channels=4, k=2, instances=20, seed=1))]
fn gradcheck(
    py: Python<'_>,
    op: &str,
    nodes: usize,
    channels: usize,
    k: usize,
    instances: usize,
    seed: u64,
) -> PyResult<Py<PyDict>> {
    let op: ganet::ops::gradcheck::CheckOp = op.parse().or_else(err)?;
    let settings = ganet::ops::gradcheck::CheckSettings {
        nodes,
        channels,
        k,
        instances,
        seed,
        step: 1e-6,
        force_ties: false,
    };
    let report = ganet::ops::gradcheck::run_gradcheck(op, &settings).or_else(err)?;
    let dict = PyDict::new(py);
    dict.set_item("op", report.op)?;
    dict.set_item("checked", report.checked)?;
    dict.set_item("skipped", report.skipped_nondifferentiable)?;
    dict.set_item("max_rel_err", report.max_rel_err)?;
    Ok(dict.unbind())
}

/// Train a GANet node classifier; returns a dict with accuracies and the
/// per-epoch history.
#[pyfunction]
#[pyo3(signature = (g, attn="hgao", gams=2, hidden=16, k=8, epochs=200, lr=0.01, l2=1e-4, dropout_keep=1.0, patience=50, seed=0))]
#[allow(clippy::too_many_arguments)]
fn train(
    py: Python<'_>,
    g: &PyGraph,
    attn: &str,
    gams: usize,
    hidden: usize,
    k: usize,
    epochs: usize,
    lr: f64,
    l2: f64,
    dropout_keep: f64,
    patience: usize,
    seed: u64,
) -> PyResult<Py<PyDict>> {
    let kind = match attn {
        "gao" => AttentionKind::Gao,
        "hgao" => AttentionKind::Hgao,
        "cgao" => AttentionKind::Cgao,
        other => return Err(PyValueError::new_err(format!("unknown attention {other}"))),
    };
    let labels = g
        .inner
        .labels()
        .ok_or_else(|| PyValueError::new_err("graph has no labels"))?;
    let classes = labels.iter().max().map_or(0, |&m| m + 1);
    let gam_configs = (0..gams)
        .map(|i| GamConfig {
            attention_kind: kind,
            attn_out_channels: match kind {
                AttentionKind::Cgao => hidden * (i + 1),
                _ => hidden,
            },
            gcn_out_channels: hidden,
            k: Some(k),
            dropout_keep,
        })
        .collect();
    let model = GanetConfig {
        embed_channels: hidden,
        gam_configs,
        out_channels: classes,
        readout: Readout::None,
        dropout_keep,
        activation: Activation::Identity,
    };
    let cfg = TrainConfig {
        learning_rate: lr,
        l2_lambda: l2,
        epochs,
        seed,
        early_stop_patience: if patience == 0 { None } else { Some(patience) },
    };
    let outcome = train_node_classifier(&g.inner, &model, &cfg).or_else(err)?;
    let dict = PyDict::new(py);
    dict.set_item("final_test_acc", outcome.test_accuracy)?;
    dict.set_item("best_val_acc", outcome.best_val_accuracy)?;
    dict.set_item("epochs_run", outcome.history.len())?;
    let history: Vec<(usize, f64, f64, f64)> = outcome
        .history
        .iter()
        .map(|e| (e.epoch, e.loss, e.val_acc, e.test_acc))
        .collect();
    dict.set_item("history", history)?;
    Ok(dict.unbind())
}

#[pymodule]
fn ganet_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_function(wrap_pyfunction!(gao_forward, m)?)?;
    m.add_function(wrap_pyfunction!(hgao_forward, m)?)?;
    m.add_function(wrap_pyfunction!(cgao_forward, m)?)?;
    m.add_function(wrap_pyfunction!(count_madd, m)?)?;
    m.add_function(wrap_pyfunction!(model_memory, m)?)?;
    m.add_function(wrap_pyfunction!(table3, m)?)?;
    m.add_function(wrap_pyfunction!(gradcheck, m)?)?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    Ok(())
}
