//! Shared test helpers: naive per-node / per-channel oracle
//! implementations of the three operators, independent of the library's
//! vectorized paths, plus random instance generators.
//!
//! The oracles use plain nested loops and their own softmax/sigmoid so a
//! bug in the library's kernels cannot hide in both sides of a comparison.

#![allow(dead_code)]

use ganet::graph::{add_self_loops, generate_sparse, Graph};
use ganet::ops::LinearWeights;
use ganet::tensor::{DenseMatrix, SeededRng};

pub fn random_matrix(rng: &mut SeededRng, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.uniform(-1.0, 1.0))
}

/// Random sparse graph with self-loops and random dense features.
pub fn random_test_graph(rng: &mut SeededRng, n: usize, d: usize) -> Graph {
    let raw = generate_sparse(rng, n, 4.0).unwrap();
    let x = random_matrix(rng, d, n);
    add_self_loops(&raw.with_features(x).unwrap())
}

/// Optional square key transform and (possibly rectangular) value
/// transform, the shape the networks use.
pub fn random_transforms(
    rng: &mut SeededRng,
    d: usize,
    d_out: usize,
    present: bool,
) -> Option<LinearWeights> {
    if !present {
        return None;
    }
    Some(LinearWeights {
        w_q: None,
        w_k: Some(random_matrix(rng, d, d)),
        w_v: Some(random_matrix(rng, d_out, d)),
    })
}

fn oracle_sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Stable softmax over a small slice, computed independently.
fn oracle_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

fn transformed_column(w: Option<&DenseMatrix>, x: &DenseMatrix, col: usize) -> Vec<f64> {
    match w {
        None => x.col(col).to_vec(),
        Some(w) => {
            let mut out = vec![0.0; w.rows()];
            for (r, o) in out.iter_mut().enumerate() {
                let mut acc = 0.0;
                for c in 0..w.cols() {
                    acc += w.get(r, c) * x.get(c, col);
                }
                *o = acc;
            }
            out
        }
    }
}

fn vdot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Per-node soft graph attention, one neighborhood at a time.
pub fn oracle_gao(x: &DenseMatrix, g: &Graph, t: Option<&LinearWeights>) -> DenseMatrix {
    let (wq, wk, wv) = split_transforms(t);
    let d_out = wv.map_or(x.rows(), DenseMatrix::rows);
    let mut out = DenseMatrix::zeros(d_out, g.num_nodes());
    for j in 0..g.num_nodes() {
        let q = transformed_column(wq, x, j);
        let nbrs = g.neighbors(j);
        let logits: Vec<f64> = nbrs
            .iter()
            .map(|&i| vdot(&transformed_column(wk, x, i), &q))
            .collect();
        let weights = oracle_softmax(&logits);
        for (&i, &a) in nbrs.iter().zip(&weights) {
            let v = transformed_column(wv, x, i);
            for (r, &vr) in v.iter().enumerate() {
                out.set(r, j, out.get(r, j) + a * vr);
            }
        }
    }
    out
}

/// Per-node hard attention: rank by projection score, truncate to k, gate
/// by sigmoid, soft-attend over the selection.
pub fn oracle_hgao(
    x: &DenseMatrix,
    g: &Graph,
    p: &[f64],
    k: usize,
    t: Option<&LinearWeights>,
) -> DenseMatrix {
    let (wq, wk, wv) = split_transforms(t);
    let pn = p.iter().map(|v| v * v).sum::<f64>().sqrt();
    let n = g.num_nodes();
    let y: Vec<f64> = (0..n)
        .map(|i| {
            let mut raw = 0.0;
            for r in 0..x.rows() {
                raw += x.get(r, i) * p[r];
            }
            raw.abs() / pn
        })
        .collect();

    let d_out = wv.map_or(x.rows(), DenseMatrix::rows);
    let mut out = DenseMatrix::zeros(d_out, n);
    for i in 0..n {
        let mut cand: Vec<usize> = g.neighbors(i).to_vec();
        cand.sort_by(|&a, &b| y[b].partial_cmp(&y[a]).unwrap().then(a.cmp(&b)));
        cand.truncate(k.min(cand.len()));

        let q = transformed_column(wq, x, i);
        let mut keys = Vec::new();
        let mut values = Vec::new();
        for &j in &cand {
            let gate = oracle_sigmoid(y[j]);
            let kj: Vec<f64> = transformed_column(wk, x, j).iter().map(|v| v * gate).collect();
            let vj: Vec<f64> = transformed_column(wv, x, j).iter().map(|v| v * gate).collect();
            keys.push(kj);
            values.push(vj);
        }
        let logits: Vec<f64> = keys.iter().map(|kj| vdot(kj, &q)).collect();
        let weights = oracle_softmax(&logits);
        for (vj, &a) in values.iter().zip(&weights) {
            for (r, &vr) in vj.iter().enumerate() {
                out.set(r, i, out.get(r, i) + a * vr);
            }
        }
    }
    out
}

/// Per-channel attention: each output channel mixes all source channels.
pub fn oracle_cgao(x: &DenseMatrix) -> DenseMatrix {
    let d = x.rows();
    let n = x.cols();
    let mut out = DenseMatrix::zeros(d, n);
    for a in 0..d {
        let logits: Vec<f64> = (0..d)
            .map(|b| {
                let mut e = 0.0;
                for node in 0..n {
                    e += x.get(a, node) * x.get(b, node);
                }
                e
            })
            .collect();
        let weights = oracle_softmax(&logits);
        for node in 0..n {
            let mut acc = 0.0;
            for (b, &w) in weights.iter().enumerate() {
                acc += w * x.get(b, node);
            }
            out.set(a, node, acc);
        }
    }
    out
}

fn split_transforms(
    t: Option<&LinearWeights>,
) -> (
    Option<&DenseMatrix>,
    Option<&DenseMatrix>,
    Option<&DenseMatrix>,
) {
    match t {
        None => (None, None, None),
        Some(t) => (t.w_q.as_ref(), t.w_k.as_ref(), t.w_v.as_ref()),
    }
}

pub fn max_abs_diff(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    assert_eq!((a.rows(), a.cols()), (b.rows(), b.cols()));
    a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Relabel a graph's nodes by `perm` (new index = perm[old index]) and
/// permute feature columns to match.
pub fn permute_graph(g: &Graph, perm: &[usize]) -> Graph {
    let n = g.num_nodes();
    let mut edges = Vec::new();
    for u in 0..n {
        for &v in g.neighbors(u) {
            if u < v {
                edges.push((perm[u], perm[v]));
            }
        }
    }
    let mut inverse = vec![0usize; n];
    for (old, &new) in perm.iter().enumerate() {
        inverse[new] = old;
    }
    // Column new_j of the permuted features is column inverse[new_j] of the
    // originals.
    let x = g.features().gather_columns(&inverse);
    add_self_loops(&Graph::from_edges(n, &edges, x).unwrap())
}

pub fn random_permutation(rng: &mut SeededRng, n: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut perm);
    perm
}
