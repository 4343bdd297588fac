//! GCN layer: o = activation(W · X · Â), with Â applied as a sparse
//! aggregation over the CSR rows. Node u's aggregate uses its own row of
//! weights, so row-mean normalization reproduces constants exactly.

use crate::error::{Error, Result};
use crate::graph::NormalizedAdjacency;
use crate::ops::GcnWeights;
use crate::tensor::{matmul, DenseMatrix};

#[derive(Debug, Clone)]
pub struct GcnCache {
    /// Aggregated features (per-row weighting of Â).
    h: DenseMatrix,
    /// Pre-activation W · h.
    z: DenseMatrix,
    weights: GcnWeights,
    adjacency: NormalizedAdjacency,
}

#[derive(Debug, Clone)]
pub struct GcnGrads {
    pub dx: DenseMatrix,
    pub dw: DenseMatrix,
}

/// Sparse neighborhood aggregation: out[:, u] = sum_v w(u, v) x[:, v].
fn aggregate(x: &DenseMatrix, a: &NormalizedAdjacency) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(x.rows(), x.cols());
    for u in 0..a.num_nodes() {
        let (nbrs, w) = a.row(u);
        let rows = x.rows();
        let out_col = out.col_mut(u);
        for (&v, &wv) in nbrs.iter().zip(w) {
            let x_col = &x.data()[v * rows..(v + 1) * rows];
            for (o, &xv) in out_col.iter_mut().zip(x_col) {
                *o += wv * xv;
            }
        }
    }
    out
}

/// Transposed aggregation for the backward pass: scatter each row's
/// contribution back to its sources.
fn aggregate_transposed(dh: &DenseMatrix, a: &NormalizedAdjacency) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(dh.rows(), dh.cols());
    for u in 0..a.num_nodes() {
        let (nbrs, w) = a.row(u);
        let dh_col = dh.col(u).to_vec();
        for (&v, &wv) in nbrs.iter().zip(w) {
            let out_col = out.col_mut(v);
            for (o, &g) in out_col.iter_mut().zip(&dh_col) {
                *o += wv * g;
            }
        }
    }
    out
}

pub fn gcn_forward(
    x: &DenseMatrix,
    a_hat: &NormalizedAdjacency,
    weights: &GcnWeights,
) -> Result<(DenseMatrix, GcnCache)> {
    if x.cols() != a_hat.num_nodes() {
        return Err(Error::DimensionMismatch {
            op: "gcn_forward adjacency",
            left_rows: x.rows(),
            left_cols: x.cols(),
            right_rows: a_hat.num_nodes(),
            right_cols: a_hat.num_nodes(),
        });
    }
    if weights.w.cols() != x.rows() {
        return Err(Error::DimensionMismatch {
            op: "gcn_forward weights",
            left_rows: weights.w.rows(),
            left_cols: weights.w.cols(),
            right_rows: x.rows(),
            right_cols: x.cols(),
        });
    }
    let h = aggregate(x, a_hat);
    let z = matmul(&weights.w, &h)?;
    let o = weights.activation.apply(&z);
    Ok((
        o,
        GcnCache {
            h,
            z,
            weights: weights.clone(),
            adjacency: a_hat.clone(),
        },
    ))
}

pub fn gcn_backward(cache: &GcnCache, upstream: &DenseMatrix) -> Result<GcnGrads> {
    crate::ops::check_upstream("gcn_backward", cache.z.rows(), cache.z.cols(), upstream)?;
    let dz = cache.weights.activation.backward(&cache.z, upstream);
    let dw = matmul(&dz, &cache.h.transpose())?;
    let dh = matmul(&cache.weights.w.transpose(), &dz)?;
    let dx = aggregate_transposed(&dh, &cache.adjacency);
    Ok(GcnGrads { dx, dw })
}
