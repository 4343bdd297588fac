//! Forward and backward passes for the layer operators: plain attention,
//! GAO (masked soft graph attention), hGAO (hard top-k attention with
//! sigmoid gating), cGAO (channel-wise attention), and the GCN layer.
//!
//! Every forward returns the output together with a cache holding exactly
//! what its backward needs; every backward is an exact vector-Jacobian
//! product of the forward map. Caches are consumed by the matching
//! backward only, which the per-operator cache types enforce.

mod attn;
mod cgao;
mod gao;
mod gcn;
pub mod gradcheck;
mod hgao;

pub use attn::{attn, attn_backward, AttnCache, AttnGrads};
pub use cgao::{cgao_backward, cgao_forward, CgaoCache, CgaoGrads};
pub use gao::{gao_backward, gao_forward, GaoCache, GaoGrads};
pub use gcn::{gcn_backward, gcn_forward, GcnCache, GcnGrads};
pub use hgao::{hgao_backward, hgao_forward, HgaoCache, HgaoGrads, HgaoParams, NondiffFlags};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::DenseMatrix;

/// Optional linear maps applied to queries, keys, and values before the
/// similarity product. An absent map means the identity.
#[derive(Debug, Clone, Default)]
pub struct LinearWeights {
    pub w_q: Option<DenseMatrix>,
    pub w_k: Option<DenseMatrix>,
    pub w_v: Option<DenseMatrix>,
}

impl LinearWeights {
    pub fn is_empty(&self) -> bool {
        self.w_q.is_none() && self.w_k.is_none() && self.w_v.is_none()
    }

    /// Transformed query and key rows must agree so their inner products
    /// are defined.
    pub(crate) fn validate(&self, q_rows: usize, k_rows: usize) -> Result<()> {
        let dq = self.w_q.as_ref().map_or(q_rows, DenseMatrix::rows);
        let dk = self.w_k.as_ref().map_or(k_rows, DenseMatrix::rows);
        if dq != dk {
            return Err(Error::Config(format!(
                "query dim {dq} and key dim {dk} disagree after transforms"
            )));
        }
        Ok(())
    }
}

pub(crate) fn apply_or_clone(
    w: Option<&DenseMatrix>,
    x: &DenseMatrix,
    op: &'static str,
) -> Result<DenseMatrix> {
    match w {
        Some(w) => {
            if w.cols() != x.rows() {
                return Err(Error::DimensionMismatch {
                    op,
                    left_rows: w.rows(),
                    left_cols: w.cols(),
                    right_rows: x.rows(),
                    right_cols: x.cols(),
                });
            }
            crate::tensor::matmul(w, x)
        }
        None => Ok(x.clone()),
    }
}

/// Activation applied by the GCN layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Identity,
    Relu,
}

impl Activation {
    pub(crate) fn apply(self, z: &DenseMatrix) -> DenseMatrix {
        match self {
            Activation::Identity => z.clone(),
            Activation::Relu => z.map(|v| v.max(0.0)),
        }
    }

    /// Upstream times the activation Jacobian (diagonal).
    pub(crate) fn backward(self, z: &DenseMatrix, upstream: &DenseMatrix) -> DenseMatrix {
        match self {
            Activation::Identity => upstream.clone(),
            Activation::Relu => {
                let mut out = upstream.clone();
                for (o, &pre) in out.data_mut().iter_mut().zip(z.data()) {
                    if pre <= 0.0 {
                        *o = 0.0;
                    }
                }
                out
            }
        }
    }
}

/// Weights of one GCN layer.
#[derive(Debug, Clone)]
pub struct GcnWeights {
    pub w: DenseMatrix,
    pub activation: Activation,
}

impl GcnWeights {
    pub fn new(w: DenseMatrix, activation: Activation) -> Self {
        Self { w, activation }
    }
}

/// Backward passes require the upstream to match the forward output shape.
pub(crate) fn check_upstream(
    op: &'static str,
    rows: usize,
    cols: usize,
    upstream: &DenseMatrix,
) -> Result<()> {
    if upstream.rows() != rows || upstream.cols() != cols {
        return Err(Error::DimensionMismatch {
            op,
            left_rows: rows,
            left_cols: cols,
            right_rows: upstream.rows(),
            right_cols: upstream.cols(),
        });
    }
    Ok(())
}

/// Gradient of a column-wise softmax given its output `s` and the upstream
/// `ds`. Zero entries of `s` (masked logits) yield zero gradient.
pub(crate) fn softmax_columns_backward(s: &DenseMatrix, ds: &DenseMatrix) -> DenseMatrix {
    let mut de = DenseMatrix::zeros(s.rows(), s.cols());
    for c in 0..s.cols() {
        let sc = s.col(c);
        let dc = ds.col(c);
        let inner = crate::tensor::dot(sc, dc);
        let out = de.col_mut(c);
        for i in 0..sc.len() {
            out[i] = sc[i] * (dc[i] - inner);
        }
    }
    de
}
