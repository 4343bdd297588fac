//! hGAO: hard graph attention.
//!
//! A shared trainable projection vector p scores every node once,
//! y = |X^T p| / ||p||. Each node then attends only to the k highest-scoring
//! members of its neighborhood (self included), with the selected columns
//! gated by sigmoid(y) before a per-node soft attention. The gate is what
//! makes p trainable: selection itself is piecewise constant and the
//! gradient treats the selected index sets as fixed.
//!
//! Nodes with fewer than k neighbors attend to all of them; there is no
//! padding, so each per-node softmax stays a proper distribution.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::ops::{apply_or_clone, attn, attn_backward, AttnCache, LinearWeights};
use crate::tensor::{
    diag_scale_columns, dot, matmul, sigmoid_scalar, top_k_indices, DenseMatrix,
};

const PROJECTION_NORM_TOL: f64 = 1e-12;

/// Parameters of the hard attention operator.
#[derive(Debug, Clone)]
pub struct HgaoParams {
    /// Projection vector, length = input channels.
    pub p: Vec<f64>,
    /// Neighbor budget, >= 1.
    pub k: usize,
    pub transforms: Option<LinearWeights>,
}

/// Measure-zero trouble spots encountered by a forward/backward pair.
/// Gradients at these points use the documented subgradients (selection
/// held constant, sign(0) = 0); the flags let callers skip such points in
/// finite-difference checks.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NondiffFlags {
    /// Some selected node has projection score exactly 0 (|.| kink).
    pub abs_kink: bool,
    /// Some node's k-th and (k+1)-th candidate scores tie at the boundary.
    pub selection_tie: bool,
}

impl NondiffFlags {
    pub fn any(self) -> bool {
        self.abs_kink || self.selection_tie
    }
}

#[derive(Debug, Clone)]
pub struct HgaoCache {
    x: DenseMatrix,
    xk: DenseMatrix,
    xv: DenseMatrix,
    /// Raw signed projections X^T p (before |.| and normalization).
    raw: Vec<f64>,
    p: Vec<f64>,
    p_norm: f64,
    y: Vec<f64>,
    selections: Vec<Selection>,
    transforms: LinearWeights,
    flags: NondiffFlags,
}

#[derive(Debug, Clone)]
struct Selection {
    idx: Vec<usize>,
    gates: Vec<f64>,
    attn: AttnCache,
}

impl HgaoCache {
    pub fn flags(&self) -> NondiffFlags {
        self.flags
    }

    pub fn selected(&self, node: usize) -> &[usize] {
        &self.selections[node].idx
    }

    pub fn scores(&self) -> &[f64] {
        &self.y
    }
}

#[derive(Debug, Clone)]
pub struct HgaoGrads {
    pub dx: DenseMatrix,
    pub dp: Vec<f64>,
    pub dwq: Option<DenseMatrix>,
    pub dwk: Option<DenseMatrix>,
    pub dwv: Option<DenseMatrix>,
    pub flags: NondiffFlags,
}

pub fn hgao_forward(
    x: &DenseMatrix,
    g: &Graph,
    params: &HgaoParams,
) -> Result<(DenseMatrix, HgaoCache)> {
    let n = g.num_nodes();
    if x.cols() != n {
        return Err(Error::DimensionMismatch {
            op: "hgao_forward",
            left_rows: x.rows(),
            left_cols: x.cols(),
            right_rows: n,
            right_cols: n,
        });
    }
    if params.p.len() != x.rows() {
        return Err(Error::LengthMismatch {
            op: "hgao projection",
            expected: x.rows(),
            got: params.p.len(),
        });
    }
    if params.k == 0 {
        return Err(Error::Parameter("hgao requires k >= 1".into()));
    }
    let p_norm = params.p.iter().map(|v| v * v).sum::<f64>().sqrt();
    if p_norm <= PROJECTION_NORM_TOL {
        return Err(Error::DegenerateProjection { norm: p_norm });
    }

    // Projection scores, computed once for the whole graph. Going through
    // matmul keeps the multiply-add instrumentation honest.
    let p_col = DenseMatrix::from_column(&params.p);
    let raw_mat = matmul(&x.transpose(), &p_col)?;
    let raw = raw_mat.data().to_vec();
    let y: Vec<f64> = raw.iter().map(|&v| v.abs() / p_norm).collect();

    let t = params.transforms.clone().unwrap_or_default();
    t.validate(x.rows(), x.rows())?;
    let xq = apply_or_clone(t.w_q.as_ref(), x, "hgao W^Q")?;
    let xk = apply_or_clone(t.w_k.as_ref(), x, "hgao W^K")?;
    let xv = apply_or_clone(t.w_v.as_ref(), x, "hgao W^V")?;

    let out_rows = xv.rows();
    let same_kv = xk == xv;
    let mut z = DenseMatrix::zeros(out_rows, n);
    let mut selections = Vec::with_capacity(n);
    let mut flags = NondiffFlags::default();

    for i in 0..n {
        let cand = g.neighbors(i);
        if cand.is_empty() {
            return Err(Error::DegenerateNeighborhood { node: i });
        }
        let idx = top_k_indices(&y, cand, params.k)?;
        if idx.len() < cand.len() {
            // Truncation happened; a tie across the selection boundary makes
            // the point nondifferentiable.
            let boundary = y[*idx.last().unwrap()];
            let tied = cand
                .iter()
                .any(|c| !idx.contains(c) && y[*c] == boundary);
            if tied {
                flags.selection_tie = true;
            }
        }
        if idx.iter().any(|&j| raw[j] == 0.0) {
            flags.abs_kink = true;
        }

        let gates: Vec<f64> = idx.iter().map(|&j| sigmoid_scalar(y[j])).collect();
        let keys = diag_scale_columns(&xk.gather_columns(&idx), &gates)?;
        let values = if same_kv {
            keys.clone()
        } else {
            diag_scale_columns(&xv.gather_columns(&idx), &gates)?
        };
        let query = DenseMatrix::from_column(xq.col(i));
        let (zi, attn_cache) = attn(&query, &keys, &values, None)?;
        z.col_mut(i).copy_from_slice(zi.col(0));
        selections.push(Selection {
            idx,
            gates,
            attn: attn_cache,
        });
    }

    Ok((
        z,
        HgaoCache {
            x: x.clone(),
            xk,
            xv,
            raw,
            p: params.p.clone(),
            p_norm,
            y,
            selections,
            transforms: t,
            flags,
        },
    ))
}

pub fn hgao_backward(cache: &HgaoCache, upstream: &DenseMatrix) -> Result<HgaoGrads> {
    crate::ops::check_upstream("hgao_backward", cache.xv.rows(), cache.x.cols(), upstream)?;
    let n = cache.x.cols();
    let d = cache.x.rows();
    let dq_rows = cache.transforms.w_q.as_ref().map_or(d, DenseMatrix::rows);
    let mut dxq = DenseMatrix::zeros(dq_rows, n);
    let mut dxk = DenseMatrix::zeros(cache.xk.rows(), n);
    let mut dxv = DenseMatrix::zeros(cache.xv.rows(), n);
    let mut dy = vec![0.0; n];

    for i in 0..n {
        let sel = &cache.selections[i];
        let up_col = DenseMatrix::from_column(upstream.col(i));
        let ag = attn_backward(&sel.attn, &up_col)?;
        for (r, &v) in ag.dq.col(0).iter().enumerate() {
            dxq.set(r, i, dxq.get(r, i) + v);
        }
        for (j, &node) in sel.idx.iter().enumerate() {
            let gate = sel.gates[j];
            let dk_col = ag.dk.col(j);
            let dv_col = ag.dv.col(j);
            let xk_col = cache.xk.col(node);
            let xv_col = cache.xv.col(node);
            for r in 0..dxk.rows() {
                dxk.set(r, node, dxk.get(r, node) + gate * dk_col[r]);
            }
            for r in 0..dxv.rows() {
                dxv.set(r, node, dxv.get(r, node) + gate * dv_col[r]);
            }
            let dgate = dot(xk_col, dk_col) + dot(xv_col, dv_col);
            dy[node] += dgate * gate * (1.0 - gate);
        }
    }

    // Projection path: y = |X^T p| / ||p||.
    let mut dx = DenseMatrix::zeros(d, n);
    let mut dp = vec![0.0; d];
    let pn = cache.p_norm;
    let mut dy_dot_y = 0.0;
    for i in 0..n {
        let sign = if cache.raw[i] > 0.0 {
            1.0
        } else if cache.raw[i] < 0.0 {
            -1.0
        } else {
            0.0 // subgradient at the |.| kink
        };
        let coeff = dy[i] * sign / pn;
        if coeff != 0.0 {
            let x_col = cache.x.col(i);
            for r in 0..d {
                dp[r] += coeff * x_col[r];
                dx.set(r, i, dx.get(r, i) + coeff * cache.p[r]);
            }
        }
        dy_dot_y += dy[i] * cache.y[i];
    }
    // Norm dependence: d/dp of 1/||p|| pulls -y_i p / ||p||^2 per node.
    for r in 0..d {
        dp[r] -= dy_dot_y * cache.p[r] / (pn * pn);
    }

    // Transform paths.
    let fold = |w: Option<&DenseMatrix>,
                dt: &DenseMatrix,
                dx: &mut DenseMatrix|
     -> Result<Option<DenseMatrix>> {
        match w {
            Some(w) => {
                let dw = matmul(dt, &cache.x.transpose())?;
                dx.add_scaled(&matmul(&w.transpose(), dt)?, 1.0)?;
                Ok(Some(dw))
            }
            None => {
                dx.add_scaled(dt, 1.0)?;
                Ok(None)
            }
        }
    };
    let dwq = fold(cache.transforms.w_q.as_ref(), &dxq, &mut dx)?;
    let dwk = fold(cache.transforms.w_k.as_ref(), &dxk, &mut dx)?;
    let dwv = fold(cache.transforms.w_v.as_ref(), &dxv, &mut dx)?;

    Ok(HgaoGrads {
        dx,
        dp,
        dwq,
        dwk,
        dwv,
        flags: cache.flags,
    })
}
