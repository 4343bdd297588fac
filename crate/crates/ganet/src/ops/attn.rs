//! Dot-product attention over explicit query / key / value matrices.

use crate::error::Result;
use crate::ops::{apply_or_clone, softmax_columns_backward, LinearWeights};
use crate::tensor::{matmul, softmax_columns_in_place, DenseMatrix};

/// Saved intermediates for [`attn_backward`].
#[derive(Debug, Clone)]
pub struct AttnCache {
    q: DenseMatrix,
    k: DenseMatrix,
    v: DenseMatrix,
    tq: DenseMatrix,
    tk: DenseMatrix,
    tv: DenseMatrix,
    /// Normalized coefficient matrix softmax(E), n x m.
    s: DenseMatrix,
    transforms: LinearWeights,
}

impl AttnCache {
    pub fn weights(&self) -> &DenseMatrix {
        &self.s
    }
}

/// Gradients for every differentiable input of [`attn`].
#[derive(Debug, Clone)]
pub struct AttnGrads {
    pub dq: DenseMatrix,
    pub dk: DenseMatrix,
    pub dv: DenseMatrix,
    pub dwq: Option<DenseMatrix>,
    pub dwk: Option<DenseMatrix>,
    pub dwv: Option<DenseMatrix>,
}

/// attn(Q, K, V): E = (W^K K)^T (W^Q Q), O = (W^V V) softmax(E).
///
/// Q is d x m, K is d x n, V is v x n; the output is v' x m where v' is
/// V's (transformed) row count. Each output column is a convex combination
/// of value columns.
pub fn attn(
    q: &DenseMatrix,
    k: &DenseMatrix,
    v: &DenseMatrix,
    transforms: Option<&LinearWeights>,
) -> Result<(DenseMatrix, AttnCache)> {
    let t = transforms.cloned().unwrap_or_default();
    t.validate(q.rows(), k.rows())?;
    let tq = apply_or_clone(t.w_q.as_ref(), q, "attn W^Q")?;
    let tk = apply_or_clone(t.w_k.as_ref(), k, "attn W^K")?;
    let tv = apply_or_clone(t.w_v.as_ref(), v, "attn W^V")?;

    let mut e = matmul(&tk.transpose(), &tq)?;
    softmax_columns_in_place(&mut e)?;
    let s = e;
    let o = matmul(&tv, &s)?;
    let cache = AttnCache {
        q: q.clone(),
        k: k.clone(),
        v: v.clone(),
        tq,
        tk,
        tv,
        s,
        transforms: t,
    };
    Ok((o, cache))
}

pub fn attn_backward(cache: &AttnCache, upstream: &DenseMatrix) -> Result<AttnGrads> {
    crate::ops::check_upstream("attn_backward", cache.tv.rows(), cache.s.cols(), upstream)?;
    // O = tv * s
    let dtv = matmul(upstream, &cache.s.transpose())?;
    let ds = matmul(&cache.tv.transpose(), upstream)?;
    // s = softmax(e)
    let de = softmax_columns_backward(&cache.s, &ds);
    // e = tk^T * tq
    let dtq = matmul(&cache.tk, &de)?;
    let dtk = matmul(&cache.tq, &de.transpose())?;

    let (dq, dwq) = through_transform(cache.transforms.w_q.as_ref(), &cache.q, &dtq)?;
    let (dk, dwk) = through_transform(cache.transforms.w_k.as_ref(), &cache.k, &dtk)?;
    let (dv, dwv) = through_transform(cache.transforms.w_v.as_ref(), &cache.v, &dtv)?;
    Ok(AttnGrads {
        dq,
        dk,
        dv,
        dwq,
        dwk,
        dwv,
    })
}

/// Given t = w * x (or t = x when w is absent) and dt, produce (dx, dw).
fn through_transform(
    w: Option<&DenseMatrix>,
    x: &DenseMatrix,
    dt: &DenseMatrix,
) -> Result<(DenseMatrix, Option<DenseMatrix>)> {
    match w {
        Some(w) => {
            let dw = matmul(dt, &x.transpose())?;
            let dx = matmul(&w.transpose(), dt)?;
            Ok((dx, Some(dw)))
        }
        None => Ok((dt.clone(), None)),
    }
}
