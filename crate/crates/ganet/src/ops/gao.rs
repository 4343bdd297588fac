//! GAO: soft graph attention. Every node attends to its whole neighborhood
//! (self included); non-neighbors are masked out of the softmax with the
//! sentinel, never by multiplying scores, so a zero-valued logit of a true
//! neighbor stays a valid logit.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::ops::{apply_or_clone, softmax_columns_backward, LinearWeights};
use crate::tensor::{matmul, softmax_columns_in_place, DenseMatrix, MASKED};

#[derive(Debug, Clone)]
pub struct GaoCache {
    x: DenseMatrix,
    tq: DenseMatrix,
    tk: DenseMatrix,
    tv: DenseMatrix,
    /// Masked, normalized N x N coefficient matrix; zeros outside the
    /// adjacency.
    s: DenseMatrix,
    transforms: LinearWeights,
}

impl GaoCache {
    pub fn weights(&self) -> &DenseMatrix {
        &self.s
    }
}

#[derive(Debug, Clone)]
pub struct GaoGrads {
    pub dx: DenseMatrix,
    pub dwq: Option<DenseMatrix>,
    pub dwk: Option<DenseMatrix>,
    pub dwv: Option<DenseMatrix>,
}

/// Masked soft attention over the graph. Column j of the output is the
/// softmax-weighted sum of (transformed) feature columns of j's neighbors.
/// The graph must already carry self-loops; an isolated node without one
/// has an empty neighborhood and is reported as a degenerate column.
pub fn gao_forward(
    x: &DenseMatrix,
    g: &Graph,
    transforms: Option<&LinearWeights>,
) -> Result<(DenseMatrix, GaoCache)> {
    let n = g.num_nodes();
    if x.cols() != n {
        return Err(Error::DimensionMismatch {
            op: "gao_forward",
            left_rows: x.rows(),
            left_cols: x.cols(),
            right_rows: n,
            right_cols: n,
        });
    }
    let t = transforms.cloned().unwrap_or_default();
    t.validate(x.rows(), x.rows())?;
    let tq = apply_or_clone(t.w_q.as_ref(), x, "gao W^Q")?;
    let tk = apply_or_clone(t.w_k.as_ref(), x, "gao W^K")?;
    let tv = apply_or_clone(t.w_v.as_ref(), x, "gao W^V")?;

    let mut e = matmul(&tk.transpose(), &tq)?;
    mask_non_neighbors(&mut e, g);
    softmax_columns_in_place(&mut e).map_err(|err| match err {
        Error::DegenerateColumn { col } => Error::DegenerateColumn { col },
        other => other,
    })?;
    let s = e;
    let o = matmul(&tv, &s)?;
    Ok((
        o,
        GaoCache {
            x: x.clone(),
            tq,
            tk,
            tv,
            s,
            transforms: t,
        },
    ))
}

/// Overwrite every entry (i, j) with i not adjacent to j with the masked
/// sentinel. Neighbor lists are sorted, so one merge pass per column.
fn mask_non_neighbors(e: &mut DenseMatrix, g: &Graph) {
    for j in 0..g.num_nodes() {
        let nbrs = g.neighbors(j);
        let col = e.col_mut(j);
        let mut it = nbrs.iter().peekable();
        for (i, v) in col.iter_mut().enumerate() {
            if it.peek() == Some(&&i) {
                it.next();
            } else {
                *v = MASKED;
            }
        }
    }
}

pub fn gao_backward(cache: &GaoCache, upstream: &DenseMatrix) -> Result<GaoGrads> {
    crate::ops::check_upstream("gao_backward", cache.tv.rows(), cache.s.cols(), upstream)?;
    let dtv = matmul(upstream, &cache.s.transpose())?;
    let ds = matmul(&cache.tv.transpose(), upstream)?;
    // Masked entries have s = 0, so their de vanishes and no gradient leaks
    // across non-edges.
    let de = softmax_columns_backward(&cache.s, &ds);
    let dtq = matmul(&cache.tk, &de)?;
    let dtk = matmul(&cache.tq, &de.transpose())?;

    let mut dx = DenseMatrix::zeros(cache.x.rows(), cache.x.cols());
    let mut fold = |w: Option<&DenseMatrix>, dt: &DenseMatrix| -> Result<Option<DenseMatrix>> {
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
    let dwq = fold(cache.transforms.w_q.as_ref(), &dtq)?;
    let dwk = fold(cache.transforms.w_k.as_ref(), &dtk)?;
    let dwv = fold(cache.transforms.w_v.as_ref(), &dtv)?;
    Ok(GaoGrads { dx, dwq, dwk, dwv })
}
