//! cGAO: channel-wise graph attention. The coefficient matrix E = X X^T is
//! d x d, so cost and memory scale with the channel count instead of the
//! node count, and the adjacency matrix is never consulted: features within
//! a node mix, features across nodes do not.
//!
//! Mixing weights are normalized over the source-channel axis, so each
//! output channel's weights form a distribution. E is symmetric, which
//! makes this reading coincide with a column-wise softmax of E transposed.

use crate::error::{Error, Result};
use crate::tensor::{matmul, softmax_columns_in_place, DenseMatrix};

#[derive(Debug, Clone)]
pub struct CgaoCache {
    x: DenseMatrix,
    /// Row-normalized d x d mixing weights.
    s: DenseMatrix,
}

impl CgaoCache {
    pub fn weights(&self) -> &DenseMatrix {
        &self.s
    }
}

#[derive(Debug, Clone)]
pub struct CgaoGrads {
    pub dx: DenseMatrix,
}

/// E = X X^T, O = rowsoftmax(E) X.
pub fn cgao_forward(x: &DenseMatrix) -> Result<(DenseMatrix, CgaoCache)> {
    if x.rows() == 0 {
        return Err(Error::Parameter("cgao requires at least one channel".into()));
    }
    let e = matmul(x, &x.transpose())?;
    // Row softmax via the column primitive on the transpose; E is d x d so
    // the two transposes are cheap.
    let mut et = e.transpose();
    softmax_columns_in_place(&mut et)?;
    let s = et.transpose();
    let o = matmul(&s, x)?;
    Ok((o, CgaoCache { x: x.clone(), s }))
}

pub fn cgao_backward(cache: &CgaoCache, upstream: &DenseMatrix) -> Result<CgaoGrads> {
    crate::ops::check_upstream("cgao_backward", cache.x.rows(), cache.x.cols(), upstream)?;
    let x = &cache.x;
    let s = &cache.s;
    // O = s * x
    let mut dx = matmul(&s.transpose(), upstream)?;
    let ds = matmul(upstream, &x.transpose())?;
    // Row-softmax backward, row by row.
    let d = s.rows();
    let mut de = DenseMatrix::zeros(d, d);
    for r in 0..d {
        let mut inner = 0.0;
        for c in 0..d {
            inner += s.get(r, c) * ds.get(r, c);
        }
        for c in 0..d {
            de.set(r, c, s.get(r, c) * (ds.get(r, c) - inner));
        }
    }
    // E = x x^T contributes through both factors.
    dx.add_scaled(&matmul(&de, x)?, 1.0)?;
    dx.add_scaled(&matmul(&de.transpose(), x)?, 1.0)?;
    Ok(CgaoGrads { dx })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::SeededRng;

    #[test]
    fn single_channel_passthrough() {
        let x = DenseMatrix::from_rows(&[vec![1.5, -2.0, 0.25]]).unwrap();
        let (o, cache) = cgao_forward(&x).unwrap();
        assert_eq!(o.row(0), x.row(0));
        assert_eq!(cache.weights().get(0, 0), 1.0);
    }

    #[test]
    fn identity_features_direct_evaluation() {
        let x = DenseMatrix::identity(2);
        let (o, _) = cgao_forward(&x).unwrap();
        let e = std::f64::consts::E;
        let hi = e / (e + 1.0);
        let lo = 1.0 / (e + 1.0);
        assert!((o.get(0, 0) - hi).abs() < 1e-12);
        assert!((o.get(1, 0) - lo).abs() < 1e-12);
        assert!((o.get(0, 1) - lo).abs() < 1e-12);
        assert!((o.get(1, 1) - hi).abs() < 1e-12);
    }

    #[test]
    fn node_permutation_equivariance() {
        let mut rng = SeededRng::new(12);
        let x = DenseMatrix::from_fn(3, 5, |_, _| rng.uniform(-1.0, 1.0));
        let perm = [4usize, 2, 0, 1, 3];
        let xp = x.gather_columns(&perm);
        let (o, _) = cgao_forward(&x).unwrap();
        let (op, _) = cgao_forward(&xp).unwrap();
        for (j, &src) in perm.iter().enumerate() {
            for r in 0..3 {
                assert!((op.get(r, j) - o.get(r, src)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn output_channel_weights_sum_to_one() {
        let mut rng = SeededRng::new(13);
        let x = DenseMatrix::from_fn(4, 6, |_, _| rng.uniform(-2.0, 2.0));
        let (_, cache) = cgao_forward(&x).unwrap();
        for r in 0..4 {
            let sum: f64 = cache.weights().row(r).iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
    }
}
