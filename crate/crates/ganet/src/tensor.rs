//! Dense linear-algebra substrate: column-major matrices, instrumented
//! matmul, numerically stable (maskable) column softmax, top-k selection,
//! and a seeded, portable random number generator.
//!
//! Matrices are oriented channels x nodes (d x N) throughout the crate and
//! stored column-major, so a node's feature vector is one contiguous column.

use std::cell::Cell;

use crate::error::{Error, Result};

/// Sentinel marking a masked logit. Masked entries softmax to exactly 0 and
/// are excluded from the column normalizer.
pub const MASKED: f64 = f64::NEG_INFINITY;

thread_local! {
    static MADD_COUNTER: Cell<u64> = const { Cell::new(0) };
}

/// Reset the thread-local multiply-add counter.
pub fn reset_madd_counter() {
    MADD_COUNTER.with(|c| c.set(0));
}

/// Multiply-adds recorded on this thread since the last reset. Every matmul
/// records rows x inner x cols; nothing else contributes.
pub fn madd_count() -> u64 {
    MADD_COUNTER.with(|c| c.get())
}

fn record_madds(n: u64) {
    MADD_COUNTER.with(|c| c.set(c.get().saturating_add(n)));
}

/// Dense column-major matrix of f64.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Zero matrix of the given shape.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Identity matrix.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Build from a closure over (row, col).
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for c in 0..cols {
            for r in 0..rows {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Build from row slices; every row must have the same length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != ncols {
                return Err(Error::LengthMismatch {
                    op: "from_rows",
                    expected: ncols,
                    got: row.len(),
                })
                .map_err(|e| annotate_row(e, i));
            }
        }
        Ok(Self::from_fn(nrows, ncols, |r, c| rows[r][c]))
    }

    /// A single-column matrix wrapping a vector.
    pub fn from_column(v: &[f64]) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r + c * self.rows]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r + c * self.rows] = v;
    }

    /// Contiguous column slice.
    #[inline]
    pub fn col(&self, c: usize) -> &[f64] {
        &self.data[c * self.rows..(c + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, c: usize) -> &mut [f64] {
        let rows = self.rows;
        &mut self.data[c * rows..(c + 1) * rows]
    }

    /// Row extracted as an owned vector (rows are strided in storage).
    pub fn row(&self, r: usize) -> Vec<f64> {
        (0..self.cols).map(|c| self.get(r, c)).collect()
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    /// Elementwise map into a new matrix.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// self += alpha * other. Shapes must match.
    pub fn add_scaled(&mut self, other: &DenseMatrix, alpha: f64) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                op: "add_scaled",
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: other.rows,
                right_cols: other.cols,
            });
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
        Ok(())
    }

    /// Sum of squared entries.
    pub fn sum_squares(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    /// Copy the listed columns into a new matrix, in the given order.
    pub fn gather_columns(&self, idx: &[usize]) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.rows, idx.len());
        for (j, &c) in idx.iter().enumerate() {
            out.col_mut(j).copy_from_slice(self.col(c));
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

fn annotate_row(e: Error, row: usize) -> Error {
    match e {
        Error::LengthMismatch { op, expected, got } => Error::Parameter(format!(
            "{op}: row {row} has {got} entries, expected {expected}"
        )),
        other => other,
    }
}

/// Matrix product a * b. Requires a.cols == b.rows; records
/// a.rows x a.cols x b.cols multiply-adds to the thread-local counter.
pub fn matmul(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if a.cols != b.rows {
        return Err(Error::DimensionMismatch {
            op: "matmul",
            left_rows: a.rows,
            left_cols: a.cols,
            right_rows: b.rows,
            right_cols: b.cols,
        });
    }
    record_madds(a.rows as u64 * a.cols as u64 * b.cols as u64);
    let mut out = DenseMatrix::zeros(a.rows, b.cols);
    // Column-major axpy ordering: out[:,j] += b[r,j] * a[:,r], with both the
    // destination column and the a column contiguous.
    for j in 0..b.cols {
        let out_col = &mut out.data[j * a.rows..(j + 1) * a.rows];
        for r in 0..a.cols {
            let scale = b.get(r, j);
            if scale == 0.0 {
                continue;
            }
            let a_col = &a.data[r * a.rows..(r + 1) * a.rows];
            for (o, &av) in out_col.iter_mut().zip(a_col) {
                *o += scale * av;
            }
        }
    }
    Ok(out)
}

/// Column-wise softmax with max-subtraction. Entries equal to [`MASKED`]
/// map to exactly 0 and do not enter the normalizer; a column with no
/// unmasked entry is an error. NaN or +inf input is rejected.
pub fn softmax_columns(e: &DenseMatrix) -> Result<DenseMatrix> {
    let mut out = e.clone();
    softmax_columns_in_place(&mut out)?;
    Ok(out)
}

/// In-place variant used by the operators so the (possibly N x N)
/// coefficient buffer is normalized without a second allocation.
pub fn softmax_columns_in_place(e: &mut DenseMatrix) -> Result<()> {
    let rows = e.rows;
    for c in 0..e.cols {
        let col = &mut e.data[c * rows..(c + 1) * rows];
        let mut max = f64::NEG_INFINITY;
        for &v in col.iter() {
            if v.is_nan() || v == f64::INFINITY {
                return Err(Error::NonFinite {
                    op: "softmax_columns",
                });
            }
            if v > max {
                max = v;
            }
        }
        if max == f64::NEG_INFINITY {
            return Err(Error::DegenerateColumn { col: c });
        }
        let mut sum = 0.0;
        for v in col.iter_mut() {
            if *v == MASKED {
                *v = 0.0;
            } else {
                *v = (*v - max).exp();
                sum += *v;
            }
        }
        for v in col.iter_mut() {
            *v /= sum;
        }
    }
    Ok(())
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Logistic function, elementwise.
pub fn sigmoid(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| sigmoid_scalar(x)).collect()
}

#[inline]
pub fn sigmoid_scalar(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Indices of the min(k, |mask|) largest scores among `mask`, ordered by
/// descending score with ties broken by ascending index. `k` must be >= 1;
/// an empty mask is an error (a node with no candidates to attend to).
pub fn top_k_indices(scores: &[f64], mask: &[usize], k: usize) -> Result<Vec<usize>> {
    if mask.is_empty() {
        return Err(Error::DegenerateNeighborhood { node: usize::MAX });
    }
    if k == 0 {
        return Err(Error::Parameter("top_k_indices requires k >= 1".into()));
    }
    let mut order: Vec<usize> = mask.to_vec();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .expect("scores must be comparable")
            .then(a.cmp(&b))
    });
    order.truncate(k.min(mask.len()));
    Ok(order)
}

/// Stack `a` on top of `b`. Column counts must match.
pub fn concat_rows(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if a.cols != b.cols {
        return Err(Error::DimensionMismatch {
            op: "concat_rows",
            left_rows: a.rows,
            left_cols: a.cols,
            right_rows: b.rows,
            right_cols: b.cols,
        });
    }
    let rows = a.rows + b.rows;
    let mut out = DenseMatrix::zeros(rows, a.cols);
    for c in 0..a.cols {
        out.data[c * rows..c * rows + a.rows].copy_from_slice(a.col(c));
        out.data[c * rows + a.rows..(c + 1) * rows].copy_from_slice(b.col(c));
    }
    Ok(out)
}

/// Scale column j of `m` by g[j] (right-multiplication by diag(g)).
pub fn diag_scale_columns(m: &DenseMatrix, g: &[f64]) -> Result<DenseMatrix> {
    if g.len() != m.cols {
        return Err(Error::LengthMismatch {
            op: "diag_scale_columns",
            expected: m.cols,
            got: g.len(),
        });
    }
    let mut out = m.clone();
    for (c, &s) in g.iter().enumerate() {
        for v in out.col_mut(c) {
            *v *= s;
        }
    }
    Ok(out)
}

/// Seeded xoshiro256++ generator, seeded through splitmix64.
///
/// The u64 and uniform-f64 streams are pure integer/bit arithmetic and are
/// bit-identical for a given seed on every platform. The Gaussian stream is
/// Box-Muller on top of the uniform stream and is reproducible per platform
/// (it goes through libm's ln/cos/sin).
#[derive(Debug, Clone)]
pub struct SeededRng {
    state: [u64; 4],
    spare_normal: Option<f64>,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        // splitmix64 expansion of the seed into the xoshiro state.
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = s;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z ^ (z >> 31)
        };
        Self {
            state: [next(), next(), next(), next()],
            spare_normal: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.state;
        let result = s[0]
            .wrapping_add(s[3])
            .rotate_left(23)
            .wrapping_add(s[0]);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform in [0, 1), 53-bit resolution.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Unbiased-enough integer in [0, n) via widening multiply.
    pub fn next_index(&mut self, n: usize) -> usize {
        assert!(n > 0);
        (((self.next_u64() as u128) * (n as u128)) >> 64) as usize
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Standard normal via Box-Muller, caching the paired draw.
    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = 1.0 - self.next_f64(); // (0, 1]
        let u2 = self.next_f64();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare_normal = Some(r * theta.sin());
        r * theta.cos()
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.next_index(i + 1);
            items.swap(i, j);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Naive triple-loop product, the independent oracle for matmul.
    fn matmul_oracle(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(a.rows(), b.cols());
        for i in 0..a.rows() {
            for j in 0..b.cols() {
                let mut acc = 0.0;
                for r in 0..a.cols() {
                    acc += a.get(i, r) * b.get(r, j);
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    fn random_matrix(rng: &mut SeededRng, rows: usize, cols: usize) -> DenseMatrix {
        DenseMatrix::from_fn(rows, cols, |_, _| rng.uniform(-1.0, 1.0))
    }

    #[test]
    fn matmul_identity_left() {
        let m = DenseMatrix::from_rows(&[vec![3.0, -1.5], vec![2.25, 4.0]]).unwrap();
        let i2 = DenseMatrix::identity(2);
        assert_eq!(matmul(&i2, &m).unwrap(), m);
    }

    #[test]
    fn matmul_hand_expansion() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let b = DenseMatrix::from_rows(&[vec![1.0], vec![1.0]]).unwrap();
        let c = matmul(&a, &b).unwrap();
        assert_eq!(c.col(0), &[3.0, 7.0]);
    }

    #[test]
    fn matmul_empty_inner_dim() {
        let a = DenseMatrix::zeros(3, 0);
        let b = DenseMatrix::zeros(0, 2);
        let c = matmul(&a, &b).unwrap();
        assert_eq!((c.rows(), c.cols()), (3, 2));
        assert!(c.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn matmul_shape_mismatch_names_both_shapes() {
        let a = DenseMatrix::zeros(2, 3);
        let b = DenseMatrix::zeros(2, 2);
        let err = matmul(&a, &b).unwrap_err().to_string();
        assert!(err.contains("2x3") && err.contains("2x2"), "{err}");
    }

    #[test]
    fn matmul_matches_oracle_on_random_sizes() {
        let mut rng = SeededRng::new(11);
        for _ in 0..20 {
            let m = 1 + rng.next_index(32);
            let k = 1 + rng.next_index(32);
            let n = 1 + rng.next_index(32);
            let a = random_matrix(&mut rng, m, k);
            let b = random_matrix(&mut rng, k, n);
            let got = matmul(&a, &b).unwrap();
            let want = matmul_oracle(&a, &b);
            for (g, w) in got.data().iter().zip(want.data()) {
                assert!((g - w).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn madd_counter_records_product_volume() {
        reset_madd_counter();
        let a = DenseMatrix::zeros(3, 4);
        let b = DenseMatrix::zeros(4, 5);
        matmul(&a, &b).unwrap();
        assert_eq!(madd_count(), 3 * 4 * 5);
    }

    #[test]
    fn softmax_symmetric_column() {
        let m = DenseMatrix::from_rows(&[vec![0.0], vec![0.0]]).unwrap();
        let s = softmax_columns(&m).unwrap();
        assert_eq!(s.col(0), &[0.5, 0.5]);
    }

    #[test]
    fn softmax_large_inputs_no_overflow() {
        let m = DenseMatrix::from_rows(&[vec![1000.0], vec![1000.0]]).unwrap();
        let s = softmax_columns(&m).unwrap();
        assert!((s.get(0, 0) - 0.5).abs() < 1e-12);
        assert!(s.is_finite());
    }

    #[test]
    fn softmax_direct_evaluation() {
        let m = DenseMatrix::from_rows(&[vec![1.0], vec![0.0]]).unwrap();
        let s = softmax_columns(&m).unwrap();
        let e = std::f64::consts::E;
        assert!((s.get(0, 0) - e / (e + 1.0)).abs() < 1e-12);
        assert!((s.get(1, 0) - 1.0 / (e + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn softmax_masked_entries_are_exact_zeros() {
        let m = DenseMatrix::from_rows(&[vec![0.3], vec![MASKED], vec![-0.7]]).unwrap();
        let s = softmax_columns(&m).unwrap();
        assert_eq!(s.get(1, 0), 0.0);
        let sum: f64 = s.col(0).iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn softmax_fully_masked_column_errors() {
        let m = DenseMatrix::from_rows(&[vec![MASKED], vec![MASKED]]).unwrap();
        assert!(matches!(
            softmax_columns(&m),
            Err(Error::DegenerateColumn { col: 0 })
        ));
    }

    #[test]
    fn softmax_rejects_nan() {
        let m = DenseMatrix::from_rows(&[vec![f64::NAN], vec![0.0]]).unwrap();
        assert!(softmax_columns(&m).is_err());
    }

    #[test]
    fn sigmoid_fixed_points() {
        assert_eq!(sigmoid_scalar(0.0), 0.5);
        assert!((sigmoid_scalar(40.0) - 1.0).abs() < 1e-12);
        assert!((sigmoid_scalar(1.0) - 0.7311).abs() < 1e-4);
        let v = sigmoid(&[-3.0, 0.0, 3.0]);
        assert!(v.iter().all(|&x| x > 0.0 && x < 1.0));
    }

    #[test]
    fn top_k_basic() {
        let idx = top_k_indices(&[3.0, 1.0, 2.0], &[0, 1, 2], 2).unwrap();
        assert_eq!(idx, vec![0, 2]);
    }

    #[test]
    fn top_k_saturated_budget() {
        let idx = top_k_indices(&[3.0, 1.0, 2.0], &[0, 1, 2], 10).unwrap();
        assert_eq!(idx, vec![0, 2, 1]);
    }

    #[test]
    fn top_k_tie_breaks_by_ascending_index() {
        let idx = top_k_indices(&[5.0, 5.0, 5.0], &[0, 1, 2], 2).unwrap();
        assert_eq!(idx, vec![0, 1]);
    }

    #[test]
    fn top_k_empty_mask_errors() {
        assert!(matches!(
            top_k_indices(&[1.0], &[], 1),
            Err(Error::DegenerateNeighborhood { .. })
        ));
    }

    #[test]
    fn top_k_respects_mask() {
        let idx = top_k_indices(&[9.0, 1.0, 2.0, 8.0], &[1, 2], 1).unwrap();
        assert_eq!(idx, vec![2]);
    }

    #[test]
    fn concat_rows_shape_and_order() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        let b = DenseMatrix::from_rows(&[vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        let c = concat_rows(&a, &b).unwrap();
        assert_eq!((c.rows(), c.cols()), (3, 2));
        assert_eq!(c.row(0), vec![1.0, 2.0]);
        assert_eq!(c.row(2), vec![5.0, 6.0]);

        let empty = DenseMatrix::zeros(0, 2);
        assert_eq!(concat_rows(&empty, &b).unwrap(), b);

        let bad = DenseMatrix::zeros(1, 3);
        assert!(concat_rows(&a, &bad).is_err());
    }

    #[test]
    fn diag_scale_columns_cases() {
        let m = DenseMatrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        assert_eq!(diag_scale_columns(&m, &[1.0, 1.0]).unwrap(), m);
        let z = diag_scale_columns(&m, &[0.0, 0.0]).unwrap();
        assert!(z.data().iter().all(|&v| v == 0.0));
        let s = diag_scale_columns(&m, &[0.5, 2.0]).unwrap();
        assert_eq!(s.row(0), vec![0.5, 4.0]);
        assert!(diag_scale_columns(&m, &[1.0]).is_err());
    }

    proptest::proptest! {
        #[test]
        fn softmax_columns_sum_to_one(
            vals in proptest::collection::vec(-50.0f64..50.0, 1..48),
            rows in 1usize..8,
        ) {
            let rows = rows.min(vals.len());
            let cols = vals.len() / rows;
            if cols == 0 { return Ok(()); }
            let m = DenseMatrix { rows, cols, data: vals[..rows * cols].to_vec() };
            let s = softmax_columns(&m).unwrap();
            for c in 0..cols {
                let sum: f64 = s.col(c).iter().sum();
                proptest::prop_assert!((sum - 1.0).abs() < 1e-12);
                proptest::prop_assert!(s.col(c).iter().all(|&v| v > 0.0 && v <= 1.0));
            }
        }

        #[test]
        fn softmax_shift_invariance(
            vals in proptest::collection::vec(-20.0f64..20.0, 2..32),
            shift in -100.0f64..100.0,
        ) {
            let m = DenseMatrix { rows: vals.len(), cols: 1, data: vals.clone() };
            let shifted = DenseMatrix {
                rows: vals.len(),
                cols: 1,
                data: vals.iter().map(|v| v + shift).collect(),
            };
            let a = softmax_columns(&m).unwrap();
            let b = softmax_columns(&shifted).unwrap();
            for (x, y) in a.data().iter().zip(b.data()) {
                proptest::prop_assert!((x - y).abs() < 1e-12);
            }
        }

        #[test]
        fn matmul_matches_triple_loop(seed in 0u64..1000) {
            let mut rng = SeededRng::new(seed);
            let m = 1 + rng.next_index(10);
            let k = 1 + rng.next_index(10);
            let n = 1 + rng.next_index(10);
            let a = DenseMatrix::from_fn(m, k, |_, _| rng.uniform(-2.0, 2.0));
            let b = DenseMatrix::from_fn(k, n, |_, _| rng.uniform(-2.0, 2.0));
            let got = matmul(&a, &b).unwrap();
            let want = matmul_oracle(&a, &b);
            for (g, w) in got.data().iter().zip(want.data()) {
                proptest::prop_assert!((g - w).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn seeded_rng_reproducible() {
        let mut a = SeededRng::new(42);
        let mut b = SeededRng::new(42);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        let mut c = SeededRng::new(43);
        assert_ne!(SeededRng::new(42).next_u64(), c.next_u64());
    }

    #[test]
    fn rng_uniform_in_range() {
        let mut rng = SeededRng::new(7);
        for _ in 0..1000 {
            let v = rng.next_f64();
            assert!((0.0..1.0).contains(&v));
        }
    }
}
