//! Minimal dense linear algebra and signal transforms used by all
//! diagnostics: matrix product, symmetric eigendecomposition, singular
//! values, 1-D DFT, and a seedable PRNG.
//!
//! Everything is `f64`. Matrices are immutable values after construction;
//! all operations are pure. Shape mismatches are programmer errors and
//! panic via `assert!`; numerical failures (non-convergence) are `Err`.

mod dft;
mod eigen;
mod rng;
mod svd;

pub use dft::{dft_1d, magnitudes_one_sided};
pub use eigen::{eigh_symmetric, SymmetricEigen};
pub use rng::Rng;
pub use svd::singular_values;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("{what} failed to converge within {budget} sweeps")]
    ConvergenceFailure { what: &'static str, budget: usize },
}

/// Row-major dense matrix of `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length must equal rows*cols");
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        assert!(!rows.is_empty(), "from_rows needs at least one row");
        let cols = rows[0].len();
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        let data = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Self { rows: rows.len(), cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Column vector from a slice.
    pub fn column(v: &[f64]) -> Self {
        Self { rows: v.len(), cols: 1, data: v.to_vec() }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    /// `self * rhs`. Entries are double-precision dot products.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul dimension mismatch: {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = Self::zeros(self.rows, rhs.cols);
        gemm(
            self.rows, self.cols, rhs.cols,
            &self.data, self.cols as isize, 1,
            &rhs.data, rhs.cols as isize, 1,
            &mut out.data,
        );
        out
    }

    /// `self * rhs^T` without materializing the transpose.
    pub fn matmul_transb(&self, rhs: &Self) -> Self {
        assert_eq!(
            self.cols, rhs.cols,
            "matmul_transb dimension mismatch: {}x{} * ({}x{})^T",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = Self::zeros(self.rows, rhs.rows);
        gemm(
            self.rows, self.cols, rhs.rows,
            &self.data, self.cols as isize, 1,
            &rhs.data, 1, rhs.cols as isize,
            &mut out.data,
        );
        out
    }

    /// `self^T * rhs` without materializing the transpose.
    pub fn matmul_transa(&self, rhs: &Self) -> Self {
        assert_eq!(
            self.rows, rhs.rows,
            "matmul_transa dimension mismatch: ({}x{})^T * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = Self::zeros(self.cols, rhs.cols);
        gemm(
            self.cols, self.rows, rhs.cols,
            &self.data, 1, self.cols as isize,
            &rhs.data, rhs.cols as isize, 1,
            &mut out.data,
        );
        out
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| f(x)).collect() }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|x| x * s)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "add shape mismatch");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "sub shape mismatch");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    /// `(M + M^T) / 2`; panics if not square.
    pub fn symmetrized(&self) -> Self {
        assert_eq!(self.rows, self.cols, "symmetrized needs a square matrix");
        Self::from_fn(self.rows, self.cols, |i, j| 0.5 * (self.get(i, j) + self.get(j, i)))
    }

    pub fn trace(&self) -> f64 {
        assert_eq!(self.rows, self.cols, "trace needs a square matrix");
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Per-column sums; used for bias gradients of batched backprop.
    pub fn col_sums(&self) -> Vec<f64> {
        self.col_sums_of(|v| v)
    }

    /// Per-column sums of `f(entry)`.
    pub fn col_sums_of(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (o, &v) in out.iter_mut().zip(self.row(i)) {
                *o += f(v);
            }
        }
        out
    }
}

#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize, k: usize, n: usize,
    a: &[f64], rsa: isize, csa: isize,
    b: &[f64], rsb: isize, csb: isize,
    c: &mut [f64],
) {
    if m == 0 || n == 0 {
        return;
    }
    unsafe {
        matrixmultiply::dgemm(
            m, k, n, 1.0,
            a.as_ptr(), rsa, csa,
            b.as_ptr(), rsb, csb,
            0.0,
            c.as_mut_ptr(), n as isize, 1,
        );
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "dot length mismatch");
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Inclusive uniform grid of `n` points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "linspace needs at least two points");
    let h = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + h * i as f64).collect()
}

/// Streaming mean/variance accumulator (plain sums are accurate enough at
/// the sample counts used here: <= 1e8 values of order one).
#[derive(Debug, Clone, Default)]
pub struct MomentAccumulator {
    n: f64,
    sum: f64,
    sum_sq: f64,
}

impl MomentAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        self.n += 1.0;
        self.sum += x;
        self.sum_sq += x * x;
    }

    /// Fold in a pre-aggregated block of `count` values.
    pub fn push_block(&mut self, count: f64, sum: f64, sum_sq: f64) {
        self.n += count;
        self.sum += sum;
        self.sum_sq += sum_sq;
    }

    pub fn count(&self) -> f64 {
        self.n
    }

    pub fn sum(&self) -> f64 {
        self.sum
    }

    pub fn sum_sq(&self) -> f64 {
        self.sum_sq
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.n
    }

    /// Population variance.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        (self.sum_sq / self.n - m * m).max(0.0)
    }

    pub fn std(&self) -> f64 {
        self.variance().sqrt()
    }
}
