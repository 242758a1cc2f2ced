//! Dense square matrices and the row-stochastic confidence matrix.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Maximum allowed deviation of a row sum from one.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MatrixError {
    #[error("matrix is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("buffer of length {len} cannot hold a {n}x{n} matrix")]
    BadBuffer { n: usize, len: usize },
    #[error("entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("entry ({row}, {col}) = {value} is negative")]
    Negative { row: usize, col: usize, value: f64 },
    #[error("entry ({row}, {col}) = {value} exceeds 1")]
    AboveOne { row: usize, col: usize, value: f64 },
    #[error("row {row} sums to {sum}, not 1")]
    NotStochastic { row: usize, sum: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// A dense `n x n` matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Builds a matrix from row vectors, rejecting ragged or non-square input.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, MatrixError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (row, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != n {
                return Err(MatrixError::NotSquare { row, len: r.len(), expected: n });
            }
            data.extend_from_slice(r);
        }
        Self::from_row_major(n, data)
    }

    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self, MatrixError> {
        if data.len() != n * n {
            return Err(MatrixError::BadBuffer { n, len: data.len() });
        }
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            return Err(MatrixError::NonFinite { row: k / n, col: k % n });
        }
        Ok(Self { n, data })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.n + j] = value;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        let n = self.n;
        &mut self.data[i * n..(i + 1) * n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        // chunks_exact(0) panics, so the empty matrix needs its own path
        let n = self.n.max(1);
        self.data.chunks_exact(n).take(self.n)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// First negative entry, if any.
    pub fn check_nonnegative(&self) -> Result<(), MatrixError> {
        match self.data.iter().position(|&v| v < 0.0) {
            Some(k) => Err(MatrixError::Negative {
                row: k / self.n,
                col: k % self.n,
                value: self.data[k],
            }),
            None => Ok(()),
        }
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix, MatrixError> {
        if other.n != self.n {
            return Err(MatrixError::DimensionMismatch { expected: self.n, found: other.n });
        }
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            let out_row = &mut out.data[i * n..(i + 1) * n];
            for (k, &aik) in self.row(i).iter().enumerate() {
                if aik == 0.0 {
                    continue;
                }
                for (o, &bkj) in out_row.iter_mut().zip(other.row(k)) {
                    *o += aik * bkj;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>, MatrixError> {
        if x.len() != self.n {
            return Err(MatrixError::DimensionMismatch { expected: self.n, found: x.len() });
        }
        Ok(self
            .rows()
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `P W P^T` where `order[k]` is the original index placed at position `k`.
    pub fn permuted(&self, order: &[usize]) -> Matrix {
        assert_eq!(order.len(), self.n, "permutation length must match matrix size");
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for (a, &i) in order.iter().enumerate() {
            for (b, &j) in order.iter().enumerate() {
                out.data[a * n + b] = self.get(i, j);
            }
        }
        out
    }

    /// Largest `|sum_j w_ij - 1|` over all rows.
    pub fn max_row_sum_deviation(&self) -> f64 {
        self.rows()
            .map(|r| (r.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

/// A nonnegative row-stochastic matrix `A`, where `a_ij` is the confidence
/// agent `i` places on agent `j`.
#[derive(Clone, PartialEq)]
pub struct ConfidenceMatrix(Matrix);

impl ConfidenceMatrix {
    /// Validates entries in `[0, 1]` and row sums within [`ROW_SUM_TOLERANCE`].
    pub fn new(matrix: Matrix) -> Result<Self, MatrixError> {
        matrix.check_nonnegative()?;
        for (row, r) in matrix.rows().enumerate() {
            if let Some(col) = r.iter().position(|&v| v > 1.0 + ROW_SUM_TOLERANCE) {
                return Err(MatrixError::AboveOne { row, col, value: r[col] });
            }
            let sum: f64 = r.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(MatrixError::NotStochastic { row, sum });
            }
        }
        Ok(Self(matrix))
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, MatrixError> {
        Self::new(Matrix::from_rows(rows)?)
    }

    /// Caller guarantees the invariants; checked in debug builds.
    pub(crate) fn from_matrix_unchecked(matrix: Matrix) -> Self {
        debug_assert!(matrix.max_row_sum_deviation() <= 1e-9);
        Self(matrix)
    }

    pub fn identity(n: usize) -> Self {
        Self(Matrix::identity(n))
    }

    /// The rank-one matrix whose rows all equal `weights`.
    pub fn consensus(weights: &[f64]) -> Result<Self, MatrixError> {
        let rows: Vec<&[f64]> = core::iter::repeat_n(weights, weights.len()).collect();
        Self::from_rows(&rows)
    }

    /// Every row uniform over `{0..n}`.
    pub fn uniform(n: usize) -> Self {
        let w = 1.0 / n as f64;
        Self(Matrix { n, data: vec![w; n * n] })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.0.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0.get(i, j)
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        self.0.row(i)
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn has_positive_diagonal(&self) -> bool {
        (0..self.n()).all(|i| self.get(i, i) > 0.0)
    }
}

impl AsRef<Matrix> for ConfidenceMatrix {
    fn as_ref(&self) -> &Matrix {
        &self.0
    }
}

impl AsRef<Matrix> for Matrix {
    fn as_ref(&self) -> &Matrix {
        self
    }
}

impl fmt::Debug for ConfidenceMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ragged_rows_are_rejected() {
        let err = Matrix::from_rows(&[vec![1.0, 0.0], vec![1.0]]).unwrap_err();
        assert!(matches!(err, MatrixError::NotSquare { row: 1, .. }));
        let err = Matrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap_err();
        assert!(matches!(err, MatrixError::NotSquare { row: 0, .. }));
    }

    #[test]
    fn stochastic_validation() {
        assert!(ConfidenceMatrix::from_rows(&[[0.5, 0.5], [0.0, 1.0]]).is_ok());
        assert!(matches!(
            ConfidenceMatrix::from_rows(&[[0.5, 0.4], [0.0, 1.0]]),
            Err(MatrixError::NotStochastic { row: 0, .. })
        ));
        assert!(matches!(
            ConfidenceMatrix::from_rows(&[[1.5, -0.5], [0.0, 1.0]]),
            Err(MatrixError::Negative { row: 0, col: 1, .. })
        ));
    }

    #[test]
    fn permutation_moves_entries() {
        let m = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let p = m.permuted(&[1, 0]);
        assert_eq!(p.to_rows(), vec![vec![4.0, 3.0], vec![2.0, 1.0]]);
    }

    #[test]
    fn product_and_vector() {
        let m = Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        assert_eq!(m.mul(&m).unwrap(), Matrix::identity(2));
        assert_eq!(m.mul_vec(&[1.0, 2.0]).unwrap(), vec![2.0, 1.0]);
        assert!(m.mul_vec(&[1.0]).is_err());
    }

    #[test]
    fn empty_matrix_has_no_rows() {
        assert_eq!(Matrix::zeros(0).rows().count(), 0);
    }
}
