use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Column-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!("{rows}×{cols} matrix is empty")));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{rows}×{cols} matrix needs {} elements, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, vec![T::zero(); rows * cols])
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self::new(rows, cols, data)
    }

    /// Builds a matrix from row slices.
    pub fn from_rows(rows: &[&[T]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::from_fn(r, c, |i, j| rows[i][j])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i + j * self.rows]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i + j * self.rows] = v;
    }

    pub fn col(&self, j: usize) -> &[T] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn row(&self, i: usize) -> Vec<T> {
        (0..self.cols).map(|j| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for i in 0..self.rows {
            for j in 0..self.cols {
                data.push(self.get(i, j));
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::Dimension(format!(
                "{}×{} minus {}×{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect(),
        })
    }

    /// Keeps the first `k` columns.
    pub fn leading_cols(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.cols {
            return Err(Error::Argument(format!("cannot keep {k} of {} columns", self.cols)));
        }
        Self::new(self.rows, k, self.data[..k * self.rows].to_vec())
    }

    /// Keeps the first `k` rows.
    pub fn leading_rows(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.rows {
            return Err(Error::Argument(format!("cannot keep {k} of {} rows", self.rows)));
        }
        Self::from_fn(k, self.cols, |i, j| self.get(i, j))
    }

    /// Scales column `j` by `s[j]`.
    pub fn scale_cols(&self, s: &[T]) -> Self {
        let mut out = self.clone();
        for (j, col) in out.data.chunks_mut(self.rows).enumerate() {
            for v in col {
                *v = *v * s[j];
            }
        }
        out
    }

    /// Scales row `i` by `s[i]`.
    pub fn scale_rows(&self, s: &[T]) -> Self {
        let mut out = self.clone();
        for col in out.data.chunks_mut(self.rows) {
            for (v, &si) in col.iter_mut().zip(s) {
                *v = *v * si;
            }
        }
        out
    }

    /// `op(a)·op(b)` with `op(a)` of size `m × k`.
    fn product(m: usize, n: usize, k: usize, a: &Self, a_t: bool, b: &Self, b_t: bool) -> Result<Self> {
        let mut c = vec![T::zero(); m * n];
        T::gemm(&mut c, m, n, k, &a.data, a_t, &b.data, b_t, T::one(), false);
        Self::new(m, n, c)
    }

    /// `self · other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}×{} by {}×{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Self::product(self.rows, other.cols, self.cols, self, false, other, false)
    }

    /// `selfᵀ · other`.
    pub fn tr_matmul(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply ({}×{})ᵀ by {}×{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Self::product(self.cols, other.cols, self.rows, self, true, other, false)
    }

    /// `self · otherᵀ`.
    pub fn matmul_tr(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "cannot multiply {}×{} by ({}×{})ᵀ",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Self::product(self.rows, other.rows, self.cols, self, false, other, true)
    }

    /// Row vector times matrix: `x · self`.
    pub fn vec_mul(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.rows {
            return Err(Error::Dimension(format!(
                "row vector of length {} times {}×{}",
                x.len(),
                self.rows,
                self.cols
            )));
        }
        Ok((0..self.cols)
            .map(|j| self.col(j).iter().zip(x).map(|(&a, &b)| a * b).sum())
            .collect())
    }

    pub fn cast<U: Scalar>(&self) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| U::of(v.to_f64_lossless())).collect(),
        }
    }
}
