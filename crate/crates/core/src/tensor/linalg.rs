use ndarray::{Array2, ShapeBuilder};
use ndarray_linalg::{JobSvd, SVDDC};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Matrix;

/// Relative singular-value cutoff for pseudoinverses.
pub const PINV_RCOND: f64 = 1e-12;

/// Thin singular value decomposition `A = U · diag(s) · Vt`.
#[derive(Clone, Debug)]
pub struct Svd<T> {
    pub u: Matrix<T>,
    /// Nonincreasing, nonnegative.
    pub s: Vec<T>,
    pub vt: Matrix<T>,
}

impl<T: Scalar> Svd<T> {
    pub fn reconstruct(&self) -> Result<Matrix<T>> {
        self.u.scale_cols(&self.s).matmul(&self.vt)
    }

    /// Keeps the leading `k` singular triplets.
    pub fn truncate(&self, k: usize) -> Result<Self> {
        Ok(Self {
            u: self.u.leading_cols(k)?,
            s: self.s[..k].to_vec(),
            vt: self.vt.leading_rows(k)?,
        })
    }
}

/// Thin SVD, computed by LAPACK divide-and-conquer in `f64` regardless of `T`.
pub fn svd<T: Scalar>(a: &Matrix<T>) -> Result<Svd<T>> {
    if a.data().iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("SVD input has non-finite entries".into()));
    }
    let (m, n) = (a.rows(), a.cols());
    let data: Vec<f64> = a.data().iter().map(|v| v.to_f64_lossless()).collect();
    let arr = Array2::from_shape_vec((m, n).f(), data)
        .map_err(|e| Error::Dimension(e.to_string()))?;
    let (u, s, vt) = arr
        .svddc(JobSvd::Some)
        .map_err(|e| Error::Numeric(format!("SVD of a {m}×{n} matrix failed: {e}")))?;
    let (u, vt) = match (u, vt) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return Err(Error::Numeric("SVD did not produce singular vectors".into())),
    };
    let k = s.len();
    let u = Matrix::from_fn(m, k, |i, j| T::of(u[[i, j]]))?;
    let vt = Matrix::from_fn(k, n, |i, j| T::of(vt[[i, j]]))?;
    let s = s.iter().map(|&v| T::of(v.max(0.0))).collect();
    Ok(Svd { u, s, vt })
}

/// Moore-Penrose pseudoinverse; singular values below
/// `PINV_RCOND · s_max` are treated as zero.
pub fn pinv<T: Scalar>(a: &Matrix<T>) -> Result<Matrix<T>> {
    let dec = svd(a)?;
    let cutoff = dec.s.first().copied().unwrap_or_else(T::zero) * T::of(PINV_RCOND);
    let inv: Vec<T> = dec
        .s
        .iter()
        .map(|&s| if s > cutoff && s > T::zero() { T::one() / s } else { T::zero() })
        .collect();
    // V · diag(1/s) · Uᵀ
    dec.vt.scale_rows(&inv).tr_matmul(&dec.u.transpose())
}

/// Row-vector solve `g · H†` for a symmetric Gram matrix `H`.
pub fn solve_gram<T: Scalar>(h: &Matrix<T>, g: &[T]) -> Result<Vec<T>> {
    pinv(h)?.vec_mul(g)
}

/// Minimum-norm least-squares solution of `min_a ‖a · bt − t‖₂`, evaluated
/// as `a = t · btᵀ · (bt · btᵀ)†`.
pub fn ls_solve_rows<T: Scalar>(bt: &Matrix<T>, t: &[T]) -> Result<Vec<T>> {
    if t.len() != bt.cols() {
        return Err(Error::Dimension(format!(
            "target of length {} for a {}×{} system",
            t.len(),
            bt.rows(),
            bt.cols()
        )));
    }
    let h = bt.matmul_tr(bt)?;
    let g = bt.transpose().vec_mul(t)?;
    solve_gram(&h, &g)
}
