use std::fmt::{Debug, Display};
use std::iter::Sum;

use faer::linalg::matmul::matmul;
use faer::{Accum, MatMut, MatRef, Par};
use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar type the tensor machinery is generic over.
///
/// Implemented for `f32` and `f64`. Solver tolerances in this crate are
/// calibrated for `f64`; `f32` is supported for storage and the multilinear
/// primitives.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Lossy conversion from `f64`.
    fn of(v: f64) -> Self;

    /// Widening (or identity) conversion to `f64`.
    fn to_f64_lossless(self) -> f64;

    /// `c ← alpha·op(a)·op(b)`, or `c += …` with `accumulate`, on
    /// column-major buffers. `op(a)` is `m × k` and is stored transposed
    /// (`k × m`) when `a_t`; likewise `op(b)` is `k × n`.
    #[doc(hidden)]
    #[allow(clippy::too_many_arguments)]
    fn gemm(
        c: &mut [Self],
        m: usize,
        n: usize,
        k: usize,
        a: &[Self],
        a_t: bool,
        b: &[Self],
        b_t: bool,
        alpha: Self,
        accumulate: bool,
    );
}

macro_rules! faer_gemm {
    ($t:ty) => {
        fn gemm(
            c: &mut [$t],
            m: usize,
            n: usize,
            k: usize,
            a: &[$t],
            a_t: bool,
            b: &[$t],
            b_t: bool,
            alpha: $t,
            accumulate: bool,
        ) {
            let a = if a_t {
                MatRef::from_column_major_slice(a, k, m).transpose()
            } else {
                MatRef::from_column_major_slice(a, m, k)
            };
            let b = if b_t {
                MatRef::from_column_major_slice(b, n, k).transpose()
            } else {
                MatRef::from_column_major_slice(b, k, n)
            };
            let c = MatMut::from_column_major_slice_mut(c, m, n);
            let accum = if accumulate { Accum::Add } else { Accum::Replace };
            matmul(c, accum, a, b, alpha, Par::Seq);
        }
    };
}

impl Scalar for f64 {
    #[inline]
    fn of(v: f64) -> Self {
        v
    }

    #[inline]
    fn to_f64_lossless(self) -> f64 {
        self
    }

    faer_gemm!(f64);
}

impl Scalar for f32 {
    #[inline]
    fn of(v: f64) -> Self {
        v as f32
    }

    #[inline]
    fn to_f64_lossless(self) -> f64 {
        self as f64
    }

    faer_gemm!(f32);
}
