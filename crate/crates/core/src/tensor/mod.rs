//! Dense tensors, matrices and the multilinear primitives the solvers build on.
//!
//! Storage is column-major throughout: the first index varies fastest, both
//! for tensors and for matrices. Unfoldings place the non-selected modes on
//! columns in ascending mode order.

mod dense;
mod io;
mod linalg;
mod matrix;

pub use dense::{inverse_permutation, strides_of, tensordot, DenseTensor};
pub(crate) use dense::permute_into;
pub use io::{read_tensor, read_tensor_from, write_tensor, write_tensor_to, MAGIC};
pub use linalg::{ls_solve_rows, pinv, solve_gram, svd, Svd, PINV_RCOND};
pub use matrix::Matrix;
