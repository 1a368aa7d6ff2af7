//! Exact contraction of a tensor grid and of the environment of one site.
//!
//! Both follow the single-layer order: each grid column is first contracted
//! vertically into one super-core, the columns left and right of the site of
//! interest are folded into boundary blocks, and the cores of the site's own
//! column above and below it are stacked before the final merge. No bond is
//! truncated.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::{tensordot, DenseTensor, Matrix};
use crate::tg::TensorGrid;
use crate::tt::TensorTrain;

impl<T: Scalar> TensorGrid<T> {
    /// Vertically contracts rows `range` of column `n`.
    ///
    /// Result shape `[U, L, R, D, P]`: `U` is the up bond of the top core, `D`
    /// the down bond of the bottom core, `L`/`R` the merged horizontal bonds
    /// and `P` the merged physical modes (top row fastest in both).
    fn stack_column(&self, n: usize, range: std::ops::Range<usize>) -> Result<DenseTensor<T>> {
        let mut rows = range;
        let Some(first) = rows.next() else {
            return DenseTensor::ones(vec![1; 5]);
        };
        let mut acc = self.core(first, n).permute(&[2, 0, 1, 3, 4])?;
        for m in rows {
            let c = self.core(m, n);
            let [u, l, r, _, p] = <[usize; 5]>::try_from(acc.shape()).expect("order 5");
            let [cl, cr, _, cd, ci] = <[usize; 5]>::try_from(c.shape()).expect("order 5");
            // [U, L, R, P, l, r, d, i]
            let t = tensordot(&acc, &[3], c, &[2])?;
            acc = t
                .permute(&[0, 1, 4, 2, 5, 6, 3, 7])?
                .into_reshape(&[u, l * cl, r * cr, cd, p * ci])?;
        }
        Ok(acc)
    }

    /// Column `n` as one horizontal super-core `[L, R, P]`.
    fn column_core(&self, n: usize) -> Result<DenseTensor<T>> {
        let c = self.stack_column(n, 0..self.shape.rows())?;
        let s = c.shape();
        let dims = [s[1], s[2], s[4]];
        c.into_reshape(&dims)
    }

    /// Columns `0..n` contracted to `[P, R]`.
    fn left_block(&self, n: usize) -> Result<DenseTensor<T>> {
        let mut acc = DenseTensor::ones(vec![1, 1])?;
        for c in 0..n {
            let col = self.column_core(c)?;
            let t = tensordot(&acc, &[1], &col, &[0])?;
            let (pa, r, p) = (t.shape()[0], t.shape()[1], t.shape()[2]);
            acc = t.permute(&[0, 2, 1])?.into_reshape(&[pa * p, r])?;
        }
        Ok(acc)
    }

    /// Columns `n+1..N` contracted to `[L, P]`.
    fn right_block(&self, n: usize) -> Result<DenseTensor<T>> {
        let mut acc = DenseTensor::ones(vec![1, 1])?;
        for c in (n + 1..self.shape.cols()).rev() {
            let col = self.column_core(c)?;
            let t = tensordot(&col, &[1], &acc, &[0])?;
            let (l, p, pa) = (t.shape()[0], t.shape()[1], t.shape()[2]);
            acc = t.into_reshape(&[l, p * pa])?;
        }
        Ok(acc)
    }

    /// The column super-cores as a horizontal tensor train `[L, P, R]`.
    pub fn column_train(&self) -> Result<TensorTrain<T>> {
        let cores = (0..self.shape.cols())
            .map(|n| self.column_core(n)?.permute(&[0, 2, 1]))
            .collect::<Result<Vec<_>>>()?;
        TensorTrain::new(cores)
    }

    /// Full contraction; modes follow the column-major grid order.
    pub fn contract(&self) -> Result<DenseTensor<T>> {
        self.column_train()?
            .contract()?
            .into_reshape(self.shape.tensor_shape())
    }

    /// Environment matrix of site `(m, n)`.
    ///
    /// Shape `R̂ × Π_{k≠mn} I_k` with `R̂ = R_l·R_r·R_u·R_d`. Rows enumerate
    /// `(l, r, u, d)` column-major, columns enumerate the remaining physical
    /// modes in ascending global order, so that
    /// `unfold_phys(core) · environment` equals the mode unfolding of the
    /// contraction at the site's mode.
    pub fn environment(&self, m: usize, n: usize) -> Result<Matrix<T>> {
        let (mm, nn) = (self.shape.rows(), self.shape.cols());
        if m >= mm || n >= nn {
            return Err(Error::Argument(format!(
                "site ({m}, {n}) is outside the {mm}×{nn} grid"
            )));
        }
        let [rl, rr, ru, rd] = self.ranks.site_bonds(m, n);
        let lbond = |i: usize| self.ranks.site_bonds(i, n)[0];
        let rbond = |i: usize| self.ranks.site_bonds(i, n)[1];
        let l_up: usize = (0..m).map(lbond).product();
        let l_down: usize = (m + 1..mm).map(lbond).product();
        let r_up: usize = (0..m).map(rbond).product();
        let r_down: usize = (m + 1..mm).map(rbond).product();

        let left = self.left_block(n)?;
        let p_left = left.shape()[0];
        let left = left.into_reshape(&[p_left, l_up, rl, l_down])?;

        let right = self.right_block(n)?;
        let p_right = right.shape()[1];
        let right = right.into_reshape(&[r_up, rr, r_down, p_right])?;

        let up = self.stack_column(n, 0..m)?;
        let p_up = up.shape()[4];
        let up = up.into_reshape(&[l_up, r_up, ru, p_up])?;

        let down = self.stack_column(n, m + 1..mm)?;
        let p_down = down.shape()[4];
        let down = down.into_reshape(&[rd, l_down, r_down, p_down])?;

        // [P_left, l, L_down, R_up, u, P_up]
        let e = tensordot(&left, &[1], &up, &[0])?;
        // [P_left, l, R_up, u, P_up, d, R_down, P_down]
        let e = tensordot(&e, &[2], &down, &[1])?;
        // [P_left, l, u, P_up, d, P_down, r, P_right]
        let e = tensordot(&e, &[2, 6], &right, &[0, 2])?;
        let e = e.permute(&[1, 6, 2, 4, 0, 3, 5, 7])?;

        let rhat = rl * rr * ru * rd;
        Matrix::new(rhat, e.len() / rhat, e.into_data())
    }
}
