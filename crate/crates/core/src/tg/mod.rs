//! Tensor grids (open-boundary PEPS on an `M × N` lattice).
//!
//! Grid site `(m, n)` (zero-based) carries global tensor mode `n·M + m`, so
//! the physical modes of one grid column are contiguous. Core `(m, n)` has
//! shape `[R_l, R_r, R_u, R_d, I_mn]`; bonds on the lattice boundary are 1.

mod archive;
mod contract;
mod dmrg;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Scalar;
use crate::tensor::DenseTensor;

pub use archive::{load_grid, save_grid, GridManifest};
pub use dmrg::{horizontal_phase, two_stage_dmrg, vertical_phase, DEFAULT_PAD_SIGMA, RANK_RTOL};

/// Lattice dimensions and per-site physical mode sizes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridShape {
    rows: usize,
    cols: usize,
    /// Column-major `rows × cols` matrix of mode sizes.
    sizes: Vec<usize>,
}

impl GridShape {
    pub fn new(rows: usize, cols: usize, sizes: Vec<usize>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Argument(format!("{rows}×{cols} grid is empty")));
        }
        if sizes.len() != rows * cols {
            return Err(Error::Argument(format!(
                "{rows}×{cols} grid needs {} mode sizes, got {}",
                rows * cols,
                sizes.len()
            )));
        }
        if sizes.contains(&0) {
            return Err(Error::Argument("mode sizes must be positive".into()));
        }
        Ok(Self { rows, cols, sizes })
    }

    pub fn uniform(rows: usize, cols: usize, size: usize) -> Result<Self> {
        Self::new(rows, cols, vec![size; rows * cols])
    }

    /// Grid over the modes of `tensor_shape`, which must have `rows·cols` modes.
    pub fn for_tensor(rows: usize, cols: usize, tensor_shape: &[usize]) -> Result<Self> {
        Self::new(rows, cols, tensor_shape.to_vec())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Global tensor mode of site `(m, n)`.
    #[inline]
    pub fn mode(&self, m: usize, n: usize) -> usize {
        n * self.rows + m
    }

    #[inline]
    pub fn size(&self, m: usize, n: usize) -> usize {
        self.sizes[self.mode(m, n)]
    }

    /// Shape of the represented tensor.
    pub fn tensor_shape(&self) -> &[usize] {
        &self.sizes
    }

    pub fn num_sites(&self) -> usize {
        self.sizes.len()
    }

    /// Product of the sizes in grid column `n`.
    pub fn column_size(&self, n: usize) -> usize {
        (0..self.rows).map(|m| self.size(m, n)).product()
    }

    /// Product of the sizes in grid row `m`.
    pub fn row_size(&self, m: usize) -> usize {
        (0..self.cols).map(|n| self.size(m, n)).product()
    }

    pub fn transpose(&self) -> Self {
        let sizes = (0..self.rows)
            .flat_map(|m| (0..self.cols).map(move |n| (m, n)))
            .map(|(m, n)| self.size(m, n))
            .collect();
        Self {
            rows: self.cols,
            cols: self.rows,
            sizes,
        }
    }

    pub fn check_tensor(&self, shape: &[usize]) -> Result<()> {
        if shape != self.sizes.as_slice() {
            return Err(Error::Argument(format!(
                "tensor shape {shape:?} does not match the {}×{} grid sizes {:?}",
                self.rows, self.cols, self.sizes
            )));
        }
        Ok(())
    }
}

/// Horizontal (row) and vertical (column) bond dimensions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TgRanks {
    rows: usize,
    cols: usize,
    /// Column-major `rows × (cols−1)`: bond between `(m, j)` and `(m, j+1)`.
    row: Vec<usize>,
    /// Column-major `(rows−1) × cols`: bond between `(i, n)` and `(i+1, n)`.
    col: Vec<usize>,
}

impl TgRanks {
    pub fn new(rows: usize, cols: usize, row: Vec<usize>, col: Vec<usize>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Argument(format!("{rows}×{cols} grid is empty")));
        }
        if row.len() != rows * (cols - 1) || col.len() != (rows - 1) * cols {
            return Err(Error::Argument(format!(
                "a {rows}×{cols} grid has {} row and {} column bonds; got {} and {}",
                rows * (cols - 1),
                (rows - 1) * cols,
                row.len(),
                col.len()
            )));
        }
        if row.contains(&0) || col.contains(&0) {
            return Err(Error::Argument("bond dimensions must be at least 1".into()));
        }
        Ok(Self { rows, cols, row, col })
    }

    pub fn uniform(rows: usize, cols: usize, r: usize) -> Result<Self> {
        Self::new(
            rows,
            cols,
            vec![r; rows * (cols.max(1) - 1)],
            vec![r; (rows.max(1) - 1) * cols],
        )
    }

    /// Builds ranks from the flat vector with row bonds first (see
    /// [`TgRanks::to_vector`]).
    pub fn from_vector(rows: usize, cols: usize, v: &[usize]) -> Result<Self> {
        let nr = rows * (cols.max(1) - 1);
        if v.len() != 2 * rows * cols - rows - cols {
            return Err(Error::Argument(format!(
                "rank vector of length {} for a {rows}×{cols} grid",
                v.len()
            )));
        }
        Self::new(rows, cols, v[..nr].to_vec(), v[nr..].to_vec())
    }

    pub fn grid_dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Bond between `(m, j)` and `(m, j+1)`.
    #[inline]
    pub fn row_rank(&self, m: usize, j: usize) -> usize {
        self.row[m + self.rows * j]
    }

    /// Bond between `(i, n)` and `(i+1, n)`.
    #[inline]
    pub fn col_rank(&self, i: usize, n: usize) -> usize {
        self.col[i + (self.rows - 1) * n]
    }

    pub fn row_ranks(&self) -> &[usize] {
        &self.row
    }

    pub fn col_ranks(&self) -> &[usize] {
        &self.col
    }

    /// Flat rank vector of length `2MN − M − N`: `vec(R^R)` then `vec(R^C)`.
    pub fn to_vector(&self) -> Vec<usize> {
        self.row.iter().chain(&self.col).copied().collect()
    }

    /// Bond dimensions `[l, r, u, d]` of site `(m, n)`.
    pub fn site_bonds(&self, m: usize, n: usize) -> [usize; 4] {
        let l = if n > 0 { self.row_rank(m, n - 1) } else { 1 };
        let r = if n + 1 < self.cols { self.row_rank(m, n) } else { 1 };
        let u = if m > 0 { self.col_rank(m - 1, n) } else { 1 };
        let d = if m + 1 < self.rows { self.col_rank(m, n) } else { 1 };
        [l, r, u, d]
    }

    /// True when every bond is at most the matching bond of `other`.
    pub fn all_le(&self, other: &Self) -> bool {
        self.grid_dims() == other.grid_dims()
            && self.row.iter().zip(&other.row).all(|(a, b)| a <= b)
            && self.col.iter().zip(&other.col).all(|(a, b)| a <= b)
    }

    /// Ranks of the transposed grid.
    pub fn transpose(&self) -> Self {
        let (rows, cols) = (self.cols, self.rows);
        // new row bonds (m', j') = old column bonds (j', m')
        let row = (0..cols - 1)
            .flat_map(|j| (0..rows).map(move |m| (m, j)))
            .map(|(m, j)| self.col_rank(j, m))
            .collect();
        let col = (0..cols)
            .flat_map(|n| (0..rows - 1).map(move |i| (i, n)))
            .map(|(i, n)| self.row_rank(n, i))
            .collect();
        Self { rows, cols, row, col }
    }

    pub fn check_grid(&self, shape: &GridShape) -> Result<()> {
        if self.grid_dims() != (shape.rows(), shape.cols()) {
            return Err(Error::Argument(format!(
                "ranks for a {}×{} grid used with a {}×{} grid",
                self.rows,
                self.cols,
                shape.rows(),
                shape.cols()
            )));
        }
        Ok(())
    }
}

/// Largest meaningful bond dimensions: each bond is capped by the smaller of
/// the products of mode sizes on either side of it within its row or column.
pub fn rank_upper_bounds(shape: &GridShape) -> TgRanks {
    let (mm, nn) = (shape.rows(), shape.cols());
    let mut row = Vec::with_capacity(mm * (nn - 1));
    for j in 0..nn - 1 {
        for m in 0..mm {
            let left: usize = (0..=j).map(|k| shape.size(m, k)).product();
            let right: usize = (j + 1..nn).map(|k| shape.size(m, k)).product();
            row.push(left.min(right));
        }
    }
    let mut col = Vec::with_capacity((mm - 1) * nn);
    for n in 0..nn {
        for i in 0..mm - 1 {
            let up: usize = (0..=i).map(|k| shape.size(k, n)).product();
            let down: usize = (i + 1..mm).map(|k| shape.size(k, n)).product();
            col.push(up.min(down));
        }
    }
    TgRanks {
        rows: mm,
        cols: nn,
        row,
        col,
    }
}

/// `M × N` grid of 5-way cores.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorGrid<T> {
    shape: GridShape,
    ranks: TgRanks,
    /// Column-major over sites.
    cores: Vec<DenseTensor<T>>,
}

impl<T: Scalar> TensorGrid<T> {
    pub fn new(shape: GridShape, ranks: TgRanks, cores: Vec<DenseTensor<T>>) -> Result<Self> {
        ranks.check_grid(&shape)?;
        if cores.len() != shape.num_sites() {
            return Err(Error::Structure(format!(
                "{} cores for {} sites",
                cores.len(),
                shape.num_sites()
            )));
        }
        let g = Self { shape, ranks, cores };
        for n in 0..g.shape.cols() {
            for m in 0..g.shape.rows() {
                g.check_core(m, n, g.core(m, n))?;
            }
        }
        Ok(g)
    }

    /// Infers bond dimensions from the cores, checking that neighbors agree.
    pub fn from_cores(shape: GridShape, cores: Vec<DenseTensor<T>>) -> Result<Self> {
        let (mm, nn) = (shape.rows(), shape.cols());
        if cores.len() != mm * nn {
            return Err(Error::Structure(format!("{} cores for {} sites", cores.len(), mm * nn)));
        }
        if let Some(c) = cores.iter().find(|c| c.order() != 5) {
            return Err(Error::Structure(format!("core of order {} in a grid", c.order())));
        }
        let at = |m: usize, n: usize| cores[n * mm + m].shape();
        let row = (0..nn - 1)
            .flat_map(|j| (0..mm).map(move |m| (m, j)))
            .map(|(m, j)| at(m, j)[1])
            .collect();
        let col = (0..nn)
            .flat_map(|n| (0..mm - 1).map(move |i| (i, n)))
            .map(|(i, n)| at(i, n)[3])
            .collect();
        let ranks = TgRanks::new(mm, nn, row, col).map_err(|e| Error::Structure(e.to_string()))?;
        Self::new(shape, ranks, cores)
    }

    fn check_core(&self, m: usize, n: usize, core: &DenseTensor<T>) -> Result<()> {
        let [l, r, u, d] = self.ranks.site_bonds(m, n);
        let expect = [l, r, u, d, self.shape.size(m, n)];
        if core.shape() != expect {
            return Err(Error::Structure(format!(
                "core ({m}, {n}) has shape {:?}, expected {expect:?}",
                core.shape()
            )));
        }
        Ok(())
    }

    pub fn shape(&self) -> &GridShape {
        &self.shape
    }

    pub fn ranks(&self) -> &TgRanks {
        &self.ranks
    }

    pub fn core(&self, m: usize, n: usize) -> &DenseTensor<T> {
        &self.cores[self.shape.mode(m, n)]
    }

    pub fn cores(&self) -> &[DenseTensor<T>] {
        &self.cores
    }

    /// Replaces core `(m, n)`; its shape must be unchanged.
    pub fn set_core(&mut self, m: usize, n: usize, core: DenseTensor<T>) -> Result<()> {
        if m >= self.shape.rows() || n >= self.shape.cols() {
            return Err(Error::Argument(format!("site ({m}, {n}) is outside the grid")));
        }
        self.check_core(m, n, &core)?;
        let k = self.shape.mode(m, n);
        self.cores[k] = core;
        Ok(())
    }

    /// Mutable access to the raw data of core `(m, n)`.
    pub fn core_data_mut(&mut self, m: usize, n: usize) -> &mut [T] {
        let k = self.shape.mode(m, n);
        self.cores[k].data_mut()
    }

    pub fn num_params(&self) -> usize {
        self.cores.iter().map(|c| c.len()).sum()
    }
}

/// Grid with i.i.d. `N(0, 1)` cores, generated in site order.
pub fn tg_random<T: Scalar>(shape: &GridShape, ranks: &TgRanks, seed: u64) -> Result<TensorGrid<T>> {
    ranks.check_grid(shape)?;
    let mut rng = rng::seeded(seed);
    let mut cores = Vec::with_capacity(shape.num_sites());
    for n in 0..shape.cols() {
        for m in 0..shape.rows() {
            let [l, r, u, d] = ranks.site_bonds(m, n);
            let dims = vec![l, r, u, d, shape.size(m, n)];
            let len = dims.iter().product();
            cores.push(DenseTensor::new(dims, rng::normal_vec(&mut rng, len))?);
        }
    }
    TensorGrid::new(shape.clone(), ranks.clone(), cores)
}
