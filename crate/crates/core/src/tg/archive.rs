//! On-disk tensor grids: a directory holding `manifest.json` and one binary
//! tensor file per core, `core_{m}_{n}.tgt` (zero-based site indices).

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::{read_tensor, write_tensor};
use crate::tg::{GridShape, TensorGrid, TgRanks};

pub const MANIFEST_FILE: &str = "manifest.json";

/// JSON manifest; matrices are stored as lists of rows.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridManifest {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub sizes: Vec<Vec<usize>>,
    pub row_ranks: Vec<Vec<usize>>,
    pub col_ranks: Vec<Vec<usize>>,
}

impl GridManifest {
    pub fn from_grid<T: Scalar>(g: &TensorGrid<T>) -> Self {
        let (mm, nn) = (g.shape().rows(), g.shape().cols());
        let r = g.ranks();
        Self {
            m: mm,
            n: nn,
            sizes: (0..mm).map(|m| (0..nn).map(|n| g.shape().size(m, n)).collect()).collect(),
            row_ranks: (0..mm).map(|m| (0..nn - 1).map(|j| r.row_rank(m, j)).collect()).collect(),
            col_ranks: (0..mm - 1).map(|i| (0..nn).map(|n| r.col_rank(i, n)).collect()).collect(),
        }
    }

    pub fn grid_shape(&self) -> Result<GridShape> {
        let sizes = column_major(&self.sizes, self.m, self.n, "sizes")?;
        GridShape::new(self.m, self.n, sizes)
    }

    pub fn grid_ranks(&self) -> Result<TgRanks> {
        let row = column_major(&self.row_ranks, self.m, self.n - 1, "row_ranks")?;
        let col = column_major(&self.col_ranks, self.m - 1, self.n, "col_ranks")?;
        TgRanks::new(self.m, self.n, row, col)
    }
}

fn column_major(rows: &[Vec<usize>], r: usize, c: usize, what: &str) -> Result<Vec<usize>> {
    // A dimension of zero legitimately yields either no rows or empty rows.
    if r == 0 || c == 0 {
        return Ok(Vec::new());
    }
    if rows.len() != r || rows.iter().any(|row| row.len() != c) {
        return Err(Error::Argument(format!("manifest `{what}` must be a {r}×{c} matrix")));
    }
    Ok((0..c).flat_map(|j| rows.iter().map(move |row| row[j])).collect())
}

fn core_file(m: usize, n: usize) -> String {
    format!("core_{m}_{n}.tgt")
}

/// Writes `g` into directory `dir`, creating it if needed.
pub fn save_grid<T: Scalar>(g: &TensorGrid<T>, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let manifest = serde_json::to_string_pretty(&GridManifest::from_grid(g))
        .map_err(|e| Error::format(dir, e.to_string()))?;
    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, manifest).map_err(|e| Error::io(&path, e))?;
    for n in 0..g.shape().cols() {
        for m in 0..g.shape().rows() {
            write_tensor(g.core(m, n), dir.join(core_file(m, n)))?;
        }
    }
    Ok(())
}

pub fn load_grid<T: Scalar>(dir: impl AsRef<Path>) -> Result<TensorGrid<T>> {
    let dir = dir.as_ref();
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let manifest: GridManifest =
        serde_json::from_str(&text).map_err(|e| Error::format(&path, e.to_string()))?;
    if manifest.m == 0 || manifest.n == 0 {
        return Err(Error::format(&path, "grid dimensions must be positive"));
    }
    let shape = manifest.grid_shape()?;
    let ranks = manifest.grid_ranks()?;
    let mut cores = Vec::with_capacity(shape.num_sites());
    for n in 0..shape.cols() {
        for m in 0..shape.rows() {
            cores.push(read_tensor(dir.join(core_file(m, n)))?);
        }
    }
    TensorGrid::new(shape, ranks, cores)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tg::tg_random;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let shape = GridShape::new(2, 3, vec![2, 3, 4, 2, 3, 2]).unwrap();
        let ranks = TgRanks::new(2, 3, vec![2, 1, 3, 2], vec![2, 1, 3]).unwrap();
        let g = tg_random::<f64>(&shape, &ranks, 11).unwrap();
        save_grid(&g, dir.path()).unwrap();
        let back: TensorGrid<f64> = load_grid(dir.path()).unwrap();
        assert_eq!(back, g);

        let text = fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap();
        let m: GridManifest = serde_json::from_str(&text).unwrap();
        assert_eq!(m.sizes, vec![vec![2, 4, 3], vec![3, 2, 2]]);
        assert_eq!(m.row_ranks, vec![vec![2, 3], vec![1, 2]]);
        assert_eq!(m.col_ranks, vec![vec![2, 1, 3]]);
    }

    #[test]
    fn single_site_grid_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let shape = GridShape::uniform(1, 1, 5).unwrap();
        let g = tg_random::<f64>(&shape, &TgRanks::uniform(1, 1, 1).unwrap(), 0).unwrap();
        save_grid(&g, dir.path()).unwrap();
        assert_eq!(load_grid::<f64>(dir.path()).unwrap(), g);
    }

    #[test]
    fn rejects_mismatched_core() {
        let dir = tempfile::tempdir().unwrap();
        let shape = GridShape::uniform(1, 2, 2).unwrap();
        let g = tg_random::<f64>(&shape, &TgRanks::uniform(1, 2, 2).unwrap(), 0).unwrap();
        save_grid(&g, dir.path()).unwrap();
        let wrong = crate::tensor::DenseTensor::<f64>::ones(vec![1, 3, 1, 1, 2]).unwrap();
        write_tensor(&wrong, dir.path().join("core_0_0.tgt")).unwrap();
        assert!(matches!(load_grid::<f64>(dir.path()), Err(Error::Structure(_))));
    }
}
