//! Direct nested-sum evaluation of a tensor grid, entry by entry.

use tengrid::tensor::DenseTensor;
use tengrid::tg::TensorGrid;

/// Bond assignment for every lattice edge: `row[m][j]`, `col[i][n]`.
pub struct Bonds {
    pub row: Vec<Vec<usize>>,
    pub col: Vec<Vec<usize>>,
}

impl Bonds {
    pub fn site(&self, m: usize, n: usize) -> [usize; 4] {
        let l = if n > 0 { self.row[m][n - 1] } else { 0 };
        let r = if n < self.row[m].len() { self.row[m][n] } else { 0 };
        let u = if m > 0 { self.col[m - 1][n] } else { 0 };
        let d = if m < self.col.len() { self.col[m][n] } else { 0 };
        [l, r, u, d]
    }
}

/// Every joint assignment of the grid's bond indices.
pub fn all_bonds(g: &TensorGrid<f64>) -> Vec<Bonds> {
    let (mm, nn) = (g.shape().rows(), g.shape().cols());
    let r = g.ranks();
    let mut dims = Vec::new();
    for m in 0..mm {
        for j in 0..nn - 1 {
            dims.push(r.row_rank(m, j));
        }
    }
    for i in 0..mm - 1 {
        for n in 0..nn {
            dims.push(r.col_rank(i, n));
        }
    }
    let total: usize = dims.iter().product();
    (0..total)
        .map(|mut k| {
            let mut flat = Vec::new();
            for &d in &dims {
                flat.push(k % d);
                k /= d;
            }
            let mut it = flat.into_iter();
            let row = (0..mm).map(|_| (0..nn - 1).map(|_| it.next().unwrap()).collect()).collect();
            let col = (0..mm - 1).map(|_| (0..nn).map(|_| it.next().unwrap()).collect()).collect();
            Bonds { row, col }
        })
        .collect()
}

/// Direct nested summation of the grid model; `skip` leaves one core out and
/// pins its bonds.
pub fn brute_entry(
    g: &TensorGrid<f64>,
    bonds: &[Bonds],
    phys: &[usize],
    skip: Option<((usize, usize), [usize; 4])>,
) -> f64 {
    let (mm, nn) = (g.shape().rows(), g.shape().cols());
    let mut total = 0.0;
    for b in bonds {
        if let Some(((sm, sn), pinned)) = skip {
            if b.site(sm, sn) != pinned {
                continue;
            }
        }
        let mut prod = 1.0;
        for n in 0..nn {
            for m in 0..mm {
                if skip.map(|s| s.0) == Some((m, n)) {
                    continue;
                }
                let [l, r, u, d] = b.site(m, n);
                prod *= g.core(m, n).get(&[l, r, u, d, phys[n * mm + m]]);
            }
        }
        total += prod;
    }
    total
}

pub fn brute_contract(g: &TensorGrid<f64>) -> DenseTensor<f64> {
    let bonds = all_bonds(g);
    DenseTensor::from_fn(g.shape().tensor_shape().to_vec(), |idx| {
        brute_entry(g, &bonds, idx, None)
    })
    .unwrap()
}
