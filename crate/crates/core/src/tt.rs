//! Tensor trains: sequential-SVD decomposition and contraction.

use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Scalar;
use crate::tensor::{svd, DenseTensor, Matrix};

/// Chain of 3-way cores; core `k` has shape `[r_{k-1}, I_k, r_k]` with
/// `r_0 = r_D = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorTrain<T> {
    cores: Vec<DenseTensor<T>>,
}

impl<T: Scalar> TensorTrain<T> {
    pub fn new(cores: Vec<DenseTensor<T>>) -> Result<Self> {
        if cores.is_empty() {
            return Err(Error::Structure("tensor train needs at least one core".into()));
        }
        for (k, c) in cores.iter().enumerate() {
            if c.order() != 3 {
                return Err(Error::Structure(format!("core {k} has order {}", c.order())));
            }
        }
        if cores[0].shape()[0] != 1 || cores[cores.len() - 1].shape()[2] != 1 {
            return Err(Error::Structure("boundary ranks must be 1".into()));
        }
        for (k, w) in cores.windows(2).enumerate() {
            if w[0].shape()[2] != w[1].shape()[0] {
                return Err(Error::Structure(format!(
                    "rank mismatch between cores {k} and {}: {} vs {}",
                    k + 1,
                    w[0].shape()[2],
                    w[1].shape()[0]
                )));
            }
        }
        Ok(Self { cores })
    }

    pub fn cores(&self) -> &[DenseTensor<T>] {
        &self.cores
    }

    pub fn into_cores(self) -> Vec<DenseTensor<T>> {
        self.cores
    }

    /// Interior ranks `r_1..r_{D-1}`.
    pub fn ranks(&self) -> Vec<usize> {
        self.cores[..self.cores.len() - 1]
            .iter()
            .map(|c| c.shape()[2])
            .collect()
    }

    pub fn mode_sizes(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.shape()[1]).collect()
    }

    /// Full contraction, left to right.
    pub fn contract(&self) -> Result<DenseTensor<T>> {
        let first = &self.cores[0];
        let mut acc = Matrix::new(first.shape()[1], first.shape()[2], first.data().to_vec())?;
        for core in &self.cores[1..] {
            let [r, i, r_next] = [core.shape()[0], core.shape()[1], core.shape()[2]];
            let c = Matrix::new(r, i * r_next, core.data().to_vec())?;
            let prod = acc.matmul(&c)?;
            acc = Matrix::new(prod.rows() * i, r_next, prod.into_data())?;
        }
        DenseTensor::new(self.mode_sizes(), acc.into_data())
    }
}

/// Number of singular values kept under a rank cap and a relative tolerance.
pub(crate) fn truncation_rank<T: Scalar>(s: &[T], max_rank: usize, rel_tol: T) -> usize {
    let floor = s.first().copied().unwrap_or_else(T::zero) * rel_tol;
    let above = s.iter().take_while(|&&v| v >= floor).count();
    above.min(max_rank).min(s.len()).max(1)
}

/// Sequential TT-SVD.
///
/// At step `k` the remainder is unfolded to `(r_{k-1}·I_k) × rest` and
/// truncated to `min(max_ranks[k], #{σ_i ≥ rel_tol·σ_1})` components. Cores are
/// left-orthogonal; the singular values are absorbed into the remainder.
pub fn tt_svd<T: Scalar>(x: &DenseTensor<T>, max_ranks: &[usize], rel_tol: T) -> Result<TensorTrain<T>> {
    let shape = x.shape();
    let d = shape.len();
    if max_ranks.len() + 1 != d {
        return Err(Error::Argument(format!(
            "{} rank caps for an order-{d} tensor (need {})",
            max_ranks.len(),
            d - 1
        )));
    }
    if max_ranks.contains(&0) {
        return Err(Error::Argument("rank caps must be at least 1".into()));
    }
    if !(rel_tol >= T::zero() && rel_tol < T::one()) {
        return Err(Error::Argument("relative tolerance must lie in [0, 1)".into()));
    }

    let mut cores = Vec::with_capacity(d);
    let mut rem = x.data().to_vec();
    let mut r_prev = 1;
    for k in 0..d - 1 {
        let rows = r_prev * shape[k];
        let cols = rem.len() / rows;
        let dec = svd(&Matrix::new(rows, cols, rem)?)?;
        let keep = truncation_rank(&dec.s, max_ranks[k], rel_tol);
        let u = dec.u.leading_cols(keep)?;
        cores.push(DenseTensor::new(vec![r_prev, shape[k], keep], u.into_data())?);
        rem = dec.vt.leading_rows(keep)?.scale_rows(&dec.s[..keep]).into_data();
        r_prev = keep;
    }
    cores.push(DenseTensor::new(vec![r_prev, shape[d - 1], 1], rem)?);
    TensorTrain::new(cores)
}

/// Tensor train with i.i.d. `N(0, 1)` cores.
pub fn tt_random<T: Scalar>(shape: &[usize], ranks: &[usize], seed: u64) -> Result<TensorTrain<T>> {
    if shape.is_empty() || ranks.len() + 1 != shape.len() {
        return Err(Error::Argument(format!(
            "{} ranks for {} modes",
            ranks.len(),
            shape.len()
        )));
    }
    if ranks.contains(&0) || shape.contains(&0) {
        return Err(Error::Argument("ranks and mode sizes must be positive".into()));
    }
    let mut rng = rng::seeded(seed);
    let mut bonds = vec![1];
    bonds.extend_from_slice(ranks);
    bonds.push(1);
    let cores = shape
        .iter()
        .enumerate()
        .map(|(k, &i)| {
            let dims = vec![bonds[k], i, bonds[k + 1]];
            let n = dims.iter().product();
            DenseTensor::new(dims, rng::normal_vec(&mut rng, n))
        })
        .collect::<Result<Vec<_>>>()?;
    TensorTrain::new(cores)
}
