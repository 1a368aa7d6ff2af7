//! Two-stage DMRG initializer.
//!
//! Phase 1 merges the physical modes of every grid column into one
//! super-mode and decomposes the result as a horizontal tensor train. Phase 2
//! splits each merged horizontal bond into per-row sub-bonds and decomposes
//! every column core vertically into `M` grid cores. Bonds that come out
//! smaller than requested are extended with Gaussian entries.

use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Scalar;
use crate::tensor::DenseTensor;
use crate::tg::{rank_upper_bounds, GridShape, TensorGrid, TgRanks};
use crate::tt::{tt_svd, TensorTrain};

/// Standard deviation of the entries used to extend rank-deficient bonds.
pub const DEFAULT_PAD_SIGMA: f64 = 1e-2;

/// Singular values below this fraction of the largest are treated as zero in
/// both phases, so numerically absent directions are padded rather than kept
/// as arbitrary orthonormal vectors. Raised to `100·ε` for coarser scalars.
pub const RANK_RTOL: f64 = 1e-12;

fn rank_rtol<T: Scalar>() -> T {
    T::of(RANK_RTOL).max(T::of(100.0) * T::epsilon())
}

fn check_targets(shape: &GridShape, targets: &TgRanks) -> Result<()> {
    targets.check_grid(shape)?;
    let bounds = rank_upper_bounds(shape);
    if !targets.all_le(&bounds) {
        return Err(Error::Argument(format!(
            "target ranks {:?} exceed the upper bounds {:?}",
            targets.to_vector(),
            bounds.to_vector()
        )));
    }
    Ok(())
}

/// Product of the target row bonds crossing the cut right of grid column `j`.
fn merged_target(targets: &TgRanks, rows: usize, j: usize) -> usize {
    (0..rows).map(|m| targets.row_rank(m, j)).product()
}

/// Phase 1: horizontal tensor train over the `N` column super-modes.
///
/// Core `j` has shape `[L, Π_m I_mj, R]`; bond `j` is capped by the product
/// of the target row bonds crossing it.
pub fn horizontal_phase<T: Scalar>(
    t: &DenseTensor<T>,
    shape: &GridShape,
    targets: &TgRanks,
) -> Result<TensorTrain<T>> {
    shape.check_tensor(t.shape())?;
    check_targets(shape, targets)?;
    let (mm, nn) = (shape.rows(), shape.cols());
    let super_modes: Vec<usize> = (0..nn).map(|n| shape.column_size(n)).collect();
    let caps: Vec<usize> = (0..nn - 1).map(|j| merged_target(targets, mm, j)).collect();
    tt_svd(&t.reshape(&super_modes)?, &caps, rank_rtol())
}

/// Phase 2: splits each column core of `tt` into `M` grid cores.
///
/// Merged horizontal bonds are zero-embedded into the product of the per-row
/// targets (first row fastest). Entries outside the block filled by the
/// decomposition receive i.i.d. `N(0, pad_sigma²)` values, drawn in site
/// order from `seed`; with `pad_sigma = 0` they stay zero.
pub fn vertical_phase<T: Scalar>(
    tt: &TensorTrain<T>,
    shape: &GridShape,
    targets: &TgRanks,
    pad_sigma: f64,
    seed: u64,
) -> Result<TensorGrid<T>> {
    check_targets(shape, targets)?;
    if !pad_sigma.is_finite() || pad_sigma < 0.0 {
        return Err(Error::Argument(format!("pad_sigma must be finite and ≥ 0, got {pad_sigma}")));
    }
    let (mm, nn) = (shape.rows(), shape.cols());
    let expect: Vec<usize> = (0..nn).map(|n| shape.column_size(n)).collect();
    if tt.mode_sizes() != expect {
        return Err(Error::Structure(format!(
            "column train has modes {:?}, grid columns need {expect:?}",
            tt.mode_sizes()
        )));
    }
    let mut rng = rng::seeded(seed);
    let sigma = T::of(pad_sigma);
    let mut cores = Vec::with_capacity(mm * nn);

    for (n, col) in tt.cores().iter().enumerate() {
        let [lb, p, rb] = <[usize; 3]>::try_from(col.shape()).expect("order 3");
        let lt: Vec<usize> = (0..mm).map(|m| targets.site_bonds(m, n)[0]).collect();
        let rt: Vec<usize> = (0..mm).map(|m| targets.site_bonds(m, n)[1]).collect();
        let (lt_all, rt_all) = (lt.iter().product::<usize>(), rt.iter().product::<usize>());
        if lb > lt_all || rb > rt_all {
            return Err(Error::Structure(format!(
                "column {n} bonds ({lb}, {rb}) exceed the targets ({lt_all}, {rt_all})"
            )));
        }

        let mut embedded = DenseTensor::zeros(vec![lt_all, p, rt_all])?;
        for r in 0..rb {
            for i in 0..p {
                for l in 0..lb {
                    embedded.set(&[l, i, r], col.get(&[l, i, r]));
                }
            }
        }

        // [l_0.., I_0.., r_0..] → per row (l_m, r_m, I_m)
        let sizes: Vec<usize> = (0..mm).map(|m| shape.size(m, n)).collect();
        let dims: Vec<usize> = lt.iter().chain(&sizes).chain(&rt).copied().collect();
        let order: Vec<usize> = (0..mm).flat_map(|m| [m, 2 * mm + m, mm + m]).collect();
        let rows: Vec<usize> = (0..mm).map(|m| lt[m] * rt[m] * sizes[m]).collect();
        let stacked = embedded.into_reshape(&dims)?.permute(&order)?.into_reshape(&rows)?;
        let caps: Vec<usize> = (0..mm - 1).map(|i| targets.col_rank(i, n)).collect();
        let vertical = tt_svd(&stacked, &caps, rank_rtol())?;

        for (m, vc) in vertical.into_cores().into_iter().enumerate() {
            let (u, d) = (vc.shape()[0], vc.shape()[2]);
            let core = vc
                .into_reshape(&[u, lt[m], rt[m], sizes[m], d])?
                .permute(&[1, 2, 0, 4, 3])?;
            let [_, _, ut, dt] = targets.site_bonds(m, n);
            // Sub-bond values reached by some merged index below the filled extent.
            let stride_l: usize = lt[..m].iter().product();
            let stride_r: usize = rt[..m].iter().product();
            let filled = [
                lt[m].min(lb.div_ceil(stride_l)),
                rt[m].min(rb.div_ceil(stride_r)),
                u,
                d,
            ];
            let target = vec![lt[m], rt[m], ut, dt, sizes[m]];
            let mut out = DenseTensor::zeros(target.clone())?;
            let mut idx = vec![0usize; 5];
            for k in 0..out.len() {
                let inside = (0..4).all(|a| idx[a] < filled[a]);
                let v = if inside {
                    core.get(&idx)
                } else if pad_sigma > 0.0 {
                    sigma * rng::normal::<T>(&mut rng)
                } else {
                    T::zero()
                };
                out.data_mut()[k] = v;
                for (a, x) in idx.iter_mut().enumerate() {
                    *x += 1;
                    if *x < target[a] {
                        break;
                    }
                    *x = 0;
                }
            }
            cores.push(out);
        }
    }
    TensorGrid::new(shape.clone(), targets.clone(), cores)
}

/// Initializes a tensor grid approximating `t` with bond dimensions `targets`.
pub fn two_stage_dmrg<T: Scalar>(
    t: &DenseTensor<T>,
    shape: &GridShape,
    targets: &TgRanks,
    pad_sigma: f64,
    seed: u64,
) -> Result<TensorGrid<T>> {
    let tt = horizontal_phase(t, shape, targets)?;
    vertical_phase(&tt, shape, targets, pad_sigma, seed)
}
