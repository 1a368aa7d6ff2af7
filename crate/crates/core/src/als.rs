//! Tensor completion by alternating least squares over tensor-grid cores.
//!
//! Each core update fixes every other core, forms the site's environment
//! matrix and solves one small least-squares problem per physical slice,
//! restricted to that slice's observed entries.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::{observed_objective, ModeEntries, ObservationMask};
use crate::report::{relative_change, Recorder, SolveReport, Termination};
use crate::scalar::Scalar;
use crate::tensor::{svd, DenseTensor, Matrix, PINV_RCOND};
use crate::tg::{two_stage_dmrg, GridShape, TensorGrid, TgRanks, DEFAULT_PAD_SIGMA};

pub const DEFAULT_MAX_ITERS: usize = 100;
pub const DEFAULT_RC_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlsConfig {
    pub target_ranks: TgRanks,
    pub max_iters: usize,
    pub rc_tol: f64,
    pub pad_sigma: f64,
    pub seed: u64,
    /// Record per-core objectives and per-row normal-equation residuals.
    #[serde(default)]
    pub trace: bool,
}

impl AlsConfig {
    pub fn new(target_ranks: TgRanks) -> Self {
        Self {
            target_ranks,
            max_iters: DEFAULT_MAX_ITERS,
            rc_tol: DEFAULT_RC_TOL,
            pad_sigma: DEFAULT_PAD_SIGMA,
            seed: 0,
            trace: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::Argument("max_iters must be at least 1".into()));
        }
        if !(self.rc_tol > 0.0) {
            return Err(Error::Argument(format!("rc_tol must be positive, got {}", self.rc_tol)));
        }
        Ok(())
    }
}

/// Observed objective around one core update.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoreTrace {
    pub sweep: usize,
    pub m: usize,
    pub n: usize,
    pub objective_before: f64,
    pub objective_after: f64,
}

/// Normal-equation residual `‖a·H − g‖` of one row update.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowTrace {
    pub sweep: usize,
    pub m: usize,
    pub n: usize,
    pub row: usize,
    pub observed: usize,
    pub residual: f64,
    /// `‖t̃‖₂` of the row's observed data.
    pub data_norm: f64,
    /// See [`RowSolve::dropped`].
    pub dropped: f64,
    /// See [`RowSolve::scale`].
    pub scale: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AlsTrace {
    pub cores: Vec<CoreTrace>,
    pub rows: Vec<RowTrace>,
}

#[derive(Clone, Debug)]
pub struct AlsOutput<T> {
    /// Contraction of the final grid; observed entries are model values.
    pub x: DenseTensor<T>,
    pub grid: TensorGrid<T>,
    pub report: SolveReport,
    pub trace: Option<AlsTrace>,
}

/// Solution of one restricted row problem.
#[derive(Clone, Debug)]
pub struct RowSolve<T> {
    pub a: Vec<T>,
    /// `‖a·H − g‖₂` with `H = B̃B̃ᵀ`, `g = t̃B̃ᵀ`.
    pub residual: T,
    /// Square root of the summed eigenvalues of `H` cut by the pseudoinverse.
    /// The normal equations can miss by up to `dropped · ‖t̃‖` along them.
    pub dropped: T,
    /// `‖H‖_F·‖a‖₂ + ‖g‖₂`; `residual / scale` is the backward error.
    pub scale: T,
}

const REFINE_STEPS: usize = 3;

/// Minimizes `‖a·B̃ − t̃‖` where `B̃` keeps columns `cols` of `env` and `t̃`
/// holds the matching `values`: `a = t̃B̃ᵀ(B̃B̃ᵀ)†`.
pub fn als_row_update<T: Scalar>(env: &Matrix<T>, cols: &[usize], values: &[T]) -> Result<RowSolve<T>> {
    if cols.len() != values.len() || cols.is_empty() {
        return Err(Error::Argument(format!(
            "row update needs matching nonempty columns and values, got {} and {}",
            cols.len(),
            values.len()
        )));
    }
    let r = env.rows();
    let mut h = vec![T::zero(); r * r];
    let mut g = vec![T::zero(); r];
    for (&j, &t) in cols.iter().zip(values) {
        let e = env.col(j);
        for q in 0..r {
            let eq = e[q];
            if eq == T::zero() {
                continue;
            }
            g[q] = g[q] + t * eq;
            let hq = &mut h[q * r..q * r + q + 1];
            for (hp, &ep) in hq.iter_mut().zip(e) {
                *hp = *hp + ep * eq;
            }
        }
    }
    // mirror the upper triangle
    for q in 0..r {
        for p in q + 1..r {
            h[p + q * r] = h[q + p * r];
        }
    }
    let h = Matrix::new(r, r, h)?;
    let dec = svd(&h)?;
    let cutoff = dec.s.first().copied().unwrap_or_else(T::zero) * T::of(PINV_RCOND);
    let mut dropped = T::zero();
    let inv: Vec<T> = dec
        .s
        .iter()
        .map(|&s| {
            if s > cutoff && s > T::zero() {
                T::one() / s
            } else {
                dropped = dropped + s;
                T::zero()
            }
        })
        .collect();
    let hinv = dec.vt.scale_rows(&inv).tr_matmul(&dec.u.transpose())?;
    let mut a = hinv.vec_mul(&g)?;
    // Applying an explicit H† loses a factor cond(H); refinement wins it back.
    for _ in 0..REFINE_STEPS {
        let ah = h.vec_mul(&a)?;
        let gap: Vec<T> = g.iter().zip(&ah).map(|(&y, &x)| y - x).collect();
        for (ai, d) in a.iter_mut().zip(hinv.vec_mul(&gap)?) {
            *ai = *ai + d;
        }
    }
    let ah = h.vec_mul(&a)?;
    let residual = ah.iter().zip(&g).map(|(&x, &y)| (x - y) * (x - y)).sum::<T>().sqrt();
    let norm = |v: &[T]| v.iter().map(|&x| x * x).sum::<T>().sqrt();
    let scale = h.frobenius_norm() * norm(&a) + norm(&g);
    Ok(RowSolve { a, residual, dropped: dropped.sqrt(), scale })
}

/// `½ Σ_{j∈cols} (a·e_j − t_j)²`.
fn row_objective<T: Scalar>(env: &Matrix<T>, a: &[T], cols: &[usize], values: &[T]) -> T {
    let half = T::of(0.5);
    cols.iter()
        .zip(values)
        .map(|(&j, &t)| {
            let fit: T = env.col(j).iter().zip(a).map(|(&e, &x)| e * x).sum();
            (fit - t) * (fit - t)
        })
        .sum::<T>()
        * half
}

struct ModeData<T> {
    entries: ModeEntries,
    /// Observed data values per row, aligned with `entries.cols`.
    values: Vec<Vec<T>>,
}

/// Completes `t` (observed where `mask` is set) with a tensor grid of the
/// target ranks, initialized by the two-stage DMRG decomposition.
///
/// Unobserved entries of `t` are ignored.
pub fn als_tg_complete<T: Scalar>(
    t: &DenseTensor<T>,
    mask: &ObservationMask,
    shape: &GridShape,
    cfg: &AlsConfig,
) -> Result<AlsOutput<T>> {
    cfg.validate()?;
    shape.check_tensor(t.shape())?;
    mask.check_shape(t.shape())?;
    let recorder = Recorder::start();
    let t = mask.apply(t)?;
    let grid = two_stage_dmrg(&t, shape, &cfg.target_ranks, cfg.pad_sigma, cfg.seed)?;
    sweeps(&t, mask, grid, cfg, recorder)
}

/// Runs the ALS sweeps from a given initial grid, whose ranks replace
/// `cfg.target_ranks`.
pub fn als_tg_from<T: Scalar>(
    t: &DenseTensor<T>,
    mask: &ObservationMask,
    init: TensorGrid<T>,
    cfg: &AlsConfig,
) -> Result<AlsOutput<T>> {
    cfg.validate()?;
    init.shape().check_tensor(t.shape())?;
    mask.check_shape(t.shape())?;
    let recorder = Recorder::start();
    sweeps(&mask.apply(t)?, mask, init, cfg, recorder)
}

fn sweeps<T: Scalar>(
    t: &DenseTensor<T>,
    mask: &ObservationMask,
    mut grid: TensorGrid<T>,
    cfg: &AlsConfig,
    mut recorder: Recorder,
) -> Result<AlsOutput<T>> {
    let shape = grid.shape().clone();

    let modes = (0..shape.num_sites())
        .map(|k| {
            let entries = mask.mode_entries(k)?;
            let values = entries
                .linear
                .iter()
                .map(|row| row.iter().map(|&p| t.data()[p]).collect())
                .collect();
            Ok(ModeData { entries, values })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut trace = cfg.trace.then(AlsTrace::default);
    let mut x_prev = grid.contract()?;
    let mut termination = Termination::MaxIters;

    for sweep in 1..=cfg.max_iters {
        for m in 0..shape.rows() {
            for n in 0..shape.cols() {
                update_core(&mut grid, m, n, &modes[shape.mode(m, n)], sweep, trace.as_mut())?;
            }
        }
        let x = grid.contract()?;
        let rc = relative_change(
            x.distance(&x_prev)?.to_f64_lossless(),
            x_prev.frobenius_norm().to_f64_lossless(),
        );
        let objective = observed_objective(&x, t, mask)?.to_f64_lossless();
        if !objective.is_finite() {
            return Err(Error::Numeric(format!("objective became {objective} in sweep {sweep}")));
        }
        recorder.push(objective, rc);
        x_prev = x;
        if rc < cfg.rc_tol {
            termination = Termination::RcTol;
            break;
        }
    }

    let report = recorder.finish("als-tg", termination, grid.ranks().to_vector());
    Ok(AlsOutput {
        x: x_prev,
        grid,
        report,
        trace,
    })
}

fn update_core<T: Scalar>(
    grid: &mut TensorGrid<T>,
    m: usize,
    n: usize,
    mode: &ModeData<T>,
    sweep: usize,
    trace: Option<&mut AlsTrace>,
) -> Result<()> {
    let env = grid.environment(m, n)?;
    let rhat = env.rows();
    let old = grid.core(m, n).data().to_vec();
    let rows = mode.entries.cols.len();

    let solved = (0..rows)
        .into_par_iter()
        .map(|i| {
            let cols = &mode.entries.cols[i];
            if cols.is_empty() {
                return Ok(None);
            }
            als_row_update(&env, cols, &mode.values[i]).map(Some)
        })
        .collect::<Result<Vec<_>>>()?;

    let data = grid.core_data_mut(m, n);
    for (i, s) in solved.iter().enumerate() {
        if let Some(s) = s {
            data[i * rhat..(i + 1) * rhat].copy_from_slice(&s.a);
        }
    }

    if let Some(trace) = trace {
        let data = grid.core(m, n).data();
        let objective = |core: &[T]| -> f64 {
            (0..rows)
                .map(|i| {
                    let a = &core[i * rhat..(i + 1) * rhat];
                    row_objective(&env, a, &mode.entries.cols[i], &mode.values[i]).to_f64_lossless()
                })
                .sum()
        };
        trace.cores.push(CoreTrace {
            sweep,
            m,
            n,
            objective_before: objective(&old),
            objective_after: objective(data),
        });
        for (i, s) in solved.iter().enumerate() {
            if let Some(s) = s {
                let data_norm = mode.values[i]
                    .iter()
                    .map(|v| v.to_f64_lossless().powi(2))
                    .sum::<f64>()
                    .sqrt();
                trace.rows.push(RowTrace {
                    sweep,
                    m,
                    n,
                    row: i,
                    observed: mode.entries.cols[i].len(),
                    residual: s.residual.to_f64_lossless(),
                    data_norm,
                    dropped: s.dropped.to_f64_lossless(),
                    scale: s.scale.to_f64_lossless(),
                });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_update_solves_hand_instance() {
        // R̂ = 2, four columns, three observed
        let env = Matrix::<f64>::from_rows(&[&[1.0, 0.0, 2.0, 5.0], &[1.0, 1.0, -1.0, 7.0]]).unwrap();
        let s = als_row_update(&env, &[0, 1, 2], &[3.0, 1.0, 0.0]).unwrap();
        // H = [[5, -1], [-1, 3]], g = [3, 4], a = g·H⁻¹ = [13, 23] / 14
        assert!((s.a[0] - 13.0 / 14.0).abs() < 1e-12);
        assert!((s.a[1] - 23.0 / 14.0).abs() < 1e-12);
        assert!(s.residual < 1e-12);
    }

    #[test]
    fn row_update_rejects_empty() {
        let env = Matrix::<f64>::identity(2).unwrap();
        assert!(als_row_update(&env, &[], &[]).is_err());
    }

    #[test]
    fn config_validation() {
        let mut cfg = AlsConfig::new(TgRanks::uniform(2, 2, 1).unwrap());
        assert!(cfg.validate().is_ok());
        cfg.max_iters = 0;
        assert!(cfg.validate().is_err());
        cfg.max_iters = 1;
        cfg.rc_tol = 0.0;
        assert!(cfg.validate().is_err());
    }
}
