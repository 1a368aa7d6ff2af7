//! Tensor completion by parallel matrix factorization over the balanced
//! unfoldings of a tensor grid.
//!
//! A grid with `M × N` sites has `N − 1` row splits (the first `j` grid
//! columns against the rest) and `M − 1` column splits (the first `i` grid
//! rows against the rest). Each split keeps a low-rank factor pair fitted to
//! the corresponding unfolding of the current estimate; the unobserved
//! entries are refilled from a weighted average of the fitted products.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::ObservationMask;
use crate::report::{relative_change, Recorder, SolveReport, Termination};
use crate::scalar::Scalar;
use crate::tensor::{inverse_permutation, permute_into, pinv, svd, DenseTensor, Matrix};
use crate::tg::GridShape;

pub const DEFAULT_SV_THRESHOLD: f64 = 0.02;

/// One balanced unfolding of a grid-shaped tensor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    /// Grid columns `0..j` on the rows, `1 ≤ j ≤ N − 1`.
    Row(usize),
    /// Grid rows `0..i` on the rows, `1 ≤ i ≤ M − 1`.
    Col(usize),
}

impl Split {
    fn check(self, shape: &GridShape) -> Result<()> {
        let ok = match self {
            Split::Row(j) => j >= 1 && j < shape.cols(),
            Split::Col(i) => i >= 1 && i < shape.rows(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Argument(format!(
                "{self:?} is not a split of a {}×{} grid",
                shape.rows(),
                shape.cols()
            )))
        }
    }

    /// Tensor modes sent to the matrix rows, ascending.
    pub fn row_modes(self, shape: &GridShape) -> Result<Vec<usize>> {
        self.check(shape)?;
        Ok(match self {
            Split::Row(j) => (0..j * shape.rows()).collect(),
            Split::Col(i) => (0..shape.cols())
                .flat_map(|n| (0..i).map(move |m| shape.mode(m, n)))
                .collect(),
        })
    }
}

/// All splits: row splits by increasing `j`, then column splits by increasing `i`.
pub fn splits(shape: &GridShape) -> Vec<Split> {
    (1..shape.cols())
        .map(Split::Row)
        .chain((1..shape.rows()).map(Split::Col))
        .collect()
}

pub fn split_unfold<T: Scalar>(x: &DenseTensor<T>, shape: &GridShape, split: Split) -> Result<Matrix<T>> {
    shape.check_tensor(x.shape())?;
    let modes = split.row_modes(shape)?;
    match split {
        Split::Row(_) => x.to_matrix(modes.len()),
        Split::Col(_) => x.general_unfold(&modes),
    }
}

pub fn split_fold<T: Scalar>(m: &Matrix<T>, shape: &GridShape, split: Split) -> Result<DenseTensor<T>> {
    let modes = split.row_modes(shape)?;
    match split {
        Split::Row(_) => {
            let dims = shape.tensor_shape();
            let rows: usize = dims[..modes.len()].iter().product();
            if m.rows() != rows || m.rows() * m.cols() != dims.iter().product::<usize>() {
                return Err(Error::Dimension(format!(
                    "{}×{} matrix cannot fold into {dims:?} at {split:?}",
                    m.rows(),
                    m.cols()
                )));
            }
            DenseTensor::new(dims.to_vec(), m.data().to_vec())
        }
        Split::Col(_) => DenseTensor::general_fold(m, shape.tensor_shape(), &modes),
    }
}

/// `(rows, cols)` of a split's unfolding.
pub fn split_dims(shape: &GridShape, split: Split) -> Result<(usize, usize)> {
    let modes = split.row_modes(shape)?;
    let dims = shape.tensor_shape();
    let rows: usize = modes.iter().map(|&k| dims[k]).product();
    Ok((rows, dims.iter().product::<usize>() / rows))
}

/// Unnormalized weights: the smaller dimension of each split's unfolding.
pub fn raw_weights(shape: &GridShape) -> Vec<f64> {
    splits(shape)
        .into_iter()
        .map(|s| {
            let (r, c) = split_dims(shape, s).expect("canonical split");
            r.min(c) as f64
        })
        .collect()
}

/// Raw weights scaled to sum to one.
pub fn default_weights(shape: &GridShape) -> Vec<f64> {
    let raw = raw_weights(shape);
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// First one-based index whose ratio to the leading singular value drops
/// below `th`; the number of singular values if none does, and 1 when all
/// are zero.
pub fn auto_rank_from_singular_values(s: &[f64], th: f64) -> usize {
    let Some(&s1) = s.first() else { return 1 };
    if s1 <= 0.0 {
        return 1;
    }
    s.iter().position(|&v| v / s1 < th).map_or(s.len(), |k| k + 1)
}

/// Per-split ranks chosen from the singular values of `t`'s unfoldings.
pub fn auto_ranks<T: Scalar>(t: &DenseTensor<T>, shape: &GridShape, th: f64) -> Result<Vec<usize>> {
    if !(th > 0.0 && th < 1.0) {
        return Err(Error::Argument(format!("threshold must lie in (0, 1), got {th}")));
    }
    splits(shape)
        .into_iter()
        .map(|s| {
            let dec = svd(&split_unfold(t, shape, s)?)?;
            let sv: Vec<f64> = dec.s.iter().map(|v| v.to_f64_lossless()).collect();
            Ok(auto_rank_from_singular_values(&sv, th))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankSpec {
    /// One rank per split, in [`splits`] order.
    Fixed(Vec<usize>),
    /// The same rank for every split.
    Uniform(usize),
    /// Chosen by [`auto_ranks`] from the zero-filled data.
    Auto,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PmacConfig {
    pub ranks: RankSpec,
    /// Per-split weights, normalized before use; `None` selects
    /// [`default_weights`].
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    pub max_iters: usize,
    pub rc_tol: f64,
    pub sv_threshold: f64,
    /// Return data values on observed entries; otherwise the model's values.
    pub clamp_observed: bool,
    /// Record per-split objectives and observed-entry fidelity.
    #[serde(default)]
    pub trace: bool,
}

impl PmacConfig {
    pub fn new(ranks: RankSpec) -> Self {
        Self {
            ranks,
            weights: None,
            max_iters: crate::als::DEFAULT_MAX_ITERS,
            rc_tol: crate::als::DEFAULT_RC_TOL,
            sv_threshold: DEFAULT_SV_THRESHOLD,
            clamp_observed: true,
            trace: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::Argument("max_iters must be at least 1".into()));
        }
        if !(self.rc_tol > 0.0) {
            return Err(Error::Argument(format!("rc_tol must be positive, got {}", self.rc_tol)));
        }
        Ok(())
    }

    fn resolve_weights(&self, shape: &GridShape) -> Result<Vec<f64>> {
        let Some(w) = &self.weights else {
            return Ok(default_weights(shape));
        };
        let count = splits(shape).len();
        if w.len() != count {
            return Err(Error::Argument(format!("{} weights for {count} splits", w.len())));
        }
        if w.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::Argument("weights must be positive and finite".into()));
        }
        let total: f64 = w.iter().sum();
        Ok(w.iter().map(|v| v / total).collect())
    }

    fn resolve_ranks<T: Scalar>(&self, t: &DenseTensor<T>, shape: &GridShape) -> Result<Vec<usize>> {
        let all = splits(shape);
        let ranks = match &self.ranks {
            RankSpec::Fixed(r) => r.clone(),
            RankSpec::Uniform(r) => vec![*r; all.len()],
            RankSpec::Auto => auto_ranks(t, shape, self.sv_threshold)?,
        };
        if ranks.len() != all.len() {
            return Err(Error::Argument(format!("{} ranks for {} splits", ranks.len(), all.len())));
        }
        for (&r, &s) in ranks.iter().zip(&all) {
            let (rows, cols) = split_dims(shape, s)?;
            if r == 0 || r > rows.min(cols) {
                return Err(Error::Argument(format!(
                    "rank {r} at {s:?} must lie in 1..={} for its {rows}×{cols} unfolding",
                    rows.min(cols)
                )));
            }
        }
        Ok(ranks)
    }
}

/// Factorization objective of one split before and after its update.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitTrace {
    pub iteration: usize,
    pub split: Split,
    /// `‖U^{k−1}V^{k−1} − M^{k−1}‖_F`.
    pub before: f64,
    /// `‖U^k V^k − M^{k−1}‖_F`.
    pub after: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PmacTrace {
    pub splits: Vec<SplitTrace>,
    /// Per iteration, the largest `|x − t|` over observed entries of the iterate.
    pub fidelity: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct PmacOutput<T> {
    pub x: DenseTensor<T>,
    pub ranks: Vec<usize>,
    pub weights: Vec<f64>,
    pub report: SolveReport,
    pub trace: Option<PmacTrace>,
}

/// Grid-row-major mode order. In this layout the unfolding of every
/// column split is a plain reshape, as it is for row splits in the original
/// layout; products do not depend on the row and column order of an
/// unfolding.
struct SiteMajor {
    order: Vec<usize>,
    inverse: Vec<usize>,
    shape: Vec<usize>,
}

impl SiteMajor {
    fn new(grid: &GridShape) -> Self {
        let order: Vec<usize> = (0..grid.rows())
            .flat_map(|m| (0..grid.cols()).map(move |n| grid.mode(m, n)))
            .collect();
        let shape = order.iter().map(|&k| grid.tensor_shape()[k]).collect();
        Self {
            inverse: inverse_permutation(&order),
            order,
            shape,
        }
    }
}

/// Per-split factors and reusable buffers.
struct SplitState<T> {
    split: Split,
    rows: usize,
    cols: usize,
    /// Reads the site-major copy of the iterate.
    site_major: bool,
    /// `R × cols`.
    v: Matrix<T>,
    /// `U·V` in unfolding layout.
    product: Vec<T>,
    /// Previous `U·V`, kept only when tracing.
    previous: Option<Vec<T>>,
    objectives: Option<(f64, f64)>,
}

impl<T: Scalar> SplitState<T> {
    /// Initializes from the truncated SVD of the unfolding held in `source`.
    fn new(source: &[T], shape: &GridShape, split: Split, rank: usize, trace: bool) -> Result<Self> {
        let (rows, cols) = split_dims(shape, split)?;
        let dec = svd(&Matrix::new(rows, cols, source.to_vec())?)?.truncate(rank)?;
        let previous = if trace { Some(dec.reconstruct()?.into_data()) } else { None };
        Ok(Self {
            split,
            rows,
            cols,
            site_major: matches!(split, Split::Col(_)),
            v: dec.vt,
            product: vec![T::zero(); source.len()],
            previous,
            objectives: None,
        })
    }

    /// Refits the factor pair to the unfolding `m`.
    fn update(&mut self, m: &[T], form_vvt_pinv: bool) -> Result<()> {
        let (rows, cols, r) = (self.rows, self.cols, self.v.rows());
        let mut u = vec![T::zero(); rows * r];
        T::gemm(&mut u, rows, r, cols, m, false, self.v.data(), true, T::one(), false);
        let mut u = Matrix::new(rows, r, u)?;
        if form_vvt_pinv {
            u = u.matmul(&pinv(&self.v.matmul_tr(&self.v)?)?)?;
        }
        let mut utm = vec![T::zero(); r * cols];
        T::gemm(&mut utm, r, cols, rows, u.data(), true, m, false, T::one(), false);
        let v_new = pinv(&u.tr_matmul(&u)?)?.matmul(&Matrix::new(r, cols, utm)?)?;
        T::gemm(&mut self.product, rows, cols, r, u.data(), false, v_new.data(), false, T::one(), false);
        self.v = v_new;

        if let Some(prev) = self.previous.as_mut() {
            self.objectives = Some((distance(prev, m), distance(&self.product, m)));
            prev.copy_from_slice(&self.product);
        }
        Ok(())
    }
}

/// Weighted sum of the fitted products in the original layout; the
/// column-split part is accumulated site-major and permuted back once.
struct Combiner<T> {
    site_major: Option<SiteMajor>,
    col_sum_sm: Vec<T>,
    col_sum: Vec<T>,
}

impl<T: Scalar> Combiner<T> {
    /// Parts and weights summing to the model, in split order.
    fn parts<'a>(&'a mut self, states: &'a [SplitState<T>], w: &[T]) -> (Vec<&'a [T]>, Vec<T>) {
        let mut parts = Vec::new();
        let mut pw = Vec::new();
        let mut cols = Vec::new();
        let mut cw = Vec::new();
        for (st, &wk) in states.iter().zip(w) {
            if st.site_major {
                cols.push(st.product.as_slice());
                cw.push(wk);
            } else {
                parts.push(st.product.as_slice());
                pw.push(wk);
            }
        }
        if let Some(sm) = &self.site_major {
            weighted_sum(&cols, &cw, &mut self.col_sum_sm);
            permute_into(&self.col_sum_sm, &sm.shape, &sm.inverse, &mut self.col_sum);
            parts.push(&self.col_sum);
            pw.push(T::one());
        }
        (parts, pw)
    }
}

#[derive(Default)]
struct Sums {
    /// `‖x^k − x^{k−1}‖²`.
    diff2: f64,
    /// `‖x^{k−1}‖²`.
    norm2: f64,
    /// Squared model misfit over observed entries.
    fit2: f64,
}

const BLOCK: usize = 1024;

fn weighted_sum<T: Scalar>(fitted: &[&[T]], w: &[T], out: &mut [T]) {
    for (k, (z, &wk)) in fitted.iter().zip(w).enumerate() {
        for (o, &zv) in out.iter_mut().zip(z.iter()) {
            *o = if k == 0 { wk * zv } else { *o + wk * zv };
        }
    }
}

/// Sets `x` to the weighted model on unobserved entries and to the data on
/// observed ones, accumulating the iteration statistics.
///
/// `t` is zero off the mask and `free` is 1 off the mask and 0 on it, so
/// `t + free·y` selects exactly without branching. Works in blocks so the
/// model values stay in cache.
fn combine_and_reset<T: Scalar>(fitted: &[&[T]], w: &[T], t: &[T], free: &[T], x: &mut [T]) -> Sums {
    const LANES: usize = 8;
    let mut acc = [[T::zero(); LANES]; 3];
    let mut y = vec![T::zero(); BLOCK];
    for start in (0..x.len()).step_by(BLOCK) {
        let end = (start + BLOCK).min(x.len());
        let y = &mut y[..end - start];
        let parts: Vec<&[T]> = fitted.iter().map(|z| &z[start..end]).collect();
        weighted_sum(&parts, w, y);
        let xs = &mut x[start..end];
        let (ts, fs) = (&t[start..end], &free[start..end]);
        for (i, ((xv, &yv), (&tv, &f))) in xs.iter_mut().zip(y.iter()).zip(ts.iter().zip(fs)).enumerate() {
            let next = tv + f * yv;
            let miss = (T::one() - f) * yv - tv;
            let d = next - *xv;
            let lane = i % LANES;
            acc[0][lane] = acc[0][lane] + d * d;
            acc[1][lane] = acc[1][lane] + *xv * *xv;
            acc[2][lane] = acc[2][lane] + miss * miss;
            *xv = next;
        }
    }
    let total = |a: &[T; LANES]| a.iter().map(|v| v.to_f64_lossless()).sum::<f64>();
    Sums {
        diff2: total(&acc[0]),
        norm2: total(&acc[1]),
        fit2: total(&acc[2]),
    }
}

fn distance<T: Scalar>(a: &[T], b: &[T]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y).to_f64_lossless().powi(2))
        .sum::<f64>()
        .sqrt()
}

pub fn pmac_tg_complete<T: Scalar>(
    t: &DenseTensor<T>,
    mask: &ObservationMask,
    shape: &GridShape,
    cfg: &PmacConfig,
) -> Result<PmacOutput<T>> {
    run(t, mask, shape, cfg, false)
}

fn run<T: Scalar>(
    t: &DenseTensor<T>,
    mask: &ObservationMask,
    shape: &GridShape,
    cfg: &PmacConfig,
    form_vvt_pinv: bool,
) -> Result<PmacOutput<T>> {
    cfg.validate()?;
    shape.check_tensor(t.shape())?;
    mask.check_shape(t.shape())?;
    let mut recorder = Recorder::start();
    let t = mask.apply(t)?;
    let all = splits(shape);
    if all.is_empty() {
        return Err(Error::Argument("a 1×1 grid has no splits to factorize".into()));
    }
    let ranks = cfg.resolve_ranks(&t, shape)?;
    let weights = cfg.resolve_weights(shape)?;
    let wt: Vec<T> = weights.iter().map(|&w| T::of(w)).collect();

    let site_major = (shape.rows() > 1).then(|| SiteMajor::new(shape));
    let mut x_sm = match &site_major {
        Some(sm) => t.permute(&sm.order)?.into_data(),
        None => Vec::new(),
    };
    let mut states = all
        .par_iter()
        .zip(&ranks)
        .map(|(&s, &r)| {
            let source = if matches!(s, Split::Col(_)) { &x_sm } else { t.data() };
            SplitState::new(source, shape, s, r, cfg.trace)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut combiner = Combiner {
        col_sum_sm: if site_major.is_some() { vec![T::zero(); t.len()] } else { Vec::new() },
        col_sum: if site_major.is_some() { vec![T::zero(); t.len()] } else { Vec::new() },
        site_major,
    };

    let mut trace = cfg.trace.then(PmacTrace::default);
    let mut x = t.clone();
    let free: Vec<T> = mask.observed().iter().map(|&o| if o { T::zero() } else { T::one() }).collect();
    let mut termination = Termination::MaxIters;

    for k in 1..=cfg.max_iters {
        if k > 1 {
            if let Some(sm) = &combiner.site_major {
                permute_into(x.data(), x.shape(), &sm.order, &mut x_sm);
            }
        }
        let (x_orig, x_site) = (x.data(), x_sm.as_slice());
        states
            .par_iter_mut()
            .try_for_each(|st| st.update(if st.site_major { x_site } else { x_orig }, form_vvt_pinv))?;

        // weighted combination in a fixed order, then the observed-entry reset
        let (parts, pw) = combiner.parts(&states, &wt);
        let sums = combine_and_reset(&parts, &pw, t.data(), &free, x.data_mut());
        if let Some(tr) = trace.as_mut() {
            for st in &states {
                if let Some((before, after)) = st.objectives {
                    tr.splits.push(SplitTrace {
                        iteration: k,
                        split: st.split,
                        before,
                        after,
                    });
                }
            }
            let fidelity = x
                .data()
                .iter()
                .zip(t.data())
                .zip(mask.observed())
                .filter(|(_, &o)| o)
                .map(|((&a, &b), _)| (a - b).abs().to_f64_lossless())
                .fold(0.0, f64::max);
            tr.fidelity.push(fidelity);
        }

        let rc = relative_change(sums.diff2.sqrt(), sums.norm2.sqrt());
        let objective = 0.5 * sums.fit2;
        if !objective.is_finite() {
            return Err(Error::Numeric(format!("objective became {objective} in iteration {k}")));
        }
        recorder.push(objective, rc);
        if rc < cfg.rc_tol {
            termination = Termination::RcTol;
            break;
        }
    }

    let x = if cfg.clamp_observed {
        x
    } else {
        let (parts, pw) = combiner.parts(&states, &wt);
        let mut model = vec![T::zero(); t.len()];
        weighted_sum(&parts, &pw, &mut model);
        DenseTensor::new(t.shape().to_vec(), model)?
    };
    let solver = if cfg.ranks == RankSpec::Auto { "a-pmac-tg" } else { "pmac-tg" };
    let report = recorder.finish(solver, termination, ranks.clone());
    Ok(PmacOutput {
        x,
        ranks,
        weights,
        report,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tg::{tg_random, TgRanks};

    #[test]
    fn weights_examples() {
        let s = GridShape::uniform(3, 3, 4).unwrap();
        assert_eq!(raw_weights(&s), vec![64.0; 4]);
        assert_eq!(default_weights(&s), vec![0.25; 4]);
        let s = GridShape::uniform(2, 2, 2).unwrap();
        assert_eq!(raw_weights(&s), vec![4.0, 4.0]);
        assert_eq!(default_weights(&s), vec![0.5, 0.5]);
    }

    #[test]
    fn auto_rank_examples() {
        assert_eq!(auto_rank_from_singular_values(&[10.0, 5.0, 1.0, 0.1], 0.02), 4);
        assert_eq!(auto_rank_from_singular_values(&[1.0, 0.0, 0.0, 0.0], 0.02), 2);
        assert_eq!(auto_rank_from_singular_values(&[3.0; 5], 0.02), 5);
        assert_eq!(auto_rank_from_singular_values(&[0.0; 3], 0.02), 1);
    }

    #[test]
    fn reference_with_vvt_pinv_matches() {
        let shape = GridShape::uniform(2, 3, 3).unwrap();
        let truth = tg_random::<f64>(&shape, &TgRanks::uniform(2, 3, 2).unwrap(), 3)
            .unwrap()
            .contract()
            .unwrap();
        let observed = (0..truth.len()).map(|k| (k * 7919) % 10 < 6).collect();
        let mask = ObservationMask::new(truth.shape().to_vec(), observed).unwrap();
        let mut cfg = PmacConfig::new(RankSpec::Uniform(3));
        cfg.max_iters = 8;
        let fast = run(&truth, &mask, &shape, &cfg, false).unwrap();
        let reference = run(&truth, &mask, &shape, &cfg, true).unwrap();
        let diff = fast.x.distance(&reference.x).unwrap();
        assert!(diff <= 1e-10 * reference.x.frobenius_norm(), "{diff}");
    }
}
