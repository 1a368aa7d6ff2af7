use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::ImageBuffer;
use crate::tensor::{inverse_permutation, DenseTensor};

/// How an image (or a stack of frames) becomes a higher-order tensor.
///
/// Height `H = Π M_l` and width `W = Π N_l` are split into `L` factors each
/// (first factor fastest), the factors are interleaved as
/// `(M_1, N_1, …, M_L, N_L)` and each pair is merged, giving
/// `[M_1N_1, …, M_LN_L, C]`. Frames append `frame_factors` as trailing modes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawPlan")]
pub struct TensorizationPlan {
    row_factors: Vec<usize>,
    col_factors: Vec<usize>,
    channels: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    frame_factors: Vec<usize>,
}

#[derive(Deserialize)]
struct RawPlan {
    row_factors: Vec<usize>,
    col_factors: Vec<usize>,
    channels: usize,
    #[serde(default)]
    frame_factors: Vec<usize>,
}

impl TryFrom<RawPlan> for TensorizationPlan {
    type Error = Error;

    fn try_from(r: RawPlan) -> Result<Self> {
        Self::new(r.row_factors, r.col_factors, r.channels)?.with_frames(r.frame_factors)
    }
}

impl TensorizationPlan {
    pub fn new(row_factors: Vec<usize>, col_factors: Vec<usize>, channels: usize) -> Result<Self> {
        if row_factors.is_empty() || row_factors.len() != col_factors.len() {
            return Err(Error::Argument(format!(
                "need the same nonzero number of row and column factors, got {} and {}",
                row_factors.len(),
                col_factors.len()
            )));
        }
        if row_factors.iter().chain(&col_factors).any(|&f| f == 0) {
            return Err(Error::Argument("spatial factors must be positive".into()));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::Argument(format!("images have 1 or 3 channels, got {channels}")));
        }
        Ok(Self {
            row_factors,
            col_factors,
            channels,
            frame_factors: Vec::new(),
        })
    }

    /// `levels` factors of `factor` on both axes.
    pub fn uniform(levels: usize, factor: usize, channels: usize) -> Result<Self> {
        Self::new(vec![factor; levels], vec![factor; levels], channels)
    }

    /// Trailing temporal modes; an empty list means a single still image.
    pub fn with_frames(mut self, frame_factors: Vec<usize>) -> Result<Self> {
        if frame_factors.contains(&0) {
            return Err(Error::Argument("frame factors must be positive".into()));
        }
        self.frame_factors = frame_factors;
        Ok(self)
    }

    pub fn levels(&self) -> usize {
        self.row_factors.len()
    }

    pub fn row_factors(&self) -> &[usize] {
        &self.row_factors
    }

    pub fn col_factors(&self) -> &[usize] {
        &self.col_factors
    }

    pub fn frame_factors(&self) -> &[usize] {
        &self.frame_factors
    }

    pub fn height(&self) -> usize {
        self.row_factors.iter().product()
    }

    pub fn width(&self) -> usize {
        self.col_factors.iter().product()
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn frames(&self) -> usize {
        self.frame_factors.iter().product()
    }

    /// `[M_1, …, M_L, N_1, …, N_L, C, F…]`.
    pub fn expanded_shape(&self) -> Vec<usize> {
        let mut s = self.row_factors.clone();
        s.extend(&self.col_factors);
        s.push(self.channels);
        s.extend(&self.frame_factors);
        s
    }

    /// Mode order taking the expanded shape to the interleaved one.
    pub fn permutation(&self) -> Vec<usize> {
        let l = self.levels();
        let mut order: Vec<usize> = (0..l).flat_map(|k| [k, l + k]).collect();
        order.extend(2 * l..2 * l + 1 + self.frame_factors.len());
        order
    }

    /// `[M_1N_1, …, M_LN_L, C, F…]`.
    pub fn output_shape(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self
            .row_factors
            .iter()
            .zip(&self.col_factors)
            .map(|(m, n)| m * n)
            .collect();
        s.push(self.channels);
        s.extend(&self.frame_factors);
        s
    }

    fn check_image(&self, img: &ImageBuffer) -> Result<()> {
        if img.height() != self.height() || img.width() != self.width() || img.channels() != self.channels {
            return Err(Error::Argument(format!(
                "{}×{}×{} image does not fit a plan for {}×{}×{}",
                img.height(),
                img.width(),
                img.channels(),
                self.height(),
                self.width(),
                self.channels
            )));
        }
        Ok(())
    }
}

pub fn tensorize(img: &ImageBuffer, plan: &TensorizationPlan) -> Result<DenseTensor<f64>> {
    tensorize_frames(std::slice::from_ref(img), plan)
}

pub fn tensorize_frames(frames: &[ImageBuffer], plan: &TensorizationPlan) -> Result<DenseTensor<f64>> {
    if frames.len() != plan.frames() {
        return Err(Error::Argument(format!(
            "plan expects {} frames, got {}",
            plan.frames(),
            frames.len()
        )));
    }
    let mut data = Vec::with_capacity(frames.len() * plan.height() * plan.width() * plan.channels());
    for f in frames {
        plan.check_image(f)?;
        data.extend_from_slice(f.data());
    }
    DenseTensor::new(plan.expanded_shape(), data)?
        .permute(&plan.permutation())?
        .into_reshape(&plan.output_shape())
}

pub fn detensorize(t: &DenseTensor<f64>, plan: &TensorizationPlan) -> Result<ImageBuffer> {
    if plan.frames() != 1 {
        return Err(Error::Argument(format!("plan holds {} frames, not one image", plan.frames())));
    }
    Ok(detensorize_frames(t, plan)?.pop().expect("one frame"))
}

/// Inverse of [`tensorize_frames`]; values are left unclamped.
pub fn detensorize_frames(t: &DenseTensor<f64>, plan: &TensorizationPlan) -> Result<Vec<ImageBuffer>> {
    let want = plan.output_shape();
    if t.shape() != want.as_slice() {
        return Err(Error::Argument(format!(
            "tensor shape {:?} does not match the plan's {want:?}",
            t.shape()
        )));
    }
    let order = plan.permutation();
    let expanded = plan.expanded_shape();
    let interleaved: Vec<usize> = order.iter().map(|&o| expanded[o]).collect();
    let data = t
        .reshape(&interleaved)?
        .permute(&inverse_permutation(&order))?
        .into_data();
    let (h, w, c) = (plan.height(), plan.width(), plan.channels());
    data.chunks(h * w * c)
        .map(|chunk| ImageBuffer::new(h, w, c, chunk.to_vec()))
        .collect()
}
