//! Images and video as tensors: ingestion, the reshape-and-reorder
//! tensorization, observation masks and quality metrics.

mod io;
mod masks;
mod metrics;
mod plan;

use crate::error::{Error, Result};
use crate::rng;

pub use io::{decimate, read_frames, read_image, write_frames, write_image};
pub use masks::{sample_uniform, text_mask};
pub use metrics::{metric_psnr, metric_re, metric_ssim, PSNR_CAP_DB};
pub use plan::{detensorize, detensorize_frames, tensorize, tensorize_frames, TensorizationPlan};

/// A still image with values nominally in `[0, 1]`.
///
/// Pixel `(h, w, c)` is stored at `h + H·(w + W·c)`, matching a column-major
/// `[H, W, C]` tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageBuffer {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f64>,
}

impl ImageBuffer {
    /// Wraps raw values without clamping; decoded files are already in range.
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::Argument(format!("{height}×{width} image is empty")));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::Argument(format!("images have 1 or 3 channels, got {channels}")));
        }
        if data.len() != height * width * channels {
            return Err(Error::Dimension(format!(
                "{height}×{width}×{channels} image needs {} values, got {}",
                height * width * channels,
                data.len()
            )));
        }
        Ok(Self {
            height,
            width,
            channels,
            data,
        })
    }

    pub fn filled(height: usize, width: usize, channels: usize, value: f64) -> Result<Self> {
        Self::new(height, width, channels, vec![value; height * width * channels])
    }

    pub fn from_fn(
        height: usize,
        width: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(height * width * channels);
        for c in 0..channels {
            for w in 0..width {
                for h in 0..height {
                    data.push(f(h, w, c));
                }
            }
        }
        Self::new(height, width, channels, data)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, h: usize, w: usize, c: usize) -> f64 {
        self.data[h + self.height * (w + self.width * c)]
    }

    /// One channel as a column-major `H × W` plane.
    pub fn plane(&self, c: usize) -> &[f64] {
        let n = self.height * self.width;
        &self.data[c * n..(c + 1) * n]
    }

    /// Copy with every value clamped to `[0, 1]`, for export.
    pub fn clamped(&self) -> Self {
        Self {
            data: self.data.iter().map(|v| v.clamp(0.0, 1.0)).collect(),
            ..self.clone()
        }
    }
}

/// Deterministic RGB test scene: smooth shading, a few hard-edged shapes,
/// fine stripes and mild pixel noise drawn from `seed`.
pub fn synthetic_scene(height: usize, width: usize, seed: u64) -> Result<ImageBuffer> {
    let mut rng = rng::seeded(seed);
    let noise: Vec<f64> = rng::normal_vec(&mut rng, height * width * 3);
    let (hf, wf) = (height as f64, width as f64);
    let img = ImageBuffer::from_fn(height, width, 3, |h, w, c| {
        let (y, x) = (h as f64 / hf, w as f64 / wf);
        let tau = std::f64::consts::TAU;
        let mut v = 0.45 + 0.25 * (tau * (0.8 * x + 0.3 * c as f64)).sin() * (tau * 0.6 * y).cos();
        v += 0.15 * (x - y);
        let (dx, dy) = (x - 0.35, y - 0.4);
        if dx * dx + dy * dy < 0.04 {
            v += [0.3, -0.1, -0.2][c];
        }
        if (0.6..0.85).contains(&x) && (0.55..0.8).contains(&y) {
            v = [0.15, 0.35, 0.7][c];
        }
        if y > 0.85 {
            v += 0.08 * (tau * 12.0 * x).sin();
        }
        v + 0.02 * noise[h + height * (w + width * c)]
    })?;
    Ok(img.clamped())
}
