use crate::error::{Error, Result};
use crate::imaging::ImageBuffer;
use crate::scalar::Scalar;
use crate::tensor::DenseTensor;

/// PSNR reported for (numerically) identical inputs.
pub const PSNR_CAP_DB: f64 = 99.0;
const PSNR_MIN_MSE: f64 = 1e-12;

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;

fn check_same<T: Scalar>(a: &DenseTensor<T>, b: &DenseTensor<T>) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::Argument(format!(
            "estimate shape {:?} does not match reference {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

/// `‖x̂ − x₀‖_F / ‖x₀‖_F`.
pub fn metric_re<T: Scalar>(estimate: &DenseTensor<T>, truth: &DenseTensor<T>) -> Result<f64> {
    check_same(estimate, truth)?;
    let denom = truth.frobenius_norm().to_f64_lossless();
    if denom == 0.0 {
        return Err(Error::Argument("relative error is undefined for an all-zero reference".into()));
    }
    Ok(estimate.distance(truth)?.to_f64_lossless() / denom)
}

/// `10·log10(1 / MSE)` for data on a unit scale, capped at [`PSNR_CAP_DB`].
pub fn metric_psnr<T: Scalar>(estimate: &DenseTensor<T>, truth: &DenseTensor<T>) -> Result<f64> {
    check_same(estimate, truth)?;
    let mse = estimate.distance(truth)?.to_f64_lossless().powi(2) / truth.len() as f64;
    if mse < PSNR_MIN_MSE {
        return Ok(PSNR_CAP_DB);
    }
    Ok((10.0 * (1.0 / mse).log10()).min(PSNR_CAP_DB))
}

fn gaussian_window() -> Vec<f64> {
    let c = (SSIM_WINDOW / 2) as f64;
    let w: Vec<f64> = (0..SSIM_WINDOW)
        .map(|k| (-((k as f64 - c).powi(2)) / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp())
        .collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// Separable "valid" filtering of a column-major `h × w` plane.
fn filter_valid(p: &[f64], h: usize, w: usize, g: &[f64]) -> Vec<f64> {
    let k = g.len();
    let (oh, ow) = (h + 1 - k, w + 1 - k);
    let mut vert = vec![0.0; oh * w];
    for x in 0..w {
        let col = &p[x * h..(x + 1) * h];
        for y in 0..oh {
            vert[y + oh * x] = g.iter().zip(&col[y..y + k]).map(|(a, b)| a * b).sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for x in 0..ow {
        for y in 0..oh {
            out[y + oh * x] = g.iter().enumerate().map(|(j, a)| a * vert[y + oh * (x + j)]).sum();
        }
    }
    out
}

fn ssim_plane(a: &[f64], b: &[f64], h: usize, w: usize, g: &[f64]) -> f64 {
    let c1 = SSIM_K1 * SSIM_K1;
    let c2 = SSIM_K2 * SSIM_K2;
    let prod = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).collect::<Vec<_>>();
    let mu_a = filter_valid(a, h, w, g);
    let mu_b = filter_valid(b, h, w, g);
    let aa = filter_valid(&prod(a, a), h, w, g);
    let bb = filter_valid(&prod(b, b), h, w, g);
    let ab = filter_valid(&prod(a, b), h, w, g);
    let n = mu_a.len();
    (0..n)
        .map(|i| {
            let (ma, mb) = (mu_a[i], mu_b[i]);
            let va = aa[i] - ma * ma;
            let vb = bb[i] - mb * mb;
            let cov = ab[i] - ma * mb;
            ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2))
        })
        .sum::<f64>()
        / n as f64
}

/// Mean structural similarity with an 11×11 Gaussian window (σ = 1.5) over
/// fully contained window positions, unit dynamic range, averaged over
/// channels.
pub fn metric_ssim(estimate: &ImageBuffer, truth: &ImageBuffer) -> Result<f64> {
    let dims = |i: &ImageBuffer| (i.height(), i.width(), i.channels());
    if dims(estimate) != dims(truth) {
        return Err(Error::Argument(format!(
            "estimate image {:?} does not match reference {:?}",
            dims(estimate),
            dims(truth)
        )));
    }
    let (h, w, c) = dims(truth);
    if h < SSIM_WINDOW || w < SSIM_WINDOW {
        return Err(Error::Argument(format!(
            "SSIM needs images of at least {SSIM_WINDOW}×{SSIM_WINDOW}, got {h}×{w}"
        )));
    }
    let g = gaussian_window();
    let total: f64 = (0..c)
        .map(|k| ssim_plane(estimate.plane(k), truth.plane(k), h, w, &g))
        .sum();
    Ok(total / c as f64)
}
