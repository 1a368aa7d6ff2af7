use rand::seq::index::sample;

use crate::error::{Error, Result};
use crate::imaging::{tensorize_frames, ImageBuffer, TensorizationPlan};
use crate::mask::ObservationMask;
use crate::rng;

/// Observes exactly `round(sr·N)` entries chosen uniformly without
/// replacement.
pub fn sample_uniform(shape: &[usize], sr: f64, seed: u64) -> Result<ObservationMask> {
    if !(sr > 0.0 && sr <= 1.0) {
        return Err(Error::Argument(format!("sampling rate must lie in (0, 1], got {sr}")));
    }
    let n: usize = shape.iter().product();
    let k = ((sr * n as f64).round() as usize).min(n);
    let mut observed = vec![false; n];
    for i in sample(&mut rng::seeded(seed), n, k) {
        observed[i] = true;
    }
    ObservationMask::new(shape.to_vec(), observed)
}

/// Pixels where any channel of `mask_img` is below 0.5 are unobserved in
/// every channel (and every frame); the result is tensorized with `plan`.
pub fn text_mask(mask_img: &ImageBuffer, plan: &TensorizationPlan) -> Result<ObservationMask> {
    let (h, w) = (plan.height(), plan.width());
    if mask_img.height() != h || mask_img.width() != w {
        return Err(Error::Argument(format!(
            "{}×{} mask image does not match {h}×{w} data",
            mask_img.height(),
            mask_img.width()
        )));
    }
    let keep = ImageBuffer::from_fn(h, w, plan.channels(), |y, x, _| {
        let white = (0..mask_img.channels()).all(|c| mask_img.get(y, x, c) >= 0.5);
        if white { 1.0 } else { 0.0 }
    })?;
    let frames = vec![keep; plan.frames()];
    ObservationMask::from_tensor(&tensorize_frames(&frames, plan)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_counts_and_determinism() {
        assert_eq!(sample_uniform(&[10, 100], 0.1, 3).unwrap().count(), 100);
        assert_eq!(sample_uniform(&[7, 3], 1.0, 3).unwrap().count(), 21);
        assert_eq!(sample_uniform(&[50, 20], 0.3, 9).unwrap(), sample_uniform(&[50, 20], 0.3, 9).unwrap());
        assert_ne!(sample_uniform(&[50, 20], 0.3, 9).unwrap(), sample_uniform(&[50, 20], 0.3, 10).unwrap());
        assert!(sample_uniform(&[4], 0.0, 1).is_err());
        assert!(sample_uniform(&[4], 1.5, 1).is_err());
    }

    #[test]
    fn text_mask_examples() {
        let plan = TensorizationPlan::uniform(2, 2, 3).unwrap();
        let white = ImageBuffer::filled(4, 4, 3, 1.0).unwrap();
        assert_eq!(text_mask(&white, &plan).unwrap().fraction(), 1.0);
        let black = ImageBuffer::filled(4, 4, 1, 0.0).unwrap();
        assert_eq!(text_mask(&black, &plan).unwrap().count(), 0);
        let half = ImageBuffer::from_fn(4, 4, 3, |_, x, c| if x < 2 || c != 1 { 1.0 } else { 0.2 }).unwrap();
        assert_eq!(text_mask(&half, &plan).unwrap().fraction(), 0.5);
        let small = ImageBuffer::filled(2, 4, 3, 1.0).unwrap();
        assert!(matches!(text_mask(&small, &plan), Err(Error::Argument(_))));
    }
}
