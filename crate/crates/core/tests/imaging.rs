use proptest::prelude::*;
use tengrid::imaging::{metric_psnr, metric_re, metric_ssim, sample_uniform, tensorize, text_mask, ImageBuffer, TensorizationPlan};
use tengrid::tensor::DenseTensor;

fn plan_strategy() -> impl Strategy<Value = TensorizationPlan> {
    (1usize..=3).prop_flat_map(|levels| {
        (
            proptest::collection::vec(1usize..=4, levels),
            proptest::collection::vec(1usize..=4, levels),
            prop_oneof![Just(1usize), Just(3usize)],
        )
            .prop_map(|(r, c, ch)| TensorizationPlan::new(r, c, ch).unwrap())
    })
}

fn image_for(plan: &TensorizationPlan, seed: u64) -> ImageBuffer {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    ImageBuffer::from_fn(plan.height(), plan.width(), plan.channels(), |_, _, _| {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64
    })
    .unwrap()
}

fn image(h: usize, w: usize, c: usize) -> impl Strategy<Value = ImageBuffer> {
    proptest::collection::vec(0.0f64..1.0, h * w * c).prop_map(move |d| ImageBuffer::new(h, w, c, d).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tensorize_permutes_entries(plan in plan_strategy(), seed in any::<u64>()) {
        let img = image_for(&plan, seed);
        let t = tensorize(&img, &plan).unwrap();
        let mut a = t.data().to_vec();
        let mut b = img.data().to_vec();
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        prop_assert_eq!(&a, &b);
        let n0 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        // Same entries summed in another order: equal up to rounding.
        prop_assert!((t.frobenius_norm() - n0).abs() <= b.len() as f64 * f64::EPSILON * n0);
    }

    #[test]
    fn masking_commutes_with_tensorization(plan in plan_strategy(), seed in any::<u64>()) {
        let img = image_for(&plan, seed);
        let keep = image_for(&TensorizationPlan::new(plan.row_factors().to_vec(), plan.col_factors().to_vec(), 1).unwrap(), seed ^ 0xabc);
        let masked = ImageBuffer::from_fn(plan.height(), plan.width(), plan.channels(), |y, x, c| {
            if keep.get(y, x, 0) >= 0.5 { img.get(y, x, c) } else { 0.0 }
        })
        .unwrap();
        let mask = text_mask(&keep, &plan).unwrap();
        prop_assert_eq!(mask.apply(&tensorize(&img, &plan).unwrap()).unwrap(), tensorize(&masked, &plan).unwrap());
    }

    #[test]
    fn ssim_is_symmetric_with_unit_identity(
        (a, b) in (11usize..=20, 11usize..=20, prop_oneof![Just(1usize), Just(3usize)])
            .prop_flat_map(|(h, w, c)| (image(h, w, c), image(h, w, c)))
    ) {
        prop_assert!((metric_ssim(&a, &a).unwrap() - 1.0).abs() <= 1e-12);
        let (ab, ba) = (metric_ssim(&a, &b).unwrap(), metric_ssim(&b, &a).unwrap());
        prop_assert!((ab - ba).abs() <= 1e-12 && ab <= 1.0 + 1e-12);
    }

    #[test]
    fn relative_error_is_scale_covariant(
        (x, y) in (1usize..=40).prop_flat_map(|n| (
            proptest::collection::vec(-5.0f64..5.0, n),
            proptest::collection::vec(-5.0f64..5.0, n),
        )),
        alpha in prop_oneof![-1e3f64..-1e-3, 1e-3f64..1e3],
    ) {
        let n = x.len();
        let (x, y) = (DenseTensor::new(vec![n], x).unwrap(), DenseTensor::new(vec![n], y).unwrap());
        prop_assume!(y.frobenius_norm() > 0.0);
        let base = metric_re(&x, &y).unwrap();
        let scaled = metric_re(&x.scale(alpha), &y.scale(alpha)).unwrap();
        prop_assert!((base - scaled).abs() <= 1e-12 * base.max(1.0));
        prop_assert!(metric_psnr(&y, &y).unwrap() == tengrid::imaging::PSNR_CAP_DB);
    }

    #[test]
    fn uniform_masks_have_exact_counts(shape in proptest::collection::vec(1usize..=6, 1..=4), sr in 0.01f64..=1.0, seed in any::<u64>()) {
        let n: usize = shape.iter().product();
        let m = sample_uniform(&shape, sr, seed).unwrap();
        prop_assert_eq!(m.count(), ((sr * n as f64).round() as usize).min(n));
    }
}
