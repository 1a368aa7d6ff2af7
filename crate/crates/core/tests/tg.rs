use proptest::prelude::*;
use tengrid::tensor::DenseTensor;
use tengrid::tg::{
    horizontal_phase, rank_upper_bounds, tg_random, two_stage_dmrg, vertical_phase, GridShape,
    TensorGrid, TgRanks,
};
use tengrid::Error;

mod support;
use support::brute::{all_bonds, brute_contract, brute_entry};

fn rel_err(a: &DenseTensor<f64>, b: &DenseTensor<f64>) -> f64 {
    a.distance(b).unwrap() / b.frobenius_norm()
}

fn random_grid(rows: usize, cols: usize, sizes: Vec<usize>, bond: usize, seed: u64) -> TensorGrid<f64> {
    let shape = GridShape::new(rows, cols, sizes).unwrap();
    tg_random(&shape, &TgRanks::uniform(rows, cols, bond).unwrap(), seed).unwrap()
}

#[test]
fn contraction_of_all_ones_grid_is_all_ones() {
    let shape = GridShape::new(2, 3, vec![2, 3, 2, 4, 1, 2]).unwrap();
    let ranks = TgRanks::uniform(2, 3, 1).unwrap();
    let cores = (0..6)
        .map(|k| DenseTensor::<f64>::ones(vec![1, 1, 1, 1, shape.tensor_shape()[k]]).unwrap())
        .collect();
    let g = TensorGrid::new(shape, ranks, cores).unwrap();
    let x = g.contract().unwrap();
    assert_eq!(x.shape(), &[2, 3, 2, 4, 1, 2]);
    assert!(x.data().iter().all(|&v| (v - 1.0).abs() < 1e-15));
}

#[test]
fn contraction_matches_brute_force_sum() {
    for (rows, cols, sizes, bond) in [
        (2, 2, vec![2; 4], 2),
        (2, 3, vec![2, 3, 2, 1, 3, 2], 2),
        (1, 3, vec![3, 2, 2], 2),
        (3, 1, vec![2, 2, 3], 2),
        (1, 1, vec![4], 1),
    ] {
        let g = random_grid(rows, cols, sizes, bond, 7 + rows as u64 * 10 + cols as u64);
        let oracle = brute_contract(&g);
        assert!(rel_err(&g.contract().unwrap(), &oracle) <= 1e-12, "{rows}×{cols}");
    }
}

#[test]
fn contraction_mixed_bonds_matches_brute_force() {
    let shape = GridShape::new(2, 3, vec![2, 2, 3, 2, 2, 2]).unwrap();
    let ranks = TgRanks::new(2, 3, vec![2, 1, 1, 2], vec![2, 1, 2]).unwrap();
    let g = tg_random::<f64>(&shape, &ranks, 3).unwrap();
    assert!(rel_err(&g.contract().unwrap(), &brute_contract(&g)) <= 1e-12);
}

#[test]
fn contraction_is_linear_in_each_core() {
    let mut g = random_grid(2, 2, vec![2, 3, 2, 2], 2, 5);
    let base = g.contract().unwrap();
    let scaled = g.core(1, 0).scale(-2.5);
    g.set_core(1, 0, scaled).unwrap();
    assert!(rel_err(&g.contract().unwrap(), &base.scale(-2.5)) <= 1e-13);
}

#[test]
fn environment_of_all_ones_grid() {
    let shape = GridShape::uniform(2, 2, 2).unwrap();
    let cores = (0..4).map(|_| DenseTensor::<f64>::ones(vec![1, 1, 1, 1, 2]).unwrap()).collect();
    let g = TensorGrid::new(shape, TgRanks::uniform(2, 2, 1).unwrap(), cores).unwrap();
    let e = g.environment(0, 0).unwrap();
    assert_eq!((e.rows(), e.cols()), (1, 8));
    assert!(e.data().iter().all(|&v| v == 1.0));
}

#[test]
fn environment_matches_brute_force() {
    let shape = GridShape::new(2, 2, vec![2, 3, 2, 2]).unwrap();
    let ranks = TgRanks::new(2, 2, vec![2, 3], vec![2, 1]).unwrap();
    let g = tg_random::<f64>(&shape, &ranks, 9).unwrap();
    let bonds = all_bonds(&g);
    let sizes = shape.tensor_shape();
    for n in 0..2 {
        for m in 0..2 {
            let e = g.environment(m, n).unwrap();
            let [rl, rr, ru, rd] = ranks.site_bonds(m, n);
            let k = shape.mode(m, n);
            let rest: Vec<usize> = (0..4).filter(|&q| q != k).collect();
            assert_eq!(e.rows(), rl * rr * ru * rd);
            for col in 0..e.cols() {
                // decode the column into the remaining modes, first fastest
                let mut phys = vec![0; 4];
                let mut c = col;
                for &q in &rest {
                    phys[q] = c % sizes[q];
                    c /= sizes[q];
                }
                for row in 0..e.rows() {
                    let pinned = [row % rl, (row / rl) % rr, (row / (rl * rr)) % ru, row / (rl * rr * ru)];
                    let want = brute_entry(&g, &bonds, &phys, Some(((m, n), pinned)));
                    assert!((e.get(row, col) - want).abs() <= 1e-12 * (1.0 + want.abs()));
                }
            }
        }
    }
}

#[test]
fn environment_rejects_out_of_grid_site() {
    let g = random_grid(2, 2, vec![2; 4], 1, 0);
    assert!(matches!(g.environment(2, 0), Err(Error::Argument(_))));
    assert!(matches!(g.environment(0, 5), Err(Error::Argument(_))));
}

fn check_consistency(g: &TensorGrid<f64>) -> Result<(), TestCaseError> {
    let full = g.contract().unwrap();
    let scale = full.frobenius_norm();
    for n in 0..g.shape().cols() {
        for m in 0..g.shape().rows() {
            let unfolded = g.core(m, n).mode_unfold(4).unwrap();
            let prod = unfolded.matmul(&g.environment(m, n).unwrap()).unwrap();
            let folded = DenseTensor::mode_fold(&prod, full.shape(), g.shape().mode(m, n)).unwrap();
            let err = folded.distance(&full).unwrap();
            prop_assert!(err <= 1e-10 * scale, "site ({m}, {n}): {err} vs {scale}");
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn environment_times_core_reproduces_contraction(
        rows in 1usize..=3,
        cols in 1usize..=3,
        sizes in proptest::collection::vec(1usize..=4, 9),
        bonds in proptest::collection::vec(1usize..=3, 12),
        seed in any::<u64>(),
    ) {
        let shape = GridShape::new(rows, cols, sizes[..rows * cols].to_vec()).unwrap();
        let nr = rows * (cols - 1);
        let nc = (rows - 1) * cols;
        let ranks = TgRanks::new(rows, cols, bonds[..nr].to_vec(), bonds[nr..nr + nc].to_vec()).unwrap();
        let g = tg_random::<f64>(&shape, &ranks, seed).unwrap();
        check_consistency(&g)?;
    }

    #[test]
    fn upper_bounds_transpose(
        rows in 1usize..=4,
        cols in 1usize..=4,
        sizes in proptest::collection::vec(1usize..=6, 16),
    ) {
        let shape = GridShape::new(rows, cols, sizes[..rows * cols].to_vec()).unwrap();
        prop_assert_eq!(rank_upper_bounds(&shape.transpose()), rank_upper_bounds(&shape).transpose());
    }
}

#[test]
fn consistency_on_full_three_by_three() {
    let g = random_grid(3, 3, vec![4; 9], 3, 21);
    check_consistency(&g).unwrap();
}

#[test]
fn random_grid_has_nonzero_contraction() {
    let g = random_grid(3, 3, vec![4; 9], 2, 1);
    let norm = g.contract().unwrap().frobenius_norm();
    assert!(norm.is_finite() && norm > 0.0);
}

#[test]
fn rank_one_grid_is_outer_product() {
    let g = random_grid(2, 2, vec![2, 3, 2, 2], 1, 8);
    let x = g.contract().unwrap();
    let oracle = DenseTensor::from_fn(vec![2, 3, 2, 2], |i| {
        (0..4).map(|k| g.cores()[k].data()[i[k]]).product()
    })
    .unwrap();
    assert!(rel_err(&x, &oracle) <= 1e-14);
}

#[test]
fn dmrg_recovers_rank_one_tensor() {
    let shape = GridShape::new(2, 3, vec![3, 2, 4, 2, 3, 3]).unwrap();
    let truth = tg_random::<f64>(&shape, &TgRanks::uniform(2, 3, 1).unwrap(), 4)
        .unwrap()
        .contract()
        .unwrap();
    let g = two_stage_dmrg(&truth, &shape, &TgRanks::uniform(2, 3, 1).unwrap(), 1e-2, 0).unwrap();
    assert!(rel_err(&g.contract().unwrap(), &truth) <= 1e-10);
}

#[test]
fn dmrg_phase_one_is_exact_at_merged_bounds() {
    let shape = GridShape::uniform(2, 2, 2).unwrap();
    let targets = TgRanks::uniform(2, 2, 2).unwrap();
    let truth = tg_random::<f64>(&shape, &targets, 12).unwrap().contract().unwrap();
    let tt = horizontal_phase(&truth, &shape, &targets).unwrap();
    assert_eq!(tt.ranks(), vec![4]);
    let x = tt.contract().unwrap().into_reshape(&[2, 2, 2, 2]).unwrap();
    assert!(rel_err(&x, &truth) <= 1e-10);
}

#[test]
fn dmrg_without_padding_reproduces_the_column_train() {
    // Row 1 has unit horizontal bonds, so the vertical caps hold every
    // column core exactly and no bond is short of its target.
    let shape = GridShape::uniform(2, 2, 3).unwrap();
    let targets = TgRanks::new(2, 2, vec![2, 1], vec![3, 3]).unwrap();
    let truth = tg_random::<f64>(&shape, &TgRanks::uniform(2, 2, 3).unwrap(), 6)
        .unwrap()
        .contract()
        .unwrap();
    let tt = horizontal_phase(&truth, &shape, &targets).unwrap();
    let a = vertical_phase(&tt, &shape, &targets, 0.0, 1).unwrap();
    let b = two_stage_dmrg(&truth, &shape, &targets, 0.0, 99).unwrap();
    assert_eq!(a, b);
    let phase_one = tt.contract().unwrap().into_reshape(shape.tensor_shape()).unwrap();
    assert!(rel_err(&a.contract().unwrap(), &phase_one) <= 1e-10);
}

#[test]
fn dmrg_single_row_and_single_column_are_exact_at_bounds() {
    for shape in [
        GridShape::new(1, 3, vec![2, 3, 4]).unwrap(),
        GridShape::new(3, 1, vec![2, 3, 4]).unwrap(),
    ] {
        let bounds = rank_upper_bounds(&shape);
        let truth = DenseTensor::from_fn(shape.tensor_shape().to_vec(), |i| {
            ((i[0] * 7 + i[1] * 3 + i[2] * 5) % 11) as f64 - 4.0
        })
        .unwrap();
        let g = two_stage_dmrg(&truth, &shape, &bounds, 0.0, 0).unwrap();
        assert!(rel_err(&g.contract().unwrap(), &truth) <= 1e-10);
    }
}

#[test]
fn dmrg_pads_short_bonds_to_targets() {
    // The tensor has row rank 1 everywhere, so every bond above 1 is padding.
    let shape = GridShape::uniform(2, 2, 3).unwrap();
    let truth = tg_random::<f64>(&shape, &TgRanks::uniform(2, 2, 1).unwrap(), 2)
        .unwrap()
        .contract()
        .unwrap();
    let targets = TgRanks::uniform(2, 2, 2).unwrap();
    let g = two_stage_dmrg(&truth, &shape, &targets, 1e-2, 3).unwrap();
    assert_eq!(g.ranks(), &targets);
    let again = two_stage_dmrg(&truth, &shape, &targets, 1e-2, 3).unwrap();
    assert_eq!(g, again);
    // padding is small relative to the signal
    let re = rel_err(&g.contract().unwrap(), &truth);
    assert!(re < 0.1, "{re}");
    let unpadded = two_stage_dmrg(&truth, &shape, &targets, 0.0, 3).unwrap();
    assert!(rel_err(&unpadded.contract().unwrap(), &truth) <= 1e-10);
}

#[test]
fn dmrg_rejects_targets_above_bounds() {
    let shape = GridShape::uniform(2, 2, 2).unwrap();
    let x = DenseTensor::<f64>::ones(vec![2; 4]).unwrap();
    let too_big = TgRanks::uniform(2, 2, 3).unwrap();
    assert!(matches!(
        two_stage_dmrg(&x, &shape, &too_big, 0.0, 0),
        Err(Error::Argument(_))
    ));
    assert!(matches!(
        two_stage_dmrg(&x, &shape, &TgRanks::uniform(2, 2, 1).unwrap(), -1.0, 0),
        Err(Error::Argument(_))
    ));
    let wrong_shape = DenseTensor::<f64>::ones(vec![2; 3]).unwrap();
    assert!(two_stage_dmrg(&wrong_shape, &shape, &TgRanks::uniform(2, 2, 1).unwrap(), 0.0, 0).is_err());
}
