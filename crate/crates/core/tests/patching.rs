mod common;

use common::{max_abs_diff, perturb, random_tensor, rng};
use hsi_restore::patching::PatchGrid;
use hsi_restore::{Error, Tensor3};
use proptest::prelude::*;
use rand::Rng;

fn recount(grid: &PatchGrid) -> Vec<u32> {
    let (m, n, _) = grid.dims();
    let (pr, pc) = grid.patch_size();
    let mut out = vec![0u32; m * n];
    for i in 0..m {
        for j in 0..n {
            for &(r, c) in grid.corners() {
                if i >= r && i < r + pr && j >= c && j < c + pc {
                    out[i * n + j] += 1;
                }
            }
        }
    }
    out
}

#[test]
fn grid_examples() {
    let g = PatchGrid::new((4, 4, 2), (4, 4), (4, 4)).unwrap();
    assert_eq!(g.corners(), &[(0, 0)]);
    assert!(g.coverage().iter().all(|&c| c == 1));

    let g = PatchGrid::new((6, 6, 1), (4, 4), (2, 2)).unwrap();
    assert_eq!(g.corners(), &[(0, 0), (0, 2), (2, 0), (2, 2)]);
    assert_eq!(g.coverage(), recount(&g).as_slice());
    for i in 2..4 {
        for j in 2..4 {
            assert_eq!(g.coverage()[i * 6 + j], 4);
        }
    }

    let g = PatchGrid::new((5, 4, 1), (4, 4), (4, 4)).unwrap();
    assert_eq!(g.corners(), &[(0, 0), (1, 0)]);
}

#[test]
fn oversized_patch_is_rejected() {
    assert!(matches!(
        PatchGrid::new((5, 5, 3), (6, 2), (1, 1)),
        Err(Error::PatchLargerThanImage { .. })
    ));
}

#[test]
fn gapped_stride_is_rejected() {
    assert!(matches!(PatchGrid::new((1, 3, 1), (1, 1), (1, 2)), Err(Error::InvalidParameter(_))));
}

#[test]
fn extract_matches_loop_oracle() {
    let mut r = rng(4);
    let t = random_tensor((13, 11, 3), &mut r);
    let g = PatchGrid::new((13, 11, 3), (5, 4), (3, 3)).unwrap();
    for _ in 0..10 {
        let k = r.random_range(0..g.len());
        let (cr, cc) = g.corners()[k];
        let patch = g.extract(&t, k).unwrap();
        for q in 0..3 {
            for i in 0..5 {
                for j in 0..4 {
                    assert_eq!(patch.get(i, j, q), t.get(cr + i, cc + j, q));
                }
            }
        }
    }
    assert!(matches!(g.extract(&t, g.len()), Err(Error::IndexOutOfRange { .. })));
    let single = PatchGrid::new((13, 11, 3), (1, 1), (1, 1)).unwrap();
    assert_eq!(single.extract(&t, 0).unwrap().as_slice(), t.tube(0, 0).as_slice());
    let full = PatchGrid::new((13, 11, 3), (13, 11), (1, 1)).unwrap();
    assert_eq!(full.extract(&t, 0).unwrap(), t);
}

#[test]
fn aggregate_matches_scatter_add_oracle() {
    let mut r = rng(17);
    let g = PatchGrid::new((6, 6, 2), (4, 4), (2, 2)).unwrap();
    let patches: Vec<Tensor3> = (0..g.len()).map(|_| random_tensor((4, 4, 2), &mut r)).collect();
    let mut sum = Tensor3::zeros((6, 6, 2));
    for (k, p) in patches.iter().enumerate() {
        let (cr, cc) = g.corners()[k];
        for q in 0..2 {
            for i in 0..4 {
                for j in 0..4 {
                    let v = sum.get(cr + i, cc + j, q) + p.get(i, j, q);
                    sum.set(cr + i, cc + j, q, v);
                }
            }
        }
    }
    let counts = recount(&g);
    let oracle = Tensor3::from_fn((6, 6, 2), |i, j, q| sum.get(i, j, q) / counts[i * 6 + j] as f64);
    let indexed: Vec<(usize, Tensor3)> = patches.iter().cloned().enumerate().rev().collect();
    let agg = g.aggregate(&indexed).unwrap();
    assert!(max_abs_diff(agg.as_slice(), oracle.as_slice()) < 1e-12);
}

#[test]
fn aggregate_detects_missing_and_duplicate_windows() {
    let g = PatchGrid::new((6, 6, 1), (4, 4), (2, 2)).unwrap();
    let z = Tensor3::zeros((4, 4, 1));
    let missing: Vec<(usize, Tensor3)> = (0..3).map(|k| (k, z.clone())).collect();
    assert!(matches!(g.aggregate(&missing), Err(Error::MissingWindow(3))));
    let dup = vec![(0, z.clone()), (0, z.clone()), (1, z.clone()), (2, z)];
    assert!(matches!(g.aggregate(&dup), Err(Error::DuplicateWindow(0))));
}

#[test]
fn aggregate_of_constant_patches_is_constant() {
    let g = PatchGrid::new((7, 5, 2), (4, 4), (2, 2)).unwrap();
    let patches: Vec<Tensor3> = (0..g.len()).map(|_| Tensor3::filled((4, 4, 2), 0.25)).collect();
    let agg = g.aggregate_ordered(&patches).unwrap();
    assert!(agg.as_slice().iter().all(|&v| (v - 0.25).abs() < 1e-15));
}

#[test]
fn update_j_examples() {
    let mut r = rng(21);
    let x = random_tensor((4, 4, 2), &mut r);
    let l = random_tensor((4, 4, 2), &mut r);
    let z = Tensor3::zeros((4, 4, 2));
    let full = PatchGrid::new((4, 4, 2), (4, 4), (4, 4)).unwrap();
    let j = full.update_j(&x, &z, &[l.clone()], &[z.clone()], 0.7).unwrap();
    let half = &(&x + &l) * 0.5;
    assert!(max_abs_diff(j.as_slice(), half.as_slice()) < 1e-15);

    let tiles = PatchGrid::new((4, 4, 2), (2, 2), (2, 2)).unwrap();
    let l_patches = tiles.extract_all(&x).unwrap();
    let lam = vec![Tensor3::zeros((2, 2, 2)); tiles.len()];
    let j = tiles.update_j(&x, &z, &l_patches, &lam, 0.7).unwrap();
    assert!(max_abs_diff(j.as_slice(), x.as_slice()) < 1e-15);
}

fn j_objective(
    g: &PatchGrid,
    j: &Tensor3,
    x: &Tensor3,
    lam_x: &Tensor3,
    ls: &[Tensor3],
    lams: &[Tensor3],
    mu: f64,
) -> f64 {
    let mut d = j - x;
    d.axpy(1.0 / mu, lam_x);
    let mut total = 0.5 * mu * d.frobenius_norm().powi(2);
    for (k, (l, lam)) in ls.iter().zip(lams).enumerate() {
        let mut e = l - &g.extract(j, k).unwrap();
        e.axpy(1.0 / mu, lam);
        total += 0.5 * mu * e.frobenius_norm().powi(2);
    }
    total
}

#[test]
fn update_j_beats_random_perturbations() {
    let mut r = rng(33);
    let g = PatchGrid::new((5, 5, 4), (3, 3), (2, 2)).unwrap();
    let x = random_tensor((5, 5, 4), &mut r);
    let lam_x = random_tensor((5, 5, 4), &mut r);
    let ls: Vec<Tensor3> = (0..g.len()).map(|_| random_tensor((3, 3, 4), &mut r)).collect();
    let lams: Vec<Tensor3> = (0..g.len()).map(|_| random_tensor((3, 3, 4), &mut r)).collect();
    let mu = 1.3;
    let j = g.update_j(&x, &lam_x, &ls, &lams, mu).unwrap();
    let best = j_objective(&g, &j, &x, &lam_x, &ls, &lams, mu);
    for _ in 0..1000 {
        let cand = perturb(&j, 1e-3, &mut r);
        assert!(best <= j_objective(&g, &cand, &x, &lam_x, &ls, &lams, mu) + 1e-9);
    }
}

fn grid_case() -> impl Strategy<Value = (PatchGrid, u64)> {
    (1usize..14, 1usize..14, 1usize..4)
        .prop_flat_map(|(m, n, p)| (Just((m, n, p)), 1..=m, 1..=n))
        .prop_flat_map(|(dims, pr, pc)| (Just(dims), Just((pr, pc)), 1..=pr, 1..=pc, any::<u64>()))
        .prop_map(|(dims, patch, sr, sc, seed)| (PatchGrid::new(dims, patch, (sr, sc)).unwrap(), seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn coverage_is_total_and_recounted((g, _) in grid_case()) {
        let (m, n, _) = g.dims();
        let (pr, pc) = g.patch_size();
        prop_assert!(g.corners().iter().all(|&(r, c)| r + pr <= m && c + pc <= n));
        prop_assert!(g.coverage().iter().all(|&c| c >= 1));
        let counts = recount(&g);
        prop_assert_eq!(g.coverage(), counts.as_slice());
    }

    #[test]
    fn adjoint_identity((g, seed) in grid_case()) {
        let mut r = rng(seed);
        let x = random_tensor(g.dims(), &mut r);
        for k in 0..g.len() {
            let y = random_tensor(g.patch_dims(), &mut r);
            let lhs = g.extract(&x, k).unwrap().dot(&y);
            let rhs = x.dot(&g.adjoint(k, &y).unwrap());
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        }
    }

    #[test]
    fn aggregate_inverts_extract((g, seed) in grid_case()) {
        let t = random_tensor(g.dims(), &mut rng(seed));
        let back = g.aggregate_ordered(&g.extract_all(&t).unwrap()).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn ones_scatter_to_coverage((g, _) in grid_case()) {
        let ones = vec![Tensor3::filled(g.patch_dims(), 1.0); g.len()];
        let sum = g.scatter_sum(&ones).unwrap();
        prop_assert_eq!(sum, g.coverage_tensor());
    }
}
