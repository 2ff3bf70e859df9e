use adasvd::adaptive::DEGENERATE_RTOL;
use adasvd::{
    normalize_sigma, reinit_iii, svd_append, svd_append_with, svd_comp, threshold_index,
    AppendConfig, FactoredBasis,
};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

/// Batch singular values, descending.
fn batch_sigma(a: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

fn batch_left(a: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let svd = a.clone().svd(true, false);
    let u = svd.u.unwrap();
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    DMatrix::from_fn(a.nrows(), k, |r, c| u[(r, order[c])])
}

/// Largest principal angle between the column spans of two orthonormal
/// matrices of equal width, via `‖(I - Q1 Q1ᵀ) Q2‖₂ = sin θ_max`.
fn max_principal_angle(q1: &DMatrix<f64>, q2: &DMatrix<f64>) -> f64 {
    let residual = q2 - q1 * (q1.transpose() * q2);
    let s = residual.svd(false, false).singular_values.max();
    s.min(1.0).asin()
}

fn orthonormality_error(b: &FactoredBasis) -> f64 {
    let u = b.left_vectors(b.rank());
    (u.transpose() * &u - DMatrix::identity(b.rank(), b.rank())).amax()
}

fn incremental(a: &DMatrix<f64>, block: usize) -> FactoredBasis {
    let mut basis = FactoredBasis::empty(a.nrows());
    let mut c = 0;
    while c < a.ncols() {
        let m = block.min(a.ncols() - c);
        basis = svd_append(&basis, &a.columns(c, m).into_owned(), 0.0).unwrap().0;
        c += m;
    }
    basis
}

#[test]
fn incremental_matches_batch_on_random_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let a = random(&mut rng, 120, 30);
        let basis = incremental(&a, 4);
        let expected = batch_sigma(&a);
        assert_eq!(basis.rank(), 30);
        for (s, e) in basis.sigma().iter().zip(&expected) {
            assert!((s - e).abs() <= 1e-8 * e, "{s} vs {e}");
        }
        let k = 10;
        let angle = max_principal_angle(&batch_left(&a, k), &basis.left_vectors(k));
        assert!(angle < 1e-6, "principal angle {angle}");
        assert!(orthonormality_error(&basis) < 1e-10);
    }
}

#[test]
fn low_rank_input_stops_at_true_rank() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let a = random(&mut rng, 80, 4) * random(&mut rng, 4, 24);
    let basis = incremental(&a, 6);
    assert_eq!(basis.rank(), 4);
    let expected = batch_sigma(&a);
    for (s, e) in basis.sigma().iter().zip(&expected) {
        assert!((s - e).abs() <= 1e-8 * e);
    }
}

#[test]
fn rejected_columns_have_small_pivots() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let a = random(&mut rng, 60, 8);
    let (basis, _) = svd_append(&FactoredBasis::empty(60), &a, 0.0).unwrap();
    let tau_star = 0.2;
    let i_hat = threshold_index(basis.sigma(), tau_star).0;
    let basis = basis.with_i_hat(i_hat);
    let mut block = random(&mut rng, 60, 5);
    for (j, scale) in [1e-3, 2.0, 1e-2, 3.0, 5e-3].iter().enumerate() {
        block.column_mut(j).scale_mut(*scale);
    }
    let (_, report) = svd_append(&basis, &block, tau_star).unwrap();
    assert!(report.tau > 0.0);
    assert!(report.rejected_frames.contains(&0));
    let largest = block.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    for (step, p) in report.pivots.iter().enumerate() {
        if step < report.accepted {
            assert!(*p >= report.tau);
        } else {
            assert!(*p < report.tau || *p <= DEGENERATE_RTOL * largest);
        }
    }
}

#[test]
fn reinit_preserves_leading_subspace() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for ell in [1, 5, 12] {
        let a = random(&mut rng, 90, 20);
        let basis = incremental(&a, 5);
        let small = reinit_iii(&basis, ell);
        assert_eq!(small.rank(), ell);
        assert_eq!(small.householder().len(), ell);
        assert_eq!(small.sigma(), &basis.sigma()[..ell]);
        let angle = max_principal_angle(&basis.left_vectors(ell), &small.left_vectors(ell));
        assert!(angle < 1e-8, "angle {angle}");
        assert!(orthonormality_error(&small) < 1e-10);
    }
}

#[test]
fn orthonormality_survives_long_mixed_histories() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let d = 150;
    let a = random(&mut rng, d, 10);
    let mut basis = svd_comp(&a, 8, 0.5).unwrap();
    for step in 0..40 {
        let block = random(&mut rng, d, 6);
        let cfg = AppendConfig {
            tau_star: 0.5,
            max_rank: 25,
            force: step % 5 == 0,
        };
        basis = svd_append_with(&basis, &block, &cfg).unwrap().0;
        assert!(basis.rank() <= 25);
        if basis.rank() == 25 {
            basis = normalize_sigma(&reinit_iii(&basis, 8), 30.0).unwrap();
        }
        assert!(orthonormality_error(&basis) < 1e-10, "step {step}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn threshold_index_is_scale_equivariant(
        mut sigma in proptest::collection::vec(0.0f64..100.0, 1..30),
        tau_star in 0.0f64..20.0,
        c in 1e-3f64..1e3,
    ) {
        sigma.sort_by(|a, b| b.total_cmp(a));
        let (i, tau) = threshold_index(&sigma, tau_star);
        let scaled: Vec<f64> = sigma.iter().map(|s| s * c).collect();
        let (j, tau_c) = threshold_index(&scaled, tau_star * c);
        // Gaps within rounding distance of the threshold may flip.
        let near_tie = sigma.windows(2).any(|w| ((w[0] - w[1]) - tau_star).abs() < 1e-9 * (1.0 + tau_star));
        if !near_tie {
            prop_assert_eq!(i, j);
            prop_assert!((tau_c - c * tau).abs() <= 1e-9 * tau_c.abs().max(1.0));
        }
    }

    #[test]
    fn normalization_keeps_threshold_index(seed in 0u64..1000, rho in 0.5f64..50.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random(&mut rng, 40, 12);
        let basis = incremental(&a, 12);
        let tau_star = 0.3;
        let before = threshold_index(basis.sigma(), tau_star).0;
        let out = normalize_sigma(&basis, rho).unwrap();
        prop_assert!(out.sigma_norm() <= rho * (1.0 + 1e-12));
        let scale = out.sigma_norm() / basis.sigma_norm();
        let after = threshold_index(out.sigma(), tau_star * scale).0;
        let near_tie = basis.sigma().windows(2).any(|w| ((w[0] - w[1]) - tau_star).abs() < 1e-9);
        if !near_tie {
            prop_assert_eq!(before, after);
        }
    }

    #[test]
    fn frobenius_norm_is_conserved(seed in 0u64..10_000, block in 1usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random(&mut rng, 50, 20);
        let basis = incremental(&a, block);
        let energy: f64 = basis.sigma().iter().map(|s| s * s).sum();
        let fro = a.norm_squared();
        prop_assert!((energy - fro).abs() <= 1e-8 * fro);
    }
}
