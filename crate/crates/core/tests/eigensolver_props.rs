use hhbar_core::eigensolver::{self, ConditioningPolicy};
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    (&a + a.transpose()) * 0.5
}

/// `Q diag(s) Qᵀ` with `s` spread over `decades` orders of magnitude.
fn graded_overlap(rng: &mut ChaCha8Rng, n: usize, decades: f64) -> DMatrix<f64> {
    let q = SymmetricEigen::new(random_symmetric(rng, n)).eigenvectors;
    let s = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |i, _| {
        10f64.powf(-decades * i as f64 / (n - 1) as f64)
    }));
    let m = &q * s * q.transpose();
    (&m + m.transpose()) * 0.5
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn matches_cholesky_reduction(seed in any::<u64>(), n in 2usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_symmetric(&mut rng, n);
        let s = graded_overlap(&mut rng, n, 3.0);
        let result = eigensolver::solve(&h, &s, ConditioningPolicy::default()).unwrap();
        prop_assert_eq!(result.retained_dimension, n);

        let l = s.clone().cholesky().unwrap().l();
        let l_inv = l.try_inverse().unwrap();
        let reduced = &l_inv * &h * l_inv.transpose();
        let mut oracle: Vec<f64> = SymmetricEigen::new((&reduced + reduced.transpose()) * 0.5).eigenvalues.iter().copied().collect();
        oracle.sort_by(f64::total_cmp);
        let scale = oracle.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (e, o) in result.eigenvalues.iter().zip(&oracle) {
            prop_assert!((e - o).abs() < 1e-9 * scale, "{} vs {}", e, o);
        }
    }

    #[test]
    fn vectors_are_s_orthonormal_and_sorted(seed in any::<u64>(), n in 2usize..40, compensated in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_symmetric(&mut rng, n);
        // The Gram error grows like ε·cond(S); six decades keeps it well inside 1e-8.
        let s = graded_overlap(&mut rng, n, 6.0);
        let policy = ConditioningPolicy { compensated, ..ConditioningPolicy::default() };
        let result = eigensolver::solve(&h, &s, policy).unwrap();
        prop_assert!(result.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        let c = &result.coefficients;
        let gram = c.transpose() * &s * c;
        let identity = DMatrix::<f64>::identity(result.retained_dimension, result.retained_dimension);
        prop_assert!((gram - identity).amax() < 1e-8);
        prop_assert!(eigensolver::residual_check(&h, &s, &result) < 1e-9);
    }

    #[test]
    fn retaining_more_directions_lowers_eigenvalues(seed in any::<u64>(), n in 6usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_symmetric(&mut rng, n);
        let s = graded_overlap(&mut rng, n, 14.0);
        let loose = eigensolver::solve(&h, &s, ConditioningPolicy::with_cutoff(1e-6)).unwrap();
        let tight = eigensolver::solve(&h, &s, ConditioningPolicy::with_cutoff(1e-10)).unwrap();
        prop_assert!(tight.retained_dimension >= loose.retained_dimension);
        for (t, l) in tight.eigenvalues.iter().zip(&loose.eigenvalues) {
            prop_assert!(*t <= l + 1e-8 * (1.0 + l.abs()), "{} > {}", t, l);
        }
    }

    #[test]
    fn output_is_deterministic(seed in any::<u64>(), n in 2usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_symmetric(&mut rng, n);
        let s = graded_overlap(&mut rng, n, 6.0);
        let a = eigensolver::solve(&h, &s, ConditioningPolicy::default()).unwrap();
        let b = eigensolver::solve(&h, &s, ConditioningPolicy::default()).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn collapse_when_cutoff_excludes_everything() {
    let s = DMatrix::from_diagonal_element(3, 3, 0.0);
    let h = DMatrix::identity(3, 3);
    assert!(matches!(
        eigensolver::solve(&h, &s, ConditioningPolicy::default()),
        Err(eigensolver::EigenError::BasisCollapse { .. })
    ));
}
