//! Randomized invariants, kept small so the suite stays fast.

use std::sync::Arc;

use nalgebra::DMatrix;
use proptest::prelude::*;
use uglt::generators::diag_sampling;
use uglt::grid::{domain_grid, DomainSpec, MultiIndex};
use uglt::selection::{extend, restrict, SelectionMap};
use uglt::spectral::{p_of_values, singular_values, w1_distance};

fn p_cfg() -> ProptestConfig {
    ProptestConfig { cases: 48, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(p_cfg())]

    /// p always lands in [0, 1] and is bounded by the largest value.
    #[test]
    fn p_is_in_unit_interval(values in proptest::collection::vec(-10.0f64..10.0, 1..40)) {
        let abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
        let p = p_of_values(&abs);
        prop_assert!((0.0..=1.0).contains(&p));
        let max = abs.iter().cloned().fold(0.0f64, f64::max);
        prop_assert!(p <= max + 1e-15);
    }

    /// Subadditivity of the p functional over matrix sums.
    #[test]
    fn p_is_subadditive(seed_a in 0u64..1000, seed_b in 0u64..1000, dim in 2usize..12) {
        use rand::{Rng, SeedableRng};
        let mk = |seed: u64| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            DMatrix::from_fn(dim, dim, |_, _| rng.random::<f64>() - 0.5)
        };
        let a = mk(seed_a);
        let b = mk(seed_b.wrapping_add(7919));
        let p = |m: &DMatrix<f64>| {
            p_of_values(&singular_values(m, 100).unwrap().values)
        };
        prop_assert!(p(&(&a + &b)) <= p(&a) + p(&b) + 1e-12);
    }

    /// R(E(B)) = B exactly on random axis-box subgrids of the unit square.
    #[test]
    fn restrict_after_extend_is_identity(
        a1 in 0usize..5, a2 in 0usize..5, w1_ in 1usize..5, w2 in 1usize..5, seed in 0u64..500,
    ) {
        use rand::{Rng, SeedableRng};
        let m = 6usize;
        let lo = vec![a1 as f64 / m as f64, a2 as f64 / m as f64];
        let hi = vec![
            ((a1 + w1_).min(m)) as f64 / m as f64,
            ((a2 + w2).min(m)) as f64 / m as f64,
        ];
        let sub = DomainSpec::axis_box(lo, hi).unwrap();
        let n = MultiIndex::square(2, m);
        let small = Arc::new(domain_grid(&n, &sub).unwrap());
        let big = Arc::new(domain_grid(&n, &DomainSpec::unit_square()).unwrap());
        prop_assume!(small.dim() > 0);
        let map = SelectionMap::new(small.clone(), big).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let b = DMatrix::from_fn(small.dim(), small.dim(), |_, _| rng.random::<f64>());
        let back = restrict(&map, &extend(&map, &b).unwrap()).unwrap();
        prop_assert_eq!(back, b);
    }

    /// W1 of a constant shift equals the shift (equal-sized samples).
    #[test]
    fn w1_translation(values in proptest::collection::vec(-5.0f64..5.0, 2..60), c in -3.0f64..3.0) {
        let shifted: Vec<f64> = values.iter().map(|v| v + c).collect();
        let d = w1_distance(&values, &shifted);
        prop_assert!((d - c.abs()).abs() < 1e-12);
    }

    /// W1 is symmetric and vanishes on identical samples.
    #[test]
    fn w1_symmetry(a in proptest::collection::vec(-5.0f64..5.0, 1..40),
                   b in proptest::collection::vec(-5.0f64..5.0, 1..40)) {
        prop_assert!(w1_distance(&a, &a) == 0.0);
        prop_assert!((w1_distance(&a, &b) - w1_distance(&b, &a)).abs() < 1e-15);
    }

    /// Diagonal sampling is exact: entry k equals the function at point k.
    #[test]
    fn diag_sampling_matches_points(m in 2usize..10, scale in 0.1f64..3.0) {
        let dom = DomainSpec::unit_square();
        let grid = domain_grid(&MultiIndex::square(2, m), &dom).unwrap();
        let f = move |x: &[f64]| scale * (x[0] + 2.0 * x[1]);
        let d = diag_sampling(&grid, &f).unwrap();
        for k in 0..grid.dim() {
            prop_assert_eq!(d[k], f(&grid.point(k)));
        }
    }
}
