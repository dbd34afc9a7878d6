//! Property tests over seeded random states.

use entmeasure::bounds::{check_bounds, is_negativity_tight, negativity_lower_bound};
use entmeasure::filters::{
    apply_filter, bell_diagonal_normal_form, wootters_decomposition, FilterPair, NORMAL_FORM_MAX_ITERS,
    NORMAL_FORM_TOL,
};
use entmeasure::matcore::herm_eig;
use entmeasure::measures::{concurrence, eof, negativity, partial_transpose_eig, partial_transpose_mat};
use entmeasure::states::{
    bell_basis, bell_diagonal, from_json, mems_rank2, rng_from_seed, sample_bell_diagonal_with,
    sample_pure_with, sample_random, sample_su2_with, to_json, DensityMatrix,
};
use entmeasure::{Mat4, C64};
use proptest::prelude::*;

fn state(rank: usize, seed: u64) -> DensityMatrix {
    sample_random(rank, seed).unwrap()
}

fn measures(rho: &DensityMatrix) -> [f64; 3] {
    [negativity(rho), concurrence(rho), eof(rho)]
}

proptest! {
    #[test]
    fn negativity_between_the_curves(rank in 1usize..=4, seed: u64) {
        let v = check_bounds(&state(rank, seed));
        prop_assert!(v.upper_ok && v.lower_ok, "{v:?}");
        prop_assert!((v.slack_upper - (v.concurrence - v.negativity)).abs() == 0.0);
        prop_assert!((v.slack_lower - (v.negativity - v.lower_curve)).abs() == 0.0);
        prop_assert_eq!(v.upper_ok, v.slack_upper >= -1e-9);
        prop_assert_eq!(v.lower_ok, v.slack_lower >= -1e-9);
    }

    #[test]
    fn lower_curve_below_diagonal(c in 0.0f64..=1.0) {
        let n = negativity_lower_bound(c).unwrap();
        prop_assert!(n <= c + 1e-15);
        prop_assert!((n * n + 2.0 * n * (1.0 - c) - c * c).abs() <= 1e-12);
        if c > 1e-6 && c < 1.0 - 1e-6 {
            prop_assert!(n < c);
        }
    }

    #[test]
    fn measures_invariant_under_local_unitaries(rank in 1usize..=4, seed: u64) {
        let rho = state(rank, seed);
        let mut rng = rng_from_seed(seed ^ 0x5eed);
        let (u, v) = (sample_su2_with(&mut rng), sample_su2_with(&mut rng));
        let moved = rho.local_unitary(&u, &v).unwrap();
        for (a, b) in measures(&rho).iter().zip(measures(&moved)) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn entangled_partial_transpose_has_one_negative_eigenvalue(rank in 1usize..=4, seed: u64) {
        let rho = state(rank, seed);
        let e = partial_transpose_eig(&rho);
        if e.values[0] < -1e-9 {
            prop_assert!(e.values[1] > 0.0, "{:?}", e.values);
        }
    }

    #[test]
    fn pure_and_bell_diagonal_states_are_upper_tight(seed: u64) {
        let mut rng = rng_from_seed(seed);
        let pure = sample_pure_with(&mut rng).density();
        let bd = bell_diagonal(&sample_bell_diagonal_with(&mut rng));
        for rho in [pure, bd] {
            prop_assert!((negativity(&rho) - concurrence(&rho)).abs() <= 1e-9);
            if negativity(&rho) > 1e-9 {
                prop_assert!(is_negativity_tight(&rho).unwrap());
            }
        }
    }

    #[test]
    fn tight_states_have_equal_measures(rank in 1usize..=4, seed: u64) {
        let rho = state(rank, seed);
        if negativity(&rho) > 1e-9 && is_negativity_tight(&rho).unwrap() {
            prop_assert!((negativity(&rho) - concurrence(&rho)).abs() <= 1e-7);
        }
    }

    #[test]
    fn decomposition_makes_the_upper_bound_manifest(rank in 1usize..=4, seed: u64) {
        let rho = state(rank, seed);
        let d = wootters_decomposition(&rho).unwrap();
        prop_assert!((d.weight_sum() - 1.0).abs() <= 1e-10);
        prop_assert!((d.reconstruct() - *rho.mat()).frobenius_norm() <= 1e-9);
        let c = concurrence(&rho);
        let mut bound = 0.0;
        for (w, psi) in &d.elements {
            prop_assert!((psi.concurrence() - c).abs() <= 1e-8);
            bound += w * herm_eig(&partial_transpose_mat(psi.density().mat())).unwrap().min();
        }
        prop_assert!(partial_transpose_eig(&rho).min() >= bound - 1e-9);
    }

    #[test]
    fn unitary_filters_preserve_measures(rank in 1usize..=4, seed: u64) {
        let rho = state(rank, seed);
        let mut rng = rng_from_seed(!seed);
        let f = FilterPair::new(sample_su2_with(&mut rng), sample_su2_with(&mut rng)).unwrap();
        let out = apply_filter(&rho, &f).unwrap();
        for (a, b) in measures(&rho).iter().zip(measures(&out)) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn normal_form_is_idempotent(seed: u64) {
        let rho = state(4, seed);
        prop_assume!(rho.eigenvalues()[0] > 1e-6);
        let first = bell_diagonal_normal_form(&rho, NORMAL_FORM_MAX_ITERS, NORMAL_FORM_TOL).unwrap();
        let second =
            bell_diagonal_normal_form(&first.state, NORMAL_FORM_MAX_ITERS, NORMAL_FORM_TOL).unwrap();
        // The second pass only needs local unitaries: both filters are
        // unitary up to their unit determinant.
        for s in second.filter.singular_values() {
            prop_assert!((s - 1.0).abs() <= 1e-6, "{:?}", second.filter.singular_values());
        }
        for (a, b) in first.spec.lambdas().iter().zip(second.spec.lambdas()) {
            prop_assert!((a - b).abs() <= 1e-8);
        }
    }

    #[test]
    fn state_files_round_trip(rank in 1usize..=4, seed: u64) {
        let rho = state(rank, seed);
        let back = from_json(&to_json(&rho)).unwrap();
        prop_assert_eq!(back.mat(), rho.mat());
    }

    #[test]
    fn bell_diagonal_commutes_with_bell_projectors(seed: u64) {
        let spec = sample_bell_diagonal_with(&mut rng_from_seed(seed));
        let rho = bell_diagonal(&spec);
        for psi in bell_basis() {
            let p = *psi.density().mat();
            prop_assert!((p * *rho.mat() - *rho.mat() * p).frobenius_norm() <= 1e-12);
        }
        let mut want = spec.lambdas();
        want.sort_by(f64::total_cmp);
        for (a, b) in rho.eigenvalues().iter().zip(want) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn mems_has_one_negative_partial_transpose_eigenvalue(c in 0.001f64..=1.0) {
        let values = partial_transpose_eig(&mems_rank2(c).unwrap()).values;
        prop_assert!(values[0] < 0.0 && values[1] >= 0.0, "{values:?}");
    }
}

#[test]
fn random_states_are_valid_density_matrices() {
    for seed in 0..10_000u64 {
        let rho = state(4, seed);
        let m: &Mat4 = rho.mat();
        assert!((m.trace() - C64::new(1.0, 0.0)).norm() <= 1e-12);
        assert!(rho.eigenvalues()[0] >= -1e-10);
        assert!(m.hermiticity_defect() <= 1e-10);
    }
}
