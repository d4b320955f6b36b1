mod common;

use common::*;
use lindbladkit::channels::{kraus_to_spectral, spectral_to_kraus};
use lindbladkit::linalg::{ComplexMatrix, C64};
use lindbladkit::lindblad::{superoperator_residual, GRAM_TOLERANCE};
use lindbladkit::states::{
    basis_density_matrices, basis_expansion, functional_nullity_witness, validate_density,
};
use lindbladkit::superop::{
    choi_matrix, cp_check, positive_on_basis, spectral_decompose, superop_from_action,
    trace_constraint_defect, SpectralChannel, CP_TOLERANCE,
};
use lindbladkit::{KrausChannel, LindbladGenerator, LinearMap};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_generator(n: usize, ops: usize, r: &mut ChaCha8Rng) -> LindbladGenerator {
    let h = random_hermitian(n, r).scale_real(0.5);
    let ls = (0..ops)
        .map(|_| random_matrix(n, r).scale_real(0.5))
        .collect();
    LindbladGenerator::new(h, ls).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn choi_and_spectral_eigenvalues_agree(seed in any::<u64>(), n in 2usize..=3) {
        let mut r = rng(seed);
        let s = random_tp_map(n, &mut r);
        let spectral = spectral_decompose(&s).unwrap();
        let choi = choi_matrix(&s).unwrap().eigenvalues().unwrap();
        prop_assert!(max_sorted_diff(choi, spectral.eigenvalues().to_vec()) < 1e-9);
        prop_assert!((spectral.eigenvalue_sum() - n as f64).abs() < 1e-8);
        prop_assert!(trace_constraint_defect(&spectral) < 1e-9);
        prop_assert!(spectral.orthonormality_defect() < 1e-9);
        // the spectral form reproduces the map
        let rho = random_hermitian(n, &mut r);
        prop_assert!(spectral.apply(&rho).max_abs_diff(&s.apply(&rho)) < 1e-9);
    }

    #[test]
    fn basis_expansion_reconstructs(seed in any::<u64>(), n in 2usize..=4) {
        let mut r = rng(seed);
        let h = random_hermitian(n, &mut r);
        let c = basis_expansion(&h).unwrap();
        let basis = basis_density_matrices(n).unwrap();
        let mut sum = ComplexMatrix::zeros(n, n);
        for (ci, b) in c.iter().zip(&basis) {
            prop_assert!(ci.im.abs() < 1e-12);
            sum += &b.matrix().scale(*ci);
        }
        prop_assert!(sum.max_abs_diff(&h) < 1e-12);
    }

    #[test]
    fn trace_functional_witness_tracks_constraint(seed in any::<u64>(), scale in 0.5f64..1.5) {
        let mut r = rng(seed);
        let s = random_tp_map(2, &mut r);
        let mut sc = spectral_decompose(&s).unwrap();
        if (scale - 1.0).abs() > 1e-3 {
            let ev: Vec<f64> = sc.eigenvalues().iter().map(|l| l * scale).collect();
            sc = SpectralChannel::new(2, ev, sc.eigenops().to_vec()).unwrap();
        }
        let mut constraint = ComplexMatrix::identity(2).scale_real(-1.0);
        for (l, e) in sc.eigenvalues().iter().zip(sc.eigenops()) {
            constraint += &(&e.adjoint() * e).scale_real(*l);
        }
        let f = |rho: &ComplexMatrix| (&constraint * rho).trace();
        let witness = functional_nullity_witness(f, 2).unwrap();
        let defect = trace_constraint_defect(&sc);
        prop_assert!(witness.max_abs_diff(&constraint) < 1e-12);
        prop_assert_eq!(witness.max_abs() < 1e-9, defect < 1e-9);
    }

    #[test]
    fn generator_annihilates_trace_and_keeps_hermiticity(seed in any::<u64>(), n in 2usize..=4, ops in 0usize..=5) {
        let mut r = rng(seed);
        let g = random_generator(n, ops, &mut r);
        let rho = random_hermitian(n, &mut r);
        let d = g.apply_generator(&rho).unwrap();
        prop_assert!(d.trace().norm() <= 1e-12 * d.max_abs().max(1.0));
        prop_assert!(d.hermiticity_defect() < 1e-12);
    }

    #[test]
    fn unitary_mixing_leaves_generator_unchanged(seed in any::<u64>(), ops in 1usize..=4) {
        let mut r = rng(seed);
        let g = random_generator(2, ops, &mut r);
        // random unitary from the eigenvectors of a random Hermitian matrix
        let u = lindbladkit::linalg::hermitian_eig(&random_hermitian(ops, &mut r), 1e-12)
            .unwrap()
            .vectors;
        let mixed: Vec<ComplexMatrix> = (0..ops)
            .map(|a| {
                let mut m = ComplexMatrix::zeros(2, 2);
                for (b, l) in g.lindblad_ops().iter().enumerate() {
                    m += &l.scale(u[(a, b)]);
                }
                m
            })
            .collect();
        let g2 = LindbladGenerator::new(g.hamiltonian().clone(), mixed).unwrap();
        prop_assert!(superoperator_residual(&g, &g2).unwrap() < 1e-10);
    }

    #[test]
    fn canonical_form_preserves_generator(seed in any::<u64>(), n in 2usize..=3, ops in 1usize..=10) {
        let mut r = rng(seed);
        let g = random_generator(n, ops, &mut r);
        let c = g.canonicalize(GRAM_TOLERANCE).unwrap();
        prop_assert!(c.ops().len() < n * n);
        prop_assert!(c.rates().iter().all(|&x| x >= -1e-12));
        let (tr, ortho) = c.defects();
        prop_assert!(tr < 1e-9 && ortho < 1e-9);
        let back = c.to_generator().unwrap();
        prop_assert!(superoperator_residual(&g, &back).unwrap() < 1e-10);
        // idempotence on rates
        let again = back.canonicalize(GRAM_TOLERANCE).unwrap();
        prop_assert_eq!(again.rates().len(), c.rates().len());
        prop_assert!(max_sorted_diff(again.rates().to_vec(), c.rates().to_vec()) < 1e-9);
    }

    #[test]
    fn kraus_spectral_round_trip(seed in any::<u64>(), count in 1usize..=6) {
        let mut r = rng(seed);
        let k = KrausChannel::random(2, count, &mut r).unwrap();
        let back = spectral_to_kraus(&kraus_to_spectral(&k).unwrap(), 1e-9).unwrap();
        let rho = random_state(2, &mut r);
        let a = k.apply_kraus(&rho).unwrap();
        let b = back.apply_kraus(&rho).unwrap();
        prop_assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-8);
        prop_assert!(validate_density(a.matrix(), 1e-10).unwrap().is_valid());
    }

    #[test]
    fn cp_maps_are_positive(seed in any::<u64>(), n in 2usize..=3, count in 1usize..=5) {
        let mut r = rng(seed);
        let k = KrausChannel::random(n, count, &mut r).unwrap();
        prop_assert!(cp_check(&k, CP_TOLERANCE).unwrap().is_cp());
        prop_assert!(positive_on_basis(&k, 1e-9).unwrap());
    }

    #[test]
    fn superop_reproduces_action(seed in any::<u64>(), n in 2usize..=4) {
        let mut r = rng(seed);
        let a = random_matrix(n, &mut r);
        let b = random_matrix(n, &mut r);
        let map = lindbladkit::FnMap::new(n, |m: &ComplexMatrix| &(&a * m) * &b);
        let s = superop_from_action(&map).unwrap();
        let x = random_matrix(n, &mut r);
        prop_assert!(s.apply(&x).max_abs_diff(&map.apply(&x)) < 1e-10 * (1.0 + map.apply(&x).max_abs()));
    }
}

#[test]
fn unitary_kraus_keeps_eigenvalues() {
    let mut r = rng(5);
    for _ in 0..10 {
        let g = random_hermitian(3, &mut r);
        let u = lindbladkit::linalg::expm(&g.scale(C64::new(0.0, -1.0))).unwrap();
        let k = KrausChannel::unitary(u).unwrap();
        assert!(k.completeness_defect() < 1e-12);
        let rho = random_state(3, &mut r);
        let out = k.apply_kraus(&rho).unwrap();
        let before = lindbladkit::linalg::hermitian_eig(rho.matrix(), 1e-12)
            .unwrap()
            .values;
        let after = lindbladkit::linalg::hermitian_eig(out.matrix(), 1e-12)
            .unwrap()
            .values;
        assert!(max_sorted_diff(before, after) < 1e-12);
    }
}
