use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use qnsc_core::signal::{
    apply_symplectic, coherent_inner_product, diagonal_phase_matrix, inverse_unitary, CodeWord, ComplexAmp,
    SymplecticMatrix,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-ish unitary: Q factor of a complex Gaussian matrix.
fn dense_unitary(n: usize, rng: &mut ChaCha8Rng) -> SymplecticMatrix {
    let g = DMatrix::from_fn(n, n, |_, _| gaussian(rng));
    SymplecticMatrix::new(g.qr().q()).unwrap()
}

fn diagonal_unitary(n: usize, rng: &mut ChaCha8Rng) -> SymplecticMatrix {
    let phases: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
    diagonal_phase_matrix(&phases).unwrap()
}

fn random_codeword(n: usize, rng: &mut ChaCha8Rng) -> CodeWord {
    let v: Vec<Complex64> = (0..n).map(|_| 5.0 * gaussian(rng)).collect();
    CodeWord::from_complex(&v).unwrap()
}

fn check_suite(make: fn(usize, &mut ChaCha8Rng) -> SymplecticMatrix, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..1000 {
        let n = rng.random_range(1..=12);
        let l = make(n, &mut rng);
        assert!(l.is_unitary(), "defect {}", l.unitarity_defect());
        let cw = random_codeword(n, &mut rng);
        let out = apply_symplectic(&l, &cw).unwrap();
        assert!((out.norm() - cw.norm()).abs() <= 1e-12 * cw.norm());
        let back = apply_symplectic(&inverse_unitary(&l).unwrap(), &out).unwrap();
        for (a, b) in back.iter().zip(cw.iter()) {
            assert!((a.value() - b.value()).norm() <= 1e-12 * cw.norm().max(1.0));
        }
    }
}

#[test]
fn diagonal_unitaries_preserve_norm_and_invert() {
    check_suite(diagonal_unitary, 101);
}

#[test]
fn dense_unitaries_preserve_norm_and_invert() {
    check_suite(dense_unitary, 202);
}

#[test]
fn inner_product_modulus_at_most_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for _ in 0..1000 {
        let a = ComplexAmp::from_polar(rng.random_range(0.0..=50.0), rng.random_range(0.0..6.3)).unwrap();
        let b = ComplexAmp::from_polar(rng.random_range(0.0..=50.0), rng.random_range(0.0..6.3)).unwrap();
        assert!(coherent_inner_product(a, b).norm() <= 1.0);
    }
}

proptest! {
    #[test]
    fn diagonal_phase_matrix_is_unitary(phases in prop::collection::vec(-1e3f64..1e3, 1..32)) {
        prop_assert!(diagonal_phase_matrix(&phases).unwrap().is_unitary());
    }

    #[test]
    fn self_overlap_is_one(re in -50f64..50.0, im in -50f64..50.0) {
        let a = ComplexAmp::new(re, im).unwrap();
        let o = coherent_inner_product(a, a);
        prop_assert!((o - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn overlap_is_conjugate_symmetric(
        ar in -10f64..10.0, ai in -10f64..10.0, br in -10f64..10.0, bi in -10f64..10.0,
    ) {
        let a = ComplexAmp::new(ar, ai).unwrap();
        let b = ComplexAmp::new(br, bi).unwrap();
        let d = coherent_inner_product(a, b) - coherent_inner_product(b, a).conj();
        prop_assert!(d.norm() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_an_error(n in 1usize..8, extra in 1usize..4) {
        let l = SymplecticMatrix::identity(n).unwrap();
        let cw = CodeWord::from_complex(&vec![Complex64::new(1.0, 0.0); n + extra]).unwrap();
        prop_assert!(apply_symplectic(&l, &cw).is_err());
    }
}
