mod common;

use common::*;
use eulerci::calculus::{div_rows, divergence, gradient, laplacian};
use eulerci::field::{MatrixField, ScalarField, VectorField};
use eulerci::grid::{Grid3, TimeGrid};
use eulerci::operators::*;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn instant() -> TimeGrid {
    TimeGrid::instant(0.0).unwrap()
}

fn shifted(f: &ScalarField, a: [f64; 3]) -> ScalarField {
    // f(x + a): multiply by e^{iK·a}.
    f.map_coeffs(|k, c| c * Complex64::from_polar(1.0, k[0] * a[0] + k[1] * a[1] + k[2] * a[2]))
}

fn shifted_vector(v: &VectorField, a: [f64; 3]) -> VectorField {
    v.map(|c| shifted(c, a))
}

#[test]
fn inverse_laplacian_of_a_product_of_sines() {
    let g = Grid3::new(16, 1).unwrap();
    let f = ScalarField::from_fn(g, instant(), |_, x| (2.0 * x[0]).sin() * (3.0 * x[1]).sin());
    let u = inverse_laplacian(&f);
    assert!(rel_scalar(&u, &f.scale(-1.0 / 13.0)) < 1e-14);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let h = random_scalar(g, &instant(), 99, &mut rng);
    let mut centred = h.clone();
    let mean = h.mean(0);
    centred.add_mode(0, [0, 0, 0], Complex64::new(-mean, 0.0)).unwrap();
    assert!(rel_scalar(&laplacian(&inverse_laplacian(&h)), &centred) < 1e-13);
    assert_eq!(inverse_laplacian(&h).mean(0), 0.0);
}

#[test]
fn inverse_laplacian_scales_with_stride() {
    let g = Grid3::new(16, 4).unwrap();
    // Stored mode (1,0,0) is cos(4x); Δ⁻¹ divides by −16.
    let mut f = ScalarField::zeros(g, instant());
    f.set_mode(0, [1, 0, 0], Complex64::new(0.5, 0.0)).unwrap();
    assert!(max_grid_error(&inverse_laplacian(&f), 0, |x| -(4.0 * x[0]).cos() / 16.0) < 1e-15);
}

#[test]
fn leray_examples() {
    let g = Grid3::new(16, 1).unwrap();
    let t = instant();
    let f = ScalarField::from_fn(g, t.clone(), |_, x| (x[0] + 2.0 * x[1]).sin() * x[2].cos());
    let grad = gradient(&f);
    assert!(rel_vector(&leray_q(&grad).unwrap(), &grad) < 1e-13);
    assert!(leray_p(&grad).unwrap().max_coeff() < 1e-13);
    let z = ScalarField::zeros(g, t.clone());
    let shear = VectorField::new([
        ScalarField::from_fn(g, t.clone(), |_, x| x[1].sin()),
        z.clone(),
        z.clone(),
    ])
    .unwrap();
    assert!(leray_q(&shear).unwrap().max_coeff() < 1e-15);
    assert!(rel_vector(&leray_p(&shear).unwrap(), &shear) < 1e-15);
    // A constant survives Q and is removed by P.
    let mut c = VectorField::zeros(g, t);
    c.comp_mut(1).set_mode(0, [0, 0, 0], Complex64::new(2.0, 0.0)).unwrap();
    assert_eq!(leray_q(&c).unwrap().mean(0), [0.0, 2.0, 0.0]);
    assert_eq!(leray_p(&c).unwrap().max_coeff(), 0.0);
}

#[test]
fn inverse_divergence_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let g = Grid3::new(16, 3).unwrap();
    let v = random_vector(g, &instant(), 99, &mut rng);
    let r = inverse_divergence(&v).unwrap();
    assert!(r.is_symmetric() && r.is_trace_free());
    let mut centred = v.clone();
    for i in 0..3 {
        let m = v.comp(i).mean(0);
        centred
            .comp_mut(i)
            .add_mode(0, [0, 0, 0], Complex64::new(-m, 0.0))
            .unwrap();
    }
    assert!(rel_vector(&div_rows(&r).unwrap(), &centred) < 1e-12);
    assert!(rel_matrix(&r, &r.transpose()) < 1e-15);
    assert!(r.trace().unwrap().max_coeff() < 1e-13);
    for i in 0..3 {
        for j in 0..3 {
            assert!(r.comp(i, j).mean(0).abs() < 1e-15);
        }
    }
}

#[test]
fn inverse_divergence_of_a_single_mode() {
    // v = (0, cos x, 0) has R v = sin x (e₁⊗e₂ + e₂⊗e₁), checked by hand.
    let g = Grid3::new(8, 1).unwrap();
    let t = instant();
    let z = ScalarField::zeros(g, t.clone());
    let v = VectorField::new([z.clone(), ScalarField::from_fn(g, t, |_, x| x[0].cos()), z]).unwrap();
    let r = inverse_divergence(&v).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let expect = if (i, j) == (0, 1) || (i, j) == (1, 0) { 1.0 } else { 0.0 };
            assert!(
                max_grid_error(r.comp(i, j), 0, |x| expect * x[0].sin()) < 1e-15,
                "{i}{j}"
            );
        }
    }
}

#[test]
fn fused_operators_match_compositions() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let g = Grid3::new(16, 2).unwrap();
    let a = random_symmetric(g, &instant(), 99, &mut rng);
    let div = div_rows(&a).unwrap();
    let fused = inverse_divergence_of_div(&a).unwrap();
    assert!(rel_matrix(&fused, &inverse_divergence(&div).unwrap()) < 1e-13);
    let fused_q = inverse_divergence_of_q_div(&a).unwrap();
    let composed = inverse_divergence(&leray_q(&div).unwrap()).unwrap();
    assert!(rel_matrix(&fused_q, &composed) < 1e-13);
    let ldd = inverse_laplacian_div_div(&a).unwrap();
    assert!(rel_scalar(&ldd, &inverse_laplacian(&divergence(&div).unwrap())) < 1e-13);
}

#[test]
fn inverse_divergence_of_div_recovers_the_trace_free_part() {
    // For a symmetric trace-free A with div A ⊥ constants, R div A differs
    // from A by a divergence-free symmetric field; its divergence matches.
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let g = Grid3::new(12, 1).unwrap();
    let a = random_symmetric(g, &instant(), 99, &mut rng);
    let b = inverse_divergence_of_div(&a).unwrap();
    assert!(rel_vector(&div_rows(&b).unwrap(), &div_rows(&a).unwrap()) < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn multipliers_commute_with_translations(
        seed in any::<u64>(),
        a in prop::array::uniform3(-3.0f64..3.0),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Grid3::new(12, 1).unwrap();
        let v = random_vector(g, &instant(), 99, &mut rng);
        let sv = shifted_vector(&v, a);
        let lhs = leray_p(&sv).unwrap();
        let rhs = shifted_vector(&leray_p(&v).unwrap(), a);
        prop_assert!(rel_vector(&lhs, &rhs) < 1e-13);
        let lhs = inverse_divergence(&sv).unwrap();
        let r = inverse_divergence(&v).unwrap();
        let rhs = MatrixField::new(r.comps().iter().map(|c| shifted(c, a)).collect()).unwrap();
        prop_assert!(rel_matrix(&lhs, &rhs) < 1e-13);
    }

    #[test]
    fn projections_split_fields(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Grid3::new(12, 5).unwrap();
        let v = random_vector(g, &instant(), 99, &mut rng);
        let p = leray_p(&v).unwrap();
        let q = leray_q(&v).unwrap();
        prop_assert!(rel_vector(&p.add(&q).unwrap(), &v) < 1e-14);
        prop_assert!(divergence(&p).unwrap().max_coeff() < 1e-12);
        prop_assert!(rel_vector(&leray_p(&p).unwrap(), &p) < 1e-14);
    }
}
