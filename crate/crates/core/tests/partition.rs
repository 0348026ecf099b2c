use eulerci::diagnostics::RateFit;
use eulerci::partition::{class_of, nearest_in_class, smooth_step, PhasePartition};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const K: [i64; 3] = [8, 4, 1];

fn random_v(rng: &mut impl Rng) -> [f64; 3] {
    std::array::from_fn(|_| rng.gen_range(-1.0..1.0))
}

#[test]
fn radii_are_validated() {
    assert!(PhasePartition::new(0.9, 0.95).is_ok());
    assert!(PhasePartition::new(0.8, 0.95).is_err());
    assert!(PhasePartition::new(0.95, 0.9).is_err());
    assert!(PhasePartition::new(0.9, 1.0).is_err());
    let p = PhasePartition::default();
    assert!(p.phase(8, K, [0.0; 3], 0.0, 4.0).is_err());
}

#[test]
fn smooth_step_shape() {
    assert_eq!(smooth_step(-0.5), 0.0);
    assert_eq!(smooth_step(1.5), 1.0);
    assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
    assert!((smooth_step(0.3) + smooth_step(0.7) - 1.0).abs() < 1e-15);
}

#[test]
fn bump_support_and_normalization() {
    let p = PhasePartition::default();
    assert_eq!(p.alpha([0, 0, 0], [0.0; 3]), 1.0);
    assert_eq!(p.alpha([2, -1, 3], [2.0, -1.0, 3.0]), 1.0);
    assert_eq!(p.bump([0.96, 0.0, 0.0]), 0.0);
    assert_eq!(p.bump([0.5, 0.5, 0.5]), 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10_000 {
        let u: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-5.0..5.0));
        let s: f64 = p.active(u).iter().map(|(_, a)| a * a).sum();
        assert!((s - 1.0).abs() < 1e-12);
        // Brute-force oracle over a neighbourhood of lattice points.
        let mut brute = 0.0;
        for a in -1..=2 {
            for b in -1..=2 {
                for c in -1..=2 {
                    let l = [
                        u[0].floor() as i64 + a,
                        u[1].floor() as i64 + b,
                        u[2].floor() as i64 + c,
                    ];
                    brute += p.alpha(l, u).powi(2);
                }
            }
        }
        assert!((brute - 1.0).abs() < 1e-12);
    }
}

#[test]
fn classes_hold_one_active_point() {
    let p = PhasePartition::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..2_000 {
        let u: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-5.0..5.0));
        for j in 0..8 {
            let l = nearest_in_class(j, u);
            assert_eq!(class_of(l), j);
            // Every other class member is outside the support.
            for d in [[2, 0, 0], [0, -2, 0], [0, 0, 2]] {
                let o = [l[0] + d[0], l[1] + d[1], l[2] + d[2]];
                assert_eq!(p.alpha(o, u), 0.0);
            }
        }
    }
}

#[test]
fn phases_form_a_unit_sum_of_squares() {
    let p = PhasePartition::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20_000 {
        let v = random_v(&mut rng);
        let tau = rng.gen_range(-10.0..10.0);
        let s: f64 = (0..8).map(|j| p.phase(j, K, v, tau, 8.0).unwrap().norm_sqr()).sum();
        assert!((s - 1.0).abs() < 1e-12);
        let a = p.phase(3, K, v, tau, 8.0).unwrap().norm();
        let b = p.phase(3, K, v, 0.0, 8.0).unwrap().norm();
        assert!((a - b).abs() < 1e-15);
    }
}

#[test]
fn transport_defect_matches_finite_differences() {
    let p = PhasePartition::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let h = 1e-4;
    for _ in 0..500 {
        let v = random_v(&mut rng);
        let tau = rng.gen_range(-3.0..3.0);
        let j = rng.gen_range(0..8);
        let mu = 4.0;
        let central =
            |h: f64| (p.phase(j, K, v, tau + h, mu).unwrap() - p.phase(j, K, v, tau - h, mu).unwrap()) / (2.0 * h);
        // One Richardson step removes the h² term.
        let fd = (4.0 * central(h / 2.0) - central(h)) / 3.0;
        let kv: f64 = (0..3).map(|i| K[i] as f64 * v[i]).sum();
        let lhs = fd + num_complex::Complex64::new(0.0, kv) * p.phase(j, K, v, tau, mu).unwrap();
        let d = p.transport_defect(j, K, v, tau, mu).unwrap();
        assert!((lhs - d).norm() < 1e-8, "{lhs} vs {d}");
    }
}

fn defect_sup(p: &PhasePartition, mu: f64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut sup = 0.0f64;
    for _ in 0..20_000 {
        let v = random_v(&mut rng);
        for j in 0..8 {
            sup = sup.max(p.transport_defect(j, K, v, 0.3, mu).unwrap().norm());
        }
    }
    sup
}

#[test]
fn transport_defect_decays_like_inverse_mu() {
    let p = PhasePartition::default();
    let mus = [4.0, 8.0, 16.0, 32.0];
    let sups: Vec<f64> = mus.iter().map(|m| defect_sup(&p, *m)).collect();
    let fit = RateFit::fit(&mus, &sups).unwrap();
    assert!(fit.relative_error(-1.0) < 0.1, "slope {}", fit.slope);
}

#[test]
fn velocity_derivatives_grow_like_mu() {
    let p = PhasePartition::default();
    let mus = [4.0, 8.0, 16.0, 32.0];
    let h = 1e-6;
    let sups: Vec<f64> = mus
        .iter()
        .map(|&mu| {
            let mut rng = ChaCha8Rng::seed_from_u64(6);
            let mut sup = 0.0f64;
            for _ in 0..20_000 {
                let v = random_v(&mut rng);
                let w = [v[0] + h, v[1], v[2]];
                for j in 0..8 {
                    let a = p.phase(j, K, v, 0.0, mu).unwrap().norm();
                    let b = p.phase(j, K, w, 0.0, mu).unwrap().norm();
                    sup = sup.max((b - a).abs() / h);
                }
            }
            sup
        })
        .collect();
    let fit = RateFit::fit(&mus, &sups).unwrap();
    assert!(fit.relative_error(1.0) < 0.15, "slope {}", fit.slope);
}

proptest! {
    #[test]
    fn alpha_is_periodic(u in prop::array::uniform3(-4.0f64..4.0), l in prop::array::uniform3(-3i64..3)) {
        let p = PhasePartition::default();
        let shifted = [u[0] + l[0] as f64, u[1] + l[1] as f64, u[2] + l[2] as f64];
        prop_assert!((p.psi(u) - p.psi(shifted)).abs() < 1e-12);
        prop_assert!(p.psi(u) >= 1.0 - 1e-12);
    }
}
