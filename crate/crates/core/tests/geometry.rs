use std::sync::OnceLock;

use eulerci::geometry::sphere::{rational_sphere_points, stereographic, to_f64, Rational};
use eulerci::geometry::{compute_eta, find_direction_system, projection, DirectionSystem, FAMILIES};
use eulerci::lattice;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn system() -> &'static DirectionSystem {
    static S: OnceLock<DirectionSystem> = OnceLock::new();
    S.get_or_init(|| find_direction_system(12).unwrap())
}

fn random_ball(r0: f64, rng: &mut impl Rng) -> [f64; 9] {
    let mut s = [0.0; 9];
    for i in 0..3 {
        for j in i..3 {
            let x = rng.gen_range(-1.0..1.0);
            s[3 * i + j] = x;
            s[3 * j + i] = x;
        }
    }
    let n = DirectionSystem::distance_from_identity(&std::array::from_fn(|q| {
        s[q] + [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0][q]
    }));
    let scale = r0 * rng.gen_range(0.0..0.999) / n;
    std::array::from_fn(|q| s[q] * scale + if q % 4 == 0 { 1.0 } else { 0.0 })
}

#[test]
fn stereographic_examples() {
    let z = Rational::from_integer(0);
    let one = Rational::from_integer(1);
    let p = stereographic(z, z);
    assert_eq!(to_f64(&p), [0.0, 0.0, -1.0]);
    assert_eq!(to_f64(&stereographic(one, z)), [1.0, 0.0, 0.0]);
    assert_eq!(to_f64(&stereographic(z, one)), [0.0, 1.0, 0.0]);
    for q in rational_sphere_points(2) {
        let s = q[0] * q[0] + q[1] * q[1] + q[2] * q[2];
        assert_eq!(s, one);
    }
}

#[test]
fn families_are_disjoint_and_symmetric() {
    let s = system();
    assert_eq!(s.families().len(), FAMILIES);
    let shell = lattice::shell(s.radius_sq());
    let mut seen = std::collections::BTreeSet::new();
    for j in 0..FAMILIES {
        let set = s.lambda_set(j);
        assert!(set.len() <= 98);
        for k in &set {
            assert!(shell.binary_search(k).is_ok());
            assert!(set.contains(&lattice::neg(*k)));
            assert!(seen.insert(*k), "{k:?} in two families");
        }
    }
}

#[test]
fn reconstruction_inside_the_domain() {
    let s = system();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for j in 0..FAMILIES {
        let active = s.active(j);
        let mut g = vec![0.0; active.len()];
        for _ in 0..200 {
            let r = random_ball(s.r0(), &mut rng);
            s.gammas_into(j, &r, &mut g);
            let mut acc = [0.0; 9];
            for (k, gk) in active.iter().zip(&g) {
                assert!(*gk > 0.0);
                let m = projection(*k);
                for q in 0..9 {
                    acc[q] += gk * gk * m[q];
                }
            }
            let err = (0..9).map(|q| (acc[q] - r[q]).abs()).fold(0.0, f64::max);
            assert!(err < 1e-10, "family {j}: {err}");
        }
    }
}

#[test]
fn amplitudes_are_even_and_checked() {
    let s = system();
    let id = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
    let k = s.active(2)[0];
    assert_eq!(s.gamma(2, k, &id).unwrap(), s.gamma(2, lattice::neg(k), &id).unwrap());
    assert!(s.gamma(3, k, &id).is_err());
    assert!(s.gamma(FAMILIES, k, &id).is_err());
    let mut far = id;
    far[0] += 2.0 * s.r0();
    assert!(s.gamma(2, k, &far).is_err());
    assert!(s.min_weight(&id) > 0.0);
}

#[test]
fn squared_amplitudes_are_affine() {
    // γ² is linear in R, so central differences are exact up to rounding.
    let s = system();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let r = random_ball(0.5 * s.r0(), &mut rng);
    let dir = random_ball(1.0, &mut rng);
    let h = 1e-4 * s.r0();
    let n = s.active(0).len();
    let (mut a, mut b, mut c) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let plus: [f64; 9] = std::array::from_fn(|q| r[q] + h * (dir[q] - if q % 4 == 0 { 1.0 } else { 0.0 }));
    let minus: [f64; 9] = std::array::from_fn(|q| 2.0 * r[q] - plus[q]);
    s.weights_into(0, &plus, &mut a);
    s.weights_into(0, &minus, &mut b);
    s.weights_into(0, &r, &mut c);
    for q in 0..n {
        assert!((0.5 * (a[q] + b[q]) - c[q]).abs() < 1e-12);
    }
}

#[test]
fn eta_is_linear_in_the_energy_floor() {
    let s = system();
    let vol = 8.0 * std::f64::consts::PI.powi(3);
    let eta = compute_eta(s, 1.0);
    assert!((eta - s.r0() / (24.0 * vol)).abs() < 1e-20);
    assert!((compute_eta(s, 3.0) - 3.0 * eta).abs() < 1e-18);
    // r₀ = 0.1 at unit energy floor would give 1.6797e−5.
    assert!((0.1 / (24.0 * vol) - 1.6797e-5).abs() < 1e-9);
}

#[test]
fn text_round_trip() {
    let s = system();
    let back = DirectionSystem::from_text(&s.to_text()).unwrap();
    assert_eq!(back.radius_sq(), s.radius_sq());
    assert_eq!(back.families(), s.families());
    assert_eq!(back.r0(), s.r0());
    assert!(DirectionSystem::from_text("garbage").is_err());
}
