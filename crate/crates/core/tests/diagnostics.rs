mod common;

use std::f64::consts::PI;

use common::*;
use eulerci::beltrami::{assemble_flow, BeltramiBasis, BeltramiCoefficients};
use eulerci::calculus::norm_squared;
use eulerci::diagnostics::*;
use eulerci::field::{ScalarField, VectorField};
use eulerci::grid::{Dealias, Grid3, TimeGrid};
use eulerci::profile::EnergyProfile;
use eulerci::stage::{build_reynolds, EulerReynoldsState};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn instant() -> TimeGrid {
    TimeGrid::instant(0.0).unwrap()
}

/// `sup_h 2 sin(h/2) / h^α` by a dense scan.
fn sine_seminorm(alpha: f64) -> f64 {
    (1..=314_000)
        .map(|i| {
            let h = i as f64 * 1e-5;
            2.0 * (h / 2.0).sin() / h.powf(alpha)
        })
        .fold(0.0, f64::max)
}

#[test]
fn constants_have_no_seminorm() {
    let g = Grid3::new(16, 1).unwrap();
    let mut c = ScalarField::zeros(g, instant());
    c.set_mode(0, [0, 0, 0], Complex64::new(2.0, 0.0)).unwrap();
    let h = holder_norm(&[&c], 1.5).unwrap();
    assert!((h.sup() - 2.0).abs() < 1e-14);
    assert!(h.seminorms[1] < 1e-14);
    assert!(h.fractional.unwrap() < 1e-14);
    assert!(!h.underresolved);
    assert!(holder_norm(&[&c], 3.0).is_err());
    assert!(holder_norm(&[], 0.5).is_err());
}

#[test]
fn half_seminorm_of_sine() {
    let g = Grid3::new(64, 1).unwrap();
    let f = ScalarField::from_fn(g, instant(), |_, x| x[0].sin());
    let h = holder_norm(&[&f], 0.5).unwrap();
    let exact = sine_seminorm(0.5);
    let got = h.fractional.unwrap();
    assert!(got <= exact * (1.0 + 1e-12));
    assert!((got - exact).abs() < 0.05 * exact, "{got} vs {exact}");
    assert!((h.sup() - 1.0).abs() < 1e-3);
    let h1 = holder_norm(&[&f], 1.0).unwrap();
    assert!((h1.seminorms[1] - 1.0).abs() < 1e-3);
    assert!(h1.fractional.is_none());
}

#[test]
fn seminorm_scales_with_frequency() {
    let g = Grid3::new(96, 1).unwrap();
    let lambdas = [1.0, 2.0, 4.0, 8.0];
    let alpha = 0.3;
    let vals: Vec<f64> = lambdas
        .iter()
        .map(|l| {
            let f = ScalarField::from_fn(g, instant(), |_, x| (l * x[0]).sin());
            holder_norm(&[&f], alpha).unwrap().fractional.unwrap()
        })
        .collect();
    let fit = RateFit::fit(&lambdas, &vals).unwrap();
    assert!(fit.relative_error(alpha) < 0.1, "slope {}", fit.slope);
}

#[test]
fn product_constant_is_moderate() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let g = Grid3::new(24, 1).unwrap();
    for _ in 0..3 {
        let f = random_scalar(g, &instant(), 3, &mut rng);
        let h = random_scalar(g, &instant(), 3, &mut rng);
        let c = product_constant(&f, &h, 0.5).unwrap();
        assert!(c > 0.0 && c <= 10.0, "{c}");
    }
}

#[test]
fn band_limited_amplitudes_average_to_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let g = Grid3::new(32, 1).unwrap();
    let a = random_scalar(g, &instant(), 3, &mut rng);
    let d = oscillatory_average_decay(&a, [1, 2, 0], &[1, 2, 3, 4, 8]);
    assert!(d.values[0] > 0.0);
    assert_eq!(d.exact_zero_from, Some(2));
    assert!(d.fit.is_none());
}

#[test]
fn smooth_amplitudes_decay_fast() {
    let g = Grid3::with_dealias(128, 1, Dealias { num: 1, den: 1 }).unwrap();
    let w = 0.12f64;
    let a = ScalarField::from_fn(g, instant(), |_, x| {
        let r2: f64 = x.iter().map(|c| (c - PI).powi(2)).sum();
        (-r2 / (2.0 * w * w)).exp()
    });
    let d = oscillatory_average_decay(&a, [1, 0, 0], &[12, 16, 24, 32]);
    let fit = d.fit.unwrap();
    assert!(fit.slope < -4.0, "slope {}", fit.slope);
}

#[test]
fn gradient_of_a_pure_oscillation() {
    let g = Grid3::new(48, 1).unwrap();
    let mut one = ScalarField::zeros(g, instant());
    one.set_mode(0, [0, 0, 0], Complex64::new(1.0, 0.0)).unwrap();
    // ∇φ = k sin(λk·x)/(λ|k|²); the sup is taken per component.
    for (k, norm) in [([1, 0, 0], 1.0), ([1, 1, 0], 2.0)] {
        let est = oscillatory_gradient_estimate(&one, k, &[2, 3, 4, 6], 0.1).unwrap();
        for row in &est.rows {
            let want = 1.0 / (row.lambda as f64 * norm);
            assert!((row.sup - want).abs() < 1e-3 * want, "{} vs {want}", row.sup);
        }
    }
    let k = [1, 1, 0];
    assert!(modulate_cos(&one, k, 40).is_err());
}

#[test]
fn gradient_estimate_for_a_smooth_bump() {
    let g = Grid3::new(96, 1).unwrap();
    let a = ScalarField::from_fn(g, instant(), |_, x| (x[0].cos() + x[1].sin()).exp() * 0.1);
    // Trim to a small band so the modulation stays inside the box.
    let a = a.map_coeffs(|k, c| {
        if k.iter().all(|v| v.abs() <= 6.0) {
            c
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let est = oscillatory_gradient_estimate(&a, [1, 0, 0], &[4, 8, 16, 24], 0.1).unwrap();
    let fit = est.fit.unwrap();
    assert!(fit.relative_error(est.predicted) < 0.15, "slope {}", fit.slope);
}

#[test]
fn exponent_predictions() {
    let pairs = [(16, 4), (32, 4), (64, 4), (128, 8)];
    assert!((predicted_exponent(&pairs, 1.0, 0.05).unwrap() + 0.65).abs() < 1e-12);
    assert!((predicted_exponent(&pairs, 2.0, 0.05).unwrap() + 0.35).abs() < 1e-12);
}

#[test]
fn beltrami_pressure_is_consistent() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let basis = BeltramiBasis::new(5).unwrap();
    let g = Grid3::new(32, 1).unwrap();
    let w = assemble_flow(&basis, &BeltramiCoefficients::random(&basis, &mut rng), g, instant()).unwrap();
    let p = norm_squared(&w).unwrap().scale(-0.5);
    let r = pressure_consistency(&w, &p).unwrap();
    assert!(r.residual_sup <= 1e-10, "{}", r.residual_sup);
    let off = pressure_consistency(&w, &p.scale(2.0)).unwrap();
    assert!(off.residual_sup > 1e-2);
}

#[test]
fn energy_report_at_rest() {
    let g = Grid3::new(8, 1).unwrap();
    let v = VectorField::zeros(g, TimeGrid::uniform(5).unwrap());
    let profile = EnergyProfile::parse("1 - t/2").unwrap();
    let r = energy_report(&v, &profile, 1.0);
    assert!(r.all_in_band);
    for row in &r.rows {
        assert_eq!(row.gap, row.e);
        assert_eq!(row.deviation, 0.0);
        assert!((row.de_dt + 0.5).abs() < 1e-12);
        assert_eq!(row.dkinetic_dt, Some(0.0));
    }
    let late = energy_report(&v, &profile, 0.25);
    assert!(!late.all_in_band);
}

#[test]
fn decomposition_without_perturbation() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let basis = BeltramiBasis::new(1).unwrap();
    let g = Grid3::new(12, 1).unwrap();
    let times = TimeGrid::uniform(9).unwrap();
    let w = assemble_flow(
        &basis,
        &BeltramiCoefficients::random(&basis, &mut rng),
        g,
        times.clone(),
    )
    .unwrap();
    let p = norm_squared(&w).unwrap().scale(-0.5);
    let mut state = EulerReynoldsState::zero(g, times.clone());
    state.v = w.clone();
    state.p = p.clone();
    let zero = VectorField::zeros(g, times);
    let r1 = build_reynolds(&w, &p).unwrap().r;
    let d = reynolds_decomposition(&state, &w, &zero, &zero, &r1, 0.05).unwrap();
    assert!(d.residual <= 1e-12);
    assert!(d.parts.iter().all(|p| p.sup <= 1e-12), "{:?}", d.parts);
}
