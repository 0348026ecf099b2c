#![allow(dead_code)]

use eulerci::field::{MatrixField, ScalarField, VectorField};
use eulerci::grid::{Grid3, TimeGrid};
use num_complex::Complex64;
use rand::Rng;

/// Random Hermitian coefficients on every retained mode with `|m_i| ≤ band`.
pub fn random_scalar(grid: Grid3, times: &TimeGrid, band: usize, rng: &mut impl Rng) -> ScalarField {
    let mut f = ScalarField::zeros(grid, times.clone());
    let b = band.min(grid.cutoff()) as i64;
    for t in 0..times.len() {
        for (_, m) in grid.iter_modes() {
            if m.iter().any(|c| c.abs() > b) || (m[2] == 0 && (m[0], m[1]) < (0, 0)) {
                continue;
            }
            let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            f.set_mode(t, m, z).unwrap();
        }
    }
    f
}

pub fn random_vector(grid: Grid3, times: &TimeGrid, band: usize, rng: &mut impl Rng) -> VectorField {
    VectorField::new([
        random_scalar(grid, times, band, rng),
        random_scalar(grid, times, band, rng),
        random_scalar(grid, times, band, rng),
    ])
    .unwrap()
}

pub fn random_symmetric(grid: Grid3, times: &TimeGrid, band: usize, rng: &mut impl Rng) -> MatrixField {
    let six: Vec<ScalarField> = (0..6).map(|_| random_scalar(grid, times, band, rng)).collect();
    let [a, b, c, d, e, f]: [ScalarField; 6] = six.try_into().unwrap();
    MatrixField::new(vec![a, b.clone(), c.clone(), b, d, e.clone(), c, e, f])
        .unwrap()
        .with_flags(true, false)
}

/// Largest coefficient magnitude of `a − b` relative to `1 + max|b|`.
pub fn rel_scalar(a: &ScalarField, b: &ScalarField) -> f64 {
    a.sub(b).unwrap().max_coeff() / (1.0 + b.max_coeff())
}

pub fn rel_vector(a: &VectorField, b: &VectorField) -> f64 {
    a.sub(b).unwrap().max_coeff() / (1.0 + b.max_coeff())
}

pub fn rel_matrix(a: &MatrixField, b: &MatrixField) -> f64 {
    a.sub(b).unwrap().max_coeff() / (1.0 + b.max_coeff())
}

/// Grid values of a scalar field at slice `t` against a closure of the
/// physical point.
pub fn max_grid_error(f: &ScalarField, t: usize, exact: impl Fn([f64; 3]) -> f64) -> f64 {
    let n = f.grid().n();
    let h = f.grid().spacing();
    let vals = f.to_physical(t);
    let mut worst = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let x = [a as f64 * h, b as f64 * h, c as f64 * h];
                worst = worst.max((vals[(a * n + b) * n + c] - exact(x)).abs());
            }
        }
    }
    worst
}
