//! Spectral derivatives, dealiased products and time differencing.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::fft;
use crate::field::{zero, FieldError, MatrixField, ScalarField, VectorField};
use crate::grid::TimeKind;

/// `∂f/∂x_axis`, in physical coordinates (stride included).
pub fn derivative(f: &ScalarField, axis: usize) -> ScalarField {
    f.map_coeffs(|k, c| c * Complex64::new(0.0, k[axis]))
}

pub fn gradient(f: &ScalarField) -> VectorField {
    VectorField::new([derivative(f, 0), derivative(f, 1), derivative(f, 2)]).expect("components share a grid")
}

pub fn laplacian(f: &ScalarField) -> ScalarField {
    f.map_coeffs(|k, c| c * -(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]))
}

pub fn divergence(v: &VectorField) -> Result<ScalarField, FieldError> {
    derivative(v.comp(0), 0)
        .add(&derivative(v.comp(1), 1))?
        .add(&derivative(v.comp(2), 2))
}

pub fn curl(v: &VectorField) -> Result<VectorField, FieldError> {
    let d = |i: usize, j: usize| derivative(v.comp(i), j);
    Ok(
        VectorField::new([d(2, 1).sub(&d(1, 2))?, d(0, 2).sub(&d(2, 0))?, d(1, 0).sub(&d(0, 1))?])?
            .with_solenoidal(true),
    )
}

/// Row divergence `(div A)_i = Σ_j ∂_j A_ij`.
pub fn div_rows(a: &MatrixField) -> Result<VectorField, FieldError> {
    let row = |i: usize| -> Result<ScalarField, FieldError> {
        derivative(a.comp(i, 0), 0)
            .add(&derivative(a.comp(i, 1), 1))?
            .add(&derivative(a.comp(i, 2), 2))
    };
    VectorField::new([row(0)?, row(1)?, row(2)?])
}

/// Gradient matrix `(∇v)_ij = ∂_j v_i`.
pub fn gradient_matrix(v: &VectorField) -> MatrixField {
    let mut comps = Vec::with_capacity(9);
    for i in 0..3 {
        for j in 0..3 {
            comps.push(derivative(v.comp(i), j));
        }
    }
    MatrixField::new(comps).expect("components share a grid")
}

/// Apply a pointwise map to grid values and project back onto the retained
/// modes.  `f` receives the input values at one point and writes `outputs`
/// values.  With 2/3 dealiasing, quadratic maps are exact on retained modes.
pub fn pointwise(
    inputs: &[&ScalarField],
    outputs: usize,
    f: impl Fn(&[f64], &mut [f64]) + Sync,
) -> Result<Vec<ScalarField>, FieldError> {
    let first = inputs[0];
    for g in &inputs[1..] {
        first.check_compatible(g)?;
    }
    let grid = *first.grid();
    let plan = fft::plan(grid.n());
    let per_slice: Vec<Vec<Vec<Complex64>>> = (0..first.samples())
        .into_par_iter()
        .map(|t| {
            let phys: Vec<Vec<f64>> = inputs.iter().map(|g| plan.to_physical(&grid, g.slice(t))).collect();
            let mut out = vec![vec![0.0; grid.points()]; outputs];
            let mut x = vec![0.0; inputs.len()];
            let mut y = vec![0.0; outputs];
            for p in 0..grid.points() {
                for (xi, ph) in x.iter_mut().zip(&phys) {
                    *xi = ph[p];
                }
                f(&x, &mut y);
                for (o, yi) in out.iter_mut().zip(&y) {
                    o[p] = *yi;
                }
            }
            out.iter().map(|o| plan.to_spectral(&grid, o)).collect()
        })
        .collect();
    let mut fields = Vec::with_capacity(outputs);
    for k in 0..outputs {
        let slices = per_slice.iter().map(|s| s[k].clone()).collect();
        fields.push(ScalarField::from_slices(grid, first.times().clone(), slices)?);
    }
    Ok(fields)
}

/// Dealiased product `f·g`.
pub fn product(f: &ScalarField, g: &ScalarField) -> Result<ScalarField, FieldError> {
    Ok(pointwise(&[f, g], 1, |x, y| y[0] = x[0] * x[1])?.remove(0))
}

/// Dealiased `v·w`.
pub fn dot(v: &VectorField, w: &VectorField) -> Result<ScalarField, FieldError> {
    let inputs = [v.comp(0), v.comp(1), v.comp(2), w.comp(0), w.comp(1), w.comp(2)];
    Ok(pointwise(&inputs, 1, |x, y| y[0] = x[0] * x[3] + x[1] * x[4] + x[2] * x[5])?.remove(0))
}

/// Dealiased `|v|²`.
pub fn norm_squared(v: &VectorField) -> Result<ScalarField, FieldError> {
    let inputs = [v.comp(0), v.comp(1), v.comp(2)];
    Ok(pointwise(&inputs, 1, |x, y| y[0] = x[0] * x[0] + x[1] * x[1] + x[2] * x[2])?.remove(0))
}

/// Dealiased tensor product `(v ⊗ w)_ij = v_i w_j`.
pub fn outer(v: &VectorField, w: &VectorField) -> Result<MatrixField, FieldError> {
    let inputs = [v.comp(0), v.comp(1), v.comp(2), w.comp(0), w.comp(1), w.comp(2)];
    let comps = pointwise(&inputs, 9, |x, y| {
        for i in 0..3 {
            for j in 0..3 {
                y[3 * i + j] = x[i] * x[3 + j];
            }
        }
    })?;
    MatrixField::new(comps)
}

/// Dealiased symmetric square `v ⊗ v`.
pub fn outer_self(v: &VectorField) -> Result<MatrixField, FieldError> {
    let inputs = [v.comp(0), v.comp(1), v.comp(2)];
    let six = pointwise(&inputs, 6, |x, y| {
        y[0] = x[0] * x[0];
        y[1] = x[0] * x[1];
        y[2] = x[0] * x[2];
        y[3] = x[1] * x[1];
        y[4] = x[1] * x[2];
        y[5] = x[2] * x[2];
    })?;
    let [a, b, c, d, e, f]: [ScalarField; 6] = six.try_into().expect("six outputs");
    Ok(MatrixField::new(vec![a, b.clone(), c.clone(), b, d, e.clone(), c, e, f])?.with_flags(true, false))
}

/// Dealiased `Σ_j v_j ∂_j w`.
pub fn advect(v: &VectorField, w: &VectorField) -> Result<VectorField, FieldError> {
    let mut inputs: Vec<ScalarField> = vec![v.comp(0).clone(), v.comp(1).clone(), v.comp(2).clone()];
    for i in 0..3 {
        for j in 0..3 {
            inputs.push(derivative(w.comp(i), j));
        }
    }
    let refs: Vec<&ScalarField> = inputs.iter().collect();
    let out = pointwise(&refs, 3, |x, y| {
        for i in 0..3 {
            y[i] = x[0] * x[3 + 3 * i] + x[1] * x[4 + 3 * i] + x[2] * x[5 + 3 * i];
        }
    })?;
    let [a, b, c]: [ScalarField; 3] = out.try_into().expect("three outputs");
    VectorField::new([a, b, c])
}

const CENTER: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
const EDGE0: [f64; 5] = [-25.0, 48.0, -36.0, 16.0, -3.0];
const EDGE1: [f64; 5] = [-3.0, -10.0, 18.0, -6.0, 1.0];

/// Fourth-order weights `(first sample, weights)` for the derivative at `i`
/// of `s` uniform samples with spacing `h`.
fn stencil(i: usize, s: usize, h: f64) -> (usize, [f64; 5]) {
    let sc = 1.0 / (12.0 * h);
    if i == 0 {
        (0, EDGE0.map(|w| w * sc))
    } else if i == 1 {
        (0, EDGE1.map(|w| w * sc))
    } else if i + 2 >= s {
        // Mirror of the leading stencils.
        let src = if i + 1 == s { EDGE0 } else { EDGE1 };
        let mut w = [0.0; 5];
        for (q, x) in src.iter().enumerate() {
            w[4 - q] = -x * sc;
        }
        (s - 5, w)
    } else {
        (i - 2, CENTER.map(|w| w * sc))
    }
}

fn time_derivative_slices(slices: &[Vec<Complex64>], h: f64) -> Vec<Vec<Complex64>> {
    let s = slices.len();
    (0..s)
        .into_par_iter()
        .map(|i| {
            let (start, w) = stencil(i, s, h);
            let mut out = vec![zero(); slices[0].len()];
            for (q, wq) in w.iter().enumerate() {
                if *wq == 0.0 {
                    continue;
                }
                for (o, c) in out.iter_mut().zip(&slices[start + q]) {
                    *o += c * wq;
                }
            }
            out
        })
        .collect()
}

/// Fourth-order finite-difference time derivative: centred in the interior,
/// one-sided at the two samples nearest each end.  Needs `S ≥ 5`.
pub fn time_derivative(f: &ScalarField) -> Result<ScalarField, FieldError> {
    let s = f.samples();
    if f.times().kind() != TimeKind::Uniform || s < 5 {
        return Err(FieldError::TooFewSamples(s));
    }
    let h = f.times().spacing().expect("uniform");
    ScalarField::from_slices(*f.grid(), f.times().clone(), time_derivative_slices(f.slices(), h))
}

pub fn time_derivative_vector(v: &VectorField) -> Result<VectorField, FieldError> {
    VectorField::new([
        time_derivative(v.comp(0))?,
        time_derivative(v.comp(1))?,
        time_derivative(v.comp(2))?,
    ])
    .map(|w| w.with_solenoidal(v.is_solenoidal()))
}

/// [`time_derivative`] applied to a sequence of scalars with spacing `h`.
/// Needs at least 5 values.
pub fn time_derivative_values(values: &[f64], h: f64) -> Option<Vec<f64>> {
    let s = values.len();
    if s < 5 {
        return None;
    }
    Some(
        (0..s)
            .map(|i| {
                let (start, w) = stencil(i, s, h);
                w.iter().enumerate().map(|(q, wq)| wq * values[start + q]).sum()
            })
            .collect(),
    )
}

/// Richardson estimate of the truncation error of [`time_derivative`]: the
/// derivative recomputed from every other sample, compared on the shared
/// samples and divided by `2⁴ − 1`.  Returns the largest coefficient-wise
/// discrepancy, or `None` when fewer than 9 (odd) samples are available.
pub fn time_derivative_error(f: &ScalarField) -> Option<f64> {
    let s = f.samples();
    if f.times().kind() != TimeKind::Uniform || s < 9 || s % 2 == 0 {
        return None;
    }
    let h = f.times().spacing()?;
    let fine = time_derivative_slices(f.slices(), h);
    let coarse_in: Vec<Vec<Complex64>> = f.slices().iter().step_by(2).cloned().collect();
    let coarse = time_derivative_slices(&coarse_in, 2.0 * h);
    let mut worst = 0.0f64;
    for (i, c) in coarse.iter().enumerate() {
        let d = fine[2 * i]
            .iter()
            .zip(c)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        worst = worst.max(d / 15.0);
    }
    Some(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid3, TimeGrid};

    #[test]
    fn stencils_differentiate_quartics() {
        let s = 9;
        let h = 1.0 / 8.0;
        for i in 0..s {
            let (start, w) = stencil(i, s, h);
            let t = i as f64 * h;
            let d: f64 = (0..5)
                .map(|q| {
                    let tq = (start + q) as f64 * h;
                    w[q] * (tq.powi(4) - 2.0 * tq.powi(3) + tq)
                })
                .sum();
            let exact = 4.0 * t.powi(3) - 6.0 * t * t + 1.0;
            assert!((d - exact).abs() < 1e-11, "i={i}: {d} vs {exact}");
        }
    }

    #[test]
    fn derivative_of_sine() {
        let g = Grid3::new(16, 3).unwrap();
        let times = TimeGrid::instant(0.0).unwrap();
        let f = ScalarField::from_fn(g, times, |_, y| (2.0 * y[0]).sin());
        let d = derivative(&f, 0);
        // f(x) = sin(2·3x), so ∂f = 6 cos(6x).
        let c = d.coeff(0, [2, 0, 0]).unwrap();
        assert!((c - Complex64::new(3.0, 0.0)).norm() < 1e-12);
    }
}
