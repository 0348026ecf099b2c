//! Fourier multipliers: Leray projection, inverse Laplacian and the
//! symmetric trace-free inverse divergence `R`.
//!
//! All kernels act mode by mode on physical wavevectors `K = s·m`, so they
//! commute with the stride: on strided fields `R` and `Δ⁻¹` pick up the
//! factors `1/s` and `1/s²` automatically.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::field::{zero, FieldError, MatrixField, ScalarField, VectorField};

fn i() -> Complex64 {
    Complex64::new(0.0, 1.0)
}

/// Apply a per-mode kernel to `I` input components producing `O` outputs.
pub fn map_modes<const I: usize, const O: usize>(
    inputs: [&ScalarField; I],
    kernel: impl Fn([f64; 3], [Complex64; I]) -> [Complex64; O] + Sync,
) -> Result<[ScalarField; O], FieldError> {
    let first = inputs[0];
    for g in &inputs[1..] {
        first.check_compatible(g)?;
    }
    let grid = *first.grid();
    let per_slice: Vec<[Vec<Complex64>; O]> = (0..first.samples())
        .into_par_iter()
        .map(|t| {
            let mut out: [Vec<Complex64>; O] = std::array::from_fn(|_| vec![zero(); grid.modes()]);
            for (idx, m) in grid.iter_modes() {
                let k = grid.wavevector(m);
                let x = std::array::from_fn(|q| inputs[q].slice(t)[idx]);
                let y = kernel(k, x);
                for q in 0..O {
                    out[q][idx] = y[q];
                }
            }
            out
        })
        .collect();
    let mut columns: [Vec<Vec<Complex64>>; O] = std::array::from_fn(|_| Vec::new());
    for s in per_slice {
        for (q, v) in s.into_iter().enumerate() {
            columns[q].push(v);
        }
    }
    let mut res = Vec::with_capacity(O);
    for c in columns {
        res.push(ScalarField::from_slices(grid, first.times().clone(), c)?);
    }
    Ok(res.try_into().unwrap_or_else(|_| unreachable!()))
}

fn vec3(v: &VectorField) -> [&ScalarField; 3] {
    [v.comp(0), v.comp(1), v.comp(2)]
}

fn mat9(a: &MatrixField) -> [&ScalarField; 9] {
    std::array::from_fn(|q| &a.comps()[q])
}

fn norm2(k: [f64; 3]) -> f64 {
    k[0] * k[0] + k[1] * k[1] + k[2] * k[2]
}

/// Gradient part: `Q̂v = K(K·v̂)/|K|²` for `K ≠ 0`, and the mean is kept.
pub fn leray_q(v: &VectorField) -> Result<VectorField, FieldError> {
    let c = map_modes(vec3(v), |k, x| {
        let n = norm2(k);
        if n == 0.0 {
            return x;
        }
        let d = (x[0] * k[0] + x[1] * k[1] + x[2] * k[2]) / n;
        [d * k[0], d * k[1], d * k[2]]
    })?;
    VectorField::new(c)
}

/// Leray projection `P = I − Q`: solenoidal and mean-free.
pub fn leray_p(v: &VectorField) -> Result<VectorField, FieldError> {
    let c = map_modes(vec3(v), |k, x| {
        let n = norm2(k);
        if n == 0.0 {
            return [zero(); 3];
        }
        let d = (x[0] * k[0] + x[1] * k[1] + x[2] * k[2]) / n;
        [x[0] - d * k[0], x[1] - d * k[1], x[2] - d * k[2]]
    })?;
    Ok(VectorField::new(c)?.with_solenoidal(true))
}

/// Mean-free solution of `Δu = f − ⟨f⟩`.
pub fn inverse_laplacian(f: &ScalarField) -> ScalarField {
    f.map_coeffs(|k, c| {
        let n = norm2(k);
        if n == 0.0 {
            zero()
        } else {
            -c / n
        }
    })
}

/// The symmetric trace-free matrix `R v̂` at one mode.
fn r_kernel(k: [f64; 3], v: [Complex64; 3]) -> [Complex64; 9] {
    let n = norm2(k);
    if n == 0.0 {
        return [zero(); 9];
    }
    let u = v.map(|c| -c / n);
    let ku = u[0] * k[0] + u[1] * k[1] + u[2] * k[2];
    let pu = [u[0] - ku * k[0] / n, u[1] - ku * k[1] / n, u[2] - ku * k[2] / n];
    let mut r = [zero(); 9];
    for a in 0..3 {
        for b in 0..3 {
            let mut x = (pu[a] * k[b] + pu[b] * k[a]) * 0.25 + (u[a] * k[b] + u[b] * k[a]) * 0.75;
            if a == b {
                x -= ku * 0.5;
            }
            r[3 * a + b] = x * i();
        }
    }
    r
}

fn matrix_from(c: [ScalarField; 9]) -> Result<MatrixField, FieldError> {
    Ok(MatrixField::new(c.into())?.with_flags(true, true))
}

/// Inverse divergence: symmetric, trace-free, with `div R v = v − ⟨v⟩`.
pub fn inverse_divergence(v: &VectorField) -> Result<MatrixField, FieldError> {
    matrix_from(map_modes(vec3(v), r_kernel)?)
}

fn row_div(k: [f64; 3], a: &[Complex64; 9]) -> [Complex64; 3] {
    std::array::from_fn(|r| (a[3 * r] * k[0] + a[3 * r + 1] * k[1] + a[3 * r + 2] * k[2]) * i())
}

/// Fused `R(div A)` with the row divergence `(div A)_i = Σ_j ∂_j A_ij`.
pub fn inverse_divergence_of_div(a: &MatrixField) -> Result<MatrixField, FieldError> {
    matrix_from(map_modes(mat9(a), |k, x| r_kernel(k, row_div(k, &x)))?)
}

/// Fused `R(Q(div A))`.
pub fn inverse_divergence_of_q_div(a: &MatrixField) -> Result<MatrixField, FieldError> {
    matrix_from(map_modes(mat9(a), |k, x| {
        let d = row_div(k, &x);
        let n = norm2(k);
        if n == 0.0 {
            return [zero(); 9];
        }
        let kd = (d[0] * k[0] + d[1] * k[1] + d[2] * k[2]) / n;
        r_kernel(k, [kd * k[0], kd * k[1], kd * k[2]])
    })?)
}

/// `Δ⁻¹ div div A = Δ⁻¹ Σ_ij ∂_i ∂_j A_ij`.
pub fn inverse_laplacian_div_div(a: &MatrixField) -> Result<ScalarField, FieldError> {
    let [s] = map_modes(mat9(a), |k, x| {
        let n = norm2(k);
        if n == 0.0 {
            return [zero()];
        }
        let mut acc = zero();
        for p in 0..3 {
            for q in 0..3 {
                acc -= x[3 * p + q] * (k[p] * k[q]);
            }
        }
        [-acc / n]
    })?;
    Ok(s)
}
