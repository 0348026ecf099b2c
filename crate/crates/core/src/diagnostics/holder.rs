//! Discrete Hölder norms.
//!
//! `[f]_m` is the largest sup of an `m`-th spectral derivative.  The
//! fractional seminorm `[f]_{m+α}` maximizes `|g(x + d e) − g(x)|/|d e|^α` for
//! every `m`-th derivative `g` over all grid points, the 13 stencil directions
//! `e` of the 26-neighbourhood (up to sign), and separations `d` drawn from
//! `{2^i} ∪ {3·2^i}` grid steps up to half the grid.  This is a lower bound
//! for the continuum seminorm that converges under refinement.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::DiagnosticsError;
use crate::calculus;
use crate::field::ScalarField;

/// Stencil directions, one per antipodal pair.
pub const DIRECTIONS: [[i64; 3]; 13] = [
    [1, 0, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 1, 0],
    [1, -1, 0],
    [1, 0, 1],
    [1, 0, -1],
    [0, 1, 1],
    [0, 1, -1],
    [1, 1, 1],
    [1, 1, -1],
    [1, -1, 1],
    [-1, 1, 1],
];

/// Separations in grid steps: `2^i` and `3·2^i`, at most `n/2`.
pub fn separations(n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut p = 1;
    while p <= n / 2 {
        out.push(p);
        if 3 * p <= n / 2 && p > 0 {
            out.push(3 * p);
        }
        p *= 2;
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// `sup |g(x + h) − g(x)| / |h|^α` over the stencil for grid values `g` on
/// an `n³` grid with physical spacing `spacing`.
pub fn holder_quotient(values: &[f64], n: usize, spacing: f64, alpha: f64) -> f64 {
    let seps = separations(n);
    let ni = n as i64;
    let mut best = 0.0f64;
    for dir in DIRECTIONS {
        let len = ((dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]) as f64).sqrt();
        for &d in &seps {
            let di = d as i64;
            let inv = 1.0 / (di as f64 * len * spacing).powf(alpha);
            let shift_c: Vec<usize> = (0..ni).map(|c| (c + di * dir[2]).rem_euclid(ni) as usize).collect();
            let m = (0..n)
                .into_par_iter()
                .map(|a| {
                    let a2 = (a as i64 + di * dir[0]).rem_euclid(ni) as usize;
                    let mut local = 0.0f64;
                    for b in 0..n {
                        let b2 = (b as i64 + di * dir[1]).rem_euclid(ni) as usize;
                        let row = &values[(a * n + b) * n..(a * n + b + 1) * n];
                        let row2 = &values[(a2 * n + b2) * n..(a2 * n + b2 + 1) * n];
                        for c in 0..n {
                            local = local.max((row2[shift_c[c]] - row[c]).abs());
                        }
                    }
                    local
                })
                .reduce(|| 0.0, f64::max);
            best = best.max(m * inv);
        }
    }
    best
}

/// Discrete Hölder norm of a (possibly multi-component) field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderReport {
    pub r: f64,
    /// `[f]_j` for `j = 0..=⌊r⌋`; `[f]_0` is the largest sample magnitude.
    pub seminorms: Vec<f64>,
    /// `[f]_{⌊r⌋+α}` when `r` is not an integer.
    pub fractional: Option<f64>,
    /// `‖f‖_r = Σ_j [f]_j + [f]_{⌊r⌋+α}`.
    pub norm: f64,
    /// More than 1% of the spectral energy sits in the outer tenth of the
    /// retained box.
    pub underresolved: bool,
}

impl HolderReport {
    pub fn sup(&self) -> f64 {
        self.seminorms[0]
    }
}

fn derivatives(f: &ScalarField, order: usize) -> Vec<ScalarField> {
    match order {
        0 => vec![f.clone()],
        1 => (0..3).map(|i| calculus::derivative(f, i)).collect(),
        _ => {
            let mut out = Vec::with_capacity(6);
            for i in 0..3 {
                let di = calculus::derivative(f, i);
                for j in i..3 {
                    out.push(calculus::derivative(&di, j));
                }
            }
            out
        }
    }
}

fn max_abs_slice(f: &ScalarField, t: usize) -> (Vec<f64>, f64) {
    let v = f.to_physical(t);
    let m = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    (v, m)
}

/// Share of spectral energy in modes whose largest index exceeds 0.9 K.
pub fn outer_energy_fraction(f: &ScalarField) -> f64 {
    let g = f.grid();
    let edge = 0.9 * g.cutoff() as f64;
    let (mut outer, mut total) = (0.0, 0.0);
    for t in 0..f.samples() {
        for (i, m) in g.iter_modes() {
            let e = g.parseval_weight(m) * f.slice(t)[i].norm_sqr();
            total += e;
            if m.iter().any(|c| c.unsigned_abs() as f64 > edge) {
                outer += e;
            }
        }
    }
    if total == 0.0 {
        0.0
    } else {
        outer / total
    }
}

/// `‖f‖_r` over all components and time samples (max over both).
pub fn holder_norm(components: &[&ScalarField], r: f64) -> Result<HolderReport, DiagnosticsError> {
    if !(0.0..3.0).contains(&r) {
        return Err(DiagnosticsError::BadExponent(r));
    }
    let first = components.first().ok_or(DiagnosticsError::Empty)?;
    let grid = *first.grid();
    let m = r.floor() as usize;
    let alpha = r - m as f64;
    let mut seminorms = vec![0.0f64; m + 1];
    let mut fractional = 0.0f64;
    let mut underresolved = false;
    for f in components {
        underresolved |= outer_energy_fraction(f) > 0.01;
        for order in 0..=m {
            for d in derivatives(f, order) {
                for t in 0..d.samples() {
                    let (vals, sup) = max_abs_slice(&d, t);
                    seminorms[order] = seminorms[order].max(sup);
                    if order == m && alpha > 0.0 {
                        fractional = fractional.max(holder_quotient(&vals, grid.n(), grid.spacing(), alpha));
                    }
                }
            }
        }
    }
    let fractional = (alpha > 0.0).then_some(fractional);
    let norm = seminorms.iter().sum::<f64>() + fractional.unwrap_or(0.0);
    Ok(HolderReport {
        r,
        seminorms,
        fractional,
        norm,
        underresolved,
    })
}

/// Measured constant `[fg]_r / ([f]_r ‖g‖₀ + ‖f‖₀ [g]_r)` for `0 < r < 1`,
/// with the product formed pointwise on the grid.
pub fn product_constant(f: &ScalarField, g: &ScalarField, r: f64) -> Result<f64, DiagnosticsError> {
    if !(r > 0.0 && r < 1.0) {
        return Err(DiagnosticsError::BadExponent(r));
    }
    let grid = *f.grid();
    if grid != *g.grid() {
        return Err(DiagnosticsError::Field(crate::field::FieldError::GridMismatch(
            grid,
            *g.grid(),
        )));
    }
    let (n, h) = (grid.n(), grid.spacing());
    let mut worst = 0.0f64;
    for t in 0..f.samples().min(g.samples()) {
        let (fv, f0) = max_abs_slice(f, t);
        let (gv, g0) = max_abs_slice(g, t);
        let prod: Vec<f64> = fv.iter().zip(&gv).map(|(a, b)| a * b).collect();
        let fr = holder_quotient(&fv, n, h, r);
        let gr = holder_quotient(&gv, n, h, r);
        let pr = holder_quotient(&prod, n, h, r);
        let denom = fr * g0 + f0 * gr;
        if denom > 0.0 {
            worst = worst.max(pr / denom);
        }
    }
    Ok(worst)
}
