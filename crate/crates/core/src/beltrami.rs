//! Beltrami flows on a lattice shell.
//!
//! For `|k| = λ₀` the complex amplitude `B_k = A_k + i k̂ × A_k` satisfies
//! `i k × B_k = λ₀ B_k`, so any Hermitian combination `Σ a_k B_k e^{ik·ξ}` is a
//! real divergence-free eigenfunction of curl and a stationary Euler flow.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{FieldError, VectorField};
use crate::grid::{Grid3, TimeGrid};
use crate::lattice;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BeltramiError {
    #[error("λ₀² = {0} has no primitive lattice representation")]
    DegenerateShell(i64),
    #[error("{0:?} is not on the shell")]
    OffShell([i64; 3]),
    #[error("coefficients violate a(−k) = conj(a(k)) at {0:?}")]
    NotHermitian([i64; 3]),
    #[error("grid cutoff {cutoff} does not resolve λ₀ = {lambda0}")]
    Unresolved { cutoff: usize, lambda0: f64 },
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// One shell vector with its real and complex amplitude vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeltramiMode {
    pub k: [i64; 3],
    pub a: [f64; 3],
    pub b: [[f64; 2]; 3],
}

impl BeltramiMode {
    pub fn b(&self) -> [Complex64; 3] {
        self.b.map(|z| Complex64::new(z[0], z[1]))
    }
}

/// The amplitude vectors for every point of one shell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeltramiBasis {
    radius_sq: i64,
    modes: Vec<BeltramiMode>,
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Real amplitude `A_k`: the normalized cross product of the canonical
/// representative with the first coordinate axis not parallel to it.
fn amplitude(k: [i64; 3]) -> [f64; 3] {
    let kp = lattice::canonical(k).map(|c| c as f64);
    for axis in 0..3 {
        let mut e = [0.0; 3];
        e[axis] = 1.0;
        let c = cross(kp, e);
        let n = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
        if n > 0.0 {
            let s = std::f64::consts::FRAC_1_SQRT_2 / n;
            return c.map(|x| x * s);
        }
    }
    unreachable!("nonzero vectors are not parallel to every axis")
}

impl BeltramiBasis {
    /// Basis for `|k|² = radius_sq`; the shell must contain a primitive vector.
    pub fn for_radius_sq(radius_sq: i64) -> Result<Self, BeltramiError> {
        let shell = lattice::shell(radius_sq);
        if radius_sq <= 0 || !shell.iter().any(|k| lattice::is_primitive(*k)) {
            return Err(BeltramiError::DegenerateShell(radius_sq));
        }
        let modes = shell
            .into_iter()
            .map(|k| {
                let a = amplitude(k);
                let kh = lattice::unit(k);
                let c = cross(kh, a);
                BeltramiMode {
                    k,
                    a,
                    b: [[a[0], c[0]], [a[1], c[1]], [a[2], c[2]]],
                }
            })
            .collect();
        Ok(Self { radius_sq, modes })
    }

    /// Basis for integer `λ₀`.
    pub fn new(lambda0: u32) -> Result<Self, BeltramiError> {
        Self::for_radius_sq(lambda0 as i64 * lambda0 as i64)
    }

    pub fn lambda0(&self) -> f64 {
        (self.radius_sq as f64).sqrt()
    }

    pub fn radius_sq(&self) -> i64 {
        self.radius_sq
    }

    pub fn modes(&self) -> &[BeltramiMode] {
        &self.modes
    }

    pub fn mode(&self, k: [i64; 3]) -> Option<&BeltramiMode> {
        self.modes
            .binary_search_by(|m| m.k.cmp(&k))
            .ok()
            .map(|i| &self.modes[i])
    }

    /// Largest absolute entry of any shell vector.
    pub fn max_entry(&self) -> usize {
        self.modes
            .iter()
            .flat_map(|m| m.k.iter())
            .map(|c| c.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }
}

/// Coefficients `a_k` with `a_{−k} = conj(a_k)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BeltramiCoefficients {
    values: BTreeMap<[i64; 3], Complex64>,
}

impl BeltramiCoefficients {
    /// Coefficients given on canonical representatives; partners are filled in.
    pub fn from_canonical(
        basis: &BeltramiBasis,
        canonical: impl IntoIterator<Item = ([i64; 3], Complex64)>,
    ) -> Result<Self, BeltramiError> {
        let mut values = BTreeMap::new();
        for (k, a) in canonical {
            if basis.mode(k).is_none() {
                return Err(BeltramiError::OffShell(k));
            }
            let kp = lattice::canonical(k);
            let a = if kp == k { a } else { a.conj() };
            values.insert(kp, a);
            values.insert(lattice::neg(kp), a.conj());
        }
        Ok(Self { values })
    }

    /// Full map, checked for Hermitian symmetry to `tol`.
    pub fn from_map(
        basis: &BeltramiBasis,
        values: BTreeMap<[i64; 3], Complex64>,
        tol: f64,
    ) -> Result<Self, BeltramiError> {
        for (k, a) in &values {
            if basis.mode(*k).is_none() {
                return Err(BeltramiError::OffShell(*k));
            }
            let partner = values.get(&lattice::neg(*k)).copied().unwrap_or_default();
            if (partner - a.conj()).norm() > tol {
                return Err(BeltramiError::NotHermitian(*k));
            }
        }
        Ok(Self { values })
    }

    /// Independent standard complex Gaussian-like draws on every pair.
    pub fn random(basis: &BeltramiBasis, rng: &mut impl Rng) -> Self {
        let pairs = basis
            .modes()
            .iter()
            .filter(|m| lattice::is_canonical(m.k))
            .map(|m| {
                let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                (m.k, z)
            })
            .collect::<Vec<_>>();
        Self::from_canonical(basis, pairs).expect("shell vectors")
    }

    pub fn get(&self, k: [i64; 3]) -> Complex64 {
        self.values.get(&k).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[i64; 3], &Complex64)> {
        self.values.iter()
    }
}

/// The Beltrami flow `Σ a_k B_k e^{ik·y}` on `grid`, constant in time.  On a
/// strided grid the physical field is `W(s·x)`, a curl eigenfunction with
/// eigenvalue `s·λ₀`.
pub fn assemble_flow(
    basis: &BeltramiBasis,
    coeffs: &BeltramiCoefficients,
    grid: Grid3,
    times: TimeGrid,
) -> Result<VectorField, BeltramiError> {
    if basis.max_entry() > grid.cutoff() {
        return Err(BeltramiError::Unresolved {
            cutoff: grid.cutoff(),
            lambda0: basis.lambda0(),
        });
    }
    let mut v = VectorField::zeros(grid, times);
    for m in basis.modes().iter().filter(|m| lattice::is_canonical(m.k)) {
        let a = coeffs.get(m.k);
        let b = m.b();
        for t in 0..v.samples() {
            for c in 0..3 {
                v.comp_mut(c).set_mode(t, m.k, a * b[c])?;
            }
        }
    }
    Ok(v.with_solenoidal(true))
}

/// Spatial average `⟨W ⊗ W⟩ = ½ Σ_k |a_k|² (Id − k̂ ⊗ k̂)`.
pub fn mean_stress(basis: &BeltramiBasis, coeffs: &BeltramiCoefficients) -> [f64; 9] {
    let mut out = [0.0; 9];
    for m in basis.modes() {
        let w = 0.5 * coeffs.get(m.k).norm_sqr();
        let kh = lattice::unit(m.k);
        for i in 0..3 {
            for j in 0..3 {
                let id = if i == j { 1.0 } else { 0.0 };
                out[3 * i + j] += w * (id - kh[i] * kh[j]);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn amplitudes_satisfy_the_algebraic_identities() {
        let basis = BeltramiBasis::new(5).unwrap();
        assert_eq!(basis.modes().len(), 30);
        for m in basis.modes() {
            let k = m.k.map(|c| c as f64);
            let dot: f64 = (0..3).map(|i| k[i] * m.a[i]).sum();
            assert!(dot.abs() < 1e-14);
            let n2: f64 = m.a.iter().map(|x| x * x).sum();
            assert!((n2 - 0.5).abs() < 1e-14);
            let partner = basis.mode(lattice::neg(m.k)).unwrap();
            assert_eq!(partner.a, m.a);
            // i k × B = λ₀ B.
            let b = m.b();
            let ik = k.map(|c| Complex64::new(0.0, c));
            let cr = [
                ik[1] * b[2] - ik[2] * b[1],
                ik[2] * b[0] - ik[0] * b[2],
                ik[0] * b[1] - ik[1] * b[0],
            ];
            for i in 0..3 {
                assert!((cr[i] - b[i] * 5.0).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn degenerate_shells_are_rejected() {
        assert!(BeltramiBasis::new(2).is_err());
        assert!(BeltramiBasis::new(4).is_err());
        assert!(BeltramiBasis::new(9).is_ok());
    }
}
