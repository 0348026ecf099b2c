//! Partition of unity on velocity space with phase functions.
//!
//! The bump `φ` equals 1 on `|u| ≤ c₁`, vanishes for `|u| ≥ c₂`, and the
//! normalized squares `α_l(u) = φ(u − l)/√ψ(u)` with `ψ = Σ_l φ(· − l)²` satisfy
//! `Σ_l α_l² = 1`.  Lattice points are grouped into eight parity classes; two
//! distinct points of one class are at least 2 apart in some coordinate, so at
//! most one member of each class is active at any `u`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PartitionError {
    #[error("radii must satisfy √3/2 < c₁ < c₂ < 1, got c₁ = {0}, c₂ = {1}")]
    BadRadii(f64, f64),
    #[error("class index {0} out of range")]
    BadClass(usize),
}

/// Partition radii.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePartition {
    c1: f64,
    c2: f64,
}

impl Default for PhasePartition {
    fn default() -> Self {
        Self { c1: 0.90, c2: 0.95 }
    }
}

/// Smooth step: 0 for `s ≤ 0`, 1 for `s ≥ 1`, built from `exp(−1/x)`.
pub fn smooth_step(s: f64) -> f64 {
    let f = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        let a = f(s);
        a / (a + f(1.0 - s))
    }
}

/// Parity class `p₁ + 2p₂ + 4p₃` of a lattice point.
pub fn class_of(l: [i64; 3]) -> usize {
    (l[0].rem_euclid(2) + 2 * l[1].rem_euclid(2) + 4 * l[2].rem_euclid(2)) as usize
}

fn parity(j: usize) -> [i64; 3] {
    [(j & 1) as i64, ((j >> 1) & 1) as i64, ((j >> 2) & 1) as i64]
}

/// The active member of class `j` for the scaled velocity `u`.
pub fn nearest_in_class(j: usize, u: [f64; 3]) -> [i64; 3] {
    let p = parity(j);
    std::array::from_fn(|i| 2 * ((u[i] - p[i] as f64) / 2.0).round() as i64 + p[i])
}

impl PhasePartition {
    pub fn new(c1: f64, c2: f64) -> Result<Self, PartitionError> {
        let lo = 3f64.sqrt() / 2.0;
        if !(c1 > lo && c1 < c2 && c2 < 1.0) {
            return Err(PartitionError::BadRadii(c1, c2));
        }
        Ok(Self { c1, c2 })
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    /// Radial bump `φ(u)`.
    pub fn bump(&self, u: [f64; 3]) -> f64 {
        let r2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
        let (a, b) = (self.c1 * self.c1, self.c2 * self.c2);
        smooth_step((b - r2) / (b - a))
    }

    fn candidates(u: [f64; 3]) -> impl Iterator<Item = [i64; 3]> {
        let f = u.map(|x| x.floor() as i64);
        (0..8).map(move |q| {
            [
                f[0] + (q & 1) as i64,
                f[1] + ((q >> 1) & 1) as i64,
                f[2] + ((q >> 2) & 1) as i64,
            ]
        })
    }

    fn shifted(u: [f64; 3], l: [i64; 3]) -> [f64; 3] {
        [u[0] - l[0] as f64, u[1] - l[1] as f64, u[2] - l[2] as f64]
    }

    /// `ψ(u) = Σ_l φ(u − l)²`; only the eight surrounding points can contribute.
    pub fn psi(&self, u: [f64; 3]) -> f64 {
        Self::candidates(u)
            .map(|l| self.bump(Self::shifted(u, l)).powi(2))
            .sum()
    }

    /// `α_l(u)`.
    pub fn alpha(&self, l: [i64; 3], u: [f64; 3]) -> f64 {
        let b = self.bump(Self::shifted(u, l));
        if b == 0.0 {
            0.0
        } else {
            b / self.psi(u).sqrt()
        }
    }

    /// For every class, its active point and `α` at scaled velocity `u`.
    pub fn active(&self, u: [f64; 3]) -> [([i64; 3], f64); 8] {
        let s = self.psi(u).sqrt();
        std::array::from_fn(|j| {
            let l = nearest_in_class(j, u);
            (l, self.bump(Self::shifted(u, l)) / s)
        })
    }

    /// `φ_k^{(j)}(v, τ) = Σ_{l ∈ C_j} α_l(μv) e^{−i (k·l/μ) τ}`.
    pub fn phase(&self, j: usize, k: [i64; 3], v: [f64; 3], tau: f64, mu: f64) -> Result<Complex64, PartitionError> {
        if j >= 8 {
            return Err(PartitionError::BadClass(j));
        }
        let u = v.map(|x| x * mu);
        let l = nearest_in_class(j, u);
        let a = self.alpha(l, u);
        let kl = (k[0] * l[0] + k[1] * l[1] + k[2] * l[2]) as f64;
        Ok(Complex64::from_polar(a, -kl / mu * tau))
    }

    /// `(∂_τ + i k·v) φ_k^{(j)} = i k·(v − l/μ) φ_k^{(j)}`.
    pub fn transport_defect(
        &self,
        j: usize,
        k: [i64; 3],
        v: [f64; 3],
        tau: f64,
        mu: f64,
    ) -> Result<Complex64, PartitionError> {
        let phi = self.phase(j, k, v, tau, mu)?;
        let l = nearest_in_class(j, v.map(|x| x * mu));
        let s: f64 = (0..3).map(|i| k[i] as f64 * (v[i] - l[i] as f64 / mu)).sum();
        Ok(phi * Complex64::new(0.0, s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_plateau_and_support() {
        let p = PhasePartition::default();
        assert_eq!(p.bump([0.5, 0.5, 0.5]), 1.0);
        assert_eq!(p.bump([0.0, 0.0, 0.96]), 0.0);
        let mid = p.bump([0.0, 0.0, 0.925]);
        assert!(mid > 0.0 && mid < 1.0);
    }

    #[test]
    fn rejects_radii_that_do_not_cover() {
        assert!(PhasePartition::new(0.8, 0.95).is_err());
        assert!(PhasePartition::new(0.95, 0.9).is_err());
        assert!(PhasePartition::new(0.9, 0.95).is_ok());
    }

    #[test]
    fn class_members_are_unique() {
        let u = [0.3, -1.7, 2.49];
        for j in 0..8 {
            let l = nearest_in_class(j, u);
            assert_eq!(class_of(l), j);
        }
    }
}
