//! Calibration of the increment constant `M`.
//!
//! `w_o/√ρ` is, at each point, the Beltrami flow
//! `W(ξ) = Σ_j Σ_{k∈Λ_j} γ_k(R/ρ) α_{l_j}(u) e^{−i(k·l_j)θ} B_k e^{ik·ξ}`
//! evaluated at `ξ = λx`.  Its sup over `ξ` is probed for `R/ρ` at the centre
//! and near the edge of the chart domain, for scaled velocities `u` covering
//! one period of the partition and for several phase times `θ`.  With
//! `ρ ≤ δ·max e` this bounds `4‖w_o‖₀²/δ ≤ 4·max e·sup|W|²`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::StageError;
use crate::beltrami::BeltramiBasis;
use crate::field::VectorField;
use crate::geometry::DirectionSystem;
use crate::grid::{size_retaining, Grid3, TimeGrid};
use crate::linalg;
use crate::partition::PhasePartition;
use crate::profile::EnergyProfile;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    /// Probed stresses sit at this fraction of `r₀` from the identity.
    pub radius_fraction: f64,
    /// Points per axis of the velocity probe lattice on `[0, 2)³`.
    pub velocity_steps: usize,
    /// Phase times `θ = λt/μ`.
    pub phases: Vec<f64>,
    /// Probe grid: `size_retaining(λ₀, grid_factor)`.
    pub grid_factor: usize,
    /// Relative safety margin on the probed bound and on `M > 1`.
    pub margin: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            radius_fraction: 0.99,
            velocity_steps: 3,
            phases: vec![0.0, 0.7, 2.3],
            grid_factor: 4,
            margin: 0.5,
        }
    }
}

/// Result of [`calibrate_m`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub m: f64,
    /// Largest `sup_ξ |W|` over all probes.
    pub probe_sup: f64,
    /// `4·max e·probe_sup²`.
    pub probe_bound: f64,
    pub probes: usize,
}

/// The normalized Beltrami flow `W` at frozen `R/ρ = r`, scaled velocity `u`
/// and phase time `θ`, on a stride-one grid of size `n`.
pub fn probe_field(
    system: &DirectionSystem,
    partition: &PhasePartition,
    basis: &BeltramiBasis,
    r: &[f64; 9],
    u: [f64; 3],
    theta: f64,
    n: usize,
) -> Result<VectorField, StageError> {
    let grid = Grid3::new(n, 1)?;
    if basis.max_entry() > grid.cutoff() {
        return Err(StageError::Unresolved {
            cutoff: grid.cutoff(),
            needed: basis.max_entry(),
        });
    }
    let mut w = VectorField::zeros(grid, TimeGrid::instant(0.0)?);
    for (j, (l, al)) in partition.active(u).into_iter().enumerate() {
        if al == 0.0 {
            continue;
        }
        let members = system.active(j);
        let mut g = vec![0.0; members.len()];
        system.gammas_into(j, r, &mut g);
        for (k, gk) in members.iter().zip(&g) {
            let kl = (k[0] * l[0] + k[1] * l[1] + k[2] * l[2]) as f64;
            let a = Complex64::from_polar(gk * al, -kl * theta);
            let b = basis
                .mode(*k)
                .ok_or_else(|| StageError::Params(format!("direction {k:?} is not on the shell")))?
                .b();
            for q in 0..3 {
                w.comp_mut(q).add_mode(0, *k, a * b[q])?;
            }
        }
    }
    Ok(w.with_solenoidal(true))
}

fn probe_stresses(r0: f64, fraction: f64) -> Vec<[f64; 9]> {
    let s = fraction * r0;
    let mut out = vec![linalg::identity()];
    for (a, b) in [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)] {
        for sign in [-1.0, 1.0] {
            let mut m = linalg::identity();
            m[3 * a + b] += sign * s;
            if a != b {
                m[3 * b + a] += sign * s;
            }
            out.push(m);
        }
    }
    out
}

/// `M = max(1 + margin, (1 + margin)·4·max e·sup|W|²)`.
pub fn calibrate_m(
    profile: &EnergyProfile,
    system: &DirectionSystem,
    partition: &PhasePartition,
    basis: &BeltramiBasis,
    config: &ProbeConfig,
) -> Result<Calibration, StageError> {
    if !(config.margin >= 0.0) || config.velocity_steps == 0 || config.phases.is_empty() {
        return Err(StageError::Params("probe configuration is empty".into()));
    }
    if !(config.radius_fraction > 0.0 && config.radius_fraction < 1.0) {
        return Err(StageError::Params("probe radius fraction must lie in (0, 1)".into()));
    }
    let n = size_retaining(basis.max_entry(), config.grid_factor);
    let steps = config.velocity_steps;
    let h = 2.0 / steps as f64;
    let mut sup = 0.0f64;
    let mut probes = 0;
    for r in probe_stresses(system.r0(), config.radius_fraction) {
        for q in 0..steps * steps * steps {
            let u = [
                (q / (steps * steps)) as f64 * h,
                ((q / steps) % steps) as f64 * h,
                (q % steps) as f64 * h,
            ];
            for &theta in &config.phases {
                let w = probe_field(system, partition, basis, &r, u, theta, n)?;
                sup = sup.max(w.max_magnitude());
                probes += 1;
            }
        }
    }
    let bound = 4.0 * profile.max() * sup * sup;
    Ok(Calibration {
        m: (1.0 + config.margin) * bound.max(1.0),
        probe_sup: sup,
        probe_bound: bound,
        probes,
    })
}
