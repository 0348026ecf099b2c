//! Construction of `ρ`, `R`, `w_o`, `w_c`, `p₁` and `R̊₁`.

use num_complex::Complex64;
use rayon::prelude::*;

use super::{EulerReynoldsState, StageError, StageParams};
use crate::beltrami::BeltramiBasis;
use crate::calculus;
use crate::fft;
use crate::field::{torus_volume, zero, MatrixField, ScalarField, VectorField};
use crate::geometry::{DirectionSystem, FAMILIES};
use crate::linalg;
use crate::operators;
use crate::partition::PhasePartition;
use crate::profile::EnergyProfile;

/// `ρ(t)` and `R = ρ Id − R̊` for one stage, with the measured quantities
/// behind the precondition checks.
#[derive(Debug, Clone, PartialEq)]
pub struct StageTargets {
    pub rho: Vec<f64>,
    pub r: MatrixField,
    /// `∫|v|²` per time sample.
    pub kinetic: Vec<f64>,
    /// `sup_x |R̊|` per time sample (operator norm).
    pub reynolds_sup: Vec<f64>,
}

/// Largest pointwise operator norm of a matrix field at slice `t`.
pub(crate) fn slice_operator_norm(a: &MatrixField, t: usize) -> f64 {
    if a.max_coeff() == 0.0 {
        return 0.0;
    }
    let p = a.to_physical(t);
    (0..p[0].len())
        .into_par_iter()
        .map(|x| {
            let m: [f64; 9] = std::array::from_fn(|i| p[i][x]);
            linalg::operator_norm(&m)
        })
        .reduce(|| 0.0, f64::max)
}

/// Check the stage hypotheses and assemble `ρ` and `R`.
///
/// Per time sample: the energy gap `e − ∫|v|²` must lie in
/// `[3δe/4, 5δe/4]`, `sup|R̊| ≤ ηδ`, and `sup|R̊|/ρ < r₀` so that `R/ρ`
/// stays inside the chart domain.
pub fn compute_stage_targets(
    state: &EulerReynoldsState,
    profile: &EnergyProfile,
    system: &DirectionSystem,
    eta: f64,
) -> Result<StageTargets, StageError> {
    state.check_consistent()?;
    let delta = state.delta;
    let vol = torus_volume();
    let times = state.times().clone();
    let mut rho = Vec::with_capacity(times.len());
    let mut kinetic = Vec::with_capacity(times.len());
    let mut reynolds_sup = Vec::with_capacity(times.len());
    for (i, &t) in times.times().iter().enumerate() {
        let fail = |detail: String| StageError::Precondition {
            sample: i,
            time: t,
            detail,
        };
        let e = profile.eval(t);
        let k = state.v.l2_squared(i);
        let gap = e - k;
        if !(gap >= 0.75 * delta * e && gap <= 1.25 * delta * e) {
            return Err(fail(format!(
                "energy gap e − ∫|v|² = {gap:e} outside [3δe/4, 5δe/4] = [{:e}, {:e}]",
                0.75 * delta * e,
                1.25 * delta * e
            )));
        }
        let sup = slice_operator_norm(&state.r, i);
        if sup > eta * delta {
            return Err(fail(format!("sup|R̊| = {sup:e} exceeds ηδ = {:e}", eta * delta)));
        }
        let r = (e * (1.0 - delta / 2.0) - k) / (3.0 * vol);
        if !(r > 0.0) || sup / r >= system.r0() {
            return Err(fail(format!(
                "R/ρ leaves the chart domain: sup|R̊|/ρ = {:e}, r₀ = {:e}",
                sup / r,
                system.r0()
            )));
        }
        rho.push(r);
        kinetic.push(k);
        reynolds_sup.push(sup);
    }
    let mut rho_field = ScalarField::zeros(*state.grid(), times);
    for (i, r) in rho.iter().enumerate() {
        rho_field.set_mode(i, [0, 0, 0], Complex64::new(*r, 0.0))?;
    }
    let r = state
        .r
        .scale(-1.0)
        .add_isotropic(&rho_field, 1.0)?
        .with_flags(true, false);
    Ok(StageTargets {
        rho,
        r,
        kinetic,
        reynolds_sup,
    })
}

/// One member of `Γ_j` with its stored-mode phase tables.
struct Member {
    k: [i64; 3],
    b: [Complex64; 3],
    /// `axes[a][i] = exp(2πi L k_a i / n)`.
    axes: [Vec<Complex64>; 3],
}

fn members(
    system: &DirectionSystem,
    basis: &BeltramiBasis,
    multiple: u64,
    n: usize,
) -> Result<Vec<Vec<Member>>, StageError> {
    let roots: Vec<Complex64> = (0..n)
        .map(|r| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * r as f64 / n as f64))
        .collect();
    let l = multiple as i64;
    let n_i = n as i64;
    (0..FAMILIES)
        .map(|j| {
            system
                .active(j)
                .iter()
                .map(|&k| {
                    let mode = basis
                        .mode(k)
                        .ok_or_else(|| StageError::Params(format!("direction {k:?} is not on the Beltrami shell")))?;
                    let axes = std::array::from_fn(|a| {
                        (0..n_i)
                            .map(|i| roots[((l * k[a] % n_i) * i).rem_euclid(n_i) as usize])
                            .collect()
                    });
                    Ok(Member { k, b: mode.b(), axes })
                })
                .collect()
        })
        .collect()
}

/// The oscillatory perturbation
/// `w_o = √ρ Σ_j Σ_{k∈Λ_j} γ_k(R/ρ) φ_k^{(j)}(v, λt) B_k e^{iλk·x}`,
/// with the amplitudes sampled on the collocation grid.
pub fn build_w_o(
    state: &EulerReynoldsState,
    targets: &StageTargets,
    system: &DirectionSystem,
    partition: &PhasePartition,
    basis: &BeltramiBasis,
    params: &StageParams,
) -> Result<VectorField, StageError> {
    let grid = *params.grid();
    if *state.grid() != grid || state.times() != params.times() {
        return Err(StageError::Params(
            "state and stage parameters use different grids".into(),
        ));
    }
    state.check_consistent()?;
    let multiple = params.multiple();
    let needed = multiple as usize * basis.max_entry();
    if needed > grid.cutoff() {
        return Err(StageError::Unresolved {
            cutoff: grid.cutoff(),
            needed,
        });
    }
    let n = grid.n();
    let table = members(system, basis, multiple, n)?;
    let width = table.iter().map(|m| m.len()).max().unwrap_or(0);
    let mu = params.mu() as f64;
    let ratio = (params.lambda() / params.mu()) as f64;
    let plan = fft::plan(n);
    let stress_free = state.r.max_coeff() == 0.0;

    let slices: Vec<[Vec<Complex64>; 3]> = (0..params.times().len())
        .into_par_iter()
        .map(|s| {
            let t = params.times().time(s);
            let rho = targets.rho[s];
            let sqrt_rho = rho.sqrt();
            let rate = ratio * t;
            let v = state.v.to_physical(s);
            let r = if stress_free {
                None
            } else {
                Some(state.r.to_physical(s))
            };
            let mut out = vec![[0.0f64; 3]; grid.points()];
            out.par_chunks_mut(n * n).enumerate().for_each(|(a, plane)| {
                let mut g = vec![0.0; width];
                for b in 0..n {
                    for c in 0..n {
                        let x = (a * n + b) * n + c;
                        let mut rm = linalg::identity();
                        if let Some(r) = &r {
                            for q in 0..9 {
                                rm[q] -= r[q][x] / rho;
                            }
                        }
                        let u = [mu * v[0][x], mu * v[1][x], mu * v[2][x]];
                        let mut w = [0.0; 3];
                        for (j, (l, al)) in partition.active(u).into_iter().enumerate() {
                            if al == 0.0 {
                                continue;
                            }
                            let fam = &table[j];
                            system.gammas_into(j, &rm, &mut g[..fam.len()]);
                            for (m, gk) in fam.iter().zip(&g) {
                                let amp = sqrt_rho * gk * al;
                                if amp == 0.0 {
                                    continue;
                                }
                                let kl = m.k[0] * l[0] + m.k[1] * l[1] + m.k[2] * l[2];
                                let mut z = m.axes[0][a] * m.axes[1][b] * m.axes[2][c] * amp;
                                if kl != 0 {
                                    z *= Complex64::from_polar(1.0, -(kl as f64) * rate);
                                }
                                for q in 0..3 {
                                    let p = z * m.b[q];
                                    w[q] += 2.0 * p.re;
                                }
                            }
                        }
                        plane[b * n + c] = w;
                    }
                }
            });
            std::array::from_fn(|q| {
                let vals: Vec<f64> = out.iter().map(|w| w[q]).collect();
                plan.to_spectral(&grid, &vals)
            })
        })
        .collect();

    let mut comps: [Vec<Vec<Complex64>>; 3] = Default::default();
    for s in slices {
        for (q, c) in s.into_iter().enumerate() {
            comps[q].push(c);
        }
    }
    let [c0, c1, c2] = comps;
    let times = params.times().clone();
    Ok(VectorField::new([
        ScalarField::from_slices(grid, times.clone(), c0)?,
        ScalarField::from_slices(grid, times.clone(), c1)?,
        ScalarField::from_slices(grid, times, c2)?,
    ])?)
}

/// `w_c = −Q w_o`, so that `w_o + w_c = P w_o` is solenoidal and mean-free.
pub fn build_corrector(w_o: &VectorField) -> Result<VectorField, StageError> {
    Ok(operators::leray_q(w_o)?.scale(-1.0))
}

/// `p₁ = p − |w_o|²/2` with the dealiased square.
pub fn build_pressure(p: &ScalarField, w_o: &VectorField) -> Result<ScalarField, StageError> {
    Ok(p.sub(&calculus::norm_squared(w_o)?.scale(0.5))?)
}

/// `R̊₁` and the measured quality of its defining identity.
#[derive(Debug, Clone, PartialEq)]
pub struct ReynoldsOutput {
    pub r: MatrixField,
    /// Largest `|⟨∂_t v₁ + div(v₁⊗v₁) + ∇p₁⟩|` over time samples.
    pub mean_drift: f64,
    /// Largest coefficient of `div R̊₁ − (X − ⟨X⟩)`.
    pub identity_residual: f64,
    /// Richardson estimate of the time-difference error in `∂_t v₁`
    /// (needs an odd number of at least 9 samples).
    pub time_fd_error: Option<f64>,
}

/// Relative tolerance on the mean of the Reynolds argument.
const MEAN_TOL: f64 = 1e-9;

/// `R̊₁ = R(∂_t v₁ + div(v₁⊗v₁) + ∇p₁)` with 4th-order time differences.
pub fn build_reynolds(v1: &VectorField, p1: &ScalarField) -> Result<ReynoldsOutput, StageError> {
    let dt = calculus::time_derivative_vector(v1)?;
    let flux = calculus::div_rows(&calculus::outer_self(v1)?)?;
    let x = dt.add(&flux)?.add(&calculus::gradient(p1))?;
    let scale = 1.0 + x.max_coeff();
    let mut drift = 0.0f64;
    for t in 0..x.samples() {
        let m = x.mean(t);
        drift = drift.max((m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt());
    }
    let tol = MEAN_TOL * scale;
    if drift > tol {
        return Err(StageError::NonzeroMean { mean: drift, tol });
    }
    let r = operators::inverse_divergence(&x)?;
    let div = calculus::div_rows(&r)?;
    let centred = x.map(|f| f.map_coeffs(|k, c| if k == [0.0; 3] { zero() } else { c }));
    let identity_residual = div.sub(&centred)?.max_coeff();
    let time_fd_error = v1
        .comps()
        .iter()
        .map(calculus::time_derivative_error)
        .try_fold(0.0f64, |acc, e| e.map(|e| acc.max(e)));
    Ok(ReynoldsOutput {
        r,
        mean_drift: drift,
        identity_residual,
        time_fd_error,
    })
}
