//! Energy against the profile, and consistency of the pressure with the
//! Poisson equation it must satisfy.

use serde::{Deserialize, Serialize};

use super::DiagnosticsError;
use crate::calculus;
use crate::field::{zero, ScalarField, VectorField};
use crate::operators;
use crate::profile::EnergyProfile;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyRow {
    pub t: f64,
    pub e: f64,
    pub kinetic: f64,
    /// `e − ∫|v|²`.
    pub gap: f64,
    /// `3δe/4`.
    pub band_lower: f64,
    /// `5δe/4`.
    pub band_upper: f64,
    pub in_band: bool,
    /// `|e(1 − δ) − ∫|v|²|`.
    pub deviation: f64,
    /// `d/dt ∫|v|²` by fourth-order differences, with at least 5 samples.
    pub dkinetic_dt: Option<f64>,
    /// `e'(t)`.
    pub de_dt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub delta: f64,
    pub rows: Vec<EnergyRow>,
    pub max_deviation: f64,
    pub all_in_band: bool,
}

/// Kinetic energy of `v` against `e(t)` and the band for stage level `δ`.
pub fn energy_report(v: &VectorField, profile: &EnergyProfile, delta: f64) -> EnergyReport {
    let times = v.times();
    let kinetic: Vec<f64> = (0..v.samples()).map(|t| v.l2_squared(t)).collect();
    let rates = times
        .spacing()
        .and_then(|h| calculus::time_derivative_values(&kinetic, h));
    let rows: Vec<EnergyRow> = times
        .times()
        .iter()
        .zip(&kinetic)
        .enumerate()
        .map(|(i, (&t, &k))| {
            let e = profile.eval(t);
            let gap = e - k;
            let band_lower = 0.75 * delta * e;
            let band_upper = 1.25 * delta * e;
            EnergyRow {
                t,
                e,
                kinetic: k,
                gap,
                band_lower,
                band_upper,
                in_band: gap >= band_lower && gap <= band_upper,
                deviation: (e * (1.0 - delta) - k).abs(),
                dkinetic_dt: rates.as_ref().map(|r| r[i]),
                de_dt: profile.derivative(t),
            }
        })
        .collect();
    EnergyReport {
        delta,
        max_deviation: rows.iter().map(|r| r.deviation).fold(0.0, f64::max),
        all_in_band: rows.iter().all(|r| r.in_band),
        rows,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressureReport {
    /// Largest grid value of `(p − ⟨p⟩) − q` with `q = −Δ⁻¹ div div(v⊗v)`.
    pub residual_sup: f64,
    /// `‖(p − ⟨p⟩) − q‖_{L²}`.
    pub residual_l2: f64,
    pub q_sup: f64,
}

/// How far `p` is from the pressure of `v` in the Euler equations.  For an
/// Euler–Reynolds state the residual is `Δ⁻¹ div div R̊`.
pub fn pressure_consistency(v: &VectorField, p: &ScalarField) -> Result<PressureReport, DiagnosticsError> {
    let q = operators::inverse_laplacian_div_div(&calculus::outer_self(v)?)?.scale(-1.0);
    let centred = p.map_coeffs(|k, c| if k == [0.0; 3] { zero() } else { c });
    let diff = centred.sub(&q)?;
    let residual_l2 = (0..diff.samples())
        .map(|t| diff.l2_squared(t).sqrt())
        .fold(0.0, f64::max);
    Ok(PressureReport {
        residual_sup: diff.max_abs(),
        residual_l2,
        q_sup: q.max_abs(),
    })
}
