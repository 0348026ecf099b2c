//! Log-log rate fits, oscillatory-integral sweeps and stage rate samples.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::holder::holder_norm;
use super::DiagnosticsError;
use crate::calculus;
use crate::field::{torus_volume, MatrixField, ScalarField, VectorField};
use crate::operators;
use crate::stage::{build_corrector, build_w_o, compute_stage_targets, Construction, EulerReynoldsState, StageParams};

/// Least-squares fit of `log y = slope·log x + intercept`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub abscissa: Vec<f64>,
    pub ordinate: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in natural-log units.
    pub residual: f64,
    /// Standard error of the slope (zero for exactly collinear data).
    pub slope_stderr: f64,
}

impl RateFit {
    /// Fit over all points; needs at least four positive pairs.
    pub fn fit(abscissa: &[f64], ordinate: &[f64]) -> Result<Self, DiagnosticsError> {
        let n = abscissa.len().min(ordinate.len());
        if n < 4 {
            return Err(DiagnosticsError::TooFewPoints { needed: 4, got: n });
        }
        if abscissa[..n]
            .iter()
            .chain(&ordinate[..n])
            .any(|v| !(*v > 0.0) || !v.is_finite())
        {
            return Err(DiagnosticsError::NonPositive);
        }
        let x: Vec<f64> = abscissa[..n].iter().map(|v| v.ln()).collect();
        let y: Vec<f64> = ordinate[..n].iter().map(|v| v.ln()).collect();
        let mx = x.iter().sum::<f64>() / n as f64;
        let my = y.iter().sum::<f64>() / n as f64;
        let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
        if sxx == 0.0 {
            return Err(DiagnosticsError::NonPositive);
        }
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let ssr: f64 = x.iter().zip(&y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum();
        Ok(Self {
            abscissa: abscissa[..n].to_vec(),
            ordinate: ordinate[..n].to_vec(),
            slope,
            intercept,
            residual: (ssr / n as f64).sqrt(),
            slope_stderr: (ssr / (n - 2) as f64 / sxx).sqrt(),
        })
    }

    /// Fit over the `count` largest abscissae.
    pub fn fit_tail(abscissa: &[f64], ordinate: &[f64], count: usize) -> Result<Self, DiagnosticsError> {
        let mut idx: Vec<usize> = (0..abscissa.len().min(ordinate.len())).collect();
        idx.sort_by(|a, b| abscissa[*a].total_cmp(&abscissa[*b]));
        let tail = &idx[idx.len().saturating_sub(count)..];
        let x: Vec<f64> = tail.iter().map(|i| abscissa[*i]).collect();
        let y: Vec<f64> = tail.iter().map(|i| ordinate[*i]).collect();
        Self::fit(&x, &y)
    }

    /// `|slope − predicted| / |predicted|`.
    pub fn relative_error(&self, predicted: f64) -> f64 {
        (self.slope - predicted).abs() / predicted.abs()
    }
}

/// Exponent predicted for a bound `C μ^p λ^{α−1}` over the given `(λ, μ)`
/// pairs: the least-squares slope of its logarithm against `log λ`.  With
/// `μ = λ^β` exactly this is `pβ + α − 1`; rounded `μ` shifts it.
pub fn predicted_exponent(pairs: &[(u64, u64)], mu_power: f64, alpha: f64) -> Result<f64, DiagnosticsError> {
    let x: Vec<f64> = pairs.iter().map(|(l, _)| *l as f64).collect();
    let y: Vec<f64> = pairs
        .iter()
        .map(|(l, m)| (*m as f64).powf(mu_power) * (*l as f64).powf(alpha - 1.0))
        .collect();
    Ok(RateFit::fit(&x, &y)?.slope)
}

/// `|∫ a e^{iλk·x} dx|` over a frequency sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillatoryDecay {
    pub lambdas: Vec<u64>,
    pub values: Vec<f64>,
    /// Smallest swept `λ` from which every value is exactly zero: the
    /// band-limited regime.
    pub exact_zero_from: Option<u64>,
    /// Fit over the nonzero values, when there are at least four.
    pub fit: Option<RateFit>,
}

/// Physical wavevector `λk` as a stored mode, if the stride divides it.
fn stored(a: &ScalarField, k: [i64; 3], lambda: u64) -> Option<[i64; 3]> {
    let s = a.grid().stride() as i64;
    let l = lambda as i64;
    let p = k.map(|c| c * l);
    p.iter().all(|c| c % s == 0).then(|| p.map(|c| c / s))
}

/// Exact integrals via the coefficient at `−λk` (largest over time samples).
pub fn oscillatory_average_decay(a: &ScalarField, k: [i64; 3], lambdas: &[u64]) -> OscillatoryDecay {
    let values: Vec<f64> = lambdas
        .iter()
        .map(|&l| {
            let Some(m) = stored(a, k, l) else { return 0.0 };
            let neg = m.map(|c| -c);
            (0..a.samples())
                .map(|t| a.coeff(t, neg).map_or(0.0, |c| c.norm()) * torus_volume())
                .fold(0.0, f64::max)
        })
        .collect();
    let exact_zero_from = (0..values.len())
        .find(|&i| values[i..].iter().all(|v| *v == 0.0))
        .map(|i| lambdas[i]);
    let (x, y): (Vec<f64>, Vec<f64>) = lambdas
        .iter()
        .zip(&values)
        .filter(|(_, v)| **v > 0.0)
        .map(|(l, v)| (*l as f64, *v))
        .unzip();
    let fit = RateFit::fit(&x, &y).ok();
    OscillatoryDecay {
        lambdas: lambdas.to_vec(),
        values,
        exact_zero_from,
        fit,
    }
}

/// `a·cos(λk·x)` by an exact shift of coefficients.  Errors when more than
/// a `1e-12` share of the shifted energy would leave the retained box.
pub fn modulate_cos(a: &ScalarField, k: [i64; 3], lambda: u64) -> Result<ScalarField, DiagnosticsError> {
    let s = stored(a, k, lambda).ok_or(DiagnosticsError::Unresolved { lost: 1.0 })?;
    let grid = *a.grid();
    let kc = grid.cutoff() as i64;
    let mut out = ScalarField::zeros(grid, a.times().clone());
    let (mut lost, mut total) = (0.0, 0.0);
    for t in 0..a.samples() {
        for m1 in -kc..=kc {
            for m2 in -kc..=kc {
                for m3 in -kc..=kc {
                    let m = [m1, m2, m3];
                    let e = a.coeff(t, m).map_or(0.0, |c| c.norm_sqr());
                    total += e;
                    for sign in [1, -1] {
                        if !grid.retains([m1 + sign * s[0], m2 + sign * s[1], m3 + sign * s[2]]) {
                            lost += 0.5 * e;
                        }
                    }
                }
            }
        }
        let slice: Vec<Complex64> = grid
            .iter_modes()
            .map(|(_, m)| {
                let lo = a.coeff(t, [m[0] - s[0], m[1] - s[1], m[2] - s[2]]).unwrap_or_default();
                let hi = a.coeff(t, [m[0] + s[0], m[1] + s[1], m[2] + s[2]]).unwrap_or_default();
                (lo + hi) * 0.5
            })
            .collect();
        out.slice_mut(t).copy_from_slice(&slice);
    }
    if total > 0.0 && lost / total > 1e-12 {
        return Err(DiagnosticsError::Unresolved { lost: lost / total });
    }
    Ok(out)
}

/// Per-λ row of [`oscillatory_gradient_estimate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientRow {
    pub lambda: u64,
    pub sup: f64,
    pub holder: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientEstimate {
    pub alpha: f64,
    pub rows: Vec<GradientRow>,
    pub fit: Option<RateFit>,
    /// `−(1 − α)`.
    pub predicted: f64,
}

/// `‖∇φ_λ‖_α` for `Δφ_λ = a cos(λk·x) − mean` over a frequency sweep.
pub fn oscillatory_gradient_estimate(
    a: &ScalarField,
    k: [i64; 3],
    lambdas: &[u64],
    alpha: f64,
) -> Result<GradientEstimate, DiagnosticsError> {
    let mut rows = Vec::with_capacity(lambdas.len());
    for &l in lambdas {
        let f = modulate_cos(a, k, l)?;
        let phi = operators::inverse_laplacian(&f);
        let g = calculus::gradient(&phi);
        let h = holder_norm(&[g.comp(0), g.comp(1), g.comp(2)], alpha)?;
        rows.push(GradientRow {
            lambda: l,
            sup: h.sup(),
            holder: h.norm,
        });
    }
    let x: Vec<f64> = rows.iter().map(|r| r.lambda as f64).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.holder).collect();
    Ok(GradientEstimate {
        alpha,
        fit: RateFit::fit(&x, &y).ok(),
        rows,
        predicted: -(1.0 - alpha),
    })
}

/// The oscillation part `R(div(w_o⊗w_o − ½|w_o|² Id + R̊))`.
pub fn oscillation_part(r: &MatrixField, w_o: &VectorField) -> Result<MatrixField, DiagnosticsError> {
    let inputs = [w_o.comp(0), w_o.comp(1), w_o.comp(2)];
    let six = calculus::pointwise(&inputs, 6, |x, y| {
        let h = 0.5 * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
        y[0] = x[0] * x[0] - h;
        y[1] = x[0] * x[1];
        y[2] = x[0] * x[2];
        y[3] = x[1] * x[1] - h;
        y[4] = x[1] * x[2];
        y[5] = x[2] * x[2] - h;
    })?;
    let [a, b, c, d, e, f]: [ScalarField; 6] = six.try_into().expect("six outputs");
    let m = MatrixField::new(vec![a, b.clone(), c.clone(), b, d, e.clone(), c, e, f])?.with_flags(true, false);
    let m = if r.max_coeff() == 0.0 { m } else { m.add(r)? };
    Ok(operators::inverse_divergence_of_div(&m)?)
}

/// The six independent components of a symmetric matrix field.
pub fn symmetric_components(a: &MatrixField) -> [&ScalarField; 6] {
    [
        a.comp(0, 0),
        a.comp(0, 1),
        a.comp(0, 2),
        a.comp(1, 1),
        a.comp(1, 2),
        a.comp(2, 2),
    ]
}

/// Quantities of one stage measured at a single instant, for λ sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRateSample {
    pub lambda: u64,
    pub mu: u64,
    pub grid_n: usize,
    pub w_o_sup: f64,
    pub w_c_sup: f64,
    /// `|e(1 − δ/2) − ∫|v₁|²|`.
    pub energy_deviation: f64,
    pub oscillation_sup: f64,
    pub oscillation_holder: f64,
}

/// Build `w_o` and `w_c` for a single-instant state and measure the
/// quantities whose λ-dependence the stage estimates predict.
pub fn stage_rate_sample(
    state: &EulerReynoldsState,
    ctx: &Construction,
    params: &StageParams,
) -> Result<StageRateSample, DiagnosticsError> {
    let state = if state.grid() == params.grid() {
        state.clone()
    } else {
        state.resample(*params.grid())?
    };
    let targets = compute_stage_targets(&state, ctx.profile, ctx.system, ctx.constants.eta)?;
    let w_o = build_w_o(&state, &targets, ctx.system, ctx.partition, ctx.basis, params)?;
    let w_c = build_corrector(&w_o)?;
    let v1 = state.v.add(&w_o)?.add(&w_c)?;
    let t = params.times().time(0);
    let e = ctx.profile.eval(t);
    let energy_deviation = (e * (1.0 - state.delta / 2.0) - v1.l2_squared(0)).abs();
    drop(v1);
    let w_c_sup = w_c.max_magnitude();
    drop(w_c);
    let osc = oscillation_part(&state.r, &w_o)?;
    let h = holder_norm(&symmetric_components(&osc), params.alpha())?;
    Ok(StageRateSample {
        lambda: params.lambda(),
        mu: params.mu(),
        grid_n: params.grid().n(),
        w_o_sup: w_o.max_magnitude(),
        w_c_sup,
        energy_deviation,
        oscillation_sup: h.sup(),
        oscillation_holder: h.norm,
    })
}
