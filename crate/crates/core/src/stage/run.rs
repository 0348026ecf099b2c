//! Running a stage with its report, and the multi-stage iteration.

use serde::{Deserialize, Serialize};

use super::build::slice_operator_norm;
use super::{
    build_corrector, build_pressure, build_reynolds, build_w_o, choose_params, compute_stage_targets, Construction,
    EulerReynoldsState, RunPlan, ScheduleConfig, StageConstants, StageError, StageParams,
};
use crate::calculus;
use crate::diagnostics::{reynolds_decomposition, DecompositionReport};
use crate::field::VectorField;
use crate::grid::Dealias;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageOptions {
    /// Also split `R̊₁` into transport, oscillation and error parts.
    pub decomposition: bool,
}

/// Energy after a stage at one time sample, against the band
/// `3δe/8 ≤ e − ∫|v₁|² ≤ 5δe/8`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyCheck {
    pub t: f64,
    pub e: f64,
    pub kinetic: f64,
    /// `e(1 − 5δ/8)`.
    pub lower: f64,
    /// `e(1 − 3δ/8)`.
    pub upper: f64,
    /// `|e(1 − δ/2) − ∫|v₁|²|`.
    pub deviation: f64,
    pub ok: bool,
}

/// Everything measured during one stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage_index: usize,
    pub lambda: u64,
    pub mu: u64,
    pub alpha: f64,
    pub beta: f64,
    pub grid_n: usize,
    pub stride: u64,
    pub effective_n: u64,
    pub dealias: Dealias,
    pub samples: usize,
    pub delta_in: f64,
    pub delta_out: f64,
    pub eta: f64,
    pub m: f64,
    pub rho: Vec<f64>,
    pub reynolds_sup: f64,
    /// `ηδ/2`.
    pub reynolds_target: f64,
    pub reynolds_ok: bool,
    pub energy: Vec<EnergyCheck>,
    pub energy_ok: bool,
    pub velocity_increment: f64,
    /// `M√δ`.
    pub velocity_bound: f64,
    pub velocity_ok: bool,
    pub pressure_increment: f64,
    /// `Mδ`.
    pub pressure_bound: f64,
    pub pressure_ok: bool,
    pub w_o_sup: f64,
    /// `√(Mδ)/2`.
    pub w_o_bound: f64,
    pub w_o_ok: bool,
    pub w_c_sup: f64,
    pub divergence_residual: f64,
    pub mean_drift: f64,
    pub identity_residual: f64,
    pub time_fd_error: Option<f64>,
    pub decomposition: Option<DecompositionReport>,
    /// Reynolds, energy, velocity and pressure targets all met.
    pub success: bool,
}

/// Output of [`run_stage`]: the new state, the report, and the two
/// perturbations for further diagnostics.
#[derive(Debug, Clone)]
pub struct StageOutcome {
    pub state: EulerReynoldsState,
    pub report: StageReport,
    pub w_o: VectorField,
    pub w_c: VectorField,
}

/// One stage from `state` (resampled onto the parameter grid if needed).
pub fn run_stage(
    state: &EulerReynoldsState,
    ctx: &Construction,
    params: &StageParams,
    options: &StageOptions,
) -> Result<StageOutcome, StageError> {
    let state = if state.grid() == params.grid() {
        state.clone()
    } else {
        state.resample(*params.grid())?
    };
    if state.times() != params.times() {
        return Err(StageError::Params(
            "state and stage parameters use different time samples".into(),
        ));
    }
    let StageConstants { eta, m } = ctx.constants;
    let delta = state.delta;
    let targets = compute_stage_targets(&state, ctx.profile, ctx.system, eta)?;
    let w_o = build_w_o(&state, &targets, ctx.system, ctx.partition, ctx.basis, params)?;
    let w_c = build_corrector(&w_o)?;
    let increment = w_o.add(&w_c)?;
    let v1 = state.v.add(&increment)?.with_solenoidal(true);
    let p1 = build_pressure(&state.p, &w_o)?;
    let rey = build_reynolds(&v1, &p1)?;

    let reynolds_sup = (0..rey.r.samples())
        .map(|t| slice_operator_norm(&rey.r, t))
        .fold(0.0, f64::max);
    let reynolds_target = eta * delta / 2.0;
    let energy: Vec<EnergyCheck> = params
        .times()
        .times()
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let e = ctx.profile.eval(t);
            let kinetic = v1.l2_squared(i);
            let lower = e * (1.0 - 5.0 * delta / 8.0);
            let upper = e * (1.0 - 3.0 * delta / 8.0);
            EnergyCheck {
                t,
                e,
                kinetic,
                lower,
                upper,
                deviation: (e * (1.0 - delta / 2.0) - kinetic).abs(),
                ok: kinetic >= lower && kinetic <= upper,
            }
        })
        .collect();
    let energy_ok = energy.iter().all(|c| c.ok);
    let velocity_increment = increment.max_magnitude();
    let velocity_bound = m * delta.sqrt();
    let pressure_increment = p1.sub(&state.p)?.max_abs();
    let pressure_bound = m * delta;
    let w_o_sup = w_o.max_magnitude();
    let w_o_bound = (m * delta).sqrt() / 2.0;
    let decomposition = if options.decomposition {
        Some(
            reynolds_decomposition(&state, &v1, &w_o, &w_c, &rey.r, params.alpha())
                .map_err(|e| StageError::Diagnostics(e.to_string()))?,
        )
    } else {
        None
    };
    let reynolds_ok = reynolds_sup <= reynolds_target;
    let velocity_ok = velocity_increment <= velocity_bound;
    let pressure_ok = pressure_increment <= pressure_bound;
    let grid = params.grid();
    let report = StageReport {
        stage_index: state.stage_index,
        lambda: params.lambda(),
        mu: params.mu(),
        alpha: params.alpha(),
        beta: params.beta(),
        grid_n: grid.n(),
        stride: grid.stride(),
        effective_n: grid.effective_n(),
        dealias: grid.dealias(),
        samples: params.times().len(),
        delta_in: delta,
        delta_out: delta / 2.0,
        eta,
        m,
        rho: targets.rho.clone(),
        reynolds_sup,
        reynolds_target,
        reynolds_ok,
        energy,
        energy_ok,
        velocity_increment,
        velocity_bound,
        velocity_ok,
        pressure_increment,
        pressure_bound,
        pressure_ok,
        w_o_sup,
        w_o_bound,
        w_o_ok: w_o_sup <= w_o_bound,
        w_c_sup: w_c.max_magnitude(),
        divergence_residual: calculus::divergence(&v1)?.max_coeff(),
        mean_drift: rey.mean_drift,
        identity_residual: rey.identity_residual,
        time_fd_error: rey.time_fd_error,
        decomposition,
        success: reynolds_ok && energy_ok && velocity_ok && pressure_ok,
    };
    Ok(StageOutcome {
        state: EulerReynoldsState {
            v: v1,
            p: p1,
            r: rey.r,
            delta: delta / 2.0,
            stage_index: state.stage_index + 1,
        },
        report,
        w_o,
        w_c,
    })
}

/// Outcome of one scheduled stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum StageRecord {
    Completed(StageReport),
    /// A precondition or parameter error stopped the stage before it ran.
    Aborted {
        stage_index: usize,
        lambda: Option<u64>,
        error: String,
    },
}

impl StageRecord {
    pub fn succeeded(&self) -> bool {
        matches!(self, Self::Completed(r) if r.success)
    }
}

/// Increments between consecutive iterates against the Cauchy bounds
/// `‖v_{n+1} − v_n‖₀ ≤ M 2^{−n/2}` and `‖p_{n+1} − p_n‖₀ ≤ M 2^{−n}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyRow {
    pub stage: usize,
    pub velocity_increment: f64,
    pub velocity_bound: f64,
    pub pressure_increment: f64,
    pub pressure_bound: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub constants: StageConstants,
    pub attempted: usize,
    pub completed: usize,
    pub stages: Vec<StageRecord>,
    pub cauchy: Vec<CauchyRow>,
    /// `sup_t |∫|v_n|² − e(t)|` for the starting state and after every
    /// successful stage.
    pub energy_error: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct IterationOutcome {
    pub report: IterationReport,
    /// The last state whose stage succeeded (or the starting state).
    pub state: EulerReynoldsState,
}

fn energy_error(state: &EulerReynoldsState, ctx: &Construction) -> f64 {
    state
        .times()
        .times()
        .iter()
        .enumerate()
        .map(|(i, &t)| (state.v.l2_squared(i) - ctx.profile.eval(t)).abs())
        .fold(0.0, f64::max)
}

/// Apply stages from `start` until the budget is spent or a stage fails.
/// `on_stage` sees every stage that ran and may stop the run by returning
/// `false`.
pub fn run_iteration(
    ctx: &Construction,
    config: &ScheduleConfig,
    plan: &RunPlan,
    start: EulerReynoldsState,
    options: &StageOptions,
    on_stage: &mut dyn FnMut(&StageOutcome) -> bool,
) -> IterationOutcome {
    let mut state = start;
    let mut report = IterationReport {
        constants: ctx.constants,
        attempted: 0,
        completed: 0,
        stages: Vec::new(),
        cauchy: Vec::new(),
        energy_error: vec![energy_error(&state, ctx)],
    };
    for i in state.stage_index..config.stages {
        report.attempted += 1;
        let lambda = config.lambdas.lambda(i);
        let outcome =
            choose_params(state.delta, i, config, plan).and_then(|params| run_stage(&state, ctx, &params, options));
        let outcome = match outcome {
            Ok(o) => o,
            Err(e) => {
                report.stages.push(StageRecord::Aborted {
                    stage_index: i,
                    lambda,
                    error: e.to_string(),
                });
                break;
            }
        };
        let keep_going = on_stage(&outcome);
        let r = &outcome.report;
        let success = r.success;
        if success {
            report.completed += 1;
            report.cauchy.push(CauchyRow {
                stage: i,
                velocity_increment: r.velocity_increment,
                velocity_bound: r.velocity_bound,
                pressure_increment: r.pressure_increment,
                pressure_bound: r.pressure_bound,
                ok: r.velocity_ok && r.pressure_ok,
            });
        }
        report.stages.push(StageRecord::Completed(outcome.report));
        if !success {
            break;
        }
        state = outcome.state;
        report.energy_error.push(energy_error(&state, ctx));
        if !keep_going {
            break;
        }
    }
    IterationOutcome { report, state }
}
