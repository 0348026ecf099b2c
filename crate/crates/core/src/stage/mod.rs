//! One convex-integration stage and the multi-stage driver.
//!
//! A stage takes an Euler–Reynolds state `(v, p, R̊, δ)`, adds the
//! oscillatory perturbation `w_o` (Beltrami flows at frequency `λ` patched
//! together by the direction geometry and the phase partition) and its Leray
//! corrector `w_c`, and returns `(v₁, p₁, R̊₁, δ/2)` with a report of the
//! estimates the stage is meant to achieve.  A stage that misses its targets
//! still returns its output; only broken preconditions are errors.

mod build;
mod calibrate;
mod params;
mod run;

use thiserror::Error;

use crate::beltrami::BeltramiBasis;
use crate::calculus;
use crate::field::{FieldError, MatrixField, ScalarField, VectorField};
use crate::geometry::DirectionSystem;
use crate::grid::{Grid3, GridError, TimeGrid};
use crate::operators;
use crate::partition::PhasePartition;
use crate::profile::EnergyProfile;

pub use build::{
    build_corrector, build_pressure, build_reynolds, build_w_o, compute_stage_targets, ReynoldsOutput, StageTargets,
};
pub use calibrate::{calibrate_m, probe_field, Calibration, ProbeConfig};
pub use params::{
    check_exponents, choose_params, mu_for, plan_run, GridRule, LambdaSchedule, RunPlan, ScheduleConfig, StageParams,
};
pub use run::{
    run_iteration, run_stage, CauchyRow, EnergyCheck, IterationOutcome, IterationReport, StageOptions, StageOutcome,
    StageRecord, StageReport,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StageError {
    #[error("invalid stage parameters: {0}")]
    Params(String),
    #[error("precondition failed at time sample {sample} (t = {time}): {detail}")]
    Precondition { sample: usize, time: f64, detail: String },
    #[error("grid cutoff {cutoff} cannot hold stored wavenumber {needed}")]
    Unresolved { cutoff: usize, needed: usize },
    #[error("Reynolds argument has mean {mean:e} above tolerance {tol:e}")]
    NonzeroMean { mean: f64, tol: f64 },
    #[error("stage diagnostics failed: {0}")]
    Diagnostics(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Solution of the Euler–Reynolds system at one stage.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerReynoldsState {
    pub v: VectorField,
    pub p: ScalarField,
    /// Symmetric trace-free Reynolds stress `R̊`.
    pub r: MatrixField,
    pub delta: f64,
    pub stage_index: usize,
}

impl EulerReynoldsState {
    /// `v = 0, p = 0, R̊ = 0, δ = 1`: the starting point of the iteration.
    pub fn zero(grid: Grid3, times: TimeGrid) -> Self {
        Self {
            v: VectorField::zeros(grid, times.clone()).with_solenoidal(true),
            p: ScalarField::zeros(grid, times.clone()),
            r: MatrixField::zeros(grid, times),
            delta: 1.0,
            stage_index: 0,
        }
    }

    pub fn grid(&self) -> &Grid3 {
        self.v.grid()
    }

    pub fn times(&self) -> &TimeGrid {
        self.v.times()
    }

    /// Error unless velocity, pressure and stress share grid and times.
    pub fn check_consistent(&self) -> Result<(), FieldError> {
        let g = *self.grid();
        for other in [self.p.grid(), self.r.grid()] {
            if *other != g {
                return Err(FieldError::GridMismatch(g, *other));
            }
        }
        if self.p.times() != self.times() || self.r.times() != self.times() {
            return Err(FieldError::TimeMismatch);
        }
        Ok(())
    }

    /// Exact change of grid size (same stride).
    pub fn resample(&self, grid: Grid3) -> Result<Self, FieldError> {
        Ok(Self {
            v: self.v.resample(grid)?,
            p: self.p.resample(grid)?,
            r: self.r.resample(grid)?,
            delta: self.delta,
            stage_index: self.stage_index,
        })
    }

    /// `∫|v|²` at every time sample.
    pub fn kinetic_energy(&self) -> Vec<f64> {
        (0..self.v.samples()).map(|t| self.v.l2_squared(t)).collect()
    }

    /// Euler–Reynolds residual `∂_t v + div(v⊗v) + ∇p − div R̊`.
    pub fn residual(&self) -> Result<VectorField, FieldError> {
        let dt = calculus::time_derivative_vector(&self.v)?;
        let flux = calculus::div_rows(&calculus::outer_self(&self.v)?)?;
        let grad = calculus::gradient(&self.p);
        let stress = calculus::div_rows(&self.r)?;
        dt.add(&flux)?.add(&grad)?.sub(&stress)
    }

    /// `R(∂_t v + div(v⊗v) + ∇p − div R̊)`, the stress the state fails to
    /// account for.
    pub fn residual_stress(&self) -> Result<MatrixField, FieldError> {
        operators::inverse_divergence(&self.residual()?)
    }
}

/// The constants of one construction: `η` bounds the admissible Reynolds
/// stress and `M` the size of the increments.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StageConstants {
    pub eta: f64,
    pub m: f64,
}

/// Everything a stage needs besides the state and its parameters.
#[derive(Debug, Clone, Copy)]
pub struct Construction<'a> {
    pub profile: &'a EnergyProfile,
    pub system: &'a DirectionSystem,
    pub partition: &'a PhasePartition,
    pub basis: &'a BeltramiBasis,
    pub constants: StageConstants,
}

impl<'a> Construction<'a> {
    pub fn new(
        profile: &'a EnergyProfile,
        system: &'a DirectionSystem,
        partition: &'a PhasePartition,
        basis: &'a BeltramiBasis,
        constants: StageConstants,
    ) -> Result<Self, StageError> {
        if basis.radius_sq() != system.radius_sq() {
            return Err(StageError::Params(format!(
                "Beltrami shell |k|² = {} differs from the direction system's {}",
                basis.radius_sq(),
                system.radius_sq()
            )));
        }
        if !(constants.eta > 0.0) || !(constants.m > 1.0) {
            return Err(StageError::Params(format!(
                "need η > 0 and M > 1, got η = {}, M = {}",
                constants.eta, constants.m
            )));
        }
        Ok(Self {
            profile,
            system,
            partition,
            basis,
            constants,
        })
    }
}
