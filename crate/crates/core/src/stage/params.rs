//! Stage parameters and the run-wide grid plan.

use serde::{Deserialize, Serialize};

use super::StageError;
use crate::beltrami::BeltramiBasis;
use crate::grid::{smooth_size, Dealias, Grid3, TimeGrid};

/// Frequencies and exponents of one stage, with the grid it is built on.
#[derive(Debug, Clone, PartialEq)]
pub struct StageParams {
    lambda: u64,
    mu: u64,
    alpha: f64,
    beta: f64,
    grid: Grid3,
    times: TimeGrid,
}

/// `0 < α < β < 1` and `α + 2β < 1`.
pub fn check_exponents(alpha: f64, beta: f64) -> Result<(), StageError> {
    if !(alpha > 0.0 && alpha < beta && beta < 1.0 && alpha + 2.0 * beta < 1.0) {
        return Err(StageError::Params(format!(
            "exponents must satisfy 0 < α < β and α + 2β < 1, got α = {alpha}, β = {beta}"
        )));
    }
    Ok(())
}

impl StageParams {
    pub fn new(lambda: u64, mu: u64, alpha: f64, beta: f64, grid: Grid3, times: TimeGrid) -> Result<Self, StageError> {
        check_exponents(alpha, beta)?;
        if lambda == 0 || mu == 0 || lambda % mu != 0 {
            return Err(StageError::Params(format!(
                "λ = {lambda} and μ = {mu} must be positive with μ | λ"
            )));
        }
        if lambda % grid.stride() != 0 {
            return Err(StageError::Params(format!(
                "λ = {lambda} is not a multiple of the grid stride {}",
                grid.stride()
            )));
        }
        let target = (lambda as f64).powf(beta);
        if ((mu as f64) / target).ln().abs() > 2f64.ln() + 1e-12 {
            return Err(StageError::Params(format!(
                "μ = {mu} is not within a factor 2 of λ^β = {target:.3}"
            )));
        }
        Ok(Self {
            lambda,
            mu,
            alpha,
            beta,
            grid,
            times,
        })
    }

    pub fn lambda(&self) -> u64 {
        self.lambda
    }

    pub fn mu(&self) -> u64 {
        self.mu
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn times(&self) -> &TimeGrid {
        &self.times
    }

    /// Stored-mode multiple `L = λ/s` of the shell vectors.
    pub fn multiple(&self) -> u64 {
        self.lambda / self.grid.stride()
    }

    /// Same frequencies on another grid or time set.
    pub fn with_grid(&self, grid: Grid3, times: TimeGrid) -> Result<Self, StageError> {
        Self::new(self.lambda, self.mu, self.alpha, self.beta, grid, times)
    }
}

/// Divisor of `λ` nearest to `λ^β` on a log scale (ties to the smaller).
/// Fails when the best divisor is off by more than a factor 2.
pub fn mu_for(lambda: u64, beta: f64) -> Result<u64, StageError> {
    if lambda == 0 {
        return Err(StageError::Params("λ must be positive".into()));
    }
    let goal = beta * (lambda as f64).ln();
    let mut best = (f64::INFINITY, 1u64);
    let mut d = 1u64;
    while d * d <= lambda {
        if lambda % d == 0 {
            for c in [d, lambda / d] {
                let err = ((c as f64).ln() - goal).abs();
                if err < best.0 - 1e-12 || ((err - best.0).abs() <= 1e-12 && c < best.1) {
                    best = (err, c);
                }
            }
        }
        d += 1;
    }
    if best.0 > 2f64.ln() + 1e-12 {
        return Err(StageError::Params(format!(
            "no divisor of λ = {lambda} lies within a factor 2 of λ^β = {:.3}; \
             choose a λ with more divisors, such as a power of two",
            goal.exp()
        )));
    }
    Ok(best.1)
}

/// Frequency schedule across stages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LambdaSchedule {
    /// Explicit values, one per stage.
    List(Vec<u64>),
    /// `start · 2^i` at stage `i`.
    Doubling { start: u64 },
}

impl LambdaSchedule {
    pub fn lambda(&self, stage: usize) -> Option<u64> {
        match self {
            Self::List(v) => v.get(stage).copied(),
            Self::Doubling { start } => {
                let shift = u32::try_from(stage).ok()?;
                start.checked_mul(1u64.checked_shl(shift)?)
            }
        }
    }
}

/// How the common grid size is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GridRule {
    /// Smallest smooth `n` with `n·s ≥ factor·λ·λ₀` for every planned stage.
    Auto {
        factor: usize,
    },
    Fixed {
        n: usize,
    },
}

/// Schedule and resolution settings for a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleConfig {
    pub alpha: f64,
    pub beta: f64,
    pub lambdas: LambdaSchedule,
    pub stages: usize,
    pub grid: GridRule,
    pub time_samples: usize,
    /// Grid stride; defaults to the gcd of the planned frequencies.
    pub stride: Option<u64>,
    pub dealias: Dealias,
}

/// The grid and time samples shared by every stage of a run, so that the
/// truncated products of successive stages agree.
#[derive(Debug, Clone, PartialEq)]
pub struct RunPlan {
    pub grid: Grid3,
    pub times: TimeGrid,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Resolve the common grid for the planned stages.
pub fn plan_run(config: &ScheduleConfig, basis: &BeltramiBasis) -> Result<RunPlan, StageError> {
    check_exponents(config.alpha, config.beta)?;
    let planned = config.stages.max(1);
    let lambdas = (0..planned)
        .map(|i| {
            config
                .lambdas
                .lambda(i)
                .filter(|l| *l > 0)
                .ok_or_else(|| StageError::Params(format!("schedule has no frequency for stage {i}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let stride = match config.stride {
        Some(s) => s,
        None => lambdas.iter().fold(0, |g, l| gcd(g, *l)),
    };
    if stride == 0 {
        return Err(StageError::Params("stride must be positive".into()));
    }
    let max_multiple = lambdas
        .iter()
        .map(|l| {
            if l % stride == 0 {
                Ok(l / stride)
            } else {
                Err(StageError::Params(format!(
                    "λ = {l} is not a multiple of stride {stride}"
                )))
            }
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .max()
        .unwrap_or(1);
    let needed = max_multiple as usize * config_entry(basis);
    let n = match config.grid {
        GridRule::Fixed { n } => n,
        GridRule::Auto { factor } => {
            let min = (factor as f64 * max_multiple as f64 * basis.lambda0()).ceil() as usize;
            let mut n = smooth_size(min);
            while Grid3::with_dealias(n, stride, config.dealias)?.cutoff() < needed {
                n = smooth_size(n + 2);
            }
            n
        }
    };
    let grid = Grid3::with_dealias(n, stride, config.dealias)?;
    if grid.cutoff() < needed {
        return Err(StageError::Unresolved {
            cutoff: grid.cutoff(),
            needed,
        });
    }
    Ok(RunPlan {
        grid,
        times: TimeGrid::uniform(config.time_samples)?,
    })
}

fn config_entry(basis: &BeltramiBasis) -> usize {
    basis.max_entry().max(1)
}

/// Parameters for stage `stage_index` of a planned run.
pub fn choose_params(
    delta: f64,
    stage_index: usize,
    config: &ScheduleConfig,
    plan: &RunPlan,
) -> Result<StageParams, StageError> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(StageError::Params(format!("δ = {delta} outside (0, 1]")));
    }
    let lambda = config
        .lambdas
        .lambda(stage_index)
        .ok_or_else(|| StageError::Params(format!("schedule has no frequency for stage {stage_index}")))?;
    let mu = mu_for(lambda, config.beta)?;
    StageParams::new(lambda, mu, config.alpha, config.beta, plan.grid, plan.times.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mu_rounds_in_log_scale() {
        assert_eq!(mu_for(1024, 0.4).unwrap(), 16);
        assert_eq!(mu_for(64, 0.4).unwrap(), 4);
        assert_eq!(mu_for(64, 0.45).unwrap(), 8);
        assert_eq!(mu_for(128, 0.4).unwrap(), 8);
        // A prime far from any power: only 1 and itself.
        assert!(mu_for(1009, 0.4).is_err());
    }

    #[test]
    fn exponent_constraints() {
        assert!(check_exponents(0.05, 0.4).is_ok());
        assert!(check_exponents(0.4, 0.35).is_err());
        assert!(check_exponents(0.2, 0.45).is_err());
    }

    #[test]
    fn doubling_schedule() {
        let s = LambdaSchedule::Doubling { start: 32 };
        assert_eq!(s.lambda(0), Some(32));
        assert_eq!(s.lambda(3), Some(256));
        assert_eq!(s.lambda(70), None);
    }
}
