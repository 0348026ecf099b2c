//! Measurements on stage outputs: Hölder norms, the split of the new Reynolds
//! stress into its parts, energy and pressure checks, and rate fits.

mod decomposition;
mod energy;
mod holder;
mod rates;

use thiserror::Error;

use crate::field::FieldError;
use crate::stage::StageError;

pub use decomposition::{reynolds_decomposition, reynolds_parts, DecompositionReport, PartNorm, ReynoldsParts};
pub use energy::{energy_report, pressure_consistency, EnergyReport, EnergyRow, PressureReport};
pub use holder::{
    holder_norm, holder_quotient, outer_energy_fraction, product_constant, separations, HolderReport, DIRECTIONS,
};
pub use rates::{
    modulate_cos, oscillation_part, oscillatory_average_decay, oscillatory_gradient_estimate, predicted_exponent,
    stage_rate_sample, symmetric_components, GradientEstimate, GradientRow, OscillatoryDecay, RateFit, StageRateSample,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("Hölder exponent {0} outside the supported range")]
    BadExponent(f64),
    #[error("no components given")]
    Empty,
    #[error("rate fit needs at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("rate fit needs positive finite data with distinct abscissae")]
    NonPositive,
    #[error("shift leaves the retained box (lost energy share {lost:e})")]
    Unresolved { lost: f64 },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Stage(#[from] StageError),
}
