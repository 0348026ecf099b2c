//! Split of `R̊₁` into transport, oscillation and error parts.
//!
//! With `v₁ = v + w_o + w_c` and `p₁ = p − ½|w_o|²`, and `v` solenoidal,
//!
//! ```text
//! ∂_t v₁ + div(v₁⊗v₁) + ∇p₁ =
//!     (∂_t w_o + v·∇w_o)                                  transport
//!   + div(w_o⊗w_o − ½|w_o|² Id + R̊)                      oscillation
//!   + ∂_t w_c + div(v₁⊗w_c + w_c⊗v₁ − w_c⊗w_c)           error
//!   + div(v⊗w_o)
//!   + (∂_t v + div(v⊗v) + ∇p − div R̊)                    inherited
//! ```
//!
//! Applying `R` to each line gives the parts; their sum equals `R̊₁` up to
//! rounding because `R` is linear and every product is formed on the same
//! dealiased grid.  The inherited line vanishes for an exact Euler–Reynolds
//! input and measures time-differencing error otherwise.

use serde::{Deserialize, Serialize};

use super::holder::holder_norm;
use super::rates::{oscillation_part, symmetric_components};
use super::DiagnosticsError;
use crate::calculus;
use crate::field::{MatrixField, VectorField};
use crate::operators;
use crate::stage::EulerReynoldsState;

#[derive(Debug, Clone)]
pub struct ReynoldsParts {
    pub transport: MatrixField,
    pub oscillation: MatrixField,
    pub error_time: MatrixField,
    pub error_flux: MatrixField,
    pub error_mixed: MatrixField,
    pub inherited: MatrixField,
}

impl ReynoldsParts {
    /// Transport, oscillation and error parts in that order, with names.
    pub fn named(&self) -> [(&'static str, &MatrixField); 6] {
        [
            ("transport", &self.transport),
            ("oscillation", &self.oscillation),
            ("error_time", &self.error_time),
            ("error_flux", &self.error_flux),
            ("error_mixed", &self.error_mixed),
            ("inherited", &self.inherited),
        ]
    }

    /// Sum of the transport, oscillation and error parts.
    pub fn stage_sum(&self) -> Result<MatrixField, DiagnosticsError> {
        Ok(self
            .transport
            .add(&self.oscillation)?
            .add(&self.error_time)?
            .add(&self.error_flux)?
            .add(&self.error_mixed)?)
    }
}

pub fn reynolds_parts(
    state: &EulerReynoldsState,
    v1: &VectorField,
    w_o: &VectorField,
    w_c: &VectorField,
) -> Result<ReynoldsParts, DiagnosticsError> {
    let v = &state.v;
    let transport = {
        let x = calculus::time_derivative_vector(w_o)?.add(&calculus::advect(v, w_o)?)?;
        operators::inverse_divergence(&x)?
    };
    let oscillation = oscillation_part(&state.r, w_o)?;
    let error_time = operators::inverse_divergence(&calculus::time_derivative_vector(w_c)?)?;
    let error_flux = {
        let a = calculus::outer(v1, w_c)?;
        let b = calculus::outer(w_c, v1)?;
        let c = calculus::outer_self(w_c)?;
        operators::inverse_divergence_of_div(&a.add(&b)?.sub(&c)?)?
    };
    let error_mixed = operators::inverse_divergence_of_div(&calculus::outer(v, w_o)?)?;
    let inherited = state.residual_stress()?;
    Ok(ReynoldsParts {
        transport,
        oscillation,
        error_time,
        error_flux,
        error_mixed,
        inherited,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartNorm {
    pub name: String,
    pub sup: f64,
    /// `‖·‖_α` with the stage exponent.
    pub holder: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub alpha: f64,
    pub parts: Vec<PartNorm>,
    /// Largest grid value of `transport + oscillation + errors − R̊₁`.
    pub residual: f64,
    /// The same with the inherited part added to the sum.
    pub residual_with_inherited: f64,
}

fn max_grid_value(a: &MatrixField) -> f64 {
    a.comps().iter().map(|c| c.max_abs()).fold(0.0, f64::max)
}

/// Parts of `R̊₁` with their norms and the residual of the split.
pub fn reynolds_decomposition(
    state: &EulerReynoldsState,
    v1: &VectorField,
    w_o: &VectorField,
    w_c: &VectorField,
    r1: &MatrixField,
    alpha: f64,
) -> Result<DecompositionReport, DiagnosticsError> {
    let parts = reynolds_parts(state, v1, w_o, w_c)?;
    let mut norms = Vec::with_capacity(6);
    for (name, p) in parts.named() {
        let h = holder_norm(&symmetric_components(p), alpha)?;
        norms.push(PartNorm {
            name: name.to_string(),
            sup: h.sup(),
            holder: h.norm,
        });
    }
    let sum = parts.stage_sum()?;
    let residual = max_grid_value(&sum.sub(r1)?);
    let residual_with_inherited = max_grid_value(&sum.add(&parts.inherited)?.sub(r1)?);
    Ok(DecompositionReport {
        alpha,
        parts: norms,
        residual,
        residual_with_inherited,
    })
}
