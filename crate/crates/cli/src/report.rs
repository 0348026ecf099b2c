//! Flat CSV reports and rate fits over stage reports.
//!
//! Every CSV report has the columns `stage,quantity,lambda,mu,t,value` in
//! that order, one row per (quantity, λ, μ, t); columns that do not apply
//! are left empty.  Per-time quantities carry `t`, per-stage ones leave it
//! empty.  Rows appear in stage order, then per-time rows in time order,
//! then per-stage rows in a fixed quantity order.

use std::io;

use eulerci::diagnostics::{predicted_exponent, RateFit};
use eulerci::stage::StageReport;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub stage: Option<usize>,
    pub quantity: String,
    pub lambda: Option<u64>,
    pub mu: Option<u64>,
    pub t: Option<f64>,
    pub value: f64,
}

impl Row {
    pub fn new(quantity: &str, value: f64) -> Self {
        Self {
            stage: None,
            quantity: quantity.to_string(),
            lambda: None,
            mu: None,
            t: None,
            value,
        }
    }

    pub fn at(mut self, t: f64) -> Self {
        self.t = Some(t);
        self
    }
}

/// Rows for one stage report.
pub fn stage_rows(r: &StageReport) -> Vec<Row> {
    let base = |q: &str, v: f64| Row {
        stage: Some(r.stage_index),
        lambda: Some(r.lambda),
        mu: Some(r.mu),
        ..Row::new(q, v)
    };
    let mut rows = Vec::new();
    for (c, rho) in r.energy.iter().zip(&r.rho) {
        rows.push(base("e", c.e).at(c.t));
        rows.push(base("kinetic", c.kinetic).at(c.t));
        rows.push(base("energy_deviation", c.deviation).at(c.t));
        rows.push(base("rho", *rho).at(c.t));
    }
    for (q, v) in [
        ("reynolds_sup", r.reynolds_sup),
        ("reynolds_target", r.reynolds_target),
        ("w_o_sup", r.w_o_sup),
        ("w_o_bound", r.w_o_bound),
        ("w_c_sup", r.w_c_sup),
        ("velocity_increment", r.velocity_increment),
        ("velocity_bound", r.velocity_bound),
        ("pressure_increment", r.pressure_increment),
        ("pressure_bound", r.pressure_bound),
        ("divergence_residual", r.divergence_residual),
        ("identity_residual", r.identity_residual),
    ] {
        rows.push(base(q, v));
    }
    if let Some(e) = r.time_fd_error {
        rows.push(base("time_fd_error", e));
    }
    if let Some(d) = &r.decomposition {
        for p in &d.parts {
            rows.push(base(&format!("{}_sup", p.name), p.sup));
            rows.push(base(&format!("{}_holder", p.name), p.holder));
        }
        rows.push(base("decomposition_residual", d.residual));
    }
    rows
}

pub fn write_rows(w: impl io::Write, rows: &[Row]) -> Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(w);
    if rows.is_empty() {
        out.write_record(["stage", "quantity", "lambda", "mu", "t", "value"])?;
    }
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

/// Parse a report; errors name the 1-based data row.
pub fn read_rows(r: impl io::Read) -> Result<Vec<Row>, String> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let mut rows = Vec::new();
    for (i, rec) in rd.deserialize::<Row>().enumerate() {
        rows.push(rec.map_err(|e| format!("row {}: {e}", i + 1))?);
    }
    Ok(rows)
}

/// One fitted quantity over a λ sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub quantity: String,
    pub points: usize,
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    pub slope_stderr: f64,
    /// Exponent of the bound `μ^p λ^{α−1}` over the same `(λ, μ)` pairs.
    pub predicted: Option<f64>,
}

/// `(quantity, μ power of its bound, value)` extracted from a report.
fn rate_quantities(r: &StageReport) -> Vec<(String, Option<f64>, f64)> {
    let mut out = vec![
        ("w_c_sup".to_string(), Some(1.0), r.w_c_sup),
        (
            "energy_deviation".to_string(),
            Some(1.0),
            r.energy.iter().map(|c| c.deviation).fold(0.0, f64::max),
        ),
        ("reynolds_sup".to_string(), None, r.reynolds_sup),
        ("velocity_increment".to_string(), None, r.velocity_increment),
    ];
    if let Some(d) = &r.decomposition {
        for p in &d.parts {
            let power = match p.name.as_str() {
                "oscillation" | "error_time" | "error_mixed" => Some(2.0),
                _ => None,
            };
            out.push((format!("{}_holder", p.name), power, p.holder));
        }
    }
    out
}

/// Log-log fits of every quantity against λ.  Quantities with fewer than
/// four positive values are skipped.
pub fn fit_rates(reports: &[StageReport]) -> Vec<RateRow> {
    let mut names: Vec<(String, Option<f64>)> = Vec::new();
    let mut data: Vec<Vec<(u64, u64, f64)>> = Vec::new();
    for r in reports {
        for (q, p, v) in rate_quantities(r) {
            let i = match names.iter().position(|(n, _)| *n == q) {
                Some(i) => i,
                None => {
                    names.push((q, p));
                    data.push(Vec::new());
                    names.len() - 1
                }
            };
            data[i].push((r.lambda, r.mu, v));
        }
    }
    let alpha = reports.first().map_or(0.0, |r| r.alpha);
    names
        .into_iter()
        .zip(data)
        .filter_map(|((quantity, power), pts)| {
            let pts: Vec<_> = pts.into_iter().filter(|p| p.2 > 0.0).collect();
            let x: Vec<f64> = pts.iter().map(|p| p.0 as f64).collect();
            let y: Vec<f64> = pts.iter().map(|p| p.2).collect();
            let fit = RateFit::fit(&x, &y).ok()?;
            let pairs: Vec<(u64, u64)> = pts.iter().map(|p| (p.0, p.1)).collect();
            let predicted = power.and_then(|p| predicted_exponent(&pairs, p, alpha).ok());
            Some(RateRow {
                quantity,
                points: pts.len(),
                slope: fit.slope,
                intercept: fit.intercept,
                residual: fit.residual,
                slope_stderr: fit.slope_stderr,
                predicted,
            })
        })
        .collect()
}

pub fn write_rates(w: impl io::Write, rows: &[RateRow]) -> Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(w);
    if rows.is_empty() {
        out.write_record([
            "quantity",
            "points",
            "slope",
            "intercept",
            "residual",
            "slope_stderr",
            "predicted",
        ])?;
    }
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}
