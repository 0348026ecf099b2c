//! `diagnose`: stand-alone diagnostics on snapshots and run directories.

use std::path::{Path, PathBuf};

use eulerci::diagnostics::{
    energy_report, holder_norm, pressure_consistency, reynolds_decomposition, DecompositionReport, EnergyReport,
    HolderReport, PressureReport,
};
use eulerci::profile::EnergyProfile;
use eulerci::stage::{build_corrector, EulerReynoldsState, StageRecord, StageReport};
use serde::Serialize;
use walkdir::WalkDir;

use super::{read_text, rows_csv, to_json};
use crate::report::{fit_rates, write_rates, RateRow, Row};
use crate::snapshot;
use crate::CliError;

/// A diagnostic result as JSON and as CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnosis {
    pub json: String,
    pub csv: String,
}

impl Diagnosis {
    fn new(value: &impl Serialize, csv: String) -> Result<Self, CliError> {
        Ok(Self {
            json: to_json(value)?,
            csv,
        })
    }
}

fn diag_err(e: impl std::fmt::Display) -> CliError {
    CliError::Precondition(e.to_string())
}

pub fn diagnose_holder(input: &Path, exponent: f64) -> Result<(HolderReport, Diagnosis), CliError> {
    let snap = snapshot::read_file(input)?;
    let rep = holder_norm(&snap.components(), exponent).map_err(|e| CliError::Config(e.to_string()))?;
    let mut rows: Vec<Row> = rep
        .seminorms
        .iter()
        .enumerate()
        .map(|(j, s)| Row::new(&format!("seminorm_{j}"), *s))
        .collect();
    if let Some(f) = rep.fractional {
        rows.push(Row::new("fractional", f));
    }
    rows.push(Row::new("norm", rep.norm));
    let d = Diagnosis::new(&rep, rows_csv(&rows)?)?;
    Ok((rep, d))
}

/// Energy against `e(t)`; the `error` rows are `e − ∫|v|²`.
pub fn diagnose_energy(input: &Path, profile: &str, delta: f64) -> Result<(EnergyReport, Diagnosis), CliError> {
    let profile = EnergyProfile::parse(profile).map_err(|e| CliError::Config(format!("profile: {e}")))?;
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(CliError::Config(format!("delta must lie in (0, 1], got {delta}")));
    }
    let v = snapshot::read_file(input)?.into_vector()?;
    let rep = energy_report(&v, &profile, delta);
    let mut rows = Vec::new();
    for r in &rep.rows {
        rows.push(Row::new("e", r.e).at(r.t));
        rows.push(Row::new("kinetic", r.kinetic).at(r.t));
        rows.push(Row::new("error", r.gap).at(r.t));
        rows.push(Row::new("deviation", r.deviation).at(r.t));
    }
    let d = Diagnosis::new(&rep, rows_csv(&rows)?)?;
    Ok((rep, d))
}

pub fn diagnose_pressure(velocity: &Path, pressure: &Path) -> Result<(PressureReport, Diagnosis), CliError> {
    let v = snapshot::read_file(velocity)?.into_vector()?;
    let p = snapshot::read_file(pressure)?.into_scalar()?;
    let rep = pressure_consistency(&v, &p).map_err(diag_err)?;
    let rows = vec![
        Row::new("residual_sup", rep.residual_sup),
        Row::new("residual_l2", rep.residual_l2),
        Row::new("q_sup", rep.q_sup),
    ];
    let d = Diagnosis::new(&rep, rows_csv(&rows)?)?;
    Ok((rep, d))
}

fn stage_dir(run: &Path, k: usize) -> PathBuf {
    run.join(format!("stage_{k:03}"))
}

fn completed_report(path: &Path) -> Result<StageReport, CliError> {
    match serde_json::from_str(&read_text(path)?)? {
        StageRecord::Completed(r) => Ok(r),
        StageRecord::Aborted { error, .. } => Err(CliError::Precondition(format!(
            "{}: stage was aborted: {error}",
            path.display()
        ))),
    }
}

/// Split the stored `R̊₁` of stage `k` of a run into its parts.  The input
/// state is the previous stage's output, or the zero state for stage 0.
pub fn diagnose_decomposition(run: &Path, k: usize) -> Result<(DecompositionReport, Diagnosis), CliError> {
    let d = stage_dir(run, k);
    let report = completed_report(&d.join("report.json"))?;
    let v1 = snapshot::read_file(&d.join("v.cvxf"))?.into_vector()?;
    let r1 = snapshot::read_file(&d.join("r.cvxf"))?.into_matrix()?;
    let w_o = snapshot::read_file(&d.join("w_o.cvxf"))?.into_vector()?;
    let state = if k == 0 {
        EulerReynoldsState::zero(*w_o.grid(), w_o.times().clone())
    } else {
        let prev = stage_dir(run, k - 1);
        EulerReynoldsState {
            v: snapshot::read_file(&prev.join("v.cvxf"))?.into_vector()?,
            p: snapshot::read_file(&prev.join("p.cvxf"))?.into_scalar()?,
            r: snapshot::read_file(&prev.join("r.cvxf"))?.into_matrix()?,
            delta: report.delta_in,
            stage_index: k,
        }
    };
    let w_c = build_corrector(&w_o).map_err(diag_err)?;
    let rep = reynolds_decomposition(&state, &v1, &w_o, &w_c, &r1, report.alpha).map_err(diag_err)?;
    let tag = |r: Row| Row {
        stage: Some(k),
        lambda: Some(report.lambda),
        mu: Some(report.mu),
        ..r
    };
    let mut rows = Vec::new();
    for p in &rep.parts {
        rows.push(tag(Row::new(&format!("{}_sup", p.name), p.sup)));
        rows.push(tag(Row::new(&format!("{}_holder", p.name), p.holder)));
    }
    rows.push(tag(Row::new("residual", rep.residual)));
    rows.push(tag(Row::new("residual_with_inherited", rep.residual_with_inherited)));
    let d = Diagnosis::new(&rep, rows_csv(&rows)?)?;
    Ok((rep, d))
}

/// Rate fits over every completed stage report found under `dir`.
pub fn diagnose_rates(dir: &Path) -> Result<(Vec<RateRow>, Diagnosis), CliError> {
    let mut found: Vec<(u64, PathBuf, StageReport)> = Vec::new();
    for entry in WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(|e| CliError::Io(e.to_string()))?;
        if entry.file_name() == "report.json" {
            let rec: StageRecord = serde_json::from_str(&read_text(entry.path())?)?;
            if let StageRecord::Completed(r) = rec {
                found.push((r.lambda, entry.path().to_path_buf(), r));
            }
        }
    }
    found.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    let reports: Vec<StageReport> = found.into_iter().map(|f| f.2).collect();
    let rows = fit_rates(&reports);
    let mut buf = Vec::new();
    write_rates(&mut buf, &rows)?;
    let d = Diagnosis::new(&rows, String::from_utf8(buf).map_err(|e| CliError::Io(e.to_string()))?)?;
    Ok((rows, d))
}
