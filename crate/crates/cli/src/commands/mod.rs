//! The subcommands, as library functions returning what they print.

mod diagnose;
mod iterate;

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use eulerci::geometry::{find_direction_system, positivity_radius, DirectionSystem, GeometryError};
use serde::Serialize;

use crate::plot;
use crate::report::{self, Row};
use crate::CliError;

pub use diagnose::{
    diagnose_decomposition, diagnose_energy, diagnose_holder, diagnose_pressure, diagnose_rates, Diagnosis,
};
pub use iterate::{
    iterate, GeometrySummary, GridSummary, IterateOptions, Manifest, ManifestStage, RunSummary, MANIFEST_FORMAT,
};

pub(crate) fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub(crate) fn to_json(value: &impl Serialize) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub(crate) fn rows_csv(rows: &[Row]) -> Result<String, CliError> {
    let mut buf = Vec::new();
    report::write_rows(&mut buf, rows)?;
    String::from_utf8(buf).map_err(|e| CliError::Io(e.to_string()))
}

/// Load a pinned system, mapping parse failures to configuration errors.
pub fn load_system(path: &Path) -> Result<DirectionSystem, CliError> {
    let text = read_text(path)?;
    DirectionSystem::from_text(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Search up to `bound`, turning infeasibility into a JSON report.
pub fn search_system(bound: u32) -> Result<DirectionSystem, CliError> {
    find_direction_system(bound).map_err(|e| match e {
        GeometryError::Infeasible { bound, attempts } => {
            let report = serde_json::json!({ "feasible": false, "bound": bound, "attempts": attempts });
            CliError::Infeasible {
                report: serde_json::to_string_pretty(&report).unwrap_or_default() + "\n",
            }
        }
        other => CliError::Precondition(other.to_string()),
    })
}

/// Human-readable summary of a direction system.
pub fn describe_system(system: &DirectionSystem) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "lambda0 {}", system.lambda0());
    let _ = writeln!(s, "radius_sq {}", system.radius_sq());
    let _ = writeln!(s, "r0 {:e}", system.r0());
    for (j, f) in system.families().iter().enumerate() {
        let _ = writeln!(
            s,
            "family {j}: {} pairs, positivity radius {:e}",
            f.members.len(),
            positivity_radius(f)
        );
    }
    s
}

/// `geometry`: search (or load a pinned system), optionally write it, and
/// return the summary.
pub fn geometry(bound: u32, pinned: Option<&Path>, out: Option<&Path>) -> Result<String, CliError> {
    let system = match pinned {
        Some(p) => load_system(p)?,
        None => search_system(bound)?,
    };
    if let Some(out) = out {
        write_text(out, &system.to_text())?;
    }
    Ok(describe_system(&system))
}

/// `plot`: energy, rate and contraction charts from a CSV report.
pub fn plot(csv_path: &Path, out_dir: &Path) -> Result<(), CliError> {
    let text = read_text(csv_path)?;
    let rows = report::read_rows(text.as_bytes()).map_err(|e| CliError::Io(format!("{}: {e}", csv_path.display())))?;
    fs::create_dir_all(out_dir)?;
    write_text(&out_dir.join("energy.svg"), &plot::energy_chart(&rows).render())?;
    write_text(&out_dir.join("rates.svg"), &plot::rate_chart(&rows).render())?;
    write_text(
        &out_dir.join("contraction.svg"),
        &plot::contraction_chart(&rows).render(),
    )?;
    Ok(())
}
