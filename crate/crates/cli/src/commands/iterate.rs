//! `iterate`: run the scheduled stages and write the run directory.
//!
//! ```text
//! <dir>/manifest.json          config hash, version, seed, constants, stage list
//! <dir>/iteration.json         the iteration report
//! <dir>/stages.csv             rows of every stage that ran
//! <dir>/system.txt             the direction system used
//! <dir>/stage_000/report.json  stage record (completed or aborted)
//! <dir>/stage_000/{v,p,r,w_o}.cvxf
//! ```
//!
//! With a zero stage budget only the manifest is written.

use std::fs;
use std::path::{Path, PathBuf};

use eulerci::beltrami::BeltramiBasis;
use eulerci::geometry::{compute_eta, DirectionSystem};
use eulerci::grid::Dealias;
use eulerci::stage::{
    calibrate_m, plan_run, run_iteration, CauchyRow, Construction, EulerReynoldsState, IterationReport, ProbeConfig,
    StageConstants, StageOptions, StageOutcome, StageRecord,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{load_system, read_text, rows_csv, search_system, to_json, write_text};
use crate::config::{GeometrySource, RunConfig};
use crate::report::stage_rows;
use crate::snapshot::{self, encode_matrix, encode_scalar, encode_vector};
use crate::CliError;

pub const MANIFEST_FORMAT: &str = "eulerci-run/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometrySummary {
    pub lambda0: f64,
    pub radius_sq: i64,
    pub r0: f64,
    pub family_sizes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub n: usize,
    pub stride: u64,
    pub effective_n: u64,
    pub dealias: Dealias,
    pub time_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestStage {
    pub index: usize,
    pub lambda: Option<u64>,
    pub mu: Option<u64>,
    /// `succeeded`, `missed_targets` or `aborted`.
    pub status: String,
    pub error: Option<String>,
    pub files: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub version: String,
    pub config_sha256: String,
    pub config: String,
    pub seed: u64,
    pub stage_budget: usize,
    pub constants: Option<StageConstants>,
    pub geometry: Option<GeometrySummary>,
    pub grid: Option<GridSummary>,
    pub stages: Vec<ManifestStage>,
    pub completed: usize,
}

#[derive(Debug, Clone, Default)]
pub struct IterateOptions {
    /// Continue after the last complete stage of an existing run.
    pub resume: bool,
    /// Stop after this many stages in this invocation.
    pub stop_after: Option<usize>,
    /// Overrides the configured output directory.
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub directory: PathBuf,
    pub manifest: Manifest,
    /// `None` for a zero stage budget.
    pub report: Option<IterationReport>,
    /// Stage index the run (re)started from.
    pub started_at: usize,
}

fn stage_dir(dir: &Path, k: usize) -> PathBuf {
    dir.join(format!("stage_{k:03}"))
}

const SNAPSHOTS: [&str; 4] = ["v.cvxf", "p.cvxf", "r.cvxf", "w_o.cvxf"];

fn write_outcome(dir: &Path, o: &StageOutcome, snapshots: bool) -> Result<(), CliError> {
    let d = stage_dir(dir, o.report.stage_index);
    fs::create_dir_all(&d)?;
    write_text(
        &d.join("report.json"),
        &to_json(&StageRecord::Completed(o.report.clone()))?,
    )?;
    if snapshots {
        snapshot::write_file(&d.join("v.cvxf"), &encode_vector(&o.state.v))?;
        snapshot::write_file(&d.join("p.cvxf"), &encode_scalar(&o.state.p))?;
        snapshot::write_file(&d.join("r.cvxf"), &encode_matrix(&o.state.r))?;
        snapshot::write_file(&d.join("w_o.cvxf"), &encode_vector(&o.w_o))?;
    }
    Ok(())
}

fn record_index(r: &StageRecord) -> usize {
    match r {
        StageRecord::Completed(rep) => rep.stage_index,
        StageRecord::Aborted { stage_index, .. } => *stage_index,
    }
}

/// The iteration report implied by a list of stage records.
fn assemble_report(constants: StageConstants, initial_energy_error: f64, records: &[StageRecord]) -> IterationReport {
    let mut cauchy = Vec::new();
    let mut energy_error = vec![initial_energy_error];
    for rec in records {
        if let StageRecord::Completed(r) = rec {
            if r.success {
                cauchy.push(CauchyRow {
                    stage: r.stage_index,
                    velocity_increment: r.velocity_increment,
                    velocity_bound: r.velocity_bound,
                    pressure_increment: r.pressure_increment,
                    pressure_bound: r.pressure_bound,
                    ok: r.velocity_ok && r.pressure_ok,
                });
                energy_error.push(r.energy.iter().map(|c| (c.kinetic - c.e).abs()).fold(0.0, f64::max));
            }
        }
    }
    IterationReport {
        constants,
        attempted: records.len(),
        completed: cauchy.len(),
        stages: records.to_vec(),
        cauchy,
        energy_error,
    }
}

fn manifest_stage(dir: &Path, rec: &StageRecord) -> ManifestStage {
    let index = record_index(rec);
    let d = stage_dir(dir, index);
    let mut files = vec![format!("stage_{index:03}/report.json")];
    files.extend(
        SNAPSHOTS
            .iter()
            .filter(|f| d.join(f).exists())
            .map(|f| format!("stage_{index:03}/{f}")),
    );
    match rec {
        StageRecord::Completed(r) => ManifestStage {
            index,
            lambda: Some(r.lambda),
            mu: Some(r.mu),
            status: if r.success { "succeeded" } else { "missed_targets" }.into(),
            error: None,
            files,
        },
        StageRecord::Aborted { lambda, error, .. } => ManifestStage {
            index,
            lambda: *lambda,
            mu: None,
            status: "aborted".into(),
            error: Some(error.clone()),
            files,
        },
    }
}

fn read_record(path: &Path) -> Result<StageRecord, CliError> {
    Ok(serde_json::from_str(&read_text(path)?)?)
}

/// Records of the leading run of successful stages that have snapshots,
/// with the state after the last of them.
fn resume_point(
    dir: &Path,
    hash: &str,
    budget: usize,
) -> Result<(Vec<StageRecord>, Option<EulerReynoldsState>), CliError> {
    let manifest_path = dir.join("manifest.json");
    if !manifest_path.exists() {
        return Ok((Vec::new(), None));
    }
    let manifest: Manifest = serde_json::from_str(&read_text(&manifest_path)?)?;
    if manifest.config_sha256 != hash {
        return Err(CliError::Config(format!(
            "cannot resume: {} was written by a different configuration",
            dir.display()
        )));
    }
    let mut records = Vec::new();
    for k in 0..budget {
        let d = stage_dir(dir, k);
        if !SNAPSHOTS[..3].iter().all(|f| d.join(f).exists()) {
            break;
        }
        let Ok(rec) = read_record(&d.join("report.json")) else {
            break;
        };
        if !rec.succeeded() {
            break;
        }
        records.push(rec);
    }
    let Some(last) = records.len().checked_sub(1) else {
        return Ok((records, None));
    };
    let d = stage_dir(dir, last);
    let state = EulerReynoldsState {
        v: snapshot::read_file(&d.join("v.cvxf"))?.into_vector()?,
        p: snapshot::read_file(&d.join("p.cvxf"))?.into_scalar()?,
        r: snapshot::read_file(&d.join("r.cvxf"))?.into_matrix()?,
        delta: 0.5f64.powi(records.len() as i32),
        stage_index: records.len(),
    };
    Ok((records, Some(state)))
}

/// Clear stage directories from `from` on, so no stale files survive.
fn clear_stages(dir: &Path, from: usize) -> Result<(), CliError> {
    let mut k = from;
    loop {
        let d = stage_dir(dir, k);
        if !d.exists() {
            return Ok(());
        }
        fs::remove_dir_all(&d)?;
        k += 1;
    }
}

fn setup_workers(workers: Option<usize>) {
    if let Some(w) = workers {
        // The global pool can only be set once per process; later calls keep it.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(w).build_global();
    }
}

/// Run the configured iteration.  Files are written before any error for
/// an aborted stage is returned.
pub fn iterate(config_path: &Path, opts: &IterateOptions) -> Result<RunSummary, CliError> {
    let text = read_text(config_path)?;
    let base = config_path.parent().unwrap_or(Path::new("."));
    let cfg = RunConfig::parse(&text, base)?;
    setup_workers(cfg.workers);
    let dir = opts.output.clone().unwrap_or_else(|| cfg.output.clone());
    let hash = hex::encode(Sha256::digest(text.as_bytes()));
    fs::create_dir_all(&dir)?;
    let mut manifest = Manifest {
        format: MANIFEST_FORMAT.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_sha256: hash.clone(),
        config: text.clone(),
        seed: cfg.seed,
        stage_budget: cfg.schedule.stages,
        constants: None,
        geometry: None,
        grid: None,
        stages: Vec::new(),
        completed: 0,
    };
    if cfg.schedule.stages == 0 {
        write_text(&dir.join("manifest.json"), &to_json(&manifest)?)?;
        return Ok(RunSummary {
            directory: dir,
            manifest,
            report: None,
            started_at: 0,
        });
    }

    let system: DirectionSystem = match &cfg.geometry {
        GeometrySource::Search { bound } => search_system(*bound)?,
        GeometrySource::File(p) => load_system(p)?,
    };
    let basis = BeltramiBasis::for_radius_sq(system.radius_sq()).map_err(|e| CliError::Precondition(e.to_string()))?;
    let plan = plan_run(&cfg.schedule, &basis).map_err(|e| CliError::Config(e.to_string()))?;
    let eta = cfg.eta.unwrap_or_else(|| compute_eta(&system, cfg.profile.min()));
    let m = match cfg.m {
        Some(m) => m,
        None => {
            let probe = ProbeConfig {
                margin: cfg.margin,
                ..ProbeConfig::default()
            };
            calibrate_m(&cfg.profile, &system, &cfg.partition, &basis, &probe)
                .map_err(|e| CliError::Precondition(e.to_string()))?
                .m
        }
    };
    let constants = StageConstants { eta, m };
    let ctx = Construction::new(&cfg.profile, &system, &cfg.partition, &basis, constants)
        .map_err(|e| CliError::Config(e.to_string()))?;
    manifest.constants = Some(constants);
    manifest.geometry = Some(GeometrySummary {
        lambda0: system.lambda0(),
        radius_sq: system.radius_sq(),
        r0: system.r0(),
        family_sizes: system.families().iter().map(|f| f.members.len()).collect(),
    });
    manifest.grid = Some(GridSummary {
        n: plan.grid.n(),
        stride: plan.grid.stride(),
        effective_n: plan.grid.effective_n(),
        dealias: plan.grid.dealias(),
        time_samples: plan.times.len(),
    });
    write_text(&dir.join("system.txt"), &system.to_text())?;

    let (mut records, resumed) = if opts.resume {
        resume_point(&dir, &hash, cfg.schedule.stages)?
    } else {
        (Vec::new(), None)
    };
    let start = match resumed {
        Some(s) => s,
        None => {
            records.clear();
            EulerReynoldsState::zero(plan.grid, plan.times.clone())
        }
    };
    let started_at = start.stage_index;
    clear_stages(&dir, started_at)?;

    let options = StageOptions {
        decomposition: cfg.decomposition,
    };
    let mut failure: Option<CliError> = None;
    let mut ran = 0usize;
    let outcome = run_iteration(&ctx, &cfg.schedule, &plan, start, &options, &mut |o| {
        ran += 1;
        if let Err(e) = write_outcome(&dir, o, cfg.snapshots) {
            failure = Some(e);
            return false;
        }
        opts.stop_after.map_or(true, |n| ran < n)
    });
    if let Some(e) = failure {
        return Err(e);
    }
    for rec in &outcome.report.stages {
        if let StageRecord::Aborted { stage_index, .. } = rec {
            let d = stage_dir(&dir, *stage_index);
            fs::create_dir_all(&d)?;
            write_text(&d.join("report.json"), &to_json(rec)?)?;
        }
    }
    records.extend(outcome.report.stages.iter().cloned());

    let initial = plan
        .times
        .times()
        .iter()
        .map(|&t| cfg.profile.eval(t).abs())
        .fold(0.0, f64::max);
    let report = assemble_report(constants, initial, &records);
    let rows: Vec<_> = records
        .iter()
        .filter_map(|r| match r {
            StageRecord::Completed(rep) => Some(stage_rows(rep)),
            StageRecord::Aborted { .. } => None,
        })
        .flatten()
        .collect();
    write_text(&dir.join("stages.csv"), &rows_csv(&rows)?)?;
    write_text(&dir.join("iteration.json"), &to_json(&report)?)?;
    manifest.stages = records.iter().map(|r| manifest_stage(&dir, r)).collect();
    manifest.completed = report.completed;
    write_text(&dir.join("manifest.json"), &to_json(&manifest)?)?;

    if let Some(StageRecord::Aborted { stage_index, error, .. }) =
        records.iter().find(|r| matches!(r, StageRecord::Aborted { .. }))
    {
        return Err(CliError::Precondition(format!("stage {stage_index}: {error}")));
    }
    Ok(RunSummary {
        directory: dir,
        manifest,
        report: Some(report),
        started_at,
    })
}
