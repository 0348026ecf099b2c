use std::path::Path;
use std::process::{Command, Output};

use eulerci::field::{MatrixField, ScalarField, VectorField};
use eulerci::grid::{Dealias, Grid3, TimeGrid};
use eulerci_cli::commands::{self, IterateOptions};
use eulerci_cli::report;
use eulerci_cli::snapshot::{self, Snapshot, SnapshotError, MAGIC};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use walkdir::WalkDir;

fn random_scalar(grid: Grid3, times: &TimeGrid, rng: &mut impl Rng) -> ScalarField {
    let values: Vec<Vec<f64>> = (0..times.len())
        .map(|_| (0..grid.points()).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    ScalarField::from_physical(grid, times.clone(), &values).unwrap()
}

fn eulerci(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eulerci")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn snapshots_round_trip_every_rank() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let grid = Grid3::with_dealias(12, 5, Dealias { num: 1, den: 2 }).unwrap();
    for times in [TimeGrid::instant(0.375).unwrap(), TimeGrid::uniform(5).unwrap()] {
        let s = random_scalar(grid, &times, &mut rng);
        let v = VectorField::new(std::array::from_fn(|_| random_scalar(grid, &times, &mut rng)))
            .unwrap()
            .with_solenoidal(true);
        let m = MatrixField::new((0..9).map(|_| random_scalar(grid, &times, &mut rng)).collect())
            .unwrap()
            .with_flags(true, true);
        for snap in [Snapshot::Scalar(s), Snapshot::Vector(v), Snapshot::Matrix(m)] {
            let bytes = snap.to_bytes();
            assert_eq!(&bytes[..8], MAGIC);
            let back = snapshot::decode(&bytes).unwrap();
            assert_eq!(back, snap);
            assert_eq!(back.to_bytes(), bytes);
        }
    }
}

#[test]
fn snapshot_layout_and_legacy_header() {
    // N = 4, one sample, scalar, no trailer: stride 1, dealias 2/3, t = 0.
    let n = 4usize;
    let mut bytes = MAGIC.to_vec();
    bytes.extend_from_slice(&(n as u32).to_le_bytes());
    bytes.extend_from_slice(&1u32.to_le_bytes());
    bytes.extend_from_slice(&[0, 0]);
    for k1 in -2i64..2 {
        for k2 in -2i64..2 {
            for k3 in -2i64..2 {
                let z = match [k1, k2, k3] {
                    [0, 0, 0] => Complex64::new(0.5, 0.0),
                    [1, 0, 0] => Complex64::new(0.25, -0.5),
                    [-1, 0, 0] => Complex64::new(0.25, 0.5),
                    _ => Complex64::new(0.0, 0.0),
                };
                bytes.extend_from_slice(&z.re.to_le_bytes());
                bytes.extend_from_slice(&z.im.to_le_bytes());
            }
        }
    }
    let f = snapshot::decode(&bytes).unwrap().into_scalar().unwrap();
    assert_eq!(f.grid().stride(), 1);
    assert_eq!(f.grid().dealias(), Dealias::TWO_THIRDS);
    assert_eq!(f.times().times(), &[0.0]);
    assert_eq!(f.coeff(0, [1, 0, 0]), Some(Complex64::new(0.25, -0.5)));
    // f(x) = 0.5 + 0.5 cos x + sin x
    let h = f.grid().spacing();
    let vals = f.to_physical(0);
    for a in 0..n {
        let x = a as f64 * h;
        assert!((vals[a * n * n] - (0.5 + 0.5 * x.cos() + x.sin())).abs() < 1e-15);
    }
}

#[test]
fn snapshot_errors() {
    let err = snapshot::decode(b"CVXF0002\0\0").unwrap_err();
    assert!(matches!(err, SnapshotError::BadMagic { .. }));
    assert!(err.to_string().contains("CVXF0001"), "{err}");
    let grid = Grid3::new(6, 1).unwrap();
    let f = ScalarField::zeros(grid, TimeGrid::instant(0.0).unwrap());
    let bytes = snapshot::encode_scalar(&f);
    assert!(matches!(
        snapshot::decode(&bytes[..bytes.len() - 3]),
        Err(SnapshotError::Truncated)
    ));
    let mut long = bytes.clone();
    long.push(0);
    assert!(matches!(snapshot::decode(&long), Err(SnapshotError::TrailingBytes(1))));
    assert!(matches!(
        snapshot::decode(&bytes).unwrap().into_vector(),
        Err(SnapshotError::WrongRank { expected: 1, found: 0 })
    ));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cvxf");
    std::fs::write(&bad, b"NOTASNAP").unwrap();
    let out = eulerci(&["diagnose", "holder", "--input", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("CVXF0001"));
}

const FAST: &str = "\
[run]
profile = 1
alpha = 0.05
beta = 0.4
stages = 2
seed = 3

[schedule]
lambdas = 16, 32
grid = 40
dealias = 1/1
time_samples = 5
";

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    WalkDir::new(dir)
        .sort_by_file_name()
        .into_iter()
        .map(|e| e.unwrap())
        .filter(|e| e.file_type().is_file())
        .map(|e| {
            (
                e.path().strip_prefix(dir).unwrap().display().to_string(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

#[test]
fn config_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, FAST.replace("beta = 0.4", "beta = 0.7")).unwrap();
    let out = eulerci(&["iterate", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));
    let out = eulerci(&["iterate", dir.path().join("missing.cfg").to_str().unwrap()]);
    assert_eq!(code(&out), 4);
}

#[test]
fn zero_budget_writes_only_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, FAST.replace("stages = 2", "stages = 0")).unwrap();
    let out = dir.path().join("out");
    let s = commands::iterate(
        &cfg,
        &IterateOptions {
            output: Some(out.clone()),
            ..Default::default()
        },
    )
    .unwrap();
    assert!(s.report.is_none());
    let names: Vec<String> = files(&out).into_iter().map(|f| f.0).collect();
    assert_eq!(names, vec!["manifest.json".to_string()]);
    let m: commands::Manifest = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m.format, commands::MANIFEST_FORMAT);
    assert_eq!(m.seed, 3);
    assert_eq!(m.config, FAST.replace("stages = 2", "stages = 0"));
    assert_eq!(m.config_sha256.len(), 64);
}

#[test]
fn resumed_run_matches_an_uninterrupted_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, FAST).unwrap();
    let full = dir.path().join("full");
    let part = dir.path().join("part");
    let opts = |out: &Path, resume, stop_after| IterateOptions {
        resume,
        stop_after,
        output: Some(out.to_path_buf()),
    };
    let s = commands::iterate(&cfg, &opts(&full, false, None)).unwrap();
    assert_eq!(s.manifest.stages.len(), 2);
    assert_eq!(s.manifest.stages[0].status, "succeeded");

    let s = commands::iterate(&cfg, &opts(&part, false, Some(1))).unwrap();
    assert_eq!(s.manifest.stages.len(), 1);
    // A half-written later stage is discarded on resume.
    std::fs::create_dir_all(part.join("stage_001")).unwrap();
    std::fs::write(part.join("stage_001/v.cvxf"), b"junk").unwrap();
    let s = commands::iterate(&cfg, &opts(&part, true, None)).unwrap();
    assert_eq!(s.started_at, 1);
    assert_eq!(files(&full), files(&part));

    // A different configuration refuses to resume.
    std::fs::write(&cfg, FAST.replace("seed = 3", "seed = 4")).unwrap();
    let err = commands::iterate(&cfg, &opts(&part, true, None)).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn aborted_stage_exits_with_code_three() {
    // η far above what r₀ allows: stage 1 fails its preconditions.
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let text = FAST.replace("profile = 1", "profile = 1 - t/2") + "\n[constants]\neta = 0.05\n";
    std::fs::write(&cfg, text).unwrap();
    let out = eulerci(&[
        "iterate",
        cfg.to_str().unwrap(),
        "--output",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
    let m: commands::Manifest =
        serde_json::from_slice(&std::fs::read(dir.path().join("o/manifest.json")).unwrap()).unwrap();
    assert_eq!(m.stages.last().unwrap().status, "aborted");
    assert!(m
        .stages
        .last()
        .unwrap()
        .error
        .as_ref()
        .unwrap()
        .contains("chart domain"));
}

#[test]
fn energy_error_of_rest_is_the_profile() {
    let dir = tempfile::tempdir().unwrap();
    let grid = Grid3::new(8, 1).unwrap();
    let v = VectorField::zeros(grid, TimeGrid::uniform(5).unwrap());
    let path = dir.path().join("v.cvxf");
    snapshot::write_file(&path, &snapshot::encode_vector(&v)).unwrap();
    let (rep, d) = commands::diagnose_energy(&path, "1 - t/2", 1.0).unwrap();
    for r in &rep.rows {
        assert_eq!(r.gap, 1.0 - r.t / 2.0);
    }
    let rows = report::read_rows(d.csv.as_bytes()).unwrap();
    let errors: Vec<_> = rows.iter().filter(|r| r.quantity == "error").collect();
    assert_eq!(errors.len(), 5);
    for r in errors {
        assert_eq!(r.value, 1.0 - r.t.unwrap() / 2.0);
    }
}

#[test]
fn geometry_pinned_output_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    let first = eulerci(&["geometry", "--out", a.to_str().unwrap()]);
    assert_eq!(code(&first), 0);
    let second = eulerci(&[
        "geometry",
        "--pinned",
        a.to_str().unwrap(),
        "--out",
        b.to_str().unwrap(),
    ]);
    assert_eq!(code(&second), 0);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(first.stdout, second.stdout);
    assert!(String::from_utf8_lossy(&first.stdout).starts_with("lambda0 9\n"));

    let out = eulerci(&["geometry", "--bound", "3"]);
    assert_eq!(code(&out), 3);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["feasible"], false);
    assert_eq!(report["attempts"].as_array().unwrap().len(), 3);
}

#[test]
fn plots_are_deterministic_and_reject_bad_rows() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "stage,quantity,lambda,mu,t,value\n").unwrap();
    commands::plot(&empty, &dir.path().join("e")).unwrap();
    let svg = std::fs::read_to_string(dir.path().join("e/rates.svg")).unwrap();
    assert!(svg.contains("<svg") && !svg.contains("polyline"));

    let rows: Vec<report::Row> = [16u64, 32, 64, 128]
        .iter()
        .enumerate()
        .flat_map(|(i, &l)| {
            let tag = |q: &str, v: f64| report::Row {
                stage: Some(i),
                lambda: Some(l),
                mu: Some(4),
                ..report::Row::new(q, v)
            };
            vec![
                tag("kinetic", 0.5 - 0.1 * i as f64).at(0.0),
                tag("reynolds_sup", 1.0 / l as f64),
                tag("reynolds_target", 0.5f64.powi(i as i32)),
            ]
        })
        .collect();
    let mut buf = Vec::new();
    report::write_rows(&mut buf, &rows).unwrap();
    let csv = dir.path().join("rows.csv");
    std::fs::write(&csv, &buf).unwrap();
    commands::plot(&csv, &dir.path().join("p1")).unwrap();
    commands::plot(&csv, &dir.path().join("p2")).unwrap();
    assert_eq!(files(&dir.path().join("p1")), files(&dir.path().join("p2")));
    let rates = std::fs::read_to_string(dir.path().join("p1/rates.svg")).unwrap();
    assert!(rates.contains("reynolds_sup: slope -1.0000"));

    let bad = dir.path().join("bad.csv");
    std::fs::write(
        &bad,
        "stage,quantity,lambda,mu,t,value\n0,e,16,4,0.0,1.0\n0,e,16,4,0.5,oops\n",
    )
    .unwrap();
    let out = eulerci(&[
        "plot",
        bad.to_str().unwrap(),
        "--out",
        dir.path().join("x").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 2"));
}
