mod common;

use std::sync::OnceLock;

use common::*;
use eulerci::beltrami::{assemble_flow, BeltramiBasis, BeltramiCoefficients};
use eulerci::calculus::{divergence, norm_squared, outer_self};
use eulerci::field::{torus_volume, MatrixField, ScalarField};
use eulerci::geometry::{compute_eta, find_direction_system, DirectionSystem};
use eulerci::grid::{Dealias, Grid3, TimeGrid};
use eulerci::partition::PhasePartition;
use eulerci::profile::EnergyProfile;
use eulerci::stage::*;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Setup {
    system: DirectionSystem,
    basis: BeltramiBasis,
    partition: PhasePartition,
    profile: EnergyProfile,
    m: f64,
}

fn setup() -> &'static Setup {
    static S: OnceLock<Setup> = OnceLock::new();
    S.get_or_init(|| {
        let system = find_direction_system(12).unwrap();
        let basis = BeltramiBasis::for_radius_sq(system.radius_sq()).unwrap();
        let partition = PhasePartition::default();
        let profile = EnergyProfile::parse("1").unwrap();
        let m = calibrate_m(&profile, &system, &partition, &basis, &ProbeConfig::default())
            .unwrap()
            .m;
        Setup {
            system,
            basis,
            partition,
            profile,
            m,
        }
    })
}

fn ctx(s: &Setup) -> Construction<'_> {
    let constants = StageConstants {
        eta: compute_eta(&s.system, s.profile.min()),
        m: s.m,
    };
    Construction::new(&s.profile, &s.system, &s.partition, &s.basis, constants).unwrap()
}

fn config(lambdas: Vec<u64>, stages: usize) -> ScheduleConfig {
    ScheduleConfig {
        alpha: 0.05,
        beta: 0.4,
        lambdas: LambdaSchedule::List(lambdas),
        stages,
        grid: GridRule::Auto { factor: 3 },
        time_samples: 9,
        stride: None,
        dealias: Dealias::TWO_THIRDS,
    }
}

fn first_stage() -> &'static (EulerReynoldsState, StageOutcome) {
    static S: OnceLock<(EulerReynoldsState, StageOutcome)> = OnceLock::new();
    S.get_or_init(|| {
        let s = setup();
        let cfg = config(vec![16], 1);
        let plan = plan_run(&cfg, &s.basis).unwrap();
        let start = EulerReynoldsState::zero(plan.grid, plan.times.clone());
        let params = choose_params(1.0, 0, &cfg, &plan).unwrap();
        let out = run_stage(&start, &ctx(s), &params, &StageOptions { decomposition: true }).unwrap();
        (start, out)
    })
}

#[test]
fn targets_from_rest() {
    let s = setup();
    let grid = Grid3::new(12, 1).unwrap();
    let state = EulerReynoldsState::zero(grid, TimeGrid::uniform(5).unwrap());
    let t = compute_stage_targets(&state, &s.profile, &s.system, 1e-6).unwrap();
    let expect = 1.0 / (6.0 * torus_volume());
    assert!(t.rho.iter().all(|r| (r - expect).abs() < 1e-16));
    assert!((t.r.comp(0, 0).mean(2) - expect).abs() < 1e-16);
    assert_eq!(t.r.comp(0, 1).max_coeff(), 0.0);
}

#[test]
fn preconditions_are_enforced() {
    let s = setup();
    let grid = Grid3::new(12, 1).unwrap();
    let mut state = EulerReynoldsState::zero(grid, TimeGrid::uniform(5).unwrap());
    state.delta = 0.1;
    let err = compute_stage_targets(&state, &s.profile, &s.system, 1e-6).unwrap_err();
    assert!(matches!(err, StageError::Precondition { sample: 0, .. }), "{err}");
    state.delta = 1.0;
    let mut big = MatrixField::zeros(grid, state.times().clone());
    big = big
        .add_isotropic(
            &ScalarField::from_fn(grid, state.times().clone(), |_, x| x[0].cos()),
            1.0,
        )
        .unwrap();
    state.r = big;
    assert!(compute_stage_targets(&state, &s.profile, &s.system, 1e-6).is_err());
}

#[test]
fn stage_from_rest_is_a_stationary_flow() {
    let (start, out) = first_stage();
    let r = &out.report;
    assert_eq!((r.lambda, r.mu), (16, 4));
    assert!(r.success, "{r:?}");
    // Constant amplitudes: w_o is a single-shell Beltrami flow.
    for i in 0..3 {
        for t in 0..9 {
            assert!(out.w_o.comp(i).mean(t).abs() < 1e-15);
        }
    }
    assert!(out.w_c.max_coeff() < 1e-14);
    assert!(r.w_o_sup <= r.w_o_bound);
    assert!(divergence(&out.state.v).unwrap().max_coeff() < 1e-13);
    assert!(out.state.r.max_operator_norm() < 1e-12);
    for (c, e) in r.energy.iter().zip(out.state.kinetic_energy()) {
        assert!((e - 0.5).abs() < 1e-13);
        assert!(c.ok);
    }
    let dp = out.state.p.sub(&start.p).unwrap();
    let half = norm_squared(&out.w_o).unwrap().scale(-0.5);
    assert!(rel_scalar(&dp, &half) < 1e-14);
    let d = r.decomposition.as_ref().unwrap();
    assert!(d.residual <= 1e-10);
}

#[test]
fn mean_stress_of_the_perturbation_is_the_target() {
    let (start, out) = first_stage();
    let s = setup();
    let t = compute_stage_targets(start, &s.profile, &s.system, 1.0).unwrap();
    let ww = outer_self(&out.w_o).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let avg = ww.comp(i, j).mean(4);
            let want = t.r.comp(i, j).mean(4);
            assert!(
                (avg - want).abs() < 1e-12 * t.rho[4].max(1.0),
                "{i}{j}: {avg} vs {want}"
            );
        }
    }
}

#[test]
fn constant_stress_is_absorbed() {
    let s = setup();
    let cfg = config(vec![16], 1);
    let plan = plan_run(&cfg, &s.basis).unwrap();
    let mut state = EulerReynoldsState::zero(plan.grid, plan.times.clone());
    let eta = compute_eta(&s.system, 1.0);
    let mut r = MatrixField::zeros(plan.grid, plan.times.clone()).into_comps();
    for t in 0..plan.times.len() {
        r[0].set_mode(t, [0, 0, 0], Complex64::new(0.4 * eta, 0.0)).unwrap();
        r[4].set_mode(t, [0, 0, 0], Complex64::new(-0.4 * eta, 0.0)).unwrap();
    }
    state.r = MatrixField::new(r).unwrap().with_flags(true, true);
    let targets = compute_stage_targets(&state, &s.profile, &s.system, eta).unwrap();
    let params = choose_params(1.0, 0, &cfg, &plan).unwrap();
    let w_o = build_w_o(&state, &targets, &s.system, &s.partition, &s.basis, &params).unwrap();
    let ww = outer_self(&w_o).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let want = targets.r.comp(i, j).mean(0);
            assert!((ww.comp(i, j).mean(0) - want).abs() < 1e-14, "{i}{j}");
        }
    }
}

#[test]
fn beltrami_flow_is_a_fixed_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let basis = BeltramiBasis::new(5).unwrap();
    let grid = Grid3::new(40, 1).unwrap();
    let times = TimeGrid::uniform(16).unwrap();
    let w = assemble_flow(&basis, &BeltramiCoefficients::random(&basis, &mut rng), grid, times).unwrap();
    let p = norm_squared(&w).unwrap().scale(-0.5);
    let out = build_reynolds(&w, &p).unwrap();
    assert!(out.r.max_operator_norm() <= 1e-10);
    assert!(out.time_fd_error.is_none());
}

#[test]
fn zero_stage_budget_returns_the_start() {
    let s = setup();
    let cfg = config(vec![16], 0);
    let plan = plan_run(&cfg, &s.basis).unwrap();
    let start = EulerReynoldsState::zero(plan.grid, plan.times.clone());
    let out = run_iteration(
        &ctx(s),
        &cfg,
        &plan,
        start.clone(),
        &StageOptions::default(),
        &mut |_| true,
    );
    assert_eq!(out.report.attempted, 0);
    assert_eq!(out.report.completed, 0);
    assert_eq!(out.state, start);
    assert_eq!(out.report.energy_error, vec![1.0]);
}

#[test]
fn calibration_scales_with_energy() {
    let s = setup();
    let four = EnergyProfile::parse("4").unwrap();
    let a = calibrate_m(&s.profile, &s.system, &s.partition, &s.basis, &ProbeConfig::default()).unwrap();
    let b = calibrate_m(&four, &s.system, &s.partition, &s.basis, &ProbeConfig::default()).unwrap();
    assert!((b.probe_bound - 4.0 * a.probe_bound).abs() < 1e-9 * b.probe_bound);
    assert_eq!(a.probe_sup, b.probe_sup);
    assert!(a.m > 1.0);
}

#[test]
fn parameter_choice() {
    let s = setup();
    let cfg = ScheduleConfig {
        lambdas: LambdaSchedule::Doubling { start: 16 },
        ..config(vec![], 3)
    };
    let plan = plan_run(&cfg, &s.basis).unwrap();
    assert_eq!(plan.grid.stride(), 16);
    assert!(plan.grid.cutoff() >= 4 * s.basis.max_entry());
    let p = choose_params(0.25, 2, &cfg, &plan).unwrap();
    assert_eq!((p.lambda(), p.mu(), p.multiple()), (64, 4, 4));
    assert!(choose_params(0.0, 0, &cfg, &plan).is_err());
    assert!(choose_params(0.5, 3, &config(vec![16], 1), &plan).is_err());
    assert!(StageParams::new(64, 3, 0.05, 0.4, plan.grid, plan.times.clone()).is_err());
    assert!(StageParams::new(64, 4, 0.3, 0.4, plan.grid, plan.times.clone()).is_err());
    assert_eq!(mu_for(128, 0.4).unwrap(), 8);
}
