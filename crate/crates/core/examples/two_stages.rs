//! Two stages from the zero state at constant energy, printing the reports.

use eulerci::beltrami::BeltramiBasis;
use eulerci::geometry::{compute_eta, find_direction_system};
use eulerci::grid::Dealias;
use eulerci::partition::PhasePartition;
use eulerci::profile::EnergyProfile;
use eulerci::stage::{
    calibrate_m, plan_run, run_iteration, Construction, EulerReynoldsState, GridRule, LambdaSchedule, ProbeConfig,
    ScheduleConfig, StageConstants, StageOptions,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let clock = std::time::Instant::now();
    let system = find_direction_system(12)?;
    let basis = BeltramiBasis::for_radius_sq(system.radius_sq())?;
    let partition = PhasePartition::default();
    let profile = EnergyProfile::parse("25")?;
    let cal = calibrate_m(&profile, &system, &partition, &basis, &ProbeConfig::default())?;
    let constants = StageConstants {
        eta: compute_eta(&system, profile.min()),
        m: cal.m,
    };
    println!(
        "setup {:?}: eta {:e} M {:e} sup|W| {:e}",
        clock.elapsed(),
        constants.eta,
        constants.m,
        cal.probe_sup
    );
    let ctx = Construction::new(&profile, &system, &partition, &basis, constants)?;
    let config = ScheduleConfig {
        alpha: 0.05,
        beta: 0.45,
        lambdas: LambdaSchedule::List(vec![32, 64]),
        stages: 2,
        grid: GridRule::Auto { factor: 4 },
        time_samples: 9,
        stride: None,
        dealias: Dealias::TWO_THIRDS,
    };
    let plan = plan_run(&config, &basis)?;
    println!("grid n {} stride {}", plan.grid.n(), plan.grid.stride());
    let start = EulerReynoldsState::zero(plan.grid, plan.times.clone());
    let options = StageOptions { decomposition: true };
    let out = run_iteration(&ctx, &config, &plan, start, &options, &mut |o| {
        println!("stage done at {:?}", clock.elapsed());
        let _ = o;
        true
    });
    println!("{}", serde_json::to_string_pretty(&out.report)?);
    Ok(())
}
