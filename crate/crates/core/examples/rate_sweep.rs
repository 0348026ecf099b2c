//! Single-instant stage measurements over a frequency sweep, with fitted
//! exponents against their predictions.

use eulerci::beltrami::{assemble_flow, BeltramiBasis, BeltramiCoefficients};
use eulerci::calculus;
use eulerci::diagnostics::{predicted_exponent, stage_rate_sample, RateFit};
use eulerci::field::MatrixField;
use eulerci::geometry::{compute_eta, find_direction_system};
use eulerci::grid::{size_retaining, Grid3, TimeGrid};
use eulerci::partition::PhasePartition;
use eulerci::profile::EnergyProfile;
use eulerci::stage::{mu_for, Construction, EulerReynoldsState, StageConstants, StageParams};
use rand::SeedableRng;

const STRIDE: u64 = 16;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let clock = std::time::Instant::now();
    let system = find_direction_system(12)?;
    let basis = BeltramiBasis::for_radius_sq(system.radius_sq())?;
    let partition = PhasePartition::default();
    let (alpha, beta) = (0.05, 0.4);
    let lambdas = [16u64, 32, 64, 128];

    let slow = BeltramiBasis::new(1)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let coeffs = BeltramiCoefficients::random(&slow, &mut rng);
    let base = Grid3::new(8, STRIDE)?;
    let times = TimeGrid::instant(0.0)?;
    let w = assemble_flow(&slow, &coeffs, base, times.clone())?;
    let amplitude: f64 = std::env::args().nth(1).map_or(Ok(0.01), |a| a.parse())?;
    let ox: f64 = std::env::args().nth(2).map_or(Ok(0.24), |a| a.parse())?;
    let oy: f64 = std::env::args().nth(3).map_or(Ok(0.0175), |a| a.parse())?;
    let mut v = w.scale(amplitude / w.max_magnitude());
    v.comp_mut(0)
        .add_mode(0, [0, 0, 0], num_complex::Complex64::new(ox, 0.0))?;
    v.comp_mut(1)
        .add_mode(0, [0, 0, 0], num_complex::Complex64::new(oy, 0.0))?;
    let kinetic = v.l2_squared(0);
    let profile = EnergyProfile::parse(&format!("{}", 8.0 * kinetic))?;
    let p = calculus::norm_squared(&v)?.scale(-0.5);
    let state = EulerReynoldsState {
        r: MatrixField::zeros(base, times.clone()),
        v,
        p,
        delta: 1.0,
        stage_index: 0,
    };
    let constants = StageConstants {
        eta: compute_eta(&system, profile.min()),
        m: 2.0,
    };
    let ctx = Construction::new(&profile, &system, &partition, &basis, constants)?;
    let mut rows = Vec::new();
    for &lambda in &lambdas {
        let mu = mu_for(lambda, beta)?;
        let n = size_retaining(basis.max_entry() * (lambda / STRIDE) as usize, 3);
        let params = StageParams::new(lambda, mu, alpha, beta, Grid3::new(n, STRIDE)?, times.clone())?;
        let s = stage_rate_sample(&state, &ctx, &params)?;
        println!("{:?} {}", clock.elapsed(), serde_json::to_string(&s)?);
        rows.push(s);
    }
    let x: Vec<f64> = rows.iter().map(|r| r.lambda as f64).collect();
    let pairs: Vec<(u64, u64)> = rows.iter().map(|r| (r.lambda, r.mu)).collect();
    let fits = [
        ("w_c", rows.iter().map(|r| r.w_c_sup).collect::<Vec<_>>(), 1.0),
        ("energy", rows.iter().map(|r| r.energy_deviation).collect(), 1.0),
        ("oscillation", rows.iter().map(|r| r.oscillation_holder).collect(), 2.0),
    ];
    for (name, y, power) in fits {
        let fit = RateFit::fit(&x, &y)?;
        let pred = predicted_exponent(&pairs, power, alpha)?;
        println!(
            "{name}: slope {:.4} predicted {:.4} rel {:.3}",
            fit.slope,
            pred,
            fit.relative_error(pred)
        );
    }
    Ok(())
}
