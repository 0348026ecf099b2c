//! Rational points on the unit sphere via inverse stereographic projection.

use num_rational::Ratio;

pub type Rational = Ratio<i128>;

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn parameters(bound: i128) -> Vec<Rational> {
    let mut out = Vec::new();
    for den in 1..=bound {
        for num in -bound * den..=bound * den {
            if gcd(num, den) == 1 {
                out.push(Rational::new(num, den));
            }
        }
    }
    out
}

/// Exact image of `(u, v) ∈ ℚ²` on `S²`.
pub fn stereographic(u: Rational, v: Rational) -> [Rational; 3] {
    let one = Rational::from_integer(1);
    let two = Rational::from_integer(2);
    let q = u * u + v * v;
    let d = q + one;
    [two * u / d, two * v / d, (q - one) / d]
}

/// All points `s(u, v)` with `u, v` rationals of denominator at most `bound`
/// and modulus at most `bound`.  Every point satisfies `|s|² = 1` exactly.
pub fn rational_sphere_points(bound: u32) -> Vec<[Rational; 3]> {
    let ps = parameters(bound as i128);
    let mut out = Vec::with_capacity(ps.len() * ps.len());
    for u in &ps {
        for v in &ps {
            out.push(stereographic(*u, *v));
        }
    }
    out
}

pub fn to_f64(p: &[Rational; 3]) -> [f64; 3] {
    p.map(|r| *r.numer() as f64 / *r.denom() as f64)
}

/// Largest distance from a probe direction to the nearest point of `set`.
pub fn covering_radius(set: &[[f64; 3]], probes: &[[f64; 3]]) -> f64 {
    probes
        .iter()
        .map(|p| {
            set.iter()
                .map(|s| ((s[0] - p[0]).powi(2) + (s[1] - p[1]).powi(2) + (s[2] - p[2]).powi(2)).sqrt())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// Quasi-uniform probe directions (Fibonacci lattice).
pub fn fibonacci_sphere(count: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let th = golden * i as f64;
            [r * th.cos(), r * th.sin(), z]
        })
        .collect()
}
