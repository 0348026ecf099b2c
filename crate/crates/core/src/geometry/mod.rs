//! Direction geometry: eight disjoint families of shell directions whose
//! projection matrices `M_k = Id − k̂⊗k̂` positively span every symmetric
//! matrix near the identity, with smooth square-root weights.
//!
//! Each family carries a *conical chart*: six matrices `A_1..A_6` whose
//! traceless parts form a 5-simplex around `(2/3)·Id`, each written as a
//! convex combination of at most six `M_k`.  Every symmetric `R` has linear
//! coordinates `R = Σ_i c_i(R) A_i`, and the weights
//! `λ_k(R) = Σ_i c_i(R) λ_{i,k}` are linear, positive near `Id`, and satisfy
//! `Σ_k λ_k(R) M_k = R`.  The amplitudes are `γ_k = √λ_k` on canonical pair
//! representatives, shared by `k` and `−k`.

mod lp;
pub mod sphere;
mod text;

use nalgebra::{DMatrix, DVector, Matrix6, SMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice;
use crate::linalg::{self, sym_unvec, sym_vec};

pub use lp::{from_traceless, traceless_coords};
pub use text::TextError;

/// Number of families.
pub const FAMILIES: usize = 8;
/// Scaling between the identity and the simplex centre `(2/3)·Id`.
pub const ALPHA: f64 = 2.0 / 3.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("no direction system with λ₀ ≤ {bound}: {}", summarize(.attempts))]
    Infeasible { bound: u32, attempts: Vec<ShellAttempt> },
    #[error("matrix is outside the chart domain: ‖R − Id‖ = {distance} ≥ r₀ = {r0}")]
    OutsideDomain { distance: f64, r0: f64 },
    #[error("family index {0} out of range")]
    BadFamily(usize),
    #[error("{0:?} is not in family {1}")]
    NotInFamily([i64; 3], usize),
    #[error("invalid direction system: {0}")]
    Invalid(String),
    #[error(transparent)]
    Text(#[from] TextError),
}

fn summarize(a: &[ShellAttempt]) -> String {
    a.iter()
        .map(|s| format!("λ₀={} ({} pairs): {}", s.lambda0, s.pairs, s.outcome))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Outcome of the search on one shell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellAttempt {
    pub lambda0: u32,
    pub pairs: usize,
    pub outcome: String,
}

/// `M_k = Id − k̂ ⊗ k̂`.
pub fn projection(k: [i64; 3]) -> [f64; 9] {
    let n2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
    let mut m = linalg::identity();
    for i in 0..3 {
        for j in 0..3 {
            m[3 * i + j] -= (k[i] * k[j]) as f64 / n2;
        }
    }
    m
}

/// One family with its chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Family {
    /// Canonical representatives of the family's pairs.
    pub members: Vec<[i64; 3]>,
    /// Simplex vertices `A_i`.
    pub vertices: Vec<[f64; 9]>,
    /// Carathéodory representation of each vertex: `(k, λ_{i,k})`.
    pub supports: Vec<Vec<([i64; 3], f64)>>,
    /// Inverse vertex matrix: `c(R) = chart · sym_vec(R)`.
    pub chart: [[f64; 6]; 6],
}

/// Derived per-family evaluation data.
#[derive(Debug, Clone, PartialEq)]
struct Compiled {
    /// Canonical representatives that carry weight (`Γ_j`).
    active: Vec<[i64; 3]>,
    /// `weights[q][i] = λ_{i, active[q]}`.
    weights: Vec<[f64; 6]>,
}

/// Eight families with charts and the common domain radius `r₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSystem {
    radius_sq: i64,
    families: Vec<Family>,
    r0: f64,
    compiled: Vec<Compiled>,
}

fn compile(f: &Family) -> Compiled {
    let mut active: Vec<[i64; 3]> = f.supports.iter().flat_map(|s| s.iter().map(|(k, _)| *k)).collect();
    active.sort();
    active.dedup();
    let weights = active
        .iter()
        .map(|k| {
            let mut w = [0.0; 6];
            for (i, s) in f.supports.iter().enumerate() {
                for (kk, l) in s {
                    if kk == k {
                        w[i] += l;
                    }
                }
            }
            w
        })
        .collect();
    Compiled { active, weights }
}

fn nuclear_norm(m: &[f64; 9]) -> f64 {
    linalg::sym_eigenvalues(m).iter().map(|e| e.abs()).sum()
}

/// Positivity radius of a family: the largest `r` such that every weight
/// `λ_k(R) = tr(H_k R)` stays positive for `‖R − Id‖ ≤ r`.  The dual of the
/// operator norm is the nuclear norm, so `|λ_k(R) − λ_k(Id)| ≤ ‖H_k‖_* r`.
pub fn positivity_radius(f: &Family) -> f64 {
    let c = compile(f);
    let id = sym_vec(&linalg::identity());
    c.weights
        .iter()
        .map(|w| {
            let h: [f64; 6] = std::array::from_fn(|a| (0..6).map(|i| w[i] * f.chart[i][a]).sum());
            let at_id: f64 = (0..6).map(|a| h[a] * id[a]).sum();
            at_id / nuclear_norm(&sym_unvec(&h))
        })
        .fold(f64::INFINITY, f64::min)
}

impl DirectionSystem {
    /// Assemble and validate a system; `r0` is recomputed from the charts.
    pub fn new(radius_sq: i64, families: Vec<Family>) -> Result<Self, GeometryError> {
        if families.len() != FAMILIES {
            return Err(GeometryError::Invalid(format!(
                "expected {FAMILIES} families, got {}",
                families.len()
            )));
        }
        let shell = lattice::shell(radius_sq);
        let mut seen = std::collections::BTreeSet::new();
        for (j, f) in families.iter().enumerate() {
            for k in &f.members {
                if !lattice::is_canonical(*k) || shell.binary_search(k).is_err() {
                    return Err(GeometryError::Invalid(format!("{k:?} is not a canonical shell vector")));
                }
                if !seen.insert(*k) {
                    return Err(GeometryError::Invalid(format!("{k:?} appears in two families")));
                }
            }
            if f.vertices.len() != 6 || f.supports.len() != 6 {
                return Err(GeometryError::Invalid(format!("family {j} needs six vertices")));
            }
            for (a, s) in f.vertices.iter().zip(&f.supports) {
                let mut acc = [0.0; 9];
                for (k, l) in s {
                    if !f.members.contains(k) {
                        return Err(GeometryError::NotInFamily(*k, j));
                    }
                    if *l <= 0.0 {
                        return Err(GeometryError::Invalid(format!("nonpositive weight in family {j}")));
                    }
                    let m = projection(*k);
                    for q in 0..9 {
                        acc[q] += l * m[q];
                    }
                }
                let err = acc.iter().zip(a).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                if err > 1e-12 {
                    return Err(GeometryError::Invalid(format!(
                        "vertex of family {j} is not reproduced (error {err:e})"
                    )));
                }
            }
            let v = vertex_matrix(&f.vertices);
            let c = SMatrix::<f64, 6, 6>::from_fn(|r, q| f.chart[r][q]);
            let e = (c * v - Matrix6::identity()).abs().max();
            if e > 1e-9 {
                return Err(GeometryError::Invalid(format!(
                    "chart of family {j} is not inverse (error {e:e})"
                )));
            }
        }
        let r0 = 0.5 * families.iter().map(positivity_radius).fold(f64::INFINITY, f64::min);
        if r0.is_nan() || r0 <= 0.0 {
            return Err(GeometryError::Invalid("chart has no positivity radius".into()));
        }
        let compiled = families.iter().map(compile).collect();
        Ok(Self {
            radius_sq,
            families,
            r0,
            compiled,
        })
    }

    pub fn radius_sq(&self) -> i64 {
        self.radius_sq
    }

    pub fn lambda0(&self) -> f64 {
        (self.radius_sq as f64).sqrt()
    }

    /// Domain radius: weights are smooth and positive on `‖R − Id‖ < 2 r₀`
    /// and the engine evaluates them on `‖R − Id‖ < r₀`.
    pub fn r0(&self) -> f64 {
        self.r0
    }

    /// Inradius-type constant `ϑ = 2 α r₀` in simplex coordinates.
    pub fn theta(&self) -> f64 {
        2.0 * ALPHA * self.r0
    }

    pub fn families(&self) -> &[Family] {
        &self.families
    }

    /// Canonical representatives of `Γ_j`, in evaluation order.
    pub fn active(&self, j: usize) -> &[[i64; 3]] {
        &self.compiled[j].active
    }

    /// `Λ_j = Γ_j ∪ −Γ_j`.
    pub fn lambda_set(&self, j: usize) -> Vec<[i64; 3]> {
        let mut out: Vec<_> = self.compiled[j]
            .active
            .iter()
            .flat_map(|k| [*k, lattice::neg(*k)])
            .collect();
        out.sort();
        out
    }

    /// Conical coordinates `c(R)` of family `j`.
    pub fn coordinates(&self, j: usize, r: &[f64; 9]) -> [f64; 6] {
        let v = sym_vec(r);
        let ch = &self.families[j].chart;
        std::array::from_fn(|i| (0..6).map(|a| ch[i][a] * v[a]).sum())
    }

    /// Weights `λ_k(R)` for `k ∈ Γ_j` (no domain check).
    pub fn weights_into(&self, j: usize, r: &[f64; 9], out: &mut [f64]) {
        let c = self.coordinates(j, r);
        for (o, w) in out.iter_mut().zip(&self.compiled[j].weights) {
            *o = (0..6).map(|i| c[i] * w[i]).sum();
        }
    }

    /// Amplitudes `γ_k(R)` for `k ∈ Γ_j` (no domain check; negative weights
    /// are clamped to zero).
    pub fn gammas_into(&self, j: usize, r: &[f64; 9], out: &mut [f64]) {
        self.weights_into(j, r, out);
        for o in out.iter_mut() {
            *o = o.max(0.0).sqrt();
        }
    }

    /// Distance `‖R − Id‖` in the operator norm.
    pub fn distance_from_identity(r: &[f64; 9]) -> f64 {
        let mut d = *r;
        d[0] -= 1.0;
        d[4] -= 1.0;
        d[8] -= 1.0;
        linalg::operator_norm(&d)
    }

    /// `γ_k(R)` for any `k ∈ Λ_j`, with the domain checked.
    pub fn gamma(&self, j: usize, k: [i64; 3], r: &[f64; 9]) -> Result<f64, GeometryError> {
        if j >= FAMILIES {
            return Err(GeometryError::BadFamily(j));
        }
        let d = Self::distance_from_identity(r);
        if d >= self.r0 {
            return Err(GeometryError::OutsideDomain {
                distance: d,
                r0: self.r0,
            });
        }
        let kp = lattice::canonical(k);
        let q = self.compiled[j]
            .active
            .binary_search(&kp)
            .map_err(|_| GeometryError::NotInFamily(k, j))?;
        let mut out = vec![0.0; self.compiled[j].active.len()];
        self.gammas_into(j, r, &mut out);
        Ok(out[q])
    }

    /// Smallest weight over all families at `R`, a positivity certificate.
    pub fn min_weight(&self, r: &[f64; 9]) -> f64 {
        (0..FAMILIES)
            .map(|j| {
                let mut w = vec![0.0; self.compiled[j].active.len()];
                self.weights_into(j, r, &mut w);
                w.into_iter().fold(f64::INFINITY, f64::min)
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn to_text(&self) -> String {
        text::write(self)
    }

    pub fn from_text(s: &str) -> Result<Self, GeometryError> {
        let (radius_sq, families) = text::read(s)?;
        Self::new(radius_sq, families)
    }
}

/// Reynolds tolerance `η = r₀ · min e / (24 (2π)³)`.
pub fn compute_eta(system: &DirectionSystem, min_energy: f64) -> f64 {
    system.r0() * min_energy / (24.0 * crate::field::torus_volume())
}

fn vertex_matrix(vertices: &[[f64; 9]]) -> Matrix6<f64> {
    Matrix6::from_fn(|a, i| sym_vec(&vertices[i])[a])
}

/// Search parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub seed: u64,
    /// Swap budget while some family is infeasible.
    pub max_iterations: usize,
    /// Further swaps spent improving the worst interior margin.
    pub polish_iterations: usize,
    /// Random simplex orientations tried per family.
    pub orientations: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            seed: 0x5eed,
            max_iterations: 20_000,
            polish_iterations: 1_500,
            orientations: 48,
        }
    }
}

fn family_score(pts: &[[f64; 5]]) -> f64 {
    if lp::rank(pts) < 5 {
        return -1.0;
    }
    lp::interior_margin(pts).unwrap_or(-1.0)
}

/// Partition canonical pairs into eight families each containing `(2/3)·Id`
/// in the interior of its hull.  Starts from a round-robin deal in spherical
/// order and improves it by seeded pair swaps.
fn partition_shell(
    pairs: &[[i64; 3]],
    opts: &SearchOptions,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vec<[i64; 3]>>, String> {
    let coords = |k: &[i64; 3]| traceless_coords(&projection(*k));
    let mut order: Vec<[i64; 3]> = pairs.to_vec();
    order.sort_by(|a, b| {
        let (ua, ub) = (lattice::unit(*a), lattice::unit(*b));
        let ka = (ua[2].acos(), ua[1].atan2(ua[0]));
        let kb = (ub[2].acos(), ub[1].atan2(ub[0]));
        ka.partial_cmp(&kb).unwrap().then(a.cmp(b))
    });
    let mut fams: Vec<Vec<[i64; 3]>> = vec![Vec::new(); FAMILIES];
    for (i, k) in order.iter().enumerate() {
        fams[i % FAMILIES].push(*k);
    }
    let score = |f: &Vec<[i64; 3]>| family_score(&f.iter().map(coords).collect::<Vec<_>>());
    let mut scores: Vec<f64> = fams.iter().map(score).collect();
    let min_of = |s: &[f64]| s.iter().copied().fold(f64::INFINITY, f64::min);
    let mut feasible_at = None;
    let mut it = 0usize;
    while it < opts.max_iterations + opts.polish_iterations {
        let worst = (0..FAMILIES)
            .min_by(|a, b| scores[*a].partial_cmp(&scores[*b]).unwrap())
            .unwrap();
        if feasible_at.is_none() && scores[worst] > 1e-9 {
            feasible_at = Some(it);
        }
        if let Some(start) = feasible_at {
            if it >= start + opts.polish_iterations {
                break;
            }
        } else if it >= opts.max_iterations {
            break;
        }
        it += 1;
        let mut other = rng.gen_range(0..FAMILIES - 1);
        if other >= worst {
            other += 1;
        }
        let a = rng.gen_range(0..fams[worst].len());
        let b = rng.gen_range(0..fams[other].len());
        let before = scores[worst].min(scores[other]);
        let (x, y) = (fams[worst][a], fams[other][b]);
        fams[worst][a] = y;
        fams[other][b] = x;
        let (sw, so) = (score(&fams[worst]), score(&fams[other]));
        if sw.min(so) >= before {
            scores[worst] = sw;
            scores[other] = so;
        } else {
            fams[worst][a] = x;
            fams[other][b] = y;
        }
    }
    if min_of(&scores) > 1e-9 {
        for f in fams.iter_mut() {
            f.sort();
        }
        Ok(fams)
    } else {
        Err(format!(
            "local search ended with worst interior margin {:.3e}",
            min_of(&scores)
        ))
    }
}

/// Unit vectors of a regular 5-simplex centred at the origin.
fn regular_simplex() -> [[f64; 5]; 6] {
    let mut out = [[0.0; 5]; 6];
    let scale = (6.0f64 / 5.0).sqrt();
    for a in 0..5 {
        let n = ((a + 1) * (a + 2)) as f64;
        for (i, v) in out.iter_mut().enumerate() {
            v[a] = if i <= a {
                1.0 / n.sqrt()
            } else if i == a + 1 {
                -((a + 1) as f64) / n.sqrt()
            } else {
                0.0
            } * scale;
        }
    }
    out
}

fn random_rotation(rng: &mut ChaCha8Rng) -> SMatrix<f64, 5, 5> {
    let g = SMatrix::<f64, 5, 5>::from_fn(|_, _| {
        // Box–Muller.
        let u: f64 = rng.gen_range(1e-12..1.0);
        let v: f64 = rng.gen_range(0.0..1.0);
        (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
    });
    g.qr().q()
}

/// Carathéodory representation of a target inside the hull, polished by an
/// exact solve on the LP support.
fn caratheodory(members: &[[i64; 3]], pts: &[[f64; 5]], target: &[f64; 5]) -> Option<Vec<([i64; 3], f64)>> {
    let w = lp::convex_weights(pts, target)?;
    let support: Vec<usize> = (0..w.len()).filter(|i| w[*i] > 1e-12).collect();
    if support.is_empty() || support.len() > 6 {
        return None;
    }
    let a = DMatrix::from_fn(6, support.len(), |r, q| if r < 5 { pts[support[q]][r] } else { 1.0 });
    let mut rhs = DVector::zeros(6);
    for r in 0..5 {
        rhs[r] = target[r];
    }
    rhs[5] = 1.0;
    let sol = a.svd(true, true).solve(&rhs, 1e-14).ok()?;
    let refined: Vec<f64> = sol.iter().copied().collect();
    let use_refined = refined.iter().all(|x| *x > 0.0);
    Some(
        support
            .iter()
            .enumerate()
            .map(|(q, i)| (members[*i], if use_refined { refined[q] } else { w[*i] }))
            .collect(),
    )
}

fn build_family(members: &[[i64; 3]], opts: &SearchOptions, rng: &mut ChaCha8Rng) -> Option<Family> {
    let pts: Vec<[f64; 5]> = members.iter().map(|k| traceless_coords(&projection(*k))).collect();
    let base = regular_simplex();
    let mut best: Option<(f64, Family)> = None;
    for o in 0..opts.orientations.max(1) {
        let rot = if o == 0 {
            SMatrix::<f64, 5, 5>::identity()
        } else {
            random_rotation(rng)
        };
        let mut supports = Vec::with_capacity(6);
        let mut vertices = Vec::with_capacity(6);
        let mut ok = true;
        for u in &base {
            let d = rot * SMatrix::<f64, 5, 1>::from_row_slice(u);
            let dir = [d[0], d[1], d[2], d[3], d[4]];
            let Some(t) = lp::hull_extent(&pts, &dir) else {
                ok = false;
                break;
            };
            let target = dir.map(|x| x * t * 0.999);
            let Some(s) = caratheodory(members, &pts, &target) else {
                ok = false;
                break;
            };
            let mut a = [0.0; 9];
            for (k, l) in &s {
                let m = projection(*k);
                for q in 0..9 {
                    a[q] += l * m[q];
                }
            }
            supports.push(s);
            vertices.push(a);
        }
        if !ok {
            continue;
        }
        let Some(inv) = vertex_matrix(&vertices).try_inverse() else {
            continue;
        };
        let chart: [[f64; 6]; 6] = std::array::from_fn(|i| std::array::from_fn(|a| inv[(i, a)]));
        let fam = Family {
            members: members.to_vec(),
            vertices,
            supports,
            chart,
        };
        let r = positivity_radius(&fam);
        if r > 0.0 && best.as_ref().is_none_or(|(b, _)| r > *b) {
            best = Some((r, fam));
        }
    }
    best.map(|(_, f)| f)
}

/// Search shells `λ₀ = 1..=bound` for the smallest admitting a system.
pub fn find_direction_system(bound: u32) -> Result<DirectionSystem, GeometryError> {
    find_direction_system_with(bound, &SearchOptions::default())
}

pub fn find_direction_system_with(bound: u32, opts: &SearchOptions) -> Result<DirectionSystem, GeometryError> {
    let mut attempts = Vec::new();
    for lambda0 in 1..=bound {
        let r2 = (lambda0 * lambda0) as i64;
        let pairs: Vec<[i64; 3]> = lattice::shell(r2)
            .into_iter()
            .filter(|k| lattice::is_canonical(*k))
            .collect();
        let need = 6 * FAMILIES;
        if pairs.len() < need {
            attempts.push(ShellAttempt {
                lambda0,
                pairs: pairs.len(),
                outcome: format!("fewer than {need} direction pairs"),
            });
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ lambda0 as u64);
        let fams = match partition_shell(&pairs, opts, &mut rng) {
            Ok(f) => f,
            Err(reason) => {
                attempts.push(ShellAttempt {
                    lambda0,
                    pairs: pairs.len(),
                    outcome: reason,
                });
                continue;
            }
        };
        let mut built = Vec::with_capacity(FAMILIES);
        for f in &fams {
            match build_family(f, opts, &mut rng) {
                Some(b) => built.push(b),
                None => break,
            }
        }
        if built.len() < FAMILIES {
            attempts.push(ShellAttempt {
                lambda0,
                pairs: pairs.len(),
                outcome: "no valid chart for some family".into(),
            });
            continue;
        }
        match DirectionSystem::new(r2, built) {
            Ok(s) => return Ok(s),
            Err(e) => attempts.push(ShellAttempt {
                lambda0,
                pairs: pairs.len(),
                outcome: e.to_string(),
            }),
        }
    }
    Err(GeometryError::Infeasible { bound, attempts })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_is_regular() {
        let s = regular_simplex();
        for i in 0..6 {
            let n: f64 = s[i].iter().map(|x| x * x).sum();
            assert!((n - 1.0).abs() < 1e-12);
            for j in 0..i {
                let d: f64 = (0..5).map(|a| s[i][a] * s[j][a]).sum();
                assert!((d + 0.2).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn projection_has_trace_two() {
        let m = projection([8, 4, 1]);
        assert!((linalg::trace(&m) - 2.0).abs() < 1e-15);
    }
}
