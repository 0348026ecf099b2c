//! Three-dimensional real transforms between compact spectra and grid values.
//!
//! Spectra use the normalization `f(x) = Σ_m f̂_m e^{i m·y}` with `y` the grid
//! coordinate, so the zero mode is the mean.  Only retained modes with
//! `m₃ ≥ 0` are stored; transforms scatter them into a half-spectrum buffer
//! and skip the columns that are known to vanish.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};

use crate::grid::Grid3;

/// Transform plans for one grid size.
pub struct Plan3 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
}

static PLANS: OnceLock<Mutex<HashMap<usize, Arc<Plan3>>>> = OnceLock::new();

/// Shared plan for size `n`, created on first use.
pub fn plan(n: usize) -> Arc<Plan3> {
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("plan cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut cp = FftPlanner::new();
            let mut rp = RealFftPlanner::<f64>::new();
            Arc::new(Plan3 {
                n,
                forward: cp.plan_fft_forward(n),
                inverse: cp.plan_fft_inverse(n),
                r2c: rp.plan_fft_forward(n),
                c2r: rp.plan_fft_inverse(n),
            })
        })
        .clone()
}

fn wrap(m: i64, n: usize) -> usize {
    m.rem_euclid(n as i64) as usize
}

impl Plan3 {
    pub fn n(&self) -> usize {
        self.n
    }

    fn half(&self) -> usize {
        self.n / 2 + 1
    }

    /// Evaluate a compact spectrum on this plan's `n³` grid.
    ///
    /// The plan size may exceed the grid size (zero padding); it must be large
    /// enough to hold every retained mode without wrap-around.
    pub fn to_physical(&self, grid: &Grid3, coeffs: &[Complex64]) -> Vec<f64> {
        let n = self.n;
        let h = self.half();
        let k = grid.cutoff();
        assert!(2 * k < n, "plan size {n} cannot hold cutoff {k}");
        assert_eq!(coeffs.len(), grid.modes());
        let mut buf = vec![Complex64::new(0.0, 0.0); n * n * h];
        let at = |a: usize, b: usize, c: usize| (a * n + b) * h + c;
        for (i, m) in grid.iter_modes() {
            buf[at(wrap(m[0], n), wrap(m[1], n), m[2] as usize)] = coeffs[i];
        }
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.inverse.get_inplace_scratch_len()];
        // Axis 1 for retained (m₂, m₃).
        for m2 in -(k as i64)..=(k as i64) {
            let b = wrap(m2, n);
            for c in 0..=k {
                for (a, v) in line.iter_mut().enumerate() {
                    *v = buf[at(a, b, c)];
                }
                self.inverse.process_with_scratch(&mut line, &mut scratch);
                for (a, v) in line.iter().enumerate() {
                    buf[at(a, b, c)] = *v;
                }
            }
        }
        // Axis 2 for every x₁ and retained m₃.
        for a in 0..n {
            for c in 0..=k {
                for (b, v) in line.iter_mut().enumerate() {
                    *v = buf[at(a, b, c)];
                }
                self.inverse.process_with_scratch(&mut line, &mut scratch);
                for (b, v) in line.iter().enumerate() {
                    buf[at(a, b, c)] = *v;
                }
            }
        }
        // Axis 3, complex to real.
        let mut out = vec![0.0; n * n * n];
        let mut rscratch = self.c2r.make_scratch_vec();
        for a in 0..n {
            for b in 0..n {
                let start = at(a, b, 0);
                let src = &mut buf[start..start + h];
                src[0].im = 0.0;
                src[h - 1].im = 0.0;
                let dst = &mut out[(a * n + b) * n..(a * n + b + 1) * n];
                self.c2r
                    .process_with_scratch(src, dst, &mut rscratch)
                    .expect("buffer lengths match the plan");
            }
        }
        out
    }

    /// Project grid values onto the retained modes of `grid`.
    pub fn to_spectral(&self, grid: &Grid3, values: &[f64]) -> Vec<Complex64> {
        let n = self.n;
        let h = self.half();
        let k = grid.cutoff();
        assert!(2 * k < n, "plan size {n} cannot hold cutoff {k}");
        assert_eq!(values.len(), n * n * n);
        let mut buf = vec![Complex64::new(0.0, 0.0); n * n * h];
        let at = |a: usize, b: usize, c: usize| (a * n + b) * h + c;
        let mut input = self.r2c.make_input_vec();
        let mut rscratch = self.r2c.make_scratch_vec();
        for a in 0..n {
            for b in 0..n {
                let row = (a * n + b) * n;
                input.copy_from_slice(&values[row..row + n]);
                let start = at(a, b, 0);
                self.r2c
                    .process_with_scratch(&mut input, &mut buf[start..start + h], &mut rscratch)
                    .expect("buffer lengths match the plan");
            }
        }
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.forward.get_inplace_scratch_len()];
        for a in 0..n {
            for c in 0..=k {
                for (b, v) in line.iter_mut().enumerate() {
                    *v = buf[at(a, b, c)];
                }
                self.forward.process_with_scratch(&mut line, &mut scratch);
                for (b, v) in line.iter().enumerate() {
                    buf[at(a, b, c)] = *v;
                }
            }
        }
        for m2 in -(k as i64)..=(k as i64) {
            let b = wrap(m2, n);
            for c in 0..=k {
                for (a, v) in line.iter_mut().enumerate() {
                    *v = buf[at(a, b, c)];
                }
                self.forward.process_with_scratch(&mut line, &mut scratch);
                for (a, v) in line.iter().enumerate() {
                    buf[at(a, b, c)] = *v;
                }
            }
        }
        let scale = 1.0 / (n * n * n) as f64;
        let mut out = vec![Complex64::new(0.0, 0.0); grid.modes()];
        for (i, m) in grid.iter_modes() {
            let mut c = buf[at(wrap(m[0], n), wrap(m[1], n), m[2] as usize)] * scale;
            if m == [0, 0, 0] {
                c.im = 0.0;
            }
            out[i] = c;
        }
        enforce_hermitian_plane(grid, &mut out);
        out
    }
}

/// Make the `m₃ = 0` plane exactly Hermitian: `c(−m) = conj(c(m))`.
pub fn enforce_hermitian_plane(grid: &Grid3, coeffs: &mut [Complex64]) {
    let k = grid.cutoff() as i64;
    for m1 in -k..=k {
        for m2 in -k..=k {
            if (m1, m2) <= (0, 0) {
                continue;
            }
            let i = grid.index([m1, m2, 0]).unwrap();
            let j = grid.index([-m1, -m2, 0]).unwrap();
            let avg = 0.5 * (coeffs[i] + coeffs[j].conj());
            coeffs[i] = avg;
            coeffs[j] = avg.conj();
        }
    }
    if let Some(i) = grid.index([0, 0, 0]) {
        coeffs[i].im = 0.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn single_mode_round_trip() {
        let g = Grid3::new(12, 1).unwrap();
        let mut c = vec![Complex64::new(0.0, 0.0); g.modes()];
        let z = Complex64::new(0.3, -0.7);
        c[g.index([1, -2, 3]).unwrap()] = z;
        let p = plan(12);
        let x = p.to_physical(&g, &c);
        let n = 12;
        for a in 0..n {
            for b in 0..n {
                for d in 0..n {
                    let y = [a, b, d].map(|q| 2.0 * PI * q as f64 / n as f64);
                    let ph = y[0] - 2.0 * y[1] + 3.0 * y[2];
                    let expect = 2.0 * (z * Complex64::from_polar(1.0, ph)).re;
                    assert!((x[(a * n + b) * n + d] - expect).abs() < 1e-12);
                }
            }
        }
        let back = p.to_spectral(&g, &x);
        for (u, v) in back.iter().zip(&c) {
            assert!((u - v).norm() < 1e-13);
        }
    }

    #[test]
    fn padded_evaluation_matches() {
        let g = Grid3::new(8, 1).unwrap();
        let mut c = vec![Complex64::new(0.0, 0.0); g.modes()];
        c[g.index([0, 0, 0]).unwrap()] = Complex64::new(1.5, 0.0);
        c[g.index([2, 0, 1]).unwrap()] = Complex64::new(0.0, 0.5);
        let coarse = plan(8).to_physical(&g, &c);
        let fine = plan(16).to_physical(&g, &c);
        for a in 0..8 {
            for b in 0..8 {
                for d in 0..8 {
                    let u = coarse[(a * 8 + b) * 8 + d];
                    let v = fine[((2 * a) * 16 + 2 * b) * 16 + 2 * d];
                    assert!((u - v).abs() < 1e-13);
                }
            }
        }
    }
}
