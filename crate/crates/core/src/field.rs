//! Band-limited periodic fields stored as compact spectra per time sample.
//!
//! Every field owns a [`Grid3`] and a [`TimeGrid`].  A scalar slice is the
//! vector of retained coefficients with `m₃ ≥ 0`; coefficients with `m₃ < 0`
//! are implied by Hermitian symmetry.  Vector and matrix fields are fixed
//! arrays of scalar components (matrices row-major).

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::fft;
use crate::grid::{Grid3, GridError, TimeGrid};

/// Volume `(2π)³` of the torus.
pub fn torus_volume() -> f64 {
    (2.0 * std::f64::consts::PI).powi(3)
}

/// Errors raised by field construction and arithmetic.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("grids differ: {0:?} vs {1:?}")]
    GridMismatch(Grid3, Grid3),
    #[error("time grids differ")]
    TimeMismatch,
    #[error("expected {expected} coefficients per slice, got {got}")]
    BadLength { expected: usize, got: usize },
    #[error("expected {expected} time slices, got {got}")]
    BadSlices { expected: usize, got: usize },
    #[error("time derivative needs a uniform grid with at least 5 samples, got {0}")]
    TooFewSamples(usize),
    #[error("resampling changes the stride from {0} to {1}")]
    StrideChange(u64, u64),
    #[error("cannot stack an empty list of fields")]
    EmptyStack,
    #[error("mode {0:?} is not retained")]
    NotRetained([i64; 3]),
    #[error(transparent)]
    Grid(#[from] GridError),
}

pub(crate) fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Scalar field: one compact spectrum per time sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid3,
    times: TimeGrid,
    slices: Vec<Vec<Complex64>>,
}

impl ScalarField {
    pub fn zeros(grid: Grid3, times: TimeGrid) -> Self {
        let slices = vec![vec![zero(); grid.modes()]; times.len()];
        Self { grid, times, slices }
    }

    pub fn from_slices(grid: Grid3, times: TimeGrid, slices: Vec<Vec<Complex64>>) -> Result<Self, FieldError> {
        if slices.len() != times.len() {
            return Err(FieldError::BadSlices {
                expected: times.len(),
                got: slices.len(),
            });
        }
        for s in &slices {
            if s.len() != grid.modes() {
                return Err(FieldError::BadLength {
                    expected: grid.modes(),
                    got: s.len(),
                });
            }
        }
        Ok(Self { grid, times, slices })
    }

    /// Sample `f(t, y)` on the collocation grid and keep the retained modes.
    /// `y` is the grid coordinate; the represented physical point is `y/s`.
    pub fn from_fn(grid: Grid3, times: TimeGrid, f: impl Fn(f64, [f64; 3]) -> f64 + Sync) -> Self {
        let n = grid.n();
        let h = 2.0 * std::f64::consts::PI / n as f64;
        let plan = fft::plan(n);
        let slices = times
            .times()
            .par_iter()
            .map(|&t| {
                let mut vals = vec![0.0; grid.points()];
                for a in 0..n {
                    for b in 0..n {
                        for c in 0..n {
                            vals[(a * n + b) * n + c] = f(t, [a as f64 * h, b as f64 * h, c as f64 * h]);
                        }
                    }
                }
                plan.to_spectral(&grid, &vals)
            })
            .collect();
        Self { grid, times, slices }
    }

    /// Field from physical samples on the `n³` grid, one vector per time.
    pub fn from_physical(grid: Grid3, times: TimeGrid, values: &[Vec<f64>]) -> Result<Self, FieldError> {
        if values.len() != times.len() {
            return Err(FieldError::BadSlices {
                expected: times.len(),
                got: values.len(),
            });
        }
        let plan = fft::plan(grid.n());
        let slices = values
            .par_iter()
            .map(|v| {
                if v.len() != grid.points() {
                    Err(FieldError::BadLength {
                        expected: grid.points(),
                        got: v.len(),
                    })
                } else {
                    Ok(plan.to_spectral(&grid, v))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { grid, times, slices })
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn times(&self) -> &TimeGrid {
        &self.times
    }

    pub fn samples(&self) -> usize {
        self.slices.len()
    }

    pub fn slice(&self, t: usize) -> &[Complex64] {
        &self.slices[t]
    }

    pub fn slice_mut(&mut self, t: usize) -> &mut [Complex64] {
        &mut self.slices[t]
    }

    pub fn slices(&self) -> &[Vec<Complex64>] {
        &self.slices
    }

    pub fn into_slices(self) -> Vec<Vec<Complex64>> {
        self.slices
    }

    /// Coefficient of stored mode `m` (either sign of `m₃`).
    pub fn coeff(&self, t: usize, m: [i64; 3]) -> Option<Complex64> {
        if m[2] >= 0 {
            self.grid.index(m).map(|i| self.slices[t][i])
        } else {
            self.grid.index([-m[0], -m[1], -m[2]]).map(|i| self.slices[t][i].conj())
        }
    }

    /// Set the coefficient of mode `m` and its Hermitian partner.
    pub fn set_mode(&mut self, t: usize, m: [i64; 3], value: Complex64) -> Result<(), FieldError> {
        let (m, value) = if m[2] < 0 {
            ([-m[0], -m[1], -m[2]], value.conj())
        } else {
            (m, value)
        };
        let i = self.grid.index(m).ok_or(FieldError::NotRetained(m))?;
        if m[2] == 0 {
            let j = self.grid.index([-m[0], -m[1], 0]).expect("box is symmetric");
            if i == j {
                self.slices[t][i] = Complex64::new(value.re, 0.0);
                return Ok(());
            }
            self.slices[t][j] = value.conj();
        }
        self.slices[t][i] = value;
        Ok(())
    }

    /// Add to the coefficient of mode `m` and its Hermitian partner.
    pub fn add_mode(&mut self, t: usize, m: [i64; 3], value: Complex64) -> Result<(), FieldError> {
        let cur = self.coeff(t, m).ok_or(FieldError::NotRetained(m))?;
        self.set_mode(t, m, cur + value)
    }

    /// Grid values of slice `t`.
    pub fn to_physical(&self, t: usize) -> Vec<f64> {
        fft::plan(self.grid.n()).to_physical(&self.grid, &self.slices[t])
    }

    /// Values of slice `t` on a finer `n_out³` grid.
    pub fn to_physical_on(&self, t: usize, n_out: usize) -> Vec<f64> {
        fft::plan(n_out).to_physical(&self.grid, &self.slices[t])
    }

    pub fn mean(&self, t: usize) -> f64 {
        self.slices[t][self.grid.index([0, 0, 0]).unwrap()].re
    }

    /// `∫ f²` over the torus, by Parseval.
    pub fn l2_squared(&self, t: usize) -> f64 {
        let s: f64 = self
            .grid
            .iter_modes()
            .map(|(i, m)| self.grid.parseval_weight(m) * self.slices[t][i].norm_sqr())
            .sum();
        s * torus_volume()
    }

    /// Largest absolute grid value over all slices.
    pub fn max_abs(&self) -> f64 {
        (0..self.samples())
            .map(|t| self.to_physical(t).iter().fold(0.0f64, |a, v| a.max(v.abs())))
            .fold(0.0, f64::max)
    }

    /// Largest coefficient modulus over all slices.
    pub fn max_coeff(&self) -> f64 {
        self.slices
            .iter()
            .flat_map(|s| s.iter())
            .fold(0.0f64, |a, c| a.max(c.norm()))
    }

    pub(crate) fn check_compatible(&self, other: &ScalarField) -> Result<(), FieldError> {
        if self.grid != other.grid {
            return Err(FieldError::GridMismatch(self.grid, other.grid));
        }
        if self.times != other.times {
            return Err(FieldError::TimeMismatch);
        }
        Ok(())
    }

    /// Coefficientwise map of two compatible fields.
    pub fn zip_with(
        &self,
        other: &ScalarField,
        f: impl Fn(Complex64, Complex64) -> Complex64 + Sync,
    ) -> Result<ScalarField, FieldError> {
        self.check_compatible(other)?;
        let slices = self
            .slices
            .par_iter()
            .zip(&other.slices)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| f(*x, *y)).collect())
            .collect();
        Ok(Self {
            grid: self.grid,
            times: self.times.clone(),
            slices,
        })
    }

    pub fn add(&self, other: &ScalarField) -> Result<ScalarField, FieldError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> Result<ScalarField, FieldError> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> ScalarField {
        self.map_coeffs(|_, c| c * s)
    }

    /// Map every coefficient given its physical wavevector.
    pub fn map_coeffs(&self, f: impl Fn([f64; 3], Complex64) -> Complex64 + Sync) -> ScalarField {
        let grid = self.grid;
        let slices = self
            .slices
            .par_iter()
            .map(|s| {
                s.iter()
                    .enumerate()
                    .map(|(i, c)| f(grid.wavevector(grid.mode(i)), *c))
                    .collect()
            })
            .collect();
        Self {
            grid,
            times: self.times.clone(),
            slices,
        }
    }

    /// Scale each time slice by its own factor.
    pub fn scale_in_time(&self, factors: &[f64]) -> ScalarField {
        let slices = self
            .slices
            .iter()
            .zip(factors)
            .map(|(s, f)| s.iter().map(|c| c * f).collect())
            .collect();
        Self {
            grid: self.grid,
            times: self.times.clone(),
            slices,
        }
    }

    /// Field on a single time sample.
    pub fn at_time(&self, t: usize) -> ScalarField {
        Self {
            grid: self.grid,
            times: self.times.slice(t),
            slices: vec![self.slices[t].clone()],
        }
    }

    /// Reassemble single-sample fields onto a time grid.
    pub fn stack(times: TimeGrid, parts: Vec<ScalarField>) -> Result<ScalarField, FieldError> {
        let grid = parts.first().ok_or(FieldError::EmptyStack)?.grid;
        if parts.len() != times.len() {
            return Err(FieldError::BadSlices {
                expected: times.len(),
                got: parts.len(),
            });
        }
        let mut slices = Vec::with_capacity(parts.len());
        for p in parts {
            if p.grid != grid {
                return Err(FieldError::GridMismatch(grid, p.grid));
            }
            slices.extend(p.slices);
        }
        Self::from_slices(grid, times, slices)
    }

    /// Exact change of grid size: zero-pad or truncate the retained box.
    pub fn resample(&self, grid: Grid3) -> Result<ScalarField, FieldError> {
        if grid.stride() != self.grid.stride() {
            return Err(FieldError::StrideChange(self.grid.stride(), grid.stride()));
        }
        let slices = self
            .slices
            .iter()
            .map(|s| {
                let mut out = vec![zero(); grid.modes()];
                for (i, m) in grid.iter_modes() {
                    if let Some(j) = self.grid.index(m) {
                        out[i] = s[j];
                    }
                }
                out
            })
            .collect();
        Ok(Self {
            grid,
            times: self.times.clone(),
            slices,
        })
    }

    /// Replace the time grid, keeping coefficients (sample counts must match).
    pub fn with_times(mut self, times: TimeGrid) -> Result<ScalarField, FieldError> {
        if times.len() != self.slices.len() {
            return Err(FieldError::BadSlices {
                expected: self.slices.len(),
                got: times.len(),
            });
        }
        self.times = times;
        Ok(self)
    }
}

/// Vector field with three scalar components.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    comps: [ScalarField; 3],
    solenoidal: bool,
}

impl VectorField {
    pub fn new(comps: [ScalarField; 3]) -> Result<Self, FieldError> {
        comps[0].check_compatible(&comps[1])?;
        comps[0].check_compatible(&comps[2])?;
        Ok(Self {
            comps,
            solenoidal: false,
        })
    }

    pub fn zeros(grid: Grid3, times: TimeGrid) -> Self {
        let z = ScalarField::zeros(grid, times);
        Self {
            comps: [z.clone(), z.clone(), z],
            solenoidal: true,
        }
    }

    /// Declared solenoidal flag (set by producers that guarantee it).
    pub fn is_solenoidal(&self) -> bool {
        self.solenoidal
    }

    pub fn with_solenoidal(mut self, flag: bool) -> Self {
        self.solenoidal = flag;
        self
    }

    pub fn comp(&self, i: usize) -> &ScalarField {
        &self.comps[i]
    }

    pub fn comp_mut(&mut self, i: usize) -> &mut ScalarField {
        &mut self.comps[i]
    }

    pub fn comps(&self) -> &[ScalarField; 3] {
        &self.comps
    }

    pub fn into_comps(self) -> [ScalarField; 3] {
        self.comps
    }

    pub fn grid(&self) -> &Grid3 {
        self.comps[0].grid()
    }

    pub fn times(&self) -> &TimeGrid {
        self.comps[0].times()
    }

    pub fn samples(&self) -> usize {
        self.comps[0].samples()
    }

    fn zip(
        &self,
        other: &VectorField,
        f: impl Fn(&ScalarField, &ScalarField) -> Result<ScalarField, FieldError>,
    ) -> Result<VectorField, FieldError> {
        Ok(Self {
            comps: [
                f(&self.comps[0], &other.comps[0])?,
                f(&self.comps[1], &other.comps[1])?,
                f(&self.comps[2], &other.comps[2])?,
            ],
            solenoidal: self.solenoidal && other.solenoidal,
        })
    }

    pub fn add(&self, other: &VectorField) -> Result<VectorField, FieldError> {
        self.zip(other, ScalarField::add)
    }

    pub fn sub(&self, other: &VectorField) -> Result<VectorField, FieldError> {
        self.zip(other, ScalarField::sub)
    }

    pub fn scale(&self, s: f64) -> VectorField {
        Self {
            comps: self.comps.clone().map(|c| c.scale(s)),
            solenoidal: self.solenoidal,
        }
    }

    pub fn map(&self, f: impl Fn(&ScalarField) -> ScalarField) -> VectorField {
        Self {
            comps: [f(&self.comps[0]), f(&self.comps[1]), f(&self.comps[2])],
            solenoidal: false,
        }
    }

    pub fn at_time(&self, t: usize) -> VectorField {
        Self {
            comps: [
                self.comps[0].at_time(t),
                self.comps[1].at_time(t),
                self.comps[2].at_time(t),
            ],
            solenoidal: self.solenoidal,
        }
    }

    pub fn stack(times: TimeGrid, parts: Vec<VectorField>) -> Result<VectorField, FieldError> {
        let solenoidal = parts.iter().all(|p| p.solenoidal);
        let mut cs: [Vec<ScalarField>; 3] = Default::default();
        for p in parts {
            for (i, c) in p.comps.into_iter().enumerate() {
                cs[i].push(c);
            }
        }
        let [a, b, c] = cs;
        Ok(Self {
            comps: [
                ScalarField::stack(times.clone(), a)?,
                ScalarField::stack(times.clone(), b)?,
                ScalarField::stack(times, c)?,
            ],
            solenoidal,
        })
    }

    pub fn resample(&self, grid: Grid3) -> Result<VectorField, FieldError> {
        Ok(Self {
            comps: [
                self.comps[0].resample(grid)?,
                self.comps[1].resample(grid)?,
                self.comps[2].resample(grid)?,
            ],
            solenoidal: self.solenoidal,
        })
    }

    pub fn with_times(self, times: TimeGrid) -> Result<VectorField, FieldError> {
        let sol = self.solenoidal;
        let [a, b, c] = self.comps;
        Ok(Self {
            comps: [
                a.with_times(times.clone())?,
                b.with_times(times.clone())?,
                c.with_times(times)?,
            ],
            solenoidal: sol,
        })
    }

    /// Grid values of all components at slice `t`.
    pub fn to_physical(&self, t: usize) -> [Vec<f64>; 3] {
        [
            self.comps[0].to_physical(t),
            self.comps[1].to_physical(t),
            self.comps[2].to_physical(t),
        ]
    }

    /// `∫ |v|²` at slice `t`.
    pub fn l2_squared(&self, t: usize) -> f64 {
        self.comps.iter().map(|c| c.l2_squared(t)).sum()
    }

    /// Largest pointwise Euclidean magnitude over all slices.
    pub fn max_magnitude(&self) -> f64 {
        (0..self.samples())
            .map(|t| {
                let [a, b, c] = self.to_physical(t);
                a.iter()
                    .zip(&b)
                    .zip(&c)
                    .map(|((x, y), z)| (x * x + y * y + z * z).sqrt())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    pub fn mean(&self, t: usize) -> [f64; 3] {
        [self.comps[0].mean(t), self.comps[1].mean(t), self.comps[2].mean(t)]
    }

    pub fn max_coeff(&self) -> f64 {
        self.comps.iter().map(|c| c.max_coeff()).fold(0.0, f64::max)
    }
}

/// Matrix field with nine scalar components in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixField {
    comps: Vec<ScalarField>,
    symmetric: bool,
    trace_free: bool,
}

impl MatrixField {
    pub fn new(comps: Vec<ScalarField>) -> Result<Self, FieldError> {
        if comps.len() != 9 {
            return Err(FieldError::BadLength {
                expected: 9,
                got: comps.len(),
            });
        }
        for c in &comps[1..] {
            comps[0].check_compatible(c)?;
        }
        Ok(Self {
            comps,
            symmetric: false,
            trace_free: false,
        })
    }

    pub fn zeros(grid: Grid3, times: TimeGrid) -> Self {
        let z = ScalarField::zeros(grid, times);
        Self {
            comps: vec![z; 9],
            symmetric: true,
            trace_free: true,
        }
    }

    pub fn with_flags(mut self, symmetric: bool, trace_free: bool) -> Self {
        self.symmetric = symmetric;
        self.trace_free = trace_free;
        self
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn is_trace_free(&self) -> bool {
        self.trace_free
    }

    pub fn comp(&self, i: usize, j: usize) -> &ScalarField {
        &self.comps[3 * i + j]
    }

    pub fn comps(&self) -> &[ScalarField] {
        &self.comps
    }

    pub fn into_comps(self) -> Vec<ScalarField> {
        self.comps
    }

    pub fn grid(&self) -> &Grid3 {
        self.comps[0].grid()
    }

    pub fn times(&self) -> &TimeGrid {
        self.comps[0].times()
    }

    pub fn samples(&self) -> usize {
        self.comps[0].samples()
    }

    pub fn add(&self, other: &MatrixField) -> Result<MatrixField, FieldError> {
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            comps,
            symmetric: self.symmetric && other.symmetric,
            trace_free: self.trace_free && other.trace_free,
        })
    }

    pub fn sub(&self, other: &MatrixField) -> Result<MatrixField, FieldError> {
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            comps,
            symmetric: self.symmetric && other.symmetric,
            trace_free: self.trace_free && other.trace_free,
        })
    }

    pub fn scale(&self, s: f64) -> MatrixField {
        Self {
            comps: self.comps.iter().map(|c| c.scale(s)).collect(),
            symmetric: self.symmetric,
            trace_free: self.trace_free,
        }
    }

    /// Add `s·Id·f` for a scalar field `f`.
    pub fn add_isotropic(&self, f: &ScalarField, s: f64) -> Result<MatrixField, FieldError> {
        let mut comps = self.comps.clone();
        for i in 0..3 {
            comps[4 * i] = comps[4 * i].add(&f.scale(s))?;
        }
        Ok(Self {
            comps,
            symmetric: self.symmetric,
            trace_free: false,
        })
    }

    pub fn transpose(&self) -> MatrixField {
        let mut comps = Vec::with_capacity(9);
        for i in 0..3 {
            for j in 0..3 {
                comps.push(self.comps[3 * j + i].clone());
            }
        }
        Self {
            comps,
            symmetric: self.symmetric,
            trace_free: self.trace_free,
        }
    }

    pub fn trace(&self) -> Result<ScalarField, FieldError> {
        self.comps[0].add(&self.comps[4])?.add(&self.comps[8])
    }

    pub fn at_time(&self, t: usize) -> MatrixField {
        Self {
            comps: self.comps.iter().map(|c| c.at_time(t)).collect(),
            symmetric: self.symmetric,
            trace_free: self.trace_free,
        }
    }

    pub fn stack(times: TimeGrid, parts: Vec<MatrixField>) -> Result<MatrixField, FieldError> {
        let symmetric = parts.iter().all(|p| p.symmetric);
        let trace_free = parts.iter().all(|p| p.trace_free);
        let mut cs: Vec<Vec<ScalarField>> = vec![Vec::new(); 9];
        for p in parts {
            for (i, c) in p.comps.into_iter().enumerate() {
                cs[i].push(c);
            }
        }
        let comps = cs
            .into_iter()
            .map(|c| ScalarField::stack(times.clone(), c))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            comps,
            symmetric,
            trace_free,
        })
    }

    pub fn resample(&self, grid: Grid3) -> Result<MatrixField, FieldError> {
        Ok(Self {
            comps: self
                .comps
                .iter()
                .map(|c| c.resample(grid))
                .collect::<Result<Vec<_>, _>>()?,
            symmetric: self.symmetric,
            trace_free: self.trace_free,
        })
    }

    pub fn with_times(self, times: TimeGrid) -> Result<MatrixField, FieldError> {
        let (s, tf) = (self.symmetric, self.trace_free);
        let comps = self
            .comps
            .into_iter()
            .map(|c| c.with_times(times.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            comps,
            symmetric: s,
            trace_free: tf,
        })
    }

    /// Grid values of all nine components at slice `t`.
    pub fn to_physical(&self, t: usize) -> Vec<Vec<f64>> {
        if self.symmetric {
            let mut out: Vec<Vec<f64>> = vec![Vec::new(); 9];
            for i in 0..3 {
                for j in i..3 {
                    let v = self.comps[3 * i + j].to_physical(t);
                    if i != j {
                        out[3 * j + i] = v.clone();
                    }
                    out[3 * i + j] = v;
                }
            }
            out
        } else {
            self.comps.iter().map(|c| c.to_physical(t)).collect()
        }
    }

    /// Largest pointwise operator norm over all slices.
    pub fn max_operator_norm(&self) -> f64 {
        (0..self.samples())
            .map(|t| {
                let p = self.to_physical(t);
                (0..p[0].len())
                    .map(|x| {
                        let m = std::array::from_fn(|i| p[i][x]);
                        crate::linalg::operator_norm(&m)
                    })
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    pub fn max_coeff(&self) -> f64 {
        self.comps.iter().map(|c| c.max_coeff()).fold(0.0, f64::max)
    }
}
