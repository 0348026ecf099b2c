//! Spatial and temporal sampling grids.
//!
//! A [`Grid3`] describes a cubic collocation grid of `n` points per axis on
//! the torus `[0, 2π)³` together with the set of retained Fourier modes.  The
//! retained set is the box `|m_i| ≤ K` where `K` is the largest integer
//! strictly below `f·n/2` for the dealiasing fraction `f`; with `f = 2/3`
//! the product of two retained fields is computed without aliasing.
//!
//! Fields may carry an integer wavenumber *stride* `s`: a field stored on the
//! grid represents `f(x) = F(s·x)`, so stored mode `m` is the physical
//! wavevector `s·m`.  This lets a stage at frequency `λ = s·L` run on a grid
//! sized for `L` rather than `λ`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised when constructing grids.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid size must be even and at least 4, got {0}")]
    BadSize(usize),
    #[error("wavenumber stride must be positive")]
    BadStride,
    #[error("dealias fraction {num}/{den} must lie in (0, 1]")]
    BadDealias { num: u32, den: u32 },
    #[error("time grid needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("instant {0} is outside [0, 1]")]
    BadInstant(f64),
}

/// Dealiasing fraction stored as an exact ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dealias {
    pub num: u32,
    pub den: u32,
}

impl Dealias {
    pub const TWO_THIRDS: Dealias = Dealias { num: 2, den: 3 };

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl Default for Dealias {
    fn default() -> Self {
        Self::TWO_THIRDS
    }
}

/// Cubic collocation grid with retained-mode box and wavenumber stride.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid3 {
    n: usize,
    stride: u64,
    dealias: Dealias,
    cutoff: usize,
}

impl Grid3 {
    /// Grid with the default 2/3 dealiasing.
    pub fn new(n: usize, stride: u64) -> Result<Self, GridError> {
        Self::with_dealias(n, stride, Dealias::TWO_THIRDS)
    }

    pub fn with_dealias(n: usize, stride: u64, dealias: Dealias) -> Result<Self, GridError> {
        if n < 4 || n % 2 != 0 {
            return Err(GridError::BadSize(n));
        }
        if stride == 0 {
            return Err(GridError::BadStride);
        }
        if dealias.num == 0 || dealias.den == 0 || dealias.num > dealias.den {
            return Err(GridError::BadDealias {
                num: dealias.num,
                den: dealias.den,
            });
        }
        // Largest K with K < f n / 2, i.e. 2 K den < num n.
        let num = dealias.num as usize * n;
        let den = 2 * dealias.den as usize;
        let cutoff = (num - 1) / den;
        Ok(Self {
            n,
            stride,
            dealias,
            cutoff,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn stride(&self) -> u64 {
        self.stride
    }

    pub fn dealias(&self) -> Dealias {
        self.dealias
    }

    /// Largest retained stored wavenumber per axis.
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Same grid with a different number of points (and hence cutoff).
    pub fn resized(&self, n: usize) -> Result<Self, GridError> {
        Self::with_dealias(n, self.stride, self.dealias)
    }

    pub fn with_stride(&self, stride: u64) -> Result<Self, GridError> {
        Self::with_dealias(self.n, stride, self.dealias)
    }

    fn side(&self) -> usize {
        2 * self.cutoff + 1
    }

    /// Number of stored complex coefficients per scalar slice.
    pub fn modes(&self) -> usize {
        self.side() * self.side() * (self.cutoff + 1)
    }

    /// Number of physical samples per slice.
    pub fn points(&self) -> usize {
        self.n * self.n * self.n
    }

    /// Whether stored mode `m` (with any sign of `m₃`) is retained.
    pub fn retains(&self, m: [i64; 3]) -> bool {
        let k = self.cutoff as i64;
        m.iter().all(|c| c.abs() <= k)
    }

    /// Storage index of a retained mode with `m₃ ≥ 0`.
    pub fn index(&self, m: [i64; 3]) -> Option<usize> {
        let k = self.cutoff as i64;
        if !self.retains(m) || m[2] < 0 {
            return None;
        }
        let s = self.side();
        Some(((m[0] + k) as usize * s + (m[1] + k) as usize) * (self.cutoff + 1) + m[2] as usize)
    }

    /// Stored mode for a storage index.
    pub fn mode(&self, idx: usize) -> [i64; 3] {
        let h = self.cutoff + 1;
        let s = self.side();
        let k = self.cutoff as i64;
        let m3 = idx % h;
        let r = idx / h;
        let m2 = r % s;
        let m1 = r / s;
        [m1 as i64 - k, m2 as i64 - k, m3 as i64]
    }

    /// Physical wavevector of a stored mode.
    pub fn wavevector(&self, m: [i64; 3]) -> [f64; 3] {
        let s = self.stride as f64;
        [m[0] as f64 * s, m[1] as f64 * s, m[2] as f64 * s]
    }

    /// Iterator over `(index, stored mode)` for all stored coefficients.
    pub fn iter_modes(&self) -> impl Iterator<Item = (usize, [i64; 3])> + '_ {
        (0..self.modes()).map(move |i| (i, self.mode(i)))
    }

    /// Weight of a stored coefficient in Parseval sums: modes with `m₃ > 0`
    /// stand for themselves and their conjugate partner.
    pub fn parseval_weight(&self, m: [i64; 3]) -> f64 {
        if m[2] > 0 {
            2.0
        } else {
            1.0
        }
    }

    /// Grid spacing in physical (unstrided) coordinates.
    pub fn spacing(&self) -> f64 {
        2.0 * std::f64::consts::PI / (self.n as f64 * self.stride as f64)
    }

    /// Effective resolution `N = n·s` of the represented physical field.
    pub fn effective_n(&self) -> u64 {
        self.n as u64 * self.stride
    }
}

/// Smallest even size `≥ min` whose prime factors are all at most 7.
pub fn smooth_size(min: usize) -> usize {
    let mut n = min.max(4);
    if n % 2 == 1 {
        n += 1;
    }
    loop {
        let mut r = n;
        for p in [2, 3, 5, 7] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return n;
        }
        n += 2;
    }
}

/// Smallest smooth grid size whose 2/3 cutoff retains wavenumber `k`.
pub fn size_retaining(k: usize, factor: usize) -> usize {
    let mut n = smooth_size(factor * k);
    loop {
        let g = Grid3::new(n, 1).expect("smooth sizes are valid");
        if g.cutoff() >= k {
            return n;
        }
        n = smooth_size(n + 2);
    }
}

/// Kind of temporal sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TimeKind {
    /// `S ≥ 2` equispaced samples covering `[0, 1]`.
    Uniform,
    /// A single sample at a fixed instant.
    Instant,
}

/// Temporal sample set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    kind: TimeKind,
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn uniform(samples: usize) -> Result<Self, GridError> {
        if samples < 2 {
            return Err(GridError::TooFewSamples(samples));
        }
        let h = 1.0 / (samples - 1) as f64;
        let times = (0..samples)
            .map(|i| if i + 1 == samples { 1.0 } else { i as f64 * h })
            .collect();
        Ok(Self {
            kind: TimeKind::Uniform,
            times,
        })
    }

    pub fn instant(t: f64) -> Result<Self, GridError> {
        if !(0.0..=1.0).contains(&t) {
            return Err(GridError::BadInstant(t));
        }
        Ok(Self {
            kind: TimeKind::Instant,
            times: vec![t],
        })
    }

    pub fn kind(&self) -> TimeKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn time(&self, i: usize) -> f64 {
        self.times[i]
    }

    /// Sample spacing for uniform grids.
    pub fn spacing(&self) -> Option<f64> {
        match self.kind {
            TimeKind::Uniform => Some(1.0 / (self.times.len() - 1) as f64),
            TimeKind::Instant => None,
        }
    }

    /// Single-instant grid for sample `i`.
    pub fn slice(&self, i: usize) -> TimeGrid {
        TimeGrid {
            kind: TimeKind::Instant,
            times: vec![self.times[i]],
        }
    }
}
