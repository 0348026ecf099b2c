//! Binary field snapshots.
//!
//! Layout (little-endian):
//!
//! ```text
//! "CVXF0001"                      magic
//! N: u32, S: u32, rank: u8, flags: u8
//! S × N³ × C × (re: f64, im: f64) coefficients of the modes
//!                                 −N/2 ≤ k_i < N/2 in (t, k₁, k₂, k₃, component) order
//! trailer (when flags bit 7 is set):
//!   stride: u64, dealias numerator: u32, dealias denominator: u32,
//!   instant: f64 (only when S = 1)
//! ```
//!
//! `C` is 1, 3 or 9 for rank 0, 1 or 2; matrix components are row-major.
//! Flag bits: 0 solenoidal, 1 symmetric, 2 trace-free, 7 trailer present.
//! The coefficient of mode `k` is `f̂_k` in `f(x) = Σ_k f̂_k e^{ik·x}`, with
//! `k` the stored mode (physical wavevector `stride·k`).  Modes outside the
//! retained box are written as zero.  Without a trailer the stride is 1, the
//! dealias fraction 2/3, and a single sample sits at `t = 0`; `S ≥ 2` samples
//! are always equispaced on `[0, 1]`.

use std::io::{Read, Write};
use std::path::Path;

use eulerci::field::{MatrixField, ScalarField, VectorField};
use eulerci::grid::{Dealias, Grid3, TimeGrid};
use num_complex::Complex64;
use thiserror::Error;

pub const MAGIC: &[u8; 8] = b"CVXF0001";

const SOLENOIDAL: u8 = 1;
const SYMMETRIC: u8 = 2;
const TRACE_FREE: u8 = 4;
const TRAILER: u8 = 128;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("unknown snapshot version: found magic {found:?}, expected \"CVXF0001\"")]
    BadMagic { found: String },
    #[error("snapshot is truncated")]
    Truncated,
    #[error("unsupported rank {0}")]
    BadRank(u8),
    #[error("invalid snapshot header: {0}")]
    BadHeader(String),
    #[error("expected a rank-{expected} field, found rank {found}")]
    WrongRank { expected: u8, found: u8 },
    #[error("{} bytes follow the snapshot data", .0)]
    TrailingBytes(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A field of any rank, as stored in a snapshot.
#[derive(Debug, Clone, PartialEq)]
pub enum Snapshot {
    Scalar(ScalarField),
    Vector(VectorField),
    Matrix(MatrixField),
}

impl Snapshot {
    pub fn rank(&self) -> u8 {
        match self {
            Self::Scalar(_) => 0,
            Self::Vector(_) => 1,
            Self::Matrix(_) => 2,
        }
    }

    pub fn components(&self) -> Vec<&ScalarField> {
        match self {
            Self::Scalar(f) => vec![f],
            Self::Vector(v) => v.comps().iter().collect(),
            Self::Matrix(m) => m.comps().iter().collect(),
        }
    }

    pub fn into_scalar(self) -> Result<ScalarField, SnapshotError> {
        match self {
            Self::Scalar(f) => Ok(f),
            other => Err(SnapshotError::WrongRank {
                expected: 0,
                found: other.rank(),
            }),
        }
    }

    pub fn into_vector(self) -> Result<VectorField, SnapshotError> {
        match self {
            Self::Vector(v) => Ok(v),
            other => Err(SnapshotError::WrongRank {
                expected: 1,
                found: other.rank(),
            }),
        }
    }

    pub fn into_matrix(self) -> Result<MatrixField, SnapshotError> {
        match self {
            Self::Matrix(m) => Ok(m),
            other => Err(SnapshotError::WrongRank {
                expected: 2,
                found: other.rank(),
            }),
        }
    }
}

fn span(n: usize) -> std::ops::Range<i64> {
    let h = (n / 2) as i64;
    -h..h
}

/// Serialize a field given by its components (1, 3 or 9 of them).
pub fn encode(comps: &[&ScalarField], rank: u8, flags: u8) -> Vec<u8> {
    let grid = *comps[0].grid();
    let times = comps[0].times();
    let n = grid.n();
    let s = times.len();
    let mut out = Vec::with_capacity(18 + s * n * n * n * comps.len() * 16 + 24);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(&(s as u32).to_le_bytes());
    out.push(rank);
    out.push(flags | TRAILER);
    let zero = Complex64::new(0.0, 0.0);
    for t in 0..s {
        for k1 in span(n) {
            for k2 in span(n) {
                for k3 in span(n) {
                    for c in comps {
                        let z = c.coeff(t, [k1, k2, k3]).unwrap_or(zero);
                        out.extend_from_slice(&z.re.to_le_bytes());
                        out.extend_from_slice(&z.im.to_le_bytes());
                    }
                }
            }
        }
    }
    out.extend_from_slice(&grid.stride().to_le_bytes());
    out.extend_from_slice(&grid.dealias().num.to_le_bytes());
    out.extend_from_slice(&grid.dealias().den.to_le_bytes());
    if s == 1 {
        out.extend_from_slice(&times.time(0).to_le_bytes());
    }
    out
}

impl Snapshot {
    pub fn to_bytes(&self) -> Vec<u8> {
        match self {
            Self::Scalar(f) => encode_scalar(f),
            Self::Vector(v) => encode_vector(v),
            Self::Matrix(m) => encode_matrix(m),
        }
    }
}

/// Serialize a vector field without cloning it.
pub fn encode_vector(v: &VectorField) -> Vec<u8> {
    let c: Vec<&ScalarField> = v.comps().iter().collect();
    encode(&c, 1, if v.is_solenoidal() { SOLENOIDAL } else { 0 })
}

pub fn encode_scalar(f: &ScalarField) -> Vec<u8> {
    encode(&[f], 0, 0)
}

pub fn encode_matrix(m: &MatrixField) -> Vec<u8> {
    let c: Vec<&ScalarField> = m.comps().iter().collect();
    let flags = (if m.is_symmetric() { SYMMETRIC } else { 0 }) | (if m.is_trace_free() { TRACE_FREE } else { 0 });
    encode(&c, 2, flags)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], SnapshotError> {
        let end = self.pos.checked_add(n).ok_or(SnapshotError::Truncated)?;
        let out = self.bytes.get(self.pos..end).ok_or(SnapshotError::Truncated)?;
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32, SnapshotError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, SnapshotError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, SnapshotError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn decode(bytes: &[u8]) -> Result<Snapshot, SnapshotError> {
    let mut cur = Cursor { bytes, pos: 0 };
    let magic = cur.take(8).map_err(|_| SnapshotError::BadMagic {
        found: String::from_utf8_lossy(&bytes[..bytes.len().min(8)]).into_owned(),
    })?;
    if magic != MAGIC {
        return Err(SnapshotError::BadMagic {
            found: String::from_utf8_lossy(magic).into_owned(),
        });
    }
    let n = cur.u32()? as usize;
    let s = cur.u32()? as usize;
    let rank = cur.take(1)?[0];
    let flags = cur.take(1)?[0];
    let ncomp = match rank {
        0 => 1,
        1 => 3,
        2 => 9,
        r => return Err(SnapshotError::BadRank(r)),
    };
    if s == 0 {
        return Err(SnapshotError::BadHeader("no time samples".into()));
    }
    let count = s
        .checked_mul(n.checked_pow(3).ok_or(SnapshotError::Truncated)?)
        .and_then(|v| v.checked_mul(ncomp * 16))
        .ok_or(SnapshotError::Truncated)?;
    let data = cur.take(count)?;
    let (stride, dealias, instant) = if flags & TRAILER != 0 {
        let stride = cur.u64()?;
        let num = cur.u32()?;
        let den = cur.u32()?;
        let instant = if s == 1 { cur.f64()? } else { 0.0 };
        (stride, Dealias { num, den }, instant)
    } else {
        (1, Dealias::TWO_THIRDS, 0.0)
    };
    if cur.pos != bytes.len() {
        return Err(SnapshotError::TrailingBytes(bytes.len() - cur.pos));
    }
    let bad = |e: &dyn std::fmt::Display| SnapshotError::BadHeader(e.to_string());
    let grid = Grid3::with_dealias(n, stride, dealias).map_err(|e| bad(&e))?;
    let times = if s == 1 {
        TimeGrid::instant(instant).map_err(|e| bad(&e))?
    } else {
        TimeGrid::uniform(s).map_err(|e| bad(&e))?
    };
    let h = (n / 2) as i64;
    let value = |t: usize, m: [i64; 3], c: usize| {
        let idx = (((t * n + (m[0] + h) as usize) * n + (m[1] + h) as usize) * n + (m[2] + h) as usize) * ncomp + c;
        let b = &data[idx * 16..idx * 16 + 16];
        Complex64::new(
            f64::from_le_bytes(b[..8].try_into().unwrap()),
            f64::from_le_bytes(b[8..].try_into().unwrap()),
        )
    };
    let comps: Vec<ScalarField> = (0..ncomp)
        .map(|c| {
            let slices = (0..s)
                .map(|t| grid.iter_modes().map(|(_, m)| value(t, m, c)).collect())
                .collect();
            ScalarField::from_slices(grid, times.clone(), slices).map_err(|e| bad(&e))
        })
        .collect::<Result<_, _>>()?;
    Ok(match rank {
        0 => Snapshot::Scalar(comps.into_iter().next().unwrap()),
        1 => {
            let c: [ScalarField; 3] = comps.try_into().unwrap_or_else(|_| unreachable!());
            Snapshot::Vector(
                VectorField::new(c)
                    .map_err(|e| bad(&e))?
                    .with_solenoidal(flags & SOLENOIDAL != 0),
            )
        }
        _ => Snapshot::Matrix(
            MatrixField::new(comps)
                .map_err(|e| bad(&e))?
                .with_flags(flags & SYMMETRIC != 0, flags & TRACE_FREE != 0),
        ),
    })
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), SnapshotError> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(bytes)?;
    Ok(())
}

pub fn read_file(path: &Path) -> Result<Snapshot, SnapshotError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode(&bytes)
}
