//! Line-oriented text form of a direction system.
//!
//! ```text
//! direction-system 1
//! radius_sq 81
//! family 0
//! members 7
//! 1 2 3
//! ...
//! vertex 0
//! matrix <9 numbers>
//! support 4
//! 8 4 1 <weight>
//! ...
//! chart
//! <6 numbers>   (six rows)
//! end
//! ```
//!
//! Reals are written with 17 significant digits so the text round-trips.

use thiserror::Error;

use super::{Family, FAMILIES};
use crate::geometry::DirectionSystem;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}: {message}")]
pub struct TextError {
    pub line: usize,
    pub message: String,
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub(super) fn write(s: &DirectionSystem) -> String {
    let mut out = String::new();
    out.push_str("direction-system 1\n");
    out.push_str(&format!("radius_sq {}\n", s.radius_sq()));
    out.push_str(&format!("r0 {}\n", num(s.r0())));
    for (j, f) in s.families().iter().enumerate() {
        out.push_str(&format!("family {j}\nmembers {}\n", f.members.len()));
        for k in &f.members {
            out.push_str(&format!("{} {} {}\n", k[0], k[1], k[2]));
        }
        for (i, (a, sup)) in f.vertices.iter().zip(&f.supports).enumerate() {
            let m: Vec<String> = a.iter().map(|x| num(*x)).collect();
            out.push_str(&format!("vertex {i}\nmatrix {}\nsupport {}\n", m.join(" "), sup.len()));
            for (k, l) in sup {
                out.push_str(&format!("{} {} {} {}\n", k[0], k[1], k[2], num(*l)));
            }
        }
        out.push_str("chart\n");
        for row in &f.chart {
            let r: Vec<String> = row.iter().map(|x| num(*x)).collect();
            out.push_str(&r.join(" "));
            out.push('\n');
        }
    }
    out.push_str("end\n");
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn err(&self, message: impl Into<String>) -> TextError {
        TextError {
            line: self.line,
            message: message.into(),
        }
    }

    fn next(&mut self) -> Result<&'a str, TextError> {
        loop {
            let (i, l) = self.inner.next().ok_or(TextError {
                line: self.line + 1,
                message: "unexpected end of input".into(),
            })?;
            self.line = i + 1;
            let l = l.trim();
            if !l.is_empty() && !l.starts_with('#') {
                return Ok(l);
            }
        }
    }

    fn keyed(&mut self, key: &str) -> Result<&'a str, TextError> {
        let l = self.next()?;
        match l.split_once(' ') {
            Some((k, rest)) if k == key => Ok(rest.trim()),
            _ if l == key => Ok(""),
            _ => Err(self.err(format!("expected `{key}`, found `{l}`"))),
        }
    }

    fn count(&mut self, key: &str) -> Result<usize, TextError> {
        let v = self.keyed(key)?;
        v.parse().map_err(|_| self.err(format!("bad count `{v}`")))
    }

    fn floats(&self, s: &str, n: usize) -> Result<Vec<f64>, TextError> {
        let v: Result<Vec<f64>, _> = s.split_whitespace().map(str::parse).collect();
        match v {
            Ok(v) if v.len() == n => Ok(v),
            _ => Err(self.err(format!("expected {n} numbers"))),
        }
    }

    fn triple(&self, s: &str) -> Result<[i64; 3], TextError> {
        let mut it = s.split_whitespace();
        let mut k = [0i64; 3];
        for c in k.iter_mut() {
            *c = it
                .next()
                .and_then(|x| x.parse().ok())
                .ok_or_else(|| self.err("expected an integer triple"))?;
        }
        Ok(k)
    }
}

pub(super) fn read(s: &str) -> Result<(i64, Vec<Family>), TextError> {
    let mut l = Lines {
        inner: s.lines().enumerate(),
        line: 0,
    };
    let header = l.keyed("direction-system")?;
    if header != "1" {
        return Err(l.err(format!("unsupported version `{header}`")));
    }
    let r2 = l.keyed("radius_sq")?;
    let radius_sq: i64 = r2.parse().map_err(|_| l.err("bad radius"))?;
    // The stored radius is informational; it is recomputed on load.
    l.keyed("r0")?;
    let mut families = Vec::with_capacity(FAMILIES);
    for j in 0..FAMILIES {
        let idx = l.keyed("family")?;
        if idx != j.to_string() {
            return Err(l.err(format!("expected family {j}")));
        }
        let n = l.count("members")?;
        let mut members = Vec::with_capacity(n);
        for _ in 0..n {
            let line = l.next()?;
            members.push(l.triple(line)?);
        }
        let mut vertices = Vec::with_capacity(6);
        let mut supports = Vec::with_capacity(6);
        for i in 0..6 {
            let idx = l.keyed("vertex")?;
            if idx != i.to_string() {
                return Err(l.err(format!("expected vertex {i}")));
            }
            let m = l.keyed("matrix")?;
            let m = l.floats(m, 9)?;
            vertices.push(std::array::from_fn(|q| m[q]));
            let c = l.count("support")?;
            let mut sup = Vec::with_capacity(c);
            for _ in 0..c {
                let line = l.next()?;
                let k = l.triple(line)?;
                let w = line
                    .split_whitespace()
                    .nth(3)
                    .and_then(|x| x.parse::<f64>().ok())
                    .ok_or_else(|| l.err("expected a weight after the triple"))?;
                sup.push((k, w));
            }
            supports.push(sup);
        }
        l.keyed("chart")?;
        let mut chart = [[0.0; 6]; 6];
        for row in chart.iter_mut() {
            let line = l.next()?;
            let v = l.floats(line, 6)?;
            row.copy_from_slice(&v);
        }
        families.push(Family {
            members,
            vertices,
            supports,
            chart,
        });
    }
    l.keyed("end")?;
    Ok((radius_sq, families))
}
