//! Run configuration: a flat `key = value` file with `[section]` headers.
//!
//! ```text
//! [run]
//! profile = 1 - t/2        # energy profile e(t) on [0, 1]
//! alpha = 0.05
//! beta = 0.4
//! stages = 2
//! seed = 7                 # seeds sampled checks; recorded in the manifest
//! workers = 1              # optional thread count
//!
//! [schedule]
//! lambdas = 16, 32         # or: doubling = 16
//! grid = auto:4            # auto:<factor> or a fixed size
//! time_samples = 9
//! stride = 16              # optional, defaults to the gcd of the λ
//! dealias = 2/3
//!
//! [geometry]
//! search_bound = 12        # or: file = system.txt
//!
//! [partition]
//! c1 = 0.90
//! c2 = 0.95
//!
//! [constants]
//! m = auto                 # or a number
//! eta = auto
//! margin = 0.5
//!
//! [output]
//! directory = run          # relative to the config file
//! snapshots = true
//! decomposition = false
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use eulerci::grid::Dealias;
use eulerci::partition::PhasePartition;
use eulerci::profile::EnergyProfile;
use eulerci::stage::{check_exponents, GridRule, LambdaSchedule, ScheduleConfig};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}: {message}")]
pub struct ConfigError {
    /// 1-based line; 0 when the problem is a missing key.
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line,
        message: message.into(),
    }
}

/// Where the direction system comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum GeometrySource {
    Search { bound: u32 },
    File(PathBuf),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub profile: EnergyProfile,
    pub schedule: ScheduleConfig,
    pub geometry: GeometrySource,
    pub partition: PhasePartition,
    /// `None` means calibrate.
    pub m: Option<f64>,
    /// `None` means `r₀ · min e / (24 (2π)³)`.
    pub eta: Option<f64>,
    pub margin: f64,
    pub seed: u64,
    pub workers: Option<usize>,
    pub output: PathBuf,
    pub snapshots: bool,
    pub decomposition: bool,
}

const KEYS: &[(&str, &[&str])] = &[
    ("run", &["profile", "alpha", "beta", "stages", "seed", "workers"]),
    (
        "schedule",
        &["lambdas", "doubling", "grid", "time_samples", "stride", "dealias"],
    ),
    ("geometry", &["search_bound", "file"]),
    ("partition", &["c1", "c2"]),
    ("constants", &["m", "eta", "margin"]),
    ("output", &["directory", "snapshots", "decomposition"]),
];

struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn get(&self, key: &str) -> Option<(usize, &str)> {
        self.map.get(key).map(|(l, v)| (*l, v.as_str()))
    }

    fn line(&self, key: &str) -> usize {
        self.map.get(key).map_or(0, |(l, _)| *l)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|e| err(line, format!("{key}: cannot parse {v:?}: {e}"))),
        }
    }

    fn require<T: std::str::FromStr>(&self, key: &str) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        self.parse(key)?
            .ok_or_else(|| err(0, format!("missing required key {key}")))
    }

    fn auto_or_number(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some((_, "auto")) => Ok(None),
            Some(_) => {
                let v: f64 = self.require(key)?;
                if !(v > 0.0 && v.is_finite()) {
                    return Err(err(self.line(key), format!("{key} must be positive")));
                }
                Ok(Some(v))
            }
        }
    }
}

fn split_entries(text: &str) -> Result<Entries, ConfigError> {
    let mut map = BTreeMap::new();
    let mut section: Option<&str> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(name) = body.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| err(line, "unterminated section header"))?
                .trim();
            let known = KEYS
                .iter()
                .find(|(s, _)| *s == name)
                .ok_or_else(|| err(line, format!("unknown section [{name}]")))?;
            section = Some(known.0);
            continue;
        }
        let (key, value) = body.split_once('=').ok_or_else(|| err(line, "expected key = value"))?;
        let (key, value) = (key.trim(), value.trim());
        let sec = section.ok_or_else(|| err(line, "key outside any section"))?;
        let allowed = KEYS.iter().find(|(s, _)| *s == sec).map(|(_, k)| *k).unwrap_or(&[]);
        if !allowed.contains(&key) {
            return Err(err(line, format!("unknown key {key} in [{sec}]")));
        }
        if value.is_empty() {
            return Err(err(line, format!("{key} has no value")));
        }
        if map.insert(key.to_string(), (line, value.to_string())).is_some() {
            return Err(err(line, format!("duplicate key {key}")));
        }
    }
    Ok(Entries { map })
}

fn parse_bool(e: &Entries, key: &str, default: bool) -> Result<bool, ConfigError> {
    match e.get(key) {
        None => Ok(default),
        Some((_, "true")) => Ok(true),
        Some((_, "false")) => Ok(false),
        Some((line, v)) => Err(err(line, format!("{key}: expected true or false, got {v:?}"))),
    }
}

fn parse_grid(e: &Entries) -> Result<GridRule, ConfigError> {
    let Some((line, v)) = e.get("grid") else {
        return Ok(GridRule::Auto { factor: 4 });
    };
    let bad = || err(line, format!("grid: expected auto, auto:<factor> or a size, got {v:?}"));
    if v == "auto" {
        return Ok(GridRule::Auto { factor: 4 });
    }
    if let Some(f) = v.strip_prefix("auto:") {
        let factor: usize = f.trim().parse().map_err(|_| bad())?;
        if factor == 0 {
            return Err(bad());
        }
        return Ok(GridRule::Auto { factor });
    }
    let n: usize = v.parse().map_err(|_| bad())?;
    Ok(GridRule::Fixed { n })
}

fn parse_dealias(e: &Entries) -> Result<Dealias, ConfigError> {
    let Some((line, v)) = e.get("dealias") else {
        return Ok(Dealias::TWO_THIRDS);
    };
    let bad = || err(line, format!("dealias: expected a fraction p/q in (0, 1], got {v:?}"));
    let (a, b) = v.split_once('/').ok_or_else(bad)?;
    let num: u32 = a.trim().parse().map_err(|_| bad())?;
    let den: u32 = b.trim().parse().map_err(|_| bad())?;
    if num == 0 || den == 0 || num > den {
        return Err(bad());
    }
    Ok(Dealias { num, den })
}

fn parse_schedule(e: &Entries) -> Result<LambdaSchedule, ConfigError> {
    match (e.get("lambdas"), e.get("doubling")) {
        (Some(_), Some((line, _))) => Err(err(line, "give either lambdas or doubling, not both")),
        (None, None) => Err(err(0, "missing required key lambdas (or doubling)")),
        (None, Some(_)) => {
            let start: u64 = e.require("doubling")?;
            if start == 0 {
                return Err(err(e.line("doubling"), "doubling start must be positive"));
            }
            Ok(LambdaSchedule::Doubling { start })
        }
        (Some((line, v)), None) => {
            let list = v
                .split(',')
                .map(|s| s.trim().parse::<u64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| err(line, format!("lambdas: {e}")))?;
            if list.iter().any(|l| *l == 0) {
                return Err(err(line, "lambdas must be positive"));
            }
            Ok(LambdaSchedule::List(list))
        }
    }
}

impl RunConfig {
    /// Parse and validate; relative paths are resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let e = split_entries(text)?;
        let (pline, psrc) = e.get("profile").ok_or_else(|| err(0, "missing required key profile"))?;
        let profile = EnergyProfile::parse(psrc).map_err(|x| err(pline, format!("profile: {x}")))?;
        let alpha: f64 = e.require("alpha")?;
        let beta: f64 = e.require("beta")?;
        check_exponents(alpha, beta).map_err(|x| err(e.line("beta").max(e.line("alpha")), x.to_string()))?;
        let stages: usize = e.require("stages")?;
        let lambdas = parse_schedule(&e)?;
        if let LambdaSchedule::List(l) = &lambdas {
            if l.len() < stages {
                return Err(err(
                    e.line("lambdas"),
                    format!("{} frequencies for {stages} stages", l.len()),
                ));
            }
        }
        let time_samples: usize = e.parse("time_samples")?.unwrap_or(9);
        if time_samples < 5 {
            return Err(err(
                e.line("time_samples"),
                "time_samples must be at least 5 for time derivatives",
            ));
        }
        let stride: Option<u64> = e.parse("stride")?;
        if stride == Some(0) {
            return Err(err(e.line("stride"), "stride must be positive"));
        }
        let schedule = ScheduleConfig {
            alpha,
            beta,
            lambdas,
            stages,
            grid: parse_grid(&e)?,
            time_samples,
            stride,
            dealias: parse_dealias(&e)?,
        };
        let geometry = match (e.get("search_bound"), e.get("file")) {
            (Some(_), Some((line, _))) => return Err(err(line, "give either search_bound or file, not both")),
            (_, Some((_, f))) => GeometrySource::File(base.join(f)),
            _ => GeometrySource::Search {
                bound: e.parse("search_bound")?.unwrap_or(12),
            },
        };
        let c1: f64 = e.parse("c1")?.unwrap_or(0.90);
        let c2: f64 = e.parse("c2")?.unwrap_or(0.95);
        let partition = PhasePartition::new(c1, c2).map_err(|x| err(e.line("c2").max(e.line("c1")), x.to_string()))?;
        let margin: f64 = e.parse("margin")?.unwrap_or(0.5);
        if !(margin >= 0.0 && margin.is_finite()) {
            return Err(err(e.line("margin"), "margin must be nonnegative"));
        }
        let workers: Option<usize> = e.parse("workers")?;
        if workers == Some(0) {
            return Err(err(e.line("workers"), "workers must be positive"));
        }
        Ok(Self {
            profile,
            schedule,
            geometry,
            partition,
            m: e.auto_or_number("m")?,
            eta: e.auto_or_number("eta")?,
            margin,
            seed: e.parse("seed")?.unwrap_or(0),
            workers,
            output: base.join(e.get("directory").map_or("run", |(_, v)| v)),
            snapshots: parse_bool(&e, "snapshots", true)?,
            decomposition: parse_bool(&e, "decomposition", false)?,
        })
    }
}
