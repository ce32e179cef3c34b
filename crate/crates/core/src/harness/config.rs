//! Experiment configuration: a flat `key = value` file whose keys are the
//! long command-line flag names, with flags applied on top.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::trajectory::{AddressMode, DEFAULT_SUPERPOSITION_CAP};
use crate::analytics::ANALYTIC_MAX_DEPTH;
use crate::circuit::{Architecture, RouterKind, MAX_DEPTH};
use crate::noise::{CycleCost, ProfileKind, SurfaceParams};

/// Distance used by the uniform layouts when no profile is given. It keeps
/// the desk-scale sweeps (`n ≤ 9`, `p′ = 0.1`) near or below 6% infidelity,
/// where error counts still add up.
pub const DEFAULT_UNIFORM_DISTANCE: u32 = 7;

pub const DEFAULT_P_PRIME: f64 = 0.01;
pub const DEFAULT_EPSILON_PRIME: f64 = 0.03;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("unknown key {0:?}")]
    UnknownKey(String),
    #[error("bad value {value:?} for {key}: {reason}")]
    Value { key: String, value: String, reason: String },
    #[error("{0}")]
    Invalid(String),
}

fn bad(key: &str, value: &str, reason: impl fmt::Display) -> ConfigError {
    ConfigError::Value { key: key.to_string(), value: value.to_string(), reason: reason.to_string() }
}

/// Inclusive range of tree depths, written `A..B` or a single `A`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepthRange {
    pub start: u32,
    pub end: u32,
}

impl DepthRange {
    pub fn new(start: u32, end: u32) -> Result<Self, String> {
        if start > end {
            return Err(format!("empty range {start}..{end}"));
        }
        Ok(DepthRange { start, end })
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> {
        self.start..=self.end
    }
}

impl fmt::Display for DepthRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

impl FromStr for DepthRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let num = |t: &str| t.trim().parse::<u32>().map_err(|_| format!("bad depth {t:?}"));
        match s.split_once("..") {
            Some((a, b)) => {
                // `A..=B` reads the same as `A..B`
                let b = b.strip_prefix('=').unwrap_or(b);
                DepthRange::new(num(a)?, num(b)?)
            }
            None => {
                let n = num(s)?;
                DepthRange::new(n, n)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DatabaseMode {
    /// Uniform random bits from the given seed.
    Random(u64),
    AllZero,
    AllOne,
}

impl fmt::Display for DatabaseMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatabaseMode::Random(s) => write!(f, "random:{s}"),
            DatabaseMode::AllZero => f.write_str("zeros"),
            DatabaseMode::AllOne => f.write_str("ones"),
        }
    }
}

impl FromStr for DatabaseMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "zeros" | "all-zero" => Ok(DatabaseMode::AllZero),
            "ones" | "all-one" => Ok(DatabaseMode::AllOne),
            "random" => Ok(DatabaseMode::Random(0)),
            other => other
                .strip_prefix("random:")
                .and_then(|v| v.trim().parse().ok())
                .map(DatabaseMode::Random)
                .ok_or_else(|| format!("unknown database mode {other:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format {other:?}")),
        }
    }
}

fn parse_address_mode(s: &str) -> Result<AddressMode, String> {
    match s.trim() {
        "superposition" => Ok(AddressMode::Superposition),
        "basis" => Ok(AddressMode::Basis),
        other => Err(format!("unknown address mode {other:?}")),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub architectures: Vec<Architecture>,
    pub router_kind: RouterKind,
    pub n: DepthRange,
    pub params: SurfaceParams,
    pub cost: CycleCost,
    /// `None` picks linear for the heterogeneous layouts and
    /// `uniform:DEFAULT_UNIFORM_DISTANCE` for the others.
    pub profile: Option<ProfileKind>,
    pub trials: u64,
    pub seed: u64,
    pub address_mode: AddressMode,
    pub database: DatabaseMode,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            architectures: vec![Architecture::BbHetero],
            router_kind: RouterKind::Qutrit,
            n: DepthRange { start: 1, end: 6 },
            params: SurfaceParams::new(DEFAULT_EPSILON_PRIME, DEFAULT_P_PRIME).expect("defaults are valid"),
            cost: CycleCost::default(),
            profile: None,
            trials: 1000,
            seed: 0,
            address_mode: AddressMode::Superposition,
            database: DatabaseMode::Random(0),
            out: None,
            format: Format::Csv,
        }
    }
}

/// Keys accepted in config files, in flag spelling.
pub const KEYS: [&str; 14] = [
    "arch",
    "routers",
    "n",
    "p-prime",
    "epsilon-prime",
    "c",
    "s",
    "trials",
    "seed",
    "profile",
    "address-mode",
    "database",
    "out",
    "format",
];

/// Splits config text into `(key, value)` pairs. `#` starts a comment;
/// blank lines are skipped. Underscores in keys are read as dashes.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax { line: i + 1, text: raw.to_string() })?;
        let k = k.trim().replace('_', "-");
        if k.is_empty() {
            return Err(ConfigError::Syntax { line: i + 1, text: raw.to_string() });
        }
        out.push((k, v.trim().to_string()));
    }
    Ok(out)
}

impl ExperimentConfig {
    /// Parses a whole config file on top of the defaults and validates it.
    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ExperimentConfig::default();
        for (k, v) in parse_pairs(text)? {
            cfg.set(&k, &v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies one setting. Later calls win, which is how flags override the
    /// file.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        let num = |what: &str| -> Result<f64, ConfigError> {
            let x: f64 = v.parse().map_err(|_| bad(key, v, format!("expected {what}")))?;
            Ok(x)
        };
        let int = || -> Result<u64, ConfigError> { v.parse().map_err(|_| bad(key, v, "expected an integer")) };
        match key {
            "arch" => {
                self.architectures = v
                    .split(',')
                    .map(|a| a.parse::<Architecture>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| bad(key, v, e))?;
            }
            "routers" => self.router_kind = v.parse().map_err(|e| bad(key, v, e))?,
            "n" => self.n = v.parse().map_err(|e| bad(key, v, e))?,
            "p-prime" => {
                self.params = SurfaceParams::with_zero_allowed(self.params.epsilon_prime(), num("a number")?)
                    .map_err(|e| bad(key, v, e))?
            }
            "epsilon-prime" => {
                self.params = SurfaceParams::with_zero_allowed(num("a number")?, self.params.p_ratio())
                    .map_err(|e| bad(key, v, e))?
            }
            "c" | "s" => {
                let x = u32::try_from(int()?).map_err(|_| bad(key, v, "too large"))?;
                let (c, s) = if key == "c" { (x, self.cost.s) } else { (self.cost.c, x) };
                self.cost = CycleCost::new(c, s).map_err(|e| bad(key, v, e))?;
            }
            "trials" => self.trials = int()?,
            "seed" => self.seed = int()?,
            "profile" => self.profile = Some(v.parse().map_err(|e| bad(key, v, e))?),
            "address-mode" => self.address_mode = parse_address_mode(v).map_err(|e| bad(key, v, e))?,
            "database" => self.database = v.parse().map_err(|e| bad(key, v, e))?,
            "out" => self.out = Some(PathBuf::from(v)),
            "format" => self.format = v.parse().map_err(|e| bad(key, v, e))?,
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Profile actually used for `arch`.
    pub fn profile_for(&self, arch: Architecture) -> ProfileKind {
        match (self.profile, arch.is_heterogeneous()) {
            (Some(p), _) => p,
            (None, true) => ProfileKind::Linear,
            (None, false) => ProfileKind::Uniform(DEFAULT_UNIFORM_DISTANCE),
        }
    }

    /// Checks everything the closed-form commands need.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if self.trials < 1 {
            return invalid("trials must be at least 1".into());
        }
        if self.architectures.is_empty() {
            return invalid("no architecture selected".into());
        }
        if self.n.start < 1 || self.n.end > ANALYTIC_MAX_DEPTH {
            return invalid(format!("depths {} outside 1..={ANALYTIC_MAX_DEPTH}", self.n));
        }
        for &arch in &self.architectures {
            let uniform = matches!(self.profile_for(arch), ProfileKind::Uniform(_));
            if arch.is_heterogeneous() == uniform {
                return invalid(format!("profile {} does not fit {arch}", self.profile_for(arch)));
            }
            if arch == Architecture::Walker && self.router_kind == RouterKind::Qubit {
                return invalid("the walker tree only has qutrit routers".into());
            }
        }
        Ok(())
    }

    /// [`validate`](Self::validate) plus the depth limit of circuit
    /// construction.
    pub fn validate_for_simulation(&self) -> Result<(), ConfigError> {
        self.validate()?;
        if self.n.end > MAX_DEPTH {
            return Err(ConfigError::Invalid(format!("cannot simulate depths {}; the limit is {MAX_DEPTH}", self.n)));
        }
        Ok(())
    }

    /// True when the sweep would exceed the default superposition ceiling.
    pub fn exceeds_superposition_cap(&self) -> bool {
        self.address_mode == AddressMode::Superposition && self.n.end > DEFAULT_SUPERPOSITION_CAP
    }
}
