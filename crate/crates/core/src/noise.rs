//! Surface-code logical error rates and Pauli error sampling.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::branch_state::QubitId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoiseError {
    #[error("code distance must be at least 1, got {0}")]
    Distance(u32),
    #[error("epsilon' must be positive and finite, got {0}")]
    EpsilonPrime(f64),
    #[error("p' must lie in (0, 1), got {0}")]
    PRatio(f64),
    #[error("cycle costs must be at least 1 (c={c}, s={s})")]
    Cost { c: u32, s: u32 },
    #[error("level {level} outside 0..={n}")]
    Level { level: u32, n: u32 },
    #[error("probability {0} outside [0, 1]")]
    Probability(f64),
    #[error("unknown distance profile {0:?}")]
    Profile(String),
}

/// Surface-code constants: `ε_L = ε′·p′^{d_e}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceParams {
    epsilon_prime: f64,
    p_ratio: f64,
}

impl SurfaceParams {
    pub fn new(epsilon_prime: f64, p_ratio: f64) -> Result<Self, NoiseError> {
        if !(epsilon_prime.is_finite() && epsilon_prime > 0.0) {
            return Err(NoiseError::EpsilonPrime(epsilon_prime));
        }
        if !(p_ratio > 0.0 && p_ratio < 1.0) {
            return Err(NoiseError::PRatio(p_ratio));
        }
        Ok(SurfaceParams { epsilon_prime, p_ratio })
    }

    /// Same as `new` but admits `p′ = 0`, the noiseless limit used by the
    /// analytic checks.
    pub fn with_zero_allowed(epsilon_prime: f64, p_ratio: f64) -> Result<Self, NoiseError> {
        if p_ratio == 0.0 && epsilon_prime.is_finite() && epsilon_prime > 0.0 {
            return Ok(SurfaceParams { epsilon_prime, p_ratio });
        }
        Self::new(epsilon_prime, p_ratio)
    }

    pub fn epsilon_prime(&self) -> f64 {
        self.epsilon_prime
    }

    pub fn p_ratio(&self) -> f64 {
        self.p_ratio
    }
}

/// Code cycles per unit distance for a CSWAP (`c`) and a SWAP (`s`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleCost {
    pub c: u32,
    pub s: u32,
}

impl CycleCost {
    pub fn new(c: u32, s: u32) -> Result<Self, NoiseError> {
        if c == 0 || s == 0 {
            return Err(NoiseError::Cost { c, s });
        }
        Ok(CycleCost { c, s })
    }
}

impl Default for CycleCost {
    fn default() -> Self {
        CycleCost { c: 2, s: 1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProfileKind {
    /// `d(l) = n − l + 1`.
    Linear,
    /// Linear with every even distance lowered to the odd one below it.
    OddPaired,
    Uniform(u32),
}

impl fmt::Display for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileKind::Linear => f.write_str("linear"),
            ProfileKind::OddPaired => f.write_str("odd-paired"),
            ProfileKind::Uniform(d) => write!(f, "uniform:{d}"),
        }
    }
}

impl FromStr for ProfileKind {
    type Err = NoiseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s {
            "linear" => Ok(ProfileKind::Linear),
            "odd-paired" => Ok(ProfileKind::OddPaired),
            _ => {
                let d = s
                    .strip_prefix("uniform:")
                    .and_then(|d| d.trim().parse::<u32>().ok())
                    .ok_or_else(|| NoiseError::Profile(s.to_string()))?;
                if d == 0 {
                    return Err(NoiseError::Distance(0));
                }
                Ok(ProfileKind::Uniform(d))
            }
        }
    }
}

/// Code distance per tree level, root at level 0 and leaves at level `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceProfile {
    pub kind: ProfileKind,
    pub n: u32,
}

impl DistanceProfile {
    pub fn new(kind: ProfileKind, n: u32) -> Result<Self, NoiseError> {
        if let ProfileKind::Uniform(0) = kind {
            return Err(NoiseError::Distance(0));
        }
        Ok(DistanceProfile { kind, n })
    }

    pub fn distance(&self, level: u32) -> Result<u32, NoiseError> {
        if level > self.n {
            return Err(NoiseError::Level { level, n: self.n });
        }
        let linear = self.n - level + 1;
        Ok(match self.kind {
            ProfileKind::Linear => linear,
            ProfileKind::OddPaired => linear - (1 - linear % 2),
            ProfileKind::Uniform(d) => d,
        })
    }

    pub fn max_distance(&self) -> u32 {
        (0..=self.n).map(|l| self.distance(l).unwrap()).max().unwrap()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PauliKind {
    X,
    Z,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PauliEvent {
    pub qubit: QubitId,
    pub kind: PauliKind,
}

/// Which Pauli flips a logical error produces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Channel {
    /// X and Z independently, each with probability `rate/2` per round.
    #[default]
    Symmetric,
    XOnly,
    ZOnly,
}

impl Channel {
    /// Per-round probabilities of an X and of a Z flip.
    pub fn split(self, rate: f64) -> (f64, f64) {
        match self {
            Channel::Symmetric => (rate / 2.0, rate / 2.0),
            Channel::XOnly => (rate, 0.0),
            Channel::ZOnly => (0.0, rate),
        }
    }
}

/// How a layer lasting `k` code cycles is turned into error draws.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CycleMode {
    /// `k` independent rounds per qubit.
    #[default]
    Rounds,
    /// One draw per qubit with probability `1 − (1 − ε)^k`.
    Aggregated,
}

pub fn effective_distance(d: u32) -> Result<u32, NoiseError> {
    if d < 1 {
        return Err(NoiseError::Distance(d));
    }
    Ok(d.div_ceil(2))
}

/// Per-cycle logical error probability at distance `d`, clamped to `[0, 1]`.
pub fn logical_error_rate(params: &SurfaceParams, d: u32) -> Result<f64, NoiseError> {
    let de = effective_distance(d)?;
    let rate = params.epsilon_prime * params.p_ratio.powi(de as i32);
    Ok(rate.clamp(0.0, 1.0))
}

pub fn level_error_rate(params: &SurfaceParams, profile: &DistanceProfile, level: u32) -> Result<f64, NoiseError> {
    logical_error_rate(params, profile.distance(level)?)
}

/// Bernoulli sampler over a run of equally likely slots.
///
/// Skips straight to the next success with a geometric draw, so the cost is
/// proportional to the number of events rather than the number of slots.
#[derive(Clone, Copy, Debug)]
pub(crate) struct SlotSampler {
    p: f64,
    geo: Option<Geometric>,
}

impl SlotSampler {
    pub(crate) fn new(p: f64) -> Self {
        let geo = if p > 0.0 && p < 1.0 { Some(Geometric::new(p).expect("p in (0,1)")) } else { None };
        SlotSampler { p, geo }
    }

    /// Calls `hit` with the index of every successful slot in `0..slots`.
    pub(crate) fn for_each<R: Rng + ?Sized>(&self, rng: &mut R, slots: u64, mut hit: impl FnMut(u64)) {
        if self.p <= 0.0 || slots == 0 {
            return;
        }
        match self.geo {
            None => (0..slots).for_each(hit),
            Some(geo) => {
                let mut pos = geo.sample(rng);
                while pos < slots {
                    hit(pos);
                    pos = pos.saturating_add(1).saturating_add(geo.sample(rng));
                }
            }
        }
    }
}

/// Samples the Pauli events one layer of `cycles` code cycles deposits.
///
/// Events come out grouped by qubit in the order of `per_qubit_rate`. Within a
/// layer only the parity of each flip matters, so the ordering carries no
/// physics; it is fixed only to keep sampling reproducible.
pub fn sample_layer_errors<R: Rng + ?Sized>(
    rng: &mut R,
    per_qubit_rate: &[(QubitId, f64)],
    cycles: u32,
    channel: Channel,
    mode: CycleMode,
) -> Result<Vec<PauliEvent>, NoiseError> {
    let mut events = Vec::new();
    for &(qubit, rate) in per_qubit_rate {
        if !(0.0..=1.0).contains(&rate) {
            return Err(NoiseError::Probability(rate));
        }
        let (px, pz) = channel.split(rate);
        match mode {
            CycleMode::Rounds => {
                for (kind, p) in [(PauliKind::X, px), (PauliKind::Z, pz)] {
                    SlotSampler::new(p).for_each(rng, cycles as u64, |_| events.push(PauliEvent { qubit, kind }));
                }
            }
            CycleMode::Aggregated => {
                let hit = 1.0 - (1.0 - rate).powi(cycles as i32);
                if hit > 0.0 && rng.gen::<f64>() < hit {
                    let kind = match channel {
                        Channel::XOnly => PauliKind::X,
                        Channel::ZOnly => PauliKind::Z,
                        Channel::Symmetric => {
                            if rng.gen::<bool>() {
                                PauliKind::X
                            } else {
                                PauliKind::Z
                            }
                        }
                    };
                    events.push(PauliEvent { qubit, kind });
                }
            }
        }
    }
    Ok(events)
}

/// Everything a trajectory needs to know about the noise: one logical error
/// rate per tree level plus the sampling conventions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub level_rates: Vec<f64>,
    pub channel: Channel,
    pub cycle_mode: CycleMode,
    /// When false (the default) a qubit only starts to decohere at the first
    /// layer that acts on it, i.e. it is prepared just in time.
    pub idle_before_first_use: bool,
    /// When true (the default) a logical carrier encoded on `k` qubits gives
    /// each of them `rate / k`, so an encoded qutrit fails as often as a
    /// single qubit at the same level.
    pub share_carrier_rate: bool,
}

impl NoiseModel {
    pub fn from_profile(params: &SurfaceParams, profile: &DistanceProfile) -> Result<Self, NoiseError> {
        let level_rates = (0..=profile.n).map(|l| level_error_rate(params, profile, l)).collect::<Result<_, _>>()?;
        Ok(NoiseModel::with_rates(level_rates))
    }

    pub fn with_rates(level_rates: Vec<f64>) -> Self {
        NoiseModel {
            level_rates,
            channel: Channel::default(),
            cycle_mode: CycleMode::default(),
            idle_before_first_use: false,
            share_carrier_rate: true,
        }
    }

    /// The same per-cycle rate on every level `0..=n`.
    pub fn constant(rate: f64, n: u32) -> Self {
        NoiseModel::with_rates(vec![rate; n as usize + 1])
    }

    pub fn noiseless(n: u32) -> Self {
        NoiseModel::constant(0.0, n)
    }

    pub fn rate(&self, level: u32) -> f64 {
        self.level_rates.get(level as usize).copied().unwrap_or(0.0)
    }

    pub fn is_noiseless(&self) -> bool {
        self.level_rates.iter().all(|&r| r == 0.0)
    }
}
