//! Sweeps, the bound each simulated point is compared against, and the
//! equal-fidelity resource comparison.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::config::{ConfigError, DatabaseMode, ExperimentConfig};
use super::report::{ExperimentReport, ReportError, ReportRow};
use super::stats::{estimate_infidelity, Estimate, FitError};
use super::trajectory::{AddressMode, SimError, Simulator, DEFAULT_SUPERPOSITION_CAP};
use crate::analytics::{
    bb_infidelity_bound, bb_resources, ft_infidelity_bound, ft_resources, min_uniform_distance, qubit_router_delta,
    uniform_bb_infidelity, uniform_qubit_delta, uniform_resources, AnalyticsError, BoundInputs,
};
use crate::circuit::{build, Architecture, BuildOptions, CircuitError, Database, RouterKind, Schedule};
use crate::noise::{NoiseError, NoiseModel, ProfileKind};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error("no closed-form bound for {arch} with profile {profile}")]
    NoBound { arch: Architecture, profile: ProfileKind },
}

impl HarnessError {
    /// Process exit status: 2 for bad input, 3 for limits hit while running,
    /// 4 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::NoBound { .. } | HarnessError::Noise(_) => 2,
            HarnessError::Report(ReportError::Io(_)) => 4,
            HarnessError::Report(ReportError::Csv(e)) if matches!(e.kind(), csv::ErrorKind::Io(_)) => 4,
            HarnessError::Report(_) => 2,
            HarnessError::Circuit(_) | HarnessError::Sim(_) | HarnessError::Analytics(_) | HarnessError::Fit(_) => 3,
        }
    }
}

/// Analytic infidelity bound that a simulated point of `arch` should stay
/// under. Qubit routers add `4δ` for errors carried into good branches.
pub fn matching_bound(
    arch: Architecture,
    router_kind: RouterKind,
    inputs: &BoundInputs,
    profile: ProfileKind,
) -> Result<f64, HarnessError> {
    let qubit = router_kind == RouterKind::Qubit;
    let value = match (arch, profile) {
        (Architecture::UniformBb, ProfileKind::Uniform(d)) => {
            let base = uniform_bb_infidelity(inputs, d)?.value;
            if qubit {
                base + 4.0 * uniform_qubit_delta(inputs, d)?
            } else {
                base
            }
        }
        (Architecture::Walker, ProfileKind::Uniform(d)) => uniform_bb_infidelity(inputs, d)?.value,
        // The odd-paired profile keeps every level's effective distance and
        // shortens its operations, so the linear bound still covers it.
        (Architecture::FtHetero | Architecture::BbHetero, ProfileKind::Linear | ProfileKind::OddPaired) => {
            let base = if arch == Architecture::FtHetero {
                ft_infidelity_bound(inputs).exact.value
            } else {
                bb_infidelity_bound(inputs).exact.value
            };
            if qubit {
                base + 4.0 * qubit_router_delta(arch, inputs)?
            } else {
                base
            }
        }
        _ => return Err(HarnessError::NoBound { arch, profile }),
    };
    Ok(value)
}

pub fn make_database(mode: DatabaseMode, n: u32) -> Database {
    match mode {
        DatabaseMode::AllZero => Database::zeros(n),
        DatabaseMode::AllOne => Database::ones(n),
        DatabaseMode::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(n as u64);
            Database::random(n, &mut rng)
        }
    }
}

pub fn build_for(config: &ExperimentConfig, arch: Architecture, n: u32) -> Result<Schedule, HarnessError> {
    let db = make_database(config.database, n);
    let options = BuildOptions { cost: config.cost, profile: config.profile_for(arch) };
    Ok(build(arch, config.router_kind, n, &db, options)?)
}

/// Simulates one `(architecture, n)` point.
pub fn run_point(config: &ExperimentConfig, arch: Architecture, n: u32) -> Result<(ReportRow, Estimate), HarnessError> {
    let schedule = build_for(config, arch, n)?;
    let noise = NoiseModel::from_profile(&config.params, schedule.profile())?;
    let sim = Simulator::new(&schedule, noise, config.address_mode)?;
    let est = estimate_infidelity(&sim, config.trials, config.seed);
    let inputs = BoundInputs::new(n, config.params, config.cost)?;
    let bound = matching_bound(arch, config.router_kind, &inputs, config.profile_for(arch))?;
    log::info!("{arch} {} n={n}: {:.6} ± {:.6}", config.router_kind, est.mean, est.std_error);
    let row = ReportRow {
        architecture: arch,
        router_kind: config.router_kind,
        n,
        p_prime: config.params.p_ratio(),
        trials: est.trials,
        mean_infidelity: est.mean,
        ci95_low: est.ci95.0,
        ci95_high: est.ci95.1,
        analytic_bound: bound,
        seed: config.seed,
    };
    Ok((row, est))
}

/// Every configured architecture over every depth, in that order.
pub fn run_sweep(config: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    config.validate_for_simulation()?;
    let mut rows = Vec::new();
    for &arch in &config.architectures {
        for n in config.n.iter() {
            rows.push(run_point(config, arch, n)?.0);
        }
    }
    Ok(ExperimentReport { rows })
}

/// Where the heterogeneous fidelity target comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeteroSource {
    Analytic,
    /// Monte Carlo at depths up to the superposition ceiling, analytic above.
    Simulated {
        trials: u64,
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub n: u32,
    pub architecture: Architecture,
    pub hetero_infidelity: f64,
    pub hetero_physical: u128,
    pub uniform_distance: u32,
    pub uniform_physical: u128,
    /// `uniform_physical / hetero_physical`.
    pub ratio: f64,
}

/// Physical qubits of a uniform tree matched to the heterogeneous tree's
/// infidelity, against the heterogeneous count.
pub fn compare_resources(
    n: u32,
    arch: Architecture,
    inputs: &BoundInputs,
    efficient: bool,
    source: HeteroSource,
) -> Result<ComparisonRow, HarnessError> {
    let at = BoundInputs { n, ..*inputs };
    let profile = if efficient { ProfileKind::OddPaired } else { ProfileKind::Linear };
    let analytic = matching_bound(arch, RouterKind::Qutrit, &at, profile)?;
    let hetero_infidelity = match source {
        HeteroSource::Simulated { trials, seed } if n <= DEFAULT_SUPERPOSITION_CAP => {
            let config = ExperimentConfig {
                architectures: vec![arch],
                router_kind: RouterKind::Qutrit,
                params: at.params,
                cost: at.cost,
                profile: Some(profile),
                trials,
                seed,
                address_mode: AddressMode::Superposition,
                ..ExperimentConfig::default()
            };
            let mean = run_point(&config, arch, n)?.1.mean;
            if mean > 0.0 {
                mean
            } else {
                analytic
            }
        }
        _ => analytic,
    };
    let hetero_physical = match arch {
        Architecture::FtHetero => ft_resources(n, efficient)?.physical_total,
        Architecture::BbHetero => bb_resources(n, efficient)?.physical_total,
        _ => return Err(HarnessError::NoBound { arch, profile }),
    };
    let uniform_distance = min_uniform_distance(n, hetero_infidelity, &at)?;
    let uniform_physical = uniform_resources(n, uniform_distance)?.physical_total;
    Ok(ComparisonRow {
        n,
        architecture: arch,
        hetero_infidelity,
        hetero_physical,
        uniform_distance,
        uniform_physical,
        ratio: uniform_physical as f64 / hetero_physical as f64,
    })
}
