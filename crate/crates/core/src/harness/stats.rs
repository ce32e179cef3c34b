use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::trajectory::Simulator;

/// z for a two-sided 95% interval.
const Z95: f64 = 1.959_963_984_540_054;

/// Trial counts at or above this use the normal interval.
pub const NORMAL_CI_TRIALS: u64 = 10_000;

/// Neumaier-compensated sum; exact enough that the order of a few million
/// terms does not show up in printed digits.
pub fn compensated_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub trials: u64,
    pub mean: f64,
    pub ci95: (f64, f64),
    /// Standard error of the mean, `s/√trials`.
    pub std_error: f64,
}

impl Estimate {
    /// Summarizes per-trial infidelities, each in `[0, 1]`.
    pub fn from_samples(samples: &[f64]) -> Estimate {
        let trials = samples.len() as u64;
        if trials == 0 {
            return Estimate { trials, mean: 0.0, ci95: (0.0, 0.0), std_error: 0.0 };
        }
        let n = trials as f64;
        let mean = compensated_sum(samples.iter().copied()) / n;
        let var =
            if trials > 1 { compensated_sum(samples.iter().map(|x| (x - mean) * (x - mean))) / (n - 1.0) } else { 0.0 };
        let std_error = (var / n).sqrt();
        let ci95 = if var == 0.0 {
            // Every trial agreed; there is nothing to be uncertain about.
            (mean, mean)
        } else if trials >= NORMAL_CI_TRIALS {
            ((mean - Z95 * std_error).max(0.0), (mean + Z95 * std_error).min(1.0))
        } else {
            wilson(mean, n)
        };
        Estimate { trials, mean, ci95, std_error }
    }
}

/// Wilson score interval with `p̂(1 − p̂)` as the variance proxy, which
/// dominates the variance of any `[0, 1]` variable with that mean.
fn wilson(p: f64, n: f64) -> (f64, f64) {
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0).min(p), (centre + half).min(1.0).max(p))
}

/// Runs `trials` trajectories in parallel. Trial `i` draws from stream `i` of
/// a generator keyed by `seed`, so the result does not depend on scheduling.
pub fn estimate_infidelity(sim: &Simulator<'_>, trials: u64, seed: u64) -> Estimate {
    let samples: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            1.0 - sim.run_trajectory(&mut rng).fidelity
        })
        .collect();
    Estimate::from_samples(&samples)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("need at least 4 points, got {0}")]
    TooFewPoints(usize),
    #[error("only {0} positive points remain after filtering")]
    TooFewPositive(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub exponent: f64,
    pub r_squared: f64,
    pub used_points: usize,
}

/// Least-squares slope of `ln y` against `ln n`. Points with `y ≤ 0` are
/// dropped with a warning.
pub fn fit_scaling(points: &[(f64, f64)]) -> Result<ScalingFit, FitError> {
    if points.len() < 4 {
        return Err(FitError::TooFewPoints(points.len()));
    }
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(n, y)| {
            let ok = y > 0.0 && n > 0.0 && y.is_finite();
            if !ok {
                log::warn!("dropping point n={n} infidelity={y} from scaling fit");
            }
            ok
        })
        .map(|&(n, y)| (n.ln(), y.ln()))
        .collect();
    if logs.len() < 2 {
        return Err(FitError::TooFewPositive(logs.len()));
    }
    let m = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / m;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = logs.iter().map(|p| (p.1 - my).powi(2)).sum();
    let exponent = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let r_squared = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    Ok(ScalingFit { exponent, r_squared, used_points: logs.len() })
}
