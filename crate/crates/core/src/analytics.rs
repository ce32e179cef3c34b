//! Closed-form fidelity bounds, coherence times and qubit counts.
//!
//! Bounds are reported raw together with a `vacuous` flag when they exceed
//! one; clamping would hide the ratios the distance search depends on.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::Architecture;
use crate::noise::{
    effective_distance, logical_error_rate, CycleCost, DistanceProfile, NoiseError, ProfileKind, SurfaceParams,
};

/// Default search ceiling for [`min_uniform_distance`].
pub const D_MAX: u32 = 199;

/// Deepest tree the closed forms accept; qubit counts stay exact in `u128`.
pub const ANALYTIC_MAX_DEPTH: u32 = 60;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticsError {
    #[error("tree depth outside 1..={ANALYTIC_MAX_DEPTH}")]
    Depth,
    #[error("target infidelity {0} outside (0, 1)")]
    Target(f64),
    #[error("no distance up to {d_max} reaches infidelity {target}")]
    Unreachable { target: f64, d_max: u32 },
    #[error("qubit-router correction is not defined for {0}")]
    NoDelta(Architecture),
    #[error(transparent)]
    Noise(#[from] NoiseError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub n: u32,
    pub params: SurfaceParams,
    pub cost: CycleCost,
}

impl BoundInputs {
    pub fn new(n: u32, params: SurfaceParams, cost: CycleCost) -> Result<Self, AnalyticsError> {
        if !(1..=ANALYTIC_MAX_DEPTH).contains(&n) {
            return Err(AnalyticsError::Depth);
        }
        Ok(BoundInputs { n, params, cost })
    }

    fn eps(&self) -> f64 {
        self.params.epsilon_prime()
    }

    fn p(&self) -> f64 {
        self.params.p_ratio()
    }

    /// `p′^{d_e}`.
    fn pde(&self, d: u32) -> f64 {
        self.p().powi(effective_distance(d).expect("d ≥ 1") as i32)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub value: f64,
    pub vacuous: bool,
}

impl Bound {
    fn new(value: f64) -> Self {
        Bound { value, vacuous: value > 1.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoodFraction {
    pub value: f64,
}

/// Uniform query time `T_n = 4dc(1 + 4n)` in code cycles.
pub fn uniform_query_time(n: u32, d: u32, cost: CycleCost) -> f64 {
    4.0 * d as f64 * cost.c as f64 * (1.0 + 4.0 * n as f64)
}

/// `4 ε_L T_n n` for a uniform-distance bucket brigade.
pub fn uniform_bb_infidelity(inputs: &BoundInputs, d: u32) -> Result<Bound, AnalyticsError> {
    let eps = logical_error_rate(&inputs.params, d)?;
    let n = inputs.n as f64;
    Ok(Bound::new(4.0 * eps * uniform_query_time(inputs.n, d, inputs.cost) * n))
}

/// Expected good fraction `Π_l (1 − ε_l)^{T_l}`, and its first-order form
/// `(1 − ε′)^K` with `K = Σ_l p′^{d_e(l)} T_l`.
pub fn expected_good_fraction(
    inputs: &BoundInputs,
    profile: &DistanceProfile,
    coherence: &dyn Fn(u32) -> f64,
) -> Result<(GoodFraction, GoodFraction), AnalyticsError> {
    let mut log_exact = 0.0;
    let mut k = 0.0;
    for level in 0..=profile.n {
        let d = profile.distance(level)?;
        let eps = logical_error_rate(&inputs.params, d)?;
        let t = coherence(level);
        log_exact += t * (1.0 - eps).ln();
        k += inputs.pde(d) * t;
    }
    let approx = k * (1.0 - inputs.eps()).ln();
    Ok((GoodFraction { value: log_exact.exp().clamp(0.0, 1.0) }, GoodFraction { value: approx.exp().clamp(0.0, 1.0) }))
}

/// `K(n) = Σ_{d=1}^{n+1} p′^{d_e} T_d`, with coherence indexed by distance.
pub fn k_factor(inputs: &BoundInputs, coherence: &dyn Fn(u32) -> f64) -> f64 {
    (1..=inputs.n + 1).map(|d| inputs.pde(d) * coherence(d)).sum()
}

/// `4 ε′ K(n)`.
pub fn hetero_bound(inputs: &BoundInputs, coherence: &dyn Fn(u32) -> f64) -> Bound {
    Bound::new(4.0 * inputs.eps() * k_factor(inputs, coherence))
}

/// Router coherence time at level `j` of the block-routing tree:
/// `Σ_{i=j}^{n−1} [(n−i+2)·2(n−i+1)c + (n−i+1)s]`.
pub fn ft_coherence_time(inputs: &BoundInputs, j: u32) -> f64 {
    let (n, c, s) = (inputs.n, inputs.cost.c as f64, inputs.cost.s as f64);
    (j..n)
        .map(|i| {
            let d = (n - i + 1) as f64;
            (d + 1.0) * 2.0 * d * c + d * s
        })
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FtBound {
    /// Finite double sum.
    pub exact: Bound,
    /// `n → ∞` closed form `4 ε′ K′`.
    pub closed_form: f64,
}

/// `4ε′ Σ_{d=1}^{n+1} p′^{d_e}(d−1) Σ_{d′=2}^{d} (d′+1)(2d′c+s)`.
pub fn ft_infidelity_bound(inputs: &BoundInputs) -> FtBound {
    let (c, s) = (inputs.cost.c as f64, inputs.cost.s as f64);
    let mut inner = 0.0;
    let mut sum = 0.0;
    for d in 1..=inputs.n + 1 {
        if d >= 2 {
            let dp = d as f64;
            inner += (dp + 1.0) * (2.0 * dp * c + s);
        }
        sum += inputs.pde(d) * (d as f64 - 1.0) * inner;
    }
    FtBound { exact: Bound::new(4.0 * inputs.eps() * sum), closed_form: 4.0 * inputs.eps() * ft_k_prime(inputs) }
}

/// Limit of the inner sum of [`ft_infidelity_bound`] as `n → ∞`.
///
/// Pairing `d = 2m − 1, 2m` (both with `d_e = m`) turns the sum into
/// `Σ_m p^m · poly(m)`, which resolves into the three rational terms below.
pub fn ft_k_prime(inputs: &BoundInputs) -> f64 {
    let p = inputs.p();
    let (c, s) = (inputs.cost.c as f64, inputs.cost.s as f64);
    let q = 1.0 - p;
    let a0 = p * (5.0 * p * p + 10.0 * p + 1.0) / q.powi(3);
    let a1 = p * (-3.0 * p.powi(3) + 20.0 * p * p + 29.0 * p + 2.0) / q.powi(4);
    let a2 = p * (3.0 * p.powi(4) + 15.0 * p.powi(3) + 141.0 * p * p + 93.0 * p + 4.0) / q.powi(5);
    s * a0 + (s + 2.0 * c) * a1 + 2.0 * c * a2
}

/// Pipelined-tree coherence time `T_i = 2nc(1 + 4(n − i))`.
pub fn bb_coherence_time(inputs: &BoundInputs, i: u32) -> f64 {
    let (n, c) = (inputs.n as f64, inputs.cost.c as f64);
    2.0 * n * c * (1.0 + 4.0 * (inputs.n.saturating_sub(i)) as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BbBound {
    pub exact: Bound,
    /// `n → ∞` limit of the sum with the true effective distance:
    /// `8ε′nc · p(6 + 10p)/(1 − p)²`.
    pub asymptotic: f64,
    /// The smoother form `8ε′nc · √p(1 + 3√p)/(1 − √p)²`, which is the same
    /// series with `d_e` replaced by `d/2`.
    pub smooth: f64,
}

/// `4ε′ · 2nc · Σ_{d=1}^{n+1} p′^{d_e}(4d − 3)`.
pub fn bb_infidelity_bound(inputs: &BoundInputs) -> BbBound {
    let p = inputs.p();
    let pref = 8.0 * inputs.eps() * inputs.n as f64 * inputs.cost.c as f64;
    let sum: f64 = (1..=inputs.n + 1).map(|d| inputs.pde(d) * (4.0 * d as f64 - 3.0)).sum();
    let r = p.sqrt();
    BbBound {
        exact: Bound::new(pref * sum),
        asymptotic: pref * p * (6.0 + 10.0 * p) / (1.0 - p).powi(2),
        smooth: pref * r * (1.0 + 3.0 * r) / (1.0 - r).powi(2),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerResource {
    pub level: u32,
    pub logical_qubits: u64,
    pub distance: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceEstimate {
    pub per_layer: Vec<LayerResource>,
    pub physical_total: u128,
}

/// Surface-code packing: `3d²` physical qubits per logical qubit.
fn packed(per_layer: Vec<LayerResource>) -> ResourceEstimate {
    let physical_total = per_layer.iter().map(|l| 3 * l.logical_qubits as u128 * (l.distance as u128).pow(2)).sum();
    ResourceEstimate { per_layer, physical_total }
}

fn hetero_profile(n: u32, efficient: bool) -> DistanceProfile {
    let kind = if efficient { ProfileKind::OddPaired } else { ProfileKind::Linear };
    DistanceProfile { kind, n }
}

/// Block-routing tree: level `i` holds `2^i (n − i + 2)` logical qubits.
pub fn ft_resources(n: u32, efficient: bool) -> Result<ResourceEstimate, AnalyticsError> {
    if !(1..=ANALYTIC_MAX_DEPTH).contains(&n) {
        return Err(AnalyticsError::Depth);
    }
    let prof = hetero_profile(n, efficient);
    Ok(packed(
        (0..=n)
            .map(|i| LayerResource {
                level: i,
                logical_qubits: (1u64 << i) * (n - i + 2) as u64,
                distance: prof.distance(i).unwrap(),
            })
            .collect(),
    ))
}

/// Pipelined tree: level `i` holds `3 · 2^i` logical qubits.
pub fn bb_resources(n: u32, efficient: bool) -> Result<ResourceEstimate, AnalyticsError> {
    if !(1..=ANALYTIC_MAX_DEPTH).contains(&n) {
        return Err(AnalyticsError::Depth);
    }
    let prof = hetero_profile(n, efficient);
    Ok(packed(
        (0..=n)
            .map(|i| LayerResource { level: i, logical_qubits: 3 * (1u64 << i), distance: prof.distance(i).unwrap() })
            .collect(),
    ))
}

/// Uniform tree at distance `d`. The total is the `18 d² 2^n` approximation;
/// the per-layer rows give the exact packing if needed.
pub fn uniform_resources(n: u32, d: u32) -> Result<ResourceEstimate, AnalyticsError> {
    if !(1..=ANALYTIC_MAX_DEPTH).contains(&n) {
        return Err(AnalyticsError::Depth);
    }
    if d < 1 {
        return Err(NoiseError::Distance(d).into());
    }
    let per_layer = (0..=n).map(|i| LayerResource { level: i, logical_qubits: 3 * (1u64 << i), distance: d }).collect();
    Ok(ResourceEstimate { per_layer, physical_total: 18 * (d as u128).pow(2) * (1u128 << n) })
}

/// Smallest uniform distance whose bound does not exceed `target`.
///
/// The bound is not monotone between an odd distance and the even one after
/// it (same `d_e`, longer query), so this scans rather than bisects.
pub fn min_uniform_distance(n: u32, target: f64, inputs: &BoundInputs) -> Result<u32, AnalyticsError> {
    min_uniform_distance_upto(n, target, inputs, D_MAX)
}

pub fn min_uniform_distance_upto(n: u32, target: f64, inputs: &BoundInputs, d_max: u32) -> Result<u32, AnalyticsError> {
    if !(target > 0.0 && target < 1.0) {
        return Err(AnalyticsError::Target(target));
    }
    let at = BoundInputs { n, ..*inputs };
    for d in 1..=d_max {
        if uniform_bb_infidelity(&at, d)?.value <= target {
            return Ok(d);
        }
    }
    Err(AnalyticsError::Unreachable { target, d_max })
}

/// Extra bad-branch weight δ from errors that qubit routers carry into good
/// branches, with every propagation probability taken as one.
///
/// The sum runs over distances `d` with `(n − d)` downstream levels exposed;
/// `T_d` is the coherence time of a level of distance `d` measured from its
/// own first operation, which depends only on the subtree below it.
pub fn qubit_router_delta(arch: Architecture, inputs: &BoundInputs) -> Result<f64, AnalyticsError> {
    let n = inputs.n;
    let c = inputs.cost.c as f64;
    let eps = |d: u32| logical_error_rate(&inputs.params, d).expect("d ≥ 1");
    match arch {
        Architecture::BbHetero => Ok((1..=n + 1)
            .map(|d| {
                let t = 2.0 * d as f64 * c * (1.0 + 4.0 * (d - 1) as f64);
                n.saturating_sub(d) as f64 * eps(d) * t
            })
            .sum()),
        Architecture::FtHetero => Ok((1..=n + 1)
            .map(|d| {
                let t = ft_coherence_time(inputs, n + 1 - d);
                n.saturating_sub(d) as f64 * (d - 1) as f64 * eps(d) * t
            })
            .sum()),
        // Uniform tree: ~n² leaf-ward routers on the default-direction chains
        // hanging off the query path, each exposed for the whole query.
        Architecture::UniformBb => Err(AnalyticsError::NoDelta(arch)),
        Architecture::Walker => Err(AnalyticsError::NoDelta(arch)),
    }
}

/// Uniform-tree analogue of [`qubit_router_delta`]: `ε_L · T_n · n²`.
pub fn uniform_qubit_delta(inputs: &BoundInputs, d: u32) -> Result<f64, AnalyticsError> {
    let eps = logical_error_rate(&inputs.params, d)?;
    let n = inputs.n as f64;
    Ok(eps * uniform_query_time(inputs.n, d, inputs.cost) * n * n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inputs(n: u32, p: f64) -> BoundInputs {
        BoundInputs::new(n, SurfaceParams::with_zero_allowed(0.03, p).unwrap(), CycleCost::default()).unwrap()
    }

    #[test]
    fn uniform_bound_hand_value() {
        let b = uniform_bb_infidelity(&inputs(4, 0.1), 5).unwrap();
        assert!((b.value - 0.3264).abs() < 1e-12);
        assert!(!b.vacuous);
    }

    #[test]
    fn ft_coherence_single_term() {
        let i = inputs(6, 0.1);
        assert_eq!(ft_coherence_time(&i, 5), 26.0);
        assert_eq!(ft_coherence_time(&i, 6), 0.0);
        for j in 0..6 {
            assert!(ft_coherence_time(&i, j) > ft_coherence_time(&i, j + 1));
        }
    }

    #[test]
    fn bb_coherence_values() {
        let i = inputs(4, 0.1);
        assert_eq!(bb_coherence_time(&i, 0), 272.0);
        assert_eq!(bb_coherence_time(&i, 4), 16.0);
        let diffs: Vec<f64> = (0..4).map(|l| bb_coherence_time(&i, l) - bb_coherence_time(&i, l + 1)).collect();
        assert!(diffs.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn resource_hand_values() {
        assert_eq!(ft_resources(1, false).unwrap().physical_total, 48);
        assert_eq!(bb_resources(1, false).unwrap().physical_total, 54);
        assert_eq!(uniform_resources(1, 1).unwrap().physical_total, 36);
        assert_eq!(uniform_resources(10, 5).unwrap().physical_total, 460_800);
        let ft = ft_resources(4, false).unwrap();
        let got: Vec<(u64, u32)> = ft.per_layer[..3].iter().map(|l| (l.logical_qubits, l.distance)).collect();
        assert_eq!(got, vec![(6, 5), (10, 4), (16, 3)]);
        let bb = bb_resources(4, false).unwrap();
        let got: Vec<u64> = bb.per_layer[..3].iter().map(|l| l.logical_qubits).collect();
        assert_eq!(got, vec![3, 6, 12]);
    }

    #[test]
    fn zero_noise_bounds_vanish() {
        let i = inputs(8, 0.0);
        assert_eq!(ft_infidelity_bound(&i).exact.value, 0.0);
        assert_eq!(bb_infidelity_bound(&i).exact.value, 0.0);
        assert_eq!(uniform_bb_infidelity(&i, 3).unwrap().value, 0.0);
        assert_eq!(qubit_router_delta(Architecture::BbHetero, &i).unwrap(), 0.0);
        assert_eq!(qubit_router_delta(Architecture::FtHetero, &i).unwrap(), 0.0);
        assert_eq!(hetero_bound(&i, &|_| 0.0).value, 0.0);
        assert_eq!(k_factor(&i, &|d| d as f64), 0.0);
    }

    #[test]
    fn min_distance_edges() {
        let i = inputs(6, 0.1);
        let at1 = uniform_bb_infidelity(&i, 1).unwrap().value;
        if at1 < 1.0 {
            assert_eq!(min_uniform_distance(6, at1, &i).unwrap(), 1);
        }
        assert!(min_uniform_distance(6, 0.0, &i).is_err());
        assert!(matches!(min_uniform_distance_upto(6, 1e-300, &i, 5), Err(AnalyticsError::Unreachable { .. })));
    }
}
