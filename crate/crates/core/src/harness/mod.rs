//! Monte Carlo experiments and their plumbing.

pub mod config;
pub mod experiment;
pub mod report;
pub mod stats;
pub mod trajectory;

pub use config::{DatabaseMode, DepthRange, ExperimentConfig, Format};
pub use experiment::{
    compare_resources, matching_bound, run_point, run_sweep, ComparisonRow, HarnessError, HeteroSource,
};
pub use report::{emit_report, ExperimentReport, ReportRow};
pub use stats::{compensated_sum, estimate_infidelity, fit_scaling, Estimate, FitError, ScalingFit};
pub use trajectory::{apply, classical_query, AddressMode, SimError, Simulator, TrialResult};
