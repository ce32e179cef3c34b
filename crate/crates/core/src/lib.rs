//! Simulation and analytics for QRAM trees whose code distance varies by level.
//!
//! * [`branch_state`]: sparse pure states over classical basis words.
//! * [`noise`]: surface-code logical error rates and Pauli sampling.
//! * [`circuit`]: layered query schedules for the tree layouts.
//! * [`analytics`]: closed-form bounds, coherence times, qubit counts.
//! * [`harness`]: Monte Carlo estimation, sweeps, reports and config.

pub mod analytics;
pub mod branch_state;
pub mod circuit;
pub mod harness;
pub mod noise;
