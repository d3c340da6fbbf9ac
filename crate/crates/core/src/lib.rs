//! Simulation and analysis of two spin ensembles coupled through a common
//! feedback field.
//!
//! * [`bloch`]: parameters, state and the nonlinear Bloch vector field.
//! * [`integrator`]: fixed-step RK4 trajectories, with optional field noise.
//! * [`analysis`]: spectra, spectral lines, Poincaré sections, the 0–1 chaos
//!   test, the spectral robustness metric and regime classification.
//! * [`sweep`]: parallel, resumable phase diagrams over (Δf, α/α_c).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bloch;
pub mod integrator;
pub mod sweep;

pub use bloch::{
    critical_alpha, default_initial_state, observable_mx, vector_field, CellParams, SpinState, SystemParams,
};
pub use integrator::{integrate, integrate_noisy, IntegrationConfig, NoiseConfig, NoiseMode, Trajectory};

/// Crate version, embedded in exported files.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
