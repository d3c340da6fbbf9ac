//! Diagnostics computed from trajectories.

pub mod chaos01;
pub mod classify;
pub mod poincare;
pub mod robustness;
pub mod spectrum;

use thiserror::Error;

pub use chaos01::{chaos01_k, chaos01_raw, chaos01_series, Chaos01Config};
pub use classify::{classify_regime, Regime, RegimeLabel, Thresholds};
pub use poincare::{poincare_section, poincare_section_with, PoincareSection, SectionPlane};
pub use robustness::{robustness_curve, robustness_q, RobustnessError, RobustnessPoint};
pub use spectrum::{detect_peaks, spectrum, Peak, PeakSet, Spectrum};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("{what} needs at least {needed} samples, got {got}")]
    TooShort {
        what: &'static str,
        needed: usize,
        got: usize,
    },
    #[error("spectrum is empty")]
    EmptySpectrum,
    #[error("spectra are on different frequency grids")]
    GridMismatch,
    #[error("spectrum has zero energy")]
    ZeroEnergy,
    #[error("0-1 test is undefined for a constant signal")]
    UndefinedK,
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
