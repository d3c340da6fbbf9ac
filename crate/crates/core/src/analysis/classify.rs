//! Regime labels from the detected signal: no signal, limit cycle,
//! quasi-periodic orbit, or chaos.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::chaos01::{chaos01_k, Chaos01Config};
use super::spectrum::{detect_peaks, spectrum};
use super::AnalysisError;
use crate::bloch::SystemParams;
use crate::integrator::Trajectory;

/// Decision thresholds. All are relative to the signal scale except
/// `eps_sig`, which is relative to M₀.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// RMS(M_x) below `eps_sig·M₀` means no self-oscillation.
    pub eps_sig: f64,
    /// Spectral lines below this fraction of the strongest line are ignored.
    pub rel_threshold: f64,
    pub min_separation_hz: f64,
    /// K at or above this is chaos.
    pub k_threshold: f64,
    /// Slack around the Larmor interval when checking where a single line
    /// sits. Covers the feedback-induced pull of the locked frequency, which
    /// stays finite as Δω → 0.
    pub larmor_margin_hz: f64,
    pub chaos: Chaos01Config,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            eps_sig: 1e-3,
            rel_threshold: 0.2,
            min_separation_hz: 5.0,
            k_threshold: 0.8,
            larmor_margin_hz: 15.0,
            chaos: Chaos01Config::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Regime {
    NoSignal,
    LimitCycle,
    QuasiPeriodic,
    Chaos,
}

impl Regime {
    pub const ALL: [Regime; 4] = [
        Regime::NoSignal,
        Regime::LimitCycle,
        Regime::QuasiPeriodic,
        Regime::Chaos,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::NoSignal => "NoSignal",
            Regime::LimitCycle => "LimitCycle",
            Regime::QuasiPeriodic => "QuasiPeriodic",
            Regime::Chaos => "Chaos",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Regime {
    type Err = AnalysisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Regime::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| AnalysisError::InvalidArgument(format!("unknown regime `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeLabel {
    pub regime: Regime,
    /// 0–1 test statistic, computed only when the spectrum is not a single
    /// line between the Larmor frequencies.
    pub k_statistic: Option<f64>,
    pub peak_count: usize,
    /// Frequency of the strongest line, Hz.
    pub dominant_freq_hz: Option<f64>,
}

impl RegimeLabel {
    fn no_signal() -> Self {
        Self {
            regime: Regime::NoSignal,
            k_statistic: None,
            peak_count: 0,
            dominant_freq_hz: None,
        }
    }
}

pub fn rms(series: &[f64]) -> f64 {
    (series.iter().map(|v| v * v).sum::<f64>() / series.len().max(1) as f64).sqrt()
}

/// Decision cascade:
/// 1. RMS(M_x) < ε·M₀ → `NoSignal`;
/// 2. exactly one significant line lying between the two Larmor
///    frequencies → `LimitCycle`;
/// 3. otherwise the 0–1 test decides between `Chaos` (K ≥ K_th) and
///    `QuasiPeriodic`.
pub fn classify_regime(
    traj: &Trajectory,
    params: &SystemParams,
    th: &Thresholds,
) -> Result<RegimeLabel, AnalysisError> {
    if rms(traj.mx()) < th.eps_sig * params.m0() {
        return Ok(RegimeLabel::no_signal());
    }
    let spec = spectrum(traj)?;
    let peaks = detect_peaks(&spec, th.rel_threshold, th.min_separation_hz)?;
    let Some(dominant) = peaks.dominant().map(|p| p.freq) else {
        return Ok(RegimeLabel::no_signal());
    };
    let (lo, hi) = params.larmor_bounds();
    let (lo, hi) = (lo / (2.0 * PI) - th.larmor_margin_hz, hi / (2.0 * PI) + th.larmor_margin_hz);
    let mut label = RegimeLabel {
        regime: Regime::LimitCycle,
        k_statistic: None,
        peak_count: peaks.len(),
        dominant_freq_hz: Some(dominant),
    };
    if peaks.len() == 1 && (lo..=hi).contains(&dominant) {
        return Ok(label);
    }
    let k = match chaos01_k(traj, &th.chaos) {
        Ok(k) => k,
        Err(AnalysisError::UndefinedK) => return Ok(RegimeLabel::no_signal()),
        Err(e) => return Err(e),
    };
    label.k_statistic = Some(k);
    label.regime = if k >= th.k_threshold {
        Regime::Chaos
    } else {
        Regime::QuasiPeriodic
    };
    Ok(label)
}
