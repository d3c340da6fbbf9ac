//! Spectral overlap between a clean and a perturbed signal.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::spectrum::{spectrum, Spectrum};
use super::AnalysisError;
use crate::bloch::{SpinState, SystemParams};
use crate::integrator::{integrate, integrate_noisy, IntegrationConfig, IntegrationError, NoiseConfig, NoiseMode};

/// Q = Σ|A₀ A_σ| / √(Σ|A₀|² · Σ|A_σ|²) over a shared frequency grid.
///
/// Q = 1 when the perturbed spectrum is a positive multiple of the clean one
/// and 0 when the two have disjoint support.
pub fn robustness_q(clean: &Spectrum, noisy: &Spectrum) -> Result<f64, AnalysisError> {
    if !clean.same_grid(noisy) {
        return Err(AnalysisError::GridMismatch);
    }
    spectral_overlap(&clean.amps, &noisy.amps)
}

/// Q on raw amplitude slices of equal length.
pub fn spectral_overlap(a: &[f64], b: &[f64]) -> Result<f64, AnalysisError> {
    if a.len() != b.len() {
        return Err(AnalysisError::GridMismatch);
    }
    let (mut cross, mut ea, mut eb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        cross += (x * y).abs();
        ea += x * x;
        eb += y * y;
    }
    if ea == 0.0 || eb == 0.0 {
        return Err(AnalysisError::ZeroEnergy);
    }
    Ok((cross / (ea * eb).sqrt()).min(1.0))
}

#[derive(Debug, Error)]
pub enum RobustnessError {
    #[error(transparent)]
    Integration(#[from] IntegrationError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

/// Q statistics at one noise level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessPoint {
    /// Field noise standard deviation, nT.
    pub sigma_b: f64,
    pub q_mean: f64,
    pub q_std: f64,
    pub q_values: Vec<f64>,
}

/// Mean Q over `repeats` noise realisations at each `sigma_b` (nT), all
/// against the same noise-free reference run. Realisation `r` at level `s`
/// uses a seed derived from `cfg.seed`, `s` and `r`.
pub fn robustness_curve(
    params: &SystemParams,
    init: &SpinState,
    cfg: &IntegrationConfig,
    sigmas: &[f64],
    mode: NoiseMode,
    repeats: usize,
) -> Result<Vec<RobustnessPoint>, RobustnessError> {
    if repeats == 0 {
        return Err(AnalysisError::InvalidArgument("repeats must be positive".into()).into());
    }
    let clean = spectrum(&integrate(params, init, cfg)?)?;
    sigmas
        .iter()
        .enumerate()
        .map(|(si, &sigma)| {
            let q_values = (0..repeats)
                .map(|r| {
                    let seed = crate::sweep::point_seed(cfg.seed, si, r);
                    let noisy = integrate_noisy(params, init, &IntegrationConfig { seed, ..*cfg }, &NoiseConfig::new(sigma, mode))?;
                    Ok(robustness_q(&clean, &spectrum(&noisy)?)?)
                })
                .collect::<Result<Vec<f64>, RobustnessError>>()?;
            let n = q_values.len() as f64;
            let q_mean = q_values.iter().sum::<f64>() / n;
            let q_std = (q_values.iter().map(|q| (q - q_mean).powi(2)).sum::<f64>() / n).sqrt();
            Ok(RobustnessPoint {
                sigma_b: sigma,
                q_mean,
                q_std,
                q_values,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identical_and_disjoint() {
        let a = [0.0, 1.0, 3.0, 0.5, 0.0];
        assert_eq!(spectral_overlap(&a, &a).unwrap(), 1.0);
        let b = [2.0, 0.0, 0.0, 0.0, 7.0];
        assert_eq!(spectral_overlap(&a, &b).unwrap(), 0.0);
        let scaled: Vec<f64> = a.iter().map(|v| 4.0 * v).collect();
        assert!((spectral_overlap(&a, &scaled).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        assert_eq!(spectral_overlap(&[1.0], &[1.0, 2.0]), Err(AnalysisError::GridMismatch));
        assert_eq!(spectral_overlap(&[0.0, 0.0], &[1.0, 2.0]), Err(AnalysisError::ZeroEnergy));
    }

    proptest! {
        #[test]
        fn bounded_and_symmetric(
            pair in (1usize..64).prop_flat_map(|n| (
                prop::collection::vec(0.0f64..10.0, n),
                prop::collection::vec(0.0f64..10.0, n),
            ))
        ) {
            let (a, b) = pair;
            prop_assume!(a.iter().any(|&v| v > 0.0) && b.iter().any(|&v| v > 0.0));
            let q = spectral_overlap(&a, &b).unwrap();
            prop_assert!((0.0..=1.0).contains(&q));
            prop_assert_eq!(q, spectral_overlap(&b, &a).unwrap());
            prop_assert!((spectral_overlap(&a, &a).unwrap() - 1.0).abs() <= 1e-12);
        }
    }
}
