//! The Gottwald–Melbourne 0–1 test for chaos.
//!
//! For a scalar series φ(j) and a frequency c, the translation variables
//! `p_c(n) = Σ φ(j) cos(jc)`, `q_c(n) = Σ φ(j) sin(jc)` stay bounded for
//! regular dynamics and diffuse like a random walk for chaotic dynamics. The
//! growth of their mean-square displacement, measured as the correlation
//! between `D_c(n)` and `n`, is `K_c`; the median over random `c` is `K`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::spectrum::series_spectrum;
use super::AnalysisError;
use crate::integrator::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Chaos01Config {
    /// Number of random frequencies c drawn from (π/5, 4π/5).
    pub n_phases: usize,
    /// Target sampling density after downsampling, samples per dominant period.
    pub samples_per_period: f64,
    /// Shortest accepted series after downsampling.
    pub min_len: usize,
    /// Longer series are truncated to their last `max_len` samples.
    pub max_len: usize,
    pub seed: u64,
}

impl Default for Chaos01Config {
    fn default() -> Self {
        Self {
            n_phases: 100,
            samples_per_period: 10.0,
            min_len: 10_000,
            max_len: 40_000,
            seed: 0,
        }
    }
}

/// K of the detected signal of a trajectory.
pub fn chaos01_k(traj: &Trajectory, cfg: &Chaos01Config) -> Result<f64, AnalysisError> {
    chaos01_series(traj.mx(), traj.sample_rate(), cfg)
}

/// Downsample `series` to about `samples_per_period` samples per period of
/// its strongest spectral line, then run the test.
pub fn chaos01_series(series: &[f64], sample_rate: f64, cfg: &Chaos01Config) -> Result<f64, AnalysisError> {
    let stride = downsample_stride(series, sample_rate, cfg.samples_per_period)?;
    let phi: Vec<f64> = series.iter().step_by(stride).copied().collect();
    let start = phi.len().saturating_sub(cfg.max_len);
    chaos01_raw(&phi[start..], cfg)
}

/// Stride that brings the strongest line to about `samples_per_period`
/// samples per period (never below 1).
pub fn downsample_stride(series: &[f64], sample_rate: f64, samples_per_period: f64) -> Result<usize, AnalysisError> {
    check_not_constant(series)?;
    let spec = series_spectrum(series, sample_rate)?;
    let (k, _) = spec.amps[1..]
        .iter()
        .enumerate()
        .fold((0, 0.0), |best, (i, &a)| if a > best.1 { (i + 1, a) } else { best });
    let f_dom = spec.freqs[k];
    Ok(((sample_rate / (samples_per_period * f_dom)).round() as usize).max(1))
}

fn check_not_constant(series: &[f64]) -> Result<(), AnalysisError> {
    let first = series.first().copied().unwrap_or(0.0);
    if series.iter().all(|&v| v == first) {
        return Err(AnalysisError::UndefinedK);
    }
    Ok(())
}

/// The 0–1 test on `phi` as given, without downsampling.
pub fn chaos01_raw(phi: &[f64], cfg: &Chaos01Config) -> Result<f64, AnalysisError> {
    if phi.len() < cfg.min_len {
        return Err(AnalysisError::TooShort {
            what: "0-1 chaos test",
            needed: cfg.min_len,
            got: phi.len(),
        });
    }
    if cfg.n_phases == 0 {
        return Err(AnalysisError::InvalidArgument("n_phases must be positive".into()));
    }
    check_not_constant(phi)?;

    let n = phi.len();
    let ncut = n / 10;
    let mean = phi.iter().sum::<f64>() / n as f64;
    let len = (n + ncut).next_power_of_two();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    let mut prefix = vec![0.0; n + 1];

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut ks: Vec<f64> = (0..cfg.n_phases)
        .map(|_| {
            let c = rng.random_range(PI / 5.0..4.0 * PI / 5.0);
            k_for_phase(phi, mean, c, ncut, &mut buf, &mut prefix, |b| {
                fwd.process(b);
                b.iter_mut().for_each(|z| *z = Complex64::new(z.norm_sqr(), 0.0));
                inv.process(b);
            })
        })
        .collect();
    ks.sort_by(f64::total_cmp);
    let m = ks.len();
    Ok(if m % 2 == 1 {
        ks[m / 2]
    } else {
        0.5 * (ks[m / 2 - 1] + ks[m / 2])
    })
}

/// `K_c` for one frequency. The mean-square displacement
/// `M_c(n) = ⟨|z(j+n) − z(j)|²⟩` of `z = p + iq` is expanded as
/// `|z(j+n)|² + |z(j)|² − 2 Re z(j+n) z̄(j)` with the cross term taken from an
/// FFT autocorrelation.
fn k_for_phase(
    phi: &[f64],
    mean: f64,
    c: f64,
    ncut: usize,
    buf: &mut [Complex64],
    prefix: &mut [f64],
    autocorrelate: impl Fn(&mut [Complex64]),
) -> f64 {
    let n = phi.len();
    let mut z = Complex64::new(0.0, 0.0);
    buf.iter_mut().for_each(|b| *b = Complex64::new(0.0, 0.0));
    for (j, &v) in phi.iter().enumerate() {
        let (s, co) = ((j + 1) as f64 * c).sin_cos();
        z += Complex64::new(v * co, v * s);
        buf[j] = z;
        prefix[j + 1] = prefix[j] + z.norm_sqr();
    }
    autocorrelate(buf);
    let inv_len = 1.0 / buf.len() as f64;
    let osc_norm = mean * mean / (1.0 - c.cos());

    // correlation of (n, D_c(n)) for n = 1..=ncut
    let xs = (1..=ncut).map(|lag| lag as f64);
    let ds: Vec<f64> = (1..=ncut)
        .map(|lag| {
            let cross = buf[lag].re * inv_len;
            let s = (prefix[n] - prefix[lag]) + prefix[n - lag] - 2.0 * cross;
            s / (n - lag) as f64 - osc_norm * (1.0 - (lag as f64 * c).cos())
        })
        .collect();
    pearson(xs, &ds)
}

fn pearson(xs: impl Iterator<Item = f64> + Clone, ys: &[f64]) -> f64 {
    let n = ys.len() as f64;
    let mx = xs.clone().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, &y) in xs.zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if syy == 0.0 {
        return 0.0;
    }
    sxy / (sxx * syy).sqrt()
}
