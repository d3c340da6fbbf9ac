//! Hann-windowed magnitude spectra and spectral-line detection.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::integrator::Trajectory;

/// Shortest series accepted by [`spectrum`].
pub const MIN_SPECTRUM_LEN: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    Hann,
}

/// One-sided magnitude spectrum, DC to Nyquist.
///
/// Amplitudes are corrected for the window's coherent gain: a unit-amplitude
/// sinusoid centred on a bin reads 1.0.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub freqs: Vec<f64>,
    pub amps: Vec<f64>,
    pub bin_width: f64,
    pub window: WindowKind,
    /// Transform length after zero padding.
    pub n_fft: usize,
    /// Sum of the window coefficients.
    pub window_sum: f64,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn nyquist(&self) -> f64 {
        *self.freqs.last().unwrap_or(&0.0)
    }

    /// Σ|x_n w_n|² reconstructed from the one-sided magnitudes (Parseval).
    pub fn windowed_energy(&self) -> f64 {
        let last = self.amps.len() - 1;
        let half = 0.5 * self.window_sum;
        let mut sum = 0.0;
        for (k, &a) in self.amps.iter().enumerate() {
            if k == 0 || k == last {
                let x = a * self.window_sum;
                sum += x * x;
            } else {
                let x = a * half;
                sum += 2.0 * x * x;
            }
        }
        sum / self.n_fft as f64
    }

    pub fn same_grid(&self, other: &Spectrum) -> bool {
        self.amps.len() == other.amps.len() && self.bin_width == other.bin_width
    }
}

/// Symmetric Hann window of length `n`.
pub fn hann(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    let denom = (n - 1) as f64;
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / denom).cos())
        .collect()
}

/// Spectrum of the detected signal `M_x` of a trajectory.
pub fn spectrum(traj: &Trajectory) -> Result<Spectrum, AnalysisError> {
    series_spectrum(traj.mx(), traj.sample_rate())
}

/// Mean-removed, Hann-windowed, power-of-two zero-padded magnitude spectrum.
pub fn series_spectrum(series: &[f64], sample_rate: f64) -> Result<Spectrum, AnalysisError> {
    if series.len() < MIN_SPECTRUM_LEN {
        return Err(AnalysisError::TooShort {
            what: "spectrum",
            needed: MIN_SPECTRUM_LEN,
            got: series.len(),
        });
    }
    let n = series.len();
    let first = series[0];
    let mean = if series.iter().all(|&v| v == first) {
        first
    } else {
        series.iter().sum::<f64>() / n as f64
    };
    let window = hann(n);
    let window_sum: f64 = window.iter().sum();
    let n_fft = n.next_power_of_two();

    let mut buf = vec![Complex64::new(0.0, 0.0); n_fft];
    for ((b, &x), &w) in buf.iter_mut().zip(series).zip(&window) {
        b.re = (x - mean) * w;
    }
    FftPlanner::new().plan_fft_forward(n_fft).process(&mut buf);

    let half = n_fft / 2;
    let bin_width = sample_rate / n_fft as f64;
    let freqs = (0..=half).map(|k| k as f64 * bin_width).collect();
    let amps = (0..=half)
        .map(|k| {
            let scale = if k == 0 || k == half { 1.0 } else { 2.0 };
            scale * buf[k].norm() / window_sum
        })
        .collect();
    Ok(Spectrum {
        freqs,
        amps,
        bin_width,
        window: WindowKind::Hann,
        n_fft,
        window_sum,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    /// Interpolated line frequency, Hz.
    pub freq: f64,
    /// Interpolated line amplitude.
    pub amp: f64,
    pub bin: usize,
}

/// Detected spectral lines, strongest first.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PeakSet {
    pub peaks: Vec<Peak>,
}

impl PeakSet {
    pub fn len(&self) -> usize {
        self.peaks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.peaks.is_empty()
    }

    pub fn dominant(&self) -> Option<&Peak> {
        self.peaks.first()
    }
}

/// Local maxima at or above `rel_threshold` times the largest non-DC
/// amplitude, thinned so no two surviving peaks lie closer than
/// `min_separation` Hz. The DC and Nyquist bins never count as peaks.
pub fn detect_peaks(spec: &Spectrum, rel_threshold: f64, min_separation: f64) -> Result<PeakSet, AnalysisError> {
    if spec.amps.len() < 3 {
        return Err(AnalysisError::EmptySpectrum);
    }
    if !(rel_threshold > 0.0 && rel_threshold < 1.0) {
        return Err(AnalysisError::InvalidArgument(format!(
            "rel_threshold must lie in (0, 1), got {rel_threshold}"
        )));
    }
    let a = &spec.amps;
    let global = a[1..].iter().copied().fold(0.0, f64::max);
    if global <= 0.0 {
        return Ok(PeakSet::default());
    }
    let floor = rel_threshold * global;
    let mut candidates: Vec<Peak> = (1..a.len() - 1)
        .filter(|&k| a[k] >= floor && a[k] > a[k - 1] && a[k] >= a[k + 1])
        .map(|k| interpolate(spec, k))
        .collect();
    candidates.sort_by(|x, y| y.amp.total_cmp(&x.amp).then(x.bin.cmp(&y.bin)));

    let mut peaks: Vec<Peak> = Vec::new();
    for c in candidates {
        if peaks.iter().all(|p| (p.freq - c.freq).abs() >= min_separation) {
            peaks.push(c);
        }
    }
    Ok(PeakSet { peaks })
}

/// Log-parabolic refinement of a local maximum, which is close to exact for
/// the Gaussian-like Hann main lobe.
fn interpolate(spec: &Spectrum, k: usize) -> Peak {
    let (l, c, r) = (spec.amps[k - 1], spec.amps[k], spec.amps[k + 1]);
    let at_bin = Peak {
        freq: spec.freqs[k],
        amp: c,
        bin: k,
    };
    if l <= 0.0 || r <= 0.0 {
        return at_bin;
    }
    let (ll, lc, lr) = (l.ln(), c.ln(), r.ln());
    let denom = ll - 2.0 * lc + lr;
    if denom >= 0.0 {
        return at_bin;
    }
    let delta = (0.5 * (ll - lr) / denom).clamp(-0.5, 0.5);
    Peak {
        freq: (k as f64 + delta) * spec.bin_width,
        amp: (lc - 0.25 * (ll - lr) * delta).exp(),
        bin: k,
    }
}
