//! Fixed-step fourth-order Runge–Kutta integration of the dual-cell system,
//! with optional piecewise-constant magnetic-field noise along `z`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bloch::{linear_solution, observable_mx, rhs, BlochError, SpinState, SystemParams};

/// Largest accepted `dt·max|ω|` without the coarse-step override.
pub const MAX_PHASE_PER_STEP: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrationError {
    #[error("invalid integration config: {0}")]
    InvalidConfig(String),
    #[error(
        "step too coarse: dt·max|ω| = {phase_per_step:.4} exceeds {MAX_PHASE_PER_STEP} \
         (set allow_coarse_step to override)"
    )]
    StepTooCoarse { phase_per_step: f64 },
    #[error("state became non-finite at t = {time:.6e} s")]
    NonFinite { time: f64 },
    #[error(transparent)]
    State(#[from] BlochError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationConfig {
    /// Step size, seconds.
    pub dt: f64,
    /// Total simulated time, seconds.
    pub t_total: f64,
    /// Samples before this time are discarded, seconds.
    pub t_transient: f64,
    /// Record every `sample_stride`-th step.
    pub sample_stride: usize,
    /// Seed for the noise generator.
    pub seed: u64,
    /// Skip the `dt·max|ω| < 0.1` check.
    pub allow_coarse_step: bool,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        Self {
            dt: 1e-5,
            t_total: 4.0,
            t_transient: 1.0,
            sample_stride: 2,
            seed: 0,
            allow_coarse_step: false,
        }
    }
}

impl IntegrationConfig {
    pub fn validate(&self, params: &SystemParams) -> Result<(), IntegrationError> {
        let bad = |msg: String| Err(IntegrationError::InvalidConfig(msg));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_total.is_finite() && self.t_transient >= 0.0 && self.t_transient < self.t_total) {
            return bad(format!(
                "need 0 <= t_transient < t_total, got t_transient = {}, t_total = {}",
                self.t_transient, self.t_total
            ));
        }
        if self.sample_stride == 0 {
            return bad("sample_stride must be at least 1".into());
        }
        let [w1, w2] = params.larmor();
        let phase_per_step = self.dt * w1.abs().max(w2.abs());
        if !self.allow_coarse_step && phase_per_step >= MAX_PHASE_PER_STEP {
            return Err(IntegrationError::StepTooCoarse { phase_per_step });
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_total / self.dt).round() as usize
    }

    fn first_recorded_step(&self) -> usize {
        let k_tr = (self.t_transient / self.dt - 1e-9).ceil().max(0.0) as usize;
        k_tr.div_ceil(self.sample_stride) * self.sample_stride
    }

    pub fn sample_interval(&self) -> f64 {
        self.dt * self.sample_stride as f64
    }
}

/// How the field noise is shared between the cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseMode {
    /// One draw per step applied to both cells.
    #[default]
    Common,
    /// Separate draws per cell.
    Independent,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Standard deviation of the per-step field noise, nT.
    pub sigma_b: f64,
    pub enabled: bool,
    pub mode: NoiseMode,
}

impl NoiseConfig {
    pub fn new(sigma_b: f64, mode: NoiseMode) -> Self {
        Self {
            sigma_b,
            enabled: true,
            mode,
        }
    }

    pub fn common(sigma_b: f64) -> Self {
        Self::new(sigma_b, NoiseMode::Common)
    }

    pub fn independent(sigma_b: f64) -> Self {
        Self::new(sigma_b, NoiseMode::Independent)
    }
}

/// Uniformly sampled solution together with the detected signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    t0: f64,
    dt_sample: f64,
    states: Vec<SpinState>,
    mx: Vec<f64>,
}

impl Trajectory {
    pub fn from_states(t0: f64, dt_sample: f64, states: Vec<SpinState>) -> Result<Self, IntegrationError> {
        if states.len() < 2 {
            return Err(IntegrationError::InvalidConfig(format!(
                "trajectory needs at least 2 samples, got {}",
                states.len()
            )));
        }
        if !(dt_sample > 0.0) {
            return Err(IntegrationError::InvalidConfig(format!(
                "sample spacing must be positive, got {dt_sample}"
            )));
        }
        let mx = states.iter().map(observable_mx).collect();
        Ok(Self {
            t0,
            dt_sample,
            states,
            mx,
        })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt_sample(&self) -> f64 {
        self.dt_sample
    }

    pub fn sample_rate(&self) -> f64 {
        1.0 / self.dt_sample
    }

    pub fn states(&self) -> &[SpinState] {
        &self.states
    }

    pub fn mx(&self) -> &[f64] {
        &self.mx
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt_sample
    }

    /// Every component multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let states = self
            .states
            .iter()
            .map(|s| SpinState(s.0.map(|v| v * factor)))
            .collect();
        Self::from_states(self.t0, self.dt_sample, states).expect("length preserved")
    }
}

#[inline(always)]
fn axpy(m: &[f64; 6], h: f64, k: &[f64; 6]) -> [f64; 6] {
    std::array::from_fn(|i| m[i] + h * k[i])
}

#[inline(always)]
fn rk4_step(m: &[f64; 6], w1: f64, w2: f64, p: &SystemParams, dt: f64) -> [f64; 6] {
    let half = 0.5 * dt;
    let k1 = rhs(m, w1, w2, p);
    let k2 = rhs(&axpy(m, half, &k1), w1, w2, p);
    let k3 = rhs(&axpy(m, half, &k2), w1, w2, p);
    let k4 = rhs(&axpy(m, dt, &k3), w1, w2, p);
    let sixth = dt / 6.0;
    std::array::from_fn(|i| m[i] + sixth * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

fn run<F>(
    params: &SystemParams,
    init: &SpinState,
    cfg: &IntegrationConfig,
    mut larmor: F,
) -> Result<Trajectory, IntegrationError>
where
    F: FnMut() -> [f64; 2],
{
    cfg.validate(params)?;
    init.validate()?;
    let n = cfg.steps();
    let k0 = cfg.first_recorded_step();
    let stride = cfg.sample_stride;
    let mut states = Vec::with_capacity(n.saturating_sub(k0) / stride + 1);
    let mut m = init.0;
    for k in 0..=n {
        if k >= k0 && (k - k0).is_multiple_of(stride) {
            states.push(SpinState(m));
        }
        if k == n {
            break;
        }
        let [w1, w2] = larmor();
        m = rk4_step(&m, w1, w2, params, cfg.dt);
        if !m.iter().all(|v| v.is_finite()) {
            return Err(IntegrationError::NonFinite {
                time: (k + 1) as f64 * cfg.dt,
            });
        }
    }
    Trajectory::from_states(k0 as f64 * cfg.dt, cfg.sample_interval(), states)
}

/// Deterministic RK4 integration of the coupled Bloch equations.
pub fn integrate(
    params: &SystemParams,
    init: &SpinState,
    cfg: &IntegrationConfig,
) -> Result<Trajectory, IntegrationError> {
    let w = params.larmor();
    run(params, init, cfg, || w)
}

/// RK4 integration with a Gaussian field perturbation `b ~ N(0, σ_b²)` along
/// `z`, redrawn every step and held constant across it. The Larmor
/// frequencies become `ω_i + γ·b_i`.
pub fn integrate_noisy(
    params: &SystemParams,
    init: &SpinState,
    cfg: &IntegrationConfig,
    noise: &NoiseConfig,
) -> Result<Trajectory, IntegrationError> {
    if !(noise.sigma_b >= 0.0 && noise.sigma_b.is_finite()) {
        return Err(IntegrationError::InvalidConfig(format!(
            "sigma_b must be non-negative, got {}",
            noise.sigma_b
        )));
    }
    if !noise.enabled || noise.sigma_b == 0.0 {
        return integrate(params, init, cfg);
    }
    let [w1, w2] = params.larmor();
    let scale = params.gamma() * noise.sigma_b;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    match noise.mode {
        NoiseMode::Common => run(params, init, cfg, || {
            let z: f64 = StandardNormal.sample(&mut rng);
            [w1 + scale * z, w2 + scale * z]
        }),
        NoiseMode::Independent => run(params, init, cfg, || {
            let z1: f64 = StandardNormal.sample(&mut rng);
            let z2: f64 = StandardNormal.sample(&mut rng);
            [w1 + scale * z1, w2 + scale * z2]
        }),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    /// Least-squares slope of log(error) against log(dt).
    pub order: f64,
    pub dts: Vec<f64>,
    /// Maximum absolute deviation from the closed-form solution, per dt.
    pub errors: Vec<f64>,
    /// Some error sat at the floating-point floor, so the slope is unreliable.
    pub inconclusive: bool,
}

/// Errors below this (relative to M₀) are treated as round-off.
const ERROR_FLOOR: f64 = 1e-13;

/// Empirical order of accuracy against the closed-form α = 0 solution over
/// `[0, horizon]`.
pub fn convergence_order(
    params: &SystemParams,
    init: &SpinState,
    dt_list: &[f64],
    horizon: f64,
) -> Result<ConvergenceReport, IntegrationError> {
    if dt_list.len() < 3 {
        return Err(IntegrationError::InvalidConfig(format!(
            "convergence test needs at least 3 step sizes, got {}",
            dt_list.len()
        )));
    }
    if dt_list.windows(2).any(|w| !(w[1] < w[0])) || dt_list.iter().any(|&dt| !(dt > 0.0)) {
        return Err(IntegrationError::InvalidConfig(
            "step sizes must be positive and strictly decreasing".into(),
        ));
    }
    if params.alpha() != 0.0 {
        return Err(IntegrationError::InvalidConfig(
            "convergence test requires alpha = 0 (closed-form solution)".into(),
        ));
    }
    let mut errors = Vec::with_capacity(dt_list.len());
    for &dt in dt_list {
        let cfg = IntegrationConfig {
            dt,
            t_total: horizon,
            t_transient: 0.0,
            sample_stride: 1,
            seed: 0,
            allow_coarse_step: true,
        };
        let traj = integrate(params, init, &cfg)?;
        let err = traj
            .states()
            .iter()
            .enumerate()
            .map(|(k, s)| {
                let exact = linear_solution(params, init, traj.time(k)).expect("alpha is zero");
                s.0.iter()
                    .zip(exact.0.iter())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        errors.push(err);
    }
    let inconclusive = errors.iter().any(|&e| e < ERROR_FLOOR * params.m0());
    let xs: Vec<f64> = dt_list.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.max(f64::MIN_POSITIVE).ln()).collect();
    Ok(ConvergenceReport {
        order: least_squares_slope(&xs, &ys),
        dts: dt_list.to_vec(),
        errors,
        inconclusive,
    })
}

pub(crate) fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::{critical_alpha, default_initial_state, CellParams, DEFAULT_TILT};
    
    fn short_cfg() -> IntegrationConfig {
        IntegrationConfig {
            t_total: 0.05,
            t_transient: 0.0,
            ..Default::default()
        }
    }

    #[test]
    fn config_validation() {
        let p = SystemParams::split_hz(1000.0, 40.0, 16.0).unwrap();
        let ok = IntegrationConfig::default();
        assert!(ok.validate(&p).is_ok());
        let bad = [
            IntegrationConfig { dt: 0.0, ..ok },
            IntegrationConfig { t_transient: 4.0, ..ok },
            IntegrationConfig { t_transient: -1.0, ..ok },
            IntegrationConfig { sample_stride: 0, ..ok },
        ];
        for cfg in bad {
            assert!(matches!(cfg.validate(&p), Err(IntegrationError::InvalidConfig(_))), "{cfg:?}");
        }
        let coarse = IntegrationConfig { dt: 2e-5, ..ok };
        assert!(matches!(coarse.validate(&p), Err(IntegrationError::StepTooCoarse { .. })));
        let overridden = IntegrationConfig {
            allow_coarse_step: true,
            ..coarse
        };
        assert!(overridden.validate(&p).is_ok());
    }

    #[test]
    fn fixed_point_stays_put() {
        let p = SystemParams::split_hz(1000.0, 110.0, 20.0).unwrap();
        let init = SpinState::equilibrium(p.m0());
        let traj = integrate(&p, &init, &short_cfg()).unwrap();
        assert!(traj.states().iter().all(|s| *s == init));
        assert!(traj.mx().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn samples_are_aligned_and_consistent() {
        let p = SystemParams::split_hz(1000.0, 40.0, 16.0).unwrap();
        let init = default_initial_state(&p, DEFAULT_TILT).unwrap();
        let cfg = IntegrationConfig {
            t_total: 0.02,
            t_transient: 0.0,
            sample_stride: 3,
            ..Default::default()
        };
        let traj = integrate(&p, &init, &cfg).unwrap();
        assert_eq!(traj.len(), 2000 / 3 + 1);
        assert_eq!(traj.states()[0], init);
        assert!((traj.dt_sample() - 3e-5).abs() < 1e-18);
        for (s, &mx) in traj.states().iter().zip(traj.mx()) {
            assert_eq!(mx, observable_mx(s));
        }
    }

    #[test]
    fn damped_precession_matches_closed_form() {
        let p = SystemParams::split_hz(1000.0, 70.0, 0.0).unwrap();
        let init = SpinState::new([0.2, 0.0, 0.3, -0.1, 0.15, 0.45]).unwrap();
        let cfg = short_cfg();
        let traj = integrate(&p, &init, &cfg).unwrap();
        let mut worst: f64 = 0.0;
        for (k, s) in traj.states().iter().enumerate() {
            let exact = linear_solution(&p, &init, traj.time(k)).unwrap();
            for i in 0..6 {
                worst = worst.max((s.0[i] - exact.0[i]).abs());
            }
        }
        // 10·dt⁴·T in units where the precession rate and amplitude set the scale.
        let w = p.larmor()[0].abs();
        let bound = 10.0 * (w * cfg.dt).powi(4) * (w * cfg.t_total) * 0.5;
        assert!(worst < bound, "worst {worst:e} bound {bound:e}");
        assert!(worst < 1e-5);
    }

    #[test]
    fn blow_up_is_reported() {
        let p = SystemParams::split_hz(1000.0, 40.0, 1.0).unwrap();
        let p = p.with_alpha(1e6 * critical_alpha(&p)).unwrap();
        let init = default_initial_state(&p, 0.5).unwrap();
        let cfg = IntegrationConfig {
            dt: 1e-3,
            t_total: 1.0,
            t_transient: 0.0,
            sample_stride: 1,
            seed: 0,
            allow_coarse_step: true,
        };
        match integrate(&p, &init, &cfg) {
            Err(IntegrationError::NonFinite { time }) => assert!(time > 0.0 && time <= 1.0),
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn zero_noise_is_bit_identical() {
        let p = SystemParams::split_hz(1000.0, 40.0, 16.0).unwrap();
        let init = default_initial_state(&p, DEFAULT_TILT).unwrap();
        let cfg = short_cfg();
        let clean = integrate(&p, &init, &cfg).unwrap();
        for mode in [NoiseMode::Common, NoiseMode::Independent] {
            let noisy = integrate_noisy(&p, &init, &cfg, &NoiseConfig::new(0.0, mode)).unwrap();
            assert_eq!(clean, noisy);
        }
        let disabled = NoiseConfig {
            sigma_b: 50.0,
            enabled: false,
            mode: NoiseMode::Common,
        };
        assert_eq!(clean, integrate_noisy(&p, &init, &cfg, &disabled).unwrap());
        assert!(integrate_noisy(&p, &init, &cfg, &NoiseConfig::common(-1.0)).is_err());
    }

    #[test]
    fn noisy_runs_are_seeded() {
        let p = SystemParams::split_hz(1000.0, 40.0, 16.0).unwrap();
        let init = default_initial_state(&p, DEFAULT_TILT).unwrap();
        let cfg = IntegrationConfig { seed: 7, ..short_cfg() };
        let noise = NoiseConfig::common(100.0);
        let a = integrate_noisy(&p, &init, &cfg, &noise).unwrap();
        let b = integrate_noisy(&p, &init, &cfg, &noise).unwrap();
        assert_eq!(a, b);
        let c = integrate_noisy(&p, &init, &IntegrationConfig { seed: 8, ..cfg }, &noise).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn common_noise_shifts_both_cells_equally() {
        // Two identical cells stay identical under common-mode noise.
        let p = SystemParams::split_hz(1000.0, 0.0, 4.0).unwrap();
        let init = default_initial_state(&p, DEFAULT_TILT).unwrap();
        let cfg = short_cfg();
        let common = integrate_noisy(&p, &init, &cfg, &NoiseConfig::common(200.0)).unwrap();
        assert!(common.states().iter().all(|s| s.cell(0) == s.cell(1)));
        let indep = integrate_noisy(&p, &init, &cfg, &NoiseConfig::independent(200.0)).unwrap();
        assert!(indep.states().iter().any(|s| s.cell(0) != s.cell(1)));
    }

    #[test]
    fn convergence_preconditions() {
        let p = SystemParams::split_hz(1000.0, 40.0, 0.0).unwrap();
        let init = default_initial_state(&p, DEFAULT_TILT).unwrap();
        assert!(convergence_order(&p, &init, &[1e-5], 0.01).is_err());
        assert!(convergence_order(&p, &init, &[1e-5, 2e-5, 4e-5], 0.01).is_err());
        let coupled = p.with_alpha(1.0).unwrap();
        assert!(convergence_order(&coupled, &init, &[4e-5, 2e-5, 1e-5], 0.01).is_err());
    }

    #[test]
    fn convergence_floor_is_flagged() {
        // No precession and no relaxation: RK4 is exact up to round-off.
        let c = [CellParams::new(0.0).unwrap(); 2];
        let p = SystemParams::new(c, 0.0, 1.0, 1.0, 0.5, 1.0).unwrap().without_relaxation();
        let init = SpinState::new([0.1, 0.0, 0.4, 0.0, 0.1, 0.4]).unwrap();
        let report = convergence_order(&p, &init, &[4e-5, 2e-5, 1e-5], 1e-3).unwrap();
        assert!(report.inconclusive);
    }

    #[test]
    fn slope_of_exact_power_law() {
        let xs: Vec<f64> = [4.0_f64, 2.0, 1.0].iter().map(|d| d.ln()).collect();
        let ys: Vec<f64> = [4.0_f64, 2.0, 1.0].iter().map(|d| (3.0 * d.powi(4)).ln()).collect();
        assert!((least_squares_slope(&xs, &ys) - 4.0).abs() < 1e-12);
    }
}
