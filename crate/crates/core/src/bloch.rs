//! Physical data model and vector field of the feedback-coupled dual-cell
//! Bloch equations.
//!
//! Two spin ensembles precess about their own static bias fields along `z`
//! and share a single feedback field along `y` proportional to the summed
//! transverse magnetization `M_x = M_{x,1} + M_{x,2}`:
//!
//! ```text
//! dM_{x,i}/dt =  ω_i M_{y,i} + α M_x M_{z,i} − M_{x,i}/T₂
//! dM_{y,i}/dt = −ω_i M_{x,i}                 − M_{y,i}/T₂
//! dM_{z,i}/dt = −α M_x M_{x,i}               + (M₀ − M_{z,i})/T₁
//! ```
//!
//! All frequencies are angular (rad/s). The gyromagnetic ratio is stored in
//! rad·s⁻¹·nT⁻¹ and only enters when a field perturbation in nT has to be
//! turned into a Larmor-frequency shift.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Longitudinal relaxation time used in the reference simulations, seconds.
pub const DEFAULT_T1: f64 = 5e-3;
/// Transverse relaxation time used in the reference simulations, seconds.
pub const DEFAULT_T2: f64 = 2e-3;
/// Equilibrium magnetization of each cell.
pub const DEFAULT_M0: f64 = 0.5;
/// ⁸⁷Rb gyromagnetic ratio, 7 Hz/nT expressed in rad·s⁻¹·nT⁻¹.
pub const DEFAULT_GAMMA: f64 = 2.0 * PI * 7.0;
/// Mean Larmor frequency of the two cells, Hz.
pub const DEFAULT_MEAN_LARMOR_HZ: f64 = 1000.0;
/// Initial transverse tilt of both cells.
pub const DEFAULT_TILT: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BlochError {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("spin state has a non-finite component at index {index}")]
    NonFiniteState { index: usize },
}

/// Per-cell parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellParams {
    /// Larmor frequency ω_i = γ B⁰_{z,i}, rad/s. Either sign is allowed.
    pub larmor_frequency: f64,
}

impl CellParams {
    pub fn new(larmor_frequency: f64) -> Result<Self, BlochError> {
        if !larmor_frequency.is_finite() {
            return Err(BlochError::InvalidParameter {
                name: "larmor_frequency",
                value: larmor_frequency,
                reason: "must be finite",
            });
        }
        Ok(Self { larmor_frequency })
    }
}

/// Parameters of the coupled two-cell system.
///
/// Relaxation times may be `f64::INFINITY`, which switches the corresponding
/// relaxation terms off exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    cells: [CellParams; 2],
    alpha: f64,
    t1: f64,
    t2: f64,
    m0: f64,
    gamma: f64,
}

impl SystemParams {
    pub fn new(
        cells: [CellParams; 2],
        alpha: f64,
        t1: f64,
        t2: f64,
        m0: f64,
        gamma: f64,
    ) -> Result<Self, BlochError> {
        for cell in &cells {
            CellParams::new(cell.larmor_frequency)?;
        }
        check(alpha.is_finite(), "alpha", alpha, "must be finite")?;
        check(t1 > 0.0, "t1", t1, "must be positive")?;
        check(t2 > 0.0, "t2", t2, "must be positive")?;
        check(m0 > 0.0 && m0.is_finite(), "m0", m0, "must be positive and finite")?;
        check(
            gamma > 0.0 && gamma.is_finite(),
            "gamma",
            gamma,
            "must be positive and finite",
        )?;
        Ok(Self {
            cells,
            alpha,
            t1,
            t2,
            m0,
            gamma,
        })
    }

    /// Reference relaxation constants with the two Larmor frequencies split
    /// symmetrically around `mean_larmor` (rad/s) so that ω₁ − ω₂ = `delta_omega`.
    /// The feedback gain is given as a multiple of the critical gain.
    pub fn split(mean_larmor: f64, delta_omega: f64, alpha_ratio: f64) -> Result<Self, BlochError> {
        let alpha = alpha_ratio / (DEFAULT_T2 * DEFAULT_M0);
        Self::new(
            [
                CellParams::new(mean_larmor + 0.5 * delta_omega)?,
                CellParams::new(mean_larmor - 0.5 * delta_omega)?,
            ],
            alpha,
            DEFAULT_T1,
            DEFAULT_T2,
            DEFAULT_M0,
            DEFAULT_GAMMA,
        )
    }

    /// Same as [`SystemParams::split`] with the frequency difference in Hz.
    pub fn split_hz(mean_larmor_hz: f64, dfreq_hz: f64, alpha_ratio: f64) -> Result<Self, BlochError> {
        Self::split(2.0 * PI * mean_larmor_hz, 2.0 * PI * dfreq_hz, alpha_ratio)
    }

    pub fn cells(&self) -> [CellParams; 2] {
        self.cells
    }

    pub fn larmor(&self) -> [f64; 2] {
        [self.cells[0].larmor_frequency, self.cells[1].larmor_frequency]
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn t2(&self) -> f64 {
        self.t2
    }

    pub fn m0(&self) -> f64 {
        self.m0
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Δω = ω₁ − ω₂, rad/s.
    pub fn delta_omega(&self) -> f64 {
        self.cells[0].larmor_frequency - self.cells[1].larmor_frequency
    }

    /// `(min, max)` of the two Larmor frequencies, rad/s.
    pub fn larmor_bounds(&self) -> (f64, f64) {
        let [a, b] = self.larmor();
        (a.min(b), a.max(b))
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self, BlochError> {
        check(alpha.is_finite(), "alpha", alpha, "must be finite")?;
        self.alpha = alpha;
        Ok(self)
    }

    pub fn with_cells(mut self, cells: [CellParams; 2]) -> Result<Self, BlochError> {
        for cell in &cells {
            CellParams::new(cell.larmor_frequency)?;
        }
        self.cells = cells;
        Ok(self)
    }

    /// Both relaxation terms disabled (T₁ = T₂ = ∞).
    pub fn without_relaxation(mut self) -> Self {
        self.t1 = f64::INFINITY;
        self.t2 = f64::INFINITY;
        self
    }

    /// Cells exchanged.
    pub fn swapped(mut self) -> Self {
        self.cells.swap(0, 1);
        self
    }
}

fn check(ok: bool, name: &'static str, value: f64, reason: &'static str) -> Result<(), BlochError> {
    if ok {
        Ok(())
    } else {
        Err(BlochError::InvalidParameter { name, value, reason })
    }
}

/// Magnetization of both cells, ordered
/// `(M_{x,1}, M_{y,1}, M_{z,1}, M_{x,2}, M_{y,2}, M_{z,2})`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SpinState(pub [f64; 6]);

impl SpinState {
    pub fn new(m: [f64; 6]) -> Result<Self, BlochError> {
        let state = Self(m);
        state.validate()?;
        Ok(state)
    }

    pub fn from_cells(cell1: [f64; 3], cell2: [f64; 3]) -> Result<Self, BlochError> {
        Self::new([cell1[0], cell1[1], cell1[2], cell2[0], cell2[1], cell2[2]])
    }

    /// Both cells at the pump equilibrium `(0, 0, M₀)`.
    pub fn equilibrium(m0: f64) -> Self {
        Self([0.0, 0.0, m0, 0.0, 0.0, m0])
    }

    pub fn validate(&self) -> Result<(), BlochError> {
        match self.0.iter().position(|v| !v.is_finite()) {
            Some(index) => Err(BlochError::NonFiniteState { index }),
            None => Ok(()),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn cell(&self, i: usize) -> [f64; 3] {
        [self.0[3 * i], self.0[3 * i + 1], self.0[3 * i + 2]]
    }

    /// |M_i| of cell `i` (0 or 1).
    pub fn cell_magnitude(&self, i: usize) -> f64 {
        let [x, y, z] = self.cell(i);
        (x * x + y * y + z * z).sqrt()
    }

    pub fn mx_total(&self) -> f64 {
        self.0[0] + self.0[3]
    }

    pub fn my_total(&self) -> f64 {
        self.0[1] + self.0[4]
    }

    pub fn mz_total(&self) -> f64 {
        self.0[2] + self.0[5]
    }

    /// Cells exchanged.
    pub fn swapped(&self) -> Self {
        let m = self.0;
        Self([m[3], m[4], m[5], m[0], m[1], m[2]])
    }

    /// Transverse components of both cells negated.
    pub fn transverse_flipped(&self) -> Self {
        let m = self.0;
        Self([-m[0], -m[1], m[2], -m[3], -m[4], m[5]])
    }
}

/// The detected signal: M_x = M_{x,1} + M_{x,2}.
pub fn observable_mx(state: &SpinState) -> f64 {
    state.mx_total()
}

/// α_c = 1/(T₂ M₀), the gain above which the pump equilibrium is unstable.
pub fn critical_alpha(params: &SystemParams) -> f64 {
    1.0 / (params.t2 * params.m0)
}

/// Time derivative of the six magnetization components.
pub fn vector_field(state: &SpinState, params: &SystemParams) -> Result<[f64; 6], BlochError> {
    state.validate()?;
    let [w1, w2] = params.larmor();
    Ok(rhs(&state.0, w1, w2, params))
}

/// Unchecked right-hand side with explicit Larmor frequencies, so the
/// integrator can substitute noisy ones.
#[inline(always)]
pub(crate) fn rhs(m: &[f64; 6], w1: f64, w2: f64, p: &SystemParams) -> [f64; 6] {
    let r2 = 1.0 / p.t2;
    let r1 = 1.0 / p.t1;
    let mx = m[0] + m[3];
    let g = p.alpha * mx;
    [
        w1 * m[1] + g * m[2] - m[0] * r2,
        -w1 * m[0] - m[1] * r2,
        -g * m[0] + (p.m0 - m[2]) * r1,
        w2 * m[4] + g * m[5] - m[3] * r2,
        -w2 * m[3] - m[4] * r2,
        -g * m[3] + (p.m0 - m[5]) * r1,
    ]
}

/// Both cells at `(tilt·M₀, 0, M₀·√(1−tilt²))`.
///
/// A strictly positive tilt is required: the exact equilibrium is a fixed
/// point and never self-starts without noise.
pub fn default_initial_state(params: &SystemParams, tilt: f64) -> Result<SpinState, BlochError> {
    if !(tilt > 0.0 && tilt <= 0.5) {
        return Err(BlochError::InvalidParameter {
            name: "tilt",
            value: tilt,
            reason: "must lie in (0, 0.5]",
        });
    }
    let m0 = params.m0;
    let cell = [tilt * m0, 0.0, m0 * (1.0 - tilt * tilt).sqrt()];
    SpinState::from_cells(cell, cell)
}

/// Closed-form solution of the uncoupled (α = 0) equations: damped
/// precession of the transverse components and exponential recovery of the
/// longitudinal ones.
///
/// Returns `None` when the feedback gain is non-zero.
pub fn linear_solution(params: &SystemParams, init: &SpinState, t: f64) -> Option<SpinState> {
    if params.alpha != 0.0 {
        return None;
    }
    let decay2 = (-t / params.t2).exp();
    let decay1 = (-t / params.t1).exp();
    let mut out = [0.0; 6];
    for (i, w) in params.larmor().into_iter().enumerate() {
        let [x0, y0, z0] = init.cell(i);
        // (x + iy)(t) = (x0 + i y0) e^{-iωt} e^{-t/T2}
        let (s, c) = (w * t).sin_cos();
        out[3 * i] = (x0 * c + y0 * s) * decay2;
        out[3 * i + 1] = (y0 * c - x0 * s) * decay2;
        out[3 * i + 2] = params.m0 + (z0 - params.m0) * decay1;
    }
    Some(SpinState(out))
}
