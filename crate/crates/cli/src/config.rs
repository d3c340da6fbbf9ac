//! The TOML run configuration. Physical quantities carry their unit in the
//! key name.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use dualcell_core::analysis::{Chaos01Config, Thresholds};
use dualcell_core::bloch::{
    DEFAULT_GAMMA, DEFAULT_M0, DEFAULT_MEAN_LARMOR_HZ, DEFAULT_T1, DEFAULT_T2, DEFAULT_TILT,
};
use dualcell_core::sweep::SweepGrid;
use dualcell_core::{CellParams, IntegrationConfig, NoiseConfig, NoiseMode, SystemParams};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Marks the configuration block embedded in output headers.
pub const CONFIG_BEGIN: &str = "# --- config ---";
pub const CONFIG_END: &str = "# --- end config ---";

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub system: SystemSection,
    pub integration: IntegrationSection,
    pub noise: NoiseSection,
    pub thresholds: ThresholdSection,
    pub sweep: SweepSection,
    pub robustness: RobustnessSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemSection {
    pub mean_larmor_hz: f64,
    /// f₁ − f₂; the cells sit at mean ± dfreq/2.
    pub dfreq_hz: f64,
    pub alpha_over_alpha_c: f64,
    pub t1_ms: f64,
    pub t2_ms: f64,
    pub m0: f64,
    pub gamma_hz_per_nt: f64,
    /// Initial transverse fraction of M₀ in each cell.
    pub tilt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegrationSection {
    pub dt_us: f64,
    pub t_total_s: f64,
    pub t_transient_s: f64,
    pub sample_stride: usize,
    pub allow_coarse_step: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSection {
    pub enabled: bool,
    pub sigma_b_nt: f64,
    pub mode: NoiseMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThresholdSection {
    pub eps_sig: f64,
    pub rel_threshold: f64,
    pub min_separation_hz: f64,
    pub k_threshold: f64,
    pub larmor_margin_hz: f64,
    pub chaos_phases: usize,
    pub chaos_samples_per_period: f64,
    pub chaos_min_len: usize,
    pub chaos_max_len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub dfreq_min_hz: f64,
    pub dfreq_max_hz: f64,
    pub dfreq_points: usize,
    pub alpha_min_over_alpha_c: f64,
    pub alpha_max_over_alpha_c: f64,
    pub alpha_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegimePoint {
    pub name: String,
    pub dfreq_hz: f64,
    pub alpha_over_alpha_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RobustnessSection {
    pub sigma_b_nt: Vec<f64>,
    pub repeats: usize,
    pub mode: NoiseMode,
    pub points: Vec<RegimePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    /// Write every n-th retained sample to the trajectory table.
    pub trajectory_stride: usize,
    pub plot_scripts: bool,
}

impl Default for SystemSection {
    fn default() -> Self {
        Self {
            mean_larmor_hz: DEFAULT_MEAN_LARMOR_HZ,
            dfreq_hz: 40.0,
            alpha_over_alpha_c: 16.0,
            t1_ms: DEFAULT_T1 * 1e3,
            t2_ms: DEFAULT_T2 * 1e3,
            m0: DEFAULT_M0,
            gamma_hz_per_nt: DEFAULT_GAMMA / (2.0 * PI),
            tilt: DEFAULT_TILT,
        }
    }
}

impl Default for IntegrationSection {
    fn default() -> Self {
        let c = IntegrationConfig::default();
        Self {
            dt_us: c.dt * 1e6,
            t_total_s: c.t_total,
            t_transient_s: c.t_transient,
            sample_stride: c.sample_stride,
            allow_coarse_step: c.allow_coarse_step,
        }
    }
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            enabled: false,
            sigma_b_nt: 0.0,
            mode: NoiseMode::Common,
        }
    }
}

impl Default for ThresholdSection {
    fn default() -> Self {
        let t = Thresholds::default();
        Self {
            eps_sig: t.eps_sig,
            rel_threshold: t.rel_threshold,
            min_separation_hz: t.min_separation_hz,
            k_threshold: t.k_threshold,
            larmor_margin_hz: t.larmor_margin_hz,
            chaos_phases: t.chaos.n_phases,
            chaos_samples_per_period: t.chaos.samples_per_period,
            chaos_min_len: t.chaos.min_len,
            chaos_max_len: t.chaos.max_len,
        }
    }
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            dfreq_min_hz: 0.0,
            dfreq_max_hz: 300.0,
            dfreq_points: 31,
            alpha_min_over_alpha_c: 0.5,
            alpha_max_over_alpha_c: 24.0,
            alpha_points: 25,
        }
    }
}

impl Default for RobustnessSection {
    fn default() -> Self {
        Self {
            sigma_b_nt: vec![0.0, 5.0, 10.0, 20.0, 40.0],
            repeats: 10,
            mode: NoiseMode::Independent,
            points: vec![
                RegimePoint {
                    name: "limit-cycle".into(),
                    dfreq_hz: 40.0,
                    alpha_over_alpha_c: 16.0,
                },
                RegimePoint {
                    name: "quasi-periodic".into(),
                    dfreq_hz: 220.0,
                    alpha_over_alpha_c: 16.0,
                },
            ],
        }
    }
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            trajectory_stride: 1,
            plot_scripts: true,
        }
    }
}

impl RunConfig {
    /// Read a TOML file, or the configuration embedded in the header of a
    /// file this program wrote, then apply `key=value` overrides.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let body = embedded_config(&text).unwrap_or(text);
        let mut table: toml::Table = toml::from_str(&body)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))?;
        apply_overrides(&mut table, overrides)?;
        Self::from_table(table)
    }

    /// Defaults plus overrides.
    pub fn defaults_with(overrides: &[String]) -> Result<Self, CliError> {
        let mut table = toml::Table::new();
        apply_overrides(&mut table, overrides)?;
        Self::from_table(table)
    }

    fn from_table(table: toml::Table) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e| CliError::Usage(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn validate(&self) -> Result<(), CliError> {
        self.system_params()?;
        let th = self.thresholds();
        if !(th.rel_threshold > 0.0 && th.rel_threshold < 1.0) {
            return Err(CliError::Usage("thresholds.rel_threshold must lie in (0, 1)".into()));
        }
        if self.output.trajectory_stride == 0 {
            return Err(CliError::Usage("output.trajectory_stride must be at least 1".into()));
        }
        if !(self.system.tilt > 0.0 && self.system.tilt <= 0.5) {
            return Err(CliError::Usage("system.tilt must lie in (0, 0.5]".into()));
        }
        Ok(())
    }

    /// Parameters with zero splitting and unit gain, carrying the
    /// relaxation constants, M₀ and γ.
    pub fn base_params(&self) -> Result<SystemParams, CliError> {
        let s = &self.system;
        let w = 2.0 * PI * s.mean_larmor_hz;
        let p = SystemParams::new(
            [CellParams::new(w)?, CellParams::new(w)?],
            0.0,
            s.t1_ms * 1e-3,
            s.t2_ms * 1e-3,
            s.m0,
            2.0 * PI * s.gamma_hz_per_nt,
        )?;
        Ok(p)
    }

    /// Parameters at a given splitting and gain on top of the base.
    pub fn params_at(&self, dfreq_hz: f64, alpha_over_alpha_c: f64) -> Result<SystemParams, CliError> {
        let base = self.base_params()?;
        let mean = 2.0 * PI * self.system.mean_larmor_hz;
        let half = PI * dfreq_hz;
        let p = base
            .with_cells([CellParams::new(mean + half)?, CellParams::new(mean - half)?])?
            .with_alpha(alpha_over_alpha_c * dualcell_core::critical_alpha(&base))?;
        Ok(p)
    }

    pub fn system_params(&self) -> Result<SystemParams, CliError> {
        self.params_at(self.system.dfreq_hz, self.system.alpha_over_alpha_c)
    }

    pub fn integration(&self) -> IntegrationConfig {
        let i = &self.integration;
        IntegrationConfig {
            dt: i.dt_us * 1e-6,
            t_total: i.t_total_s,
            t_transient: i.t_transient_s,
            sample_stride: i.sample_stride,
            seed: self.seed,
            allow_coarse_step: i.allow_coarse_step,
        }
    }

    pub fn noise(&self) -> NoiseConfig {
        NoiseConfig {
            enabled: self.noise.enabled,
            ..NoiseConfig::new(self.noise.sigma_b_nt, self.noise.mode)
        }
    }

    pub fn thresholds(&self) -> Thresholds {
        let t = &self.thresholds;
        Thresholds {
            eps_sig: t.eps_sig,
            rel_threshold: t.rel_threshold,
            min_separation_hz: t.min_separation_hz,
            k_threshold: t.k_threshold,
            larmor_margin_hz: t.larmor_margin_hz,
            chaos: Chaos01Config {
                n_phases: t.chaos_phases,
                samples_per_period: t.chaos_samples_per_period,
                min_len: t.chaos_min_len,
                max_len: t.chaos_max_len,
                seed: self.seed,
            },
        }
    }

    pub fn grid(&self) -> Result<SweepGrid, CliError> {
        let s = &self.sweep;
        if s.dfreq_points == 0 || s.alpha_points == 0 {
            return Err(CliError::Usage("sweep axes need at least one point".into()));
        }
        SweepGrid::new(
            SweepGrid::linspace(s.dfreq_min_hz, s.dfreq_max_hz, s.dfreq_points),
            SweepGrid::linspace(s.alpha_min_over_alpha_c, s.alpha_max_over_alpha_c, s.alpha_points),
            self.system.mean_larmor_hz,
            self.base_params()?,
        )
        .map_err(|e| CliError::Usage(e.to_string()))
    }
}

/// The TOML between the config markers of a header, with the comment
/// prefix removed.
fn embedded_config(text: &str) -> Option<String> {
    let mut lines = text.lines().skip_while(|l| *l != CONFIG_BEGIN);
    lines.next()?;
    let mut out = String::new();
    for line in lines {
        if line == CONFIG_END {
            return Some(out);
        }
        let body = line.strip_prefix("# ").or_else(|| line.strip_prefix('#'))?;
        out.push_str(body);
        out.push('\n');
    }
    None
}

/// Set `a.b.c = value` for each override. The value is parsed as a TOML
/// value and falls back to a bare string.
pub fn apply_overrides(table: &mut toml::Table, overrides: &[String]) -> Result<(), CliError> {
    for item in overrides {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("override `{item}` is not key=value")))?;
        let key = key.trim();
        let raw = raw.trim();
        let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(raw.to_string()));
        let parts: Vec<&str> = key.split('.').collect();
        if parts.iter().any(|p| p.is_empty()) {
            return Err(CliError::Usage(format!("bad override key `{key}`")));
        }
        let (last, path) = parts.split_last().expect("split yields at least one part");
        let mut node = &mut *table;
        for part in path {
            let entry = node
                .entry(part.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
            node = entry
                .as_table_mut()
                .ok_or_else(|| CliError::Usage(format!("override `{key}`: `{part}` is not a section")))?;
        }
        node.insert(last.to_string(), value);
    }
    Ok(())
}
