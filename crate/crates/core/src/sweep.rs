//! Phase diagrams over the (Δf, α/α_c) plane.
//!
//! Every grid point is integrated from the default tilted state and
//! classified independently, so the sweep is embarrassingly parallel. Each
//! point draws its randomness from a seed derived from its indices, which
//! makes the result independent of scheduling. Finished points are appended
//! to a checkpoint file so an interrupted sweep resumes where it stopped.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::analysis::{classify_regime, Regime, Thresholds};
use crate::bloch::{critical_alpha, default_initial_state, BlochError, CellParams, SystemParams};
use crate::integrator::{integrate, IntegrationConfig, IntegrationError};

const CHECKPOINT_MAGIC: &str = "# dualcell sweep checkpoint v1";

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep grid: {0}")]
    InvalidGrid(String),
    #[error(transparent)]
    Params(#[from] BlochError),
    #[error(transparent)]
    Integration(#[from] IntegrationError),
    #[error("checkpoint {path} belongs to a different sweep (grid hash {found}, expected {expected})")]
    StaleCheckpoint {
        path: PathBuf,
        found: String,
        expected: String,
    },
    #[error("malformed checkpoint {path}: {reason}")]
    MalformedCheckpoint { path: PathBuf, reason: String },
    #[error("sweep interrupted after {completed} new points")]
    Interrupted { completed: usize },
    #[error("checkpoint I/O: {0}")]
    Io(#[from] std::io::Error),
}

/// The (Δf, α/α_c) grid. The mean Larmor frequency is held fixed while the
/// two cells are split by ±Δf/2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    dfreq_axis: Vec<f64>,
    gain_axis: Vec<f64>,
    mean_larmor_hz: f64,
    base: SystemParams,
}

impl SweepGrid {
    /// `dfreq_axis` in Hz, `gain_axis` in multiples of α_c. `base` supplies
    /// the relaxation constants, M₀ and γ.
    pub fn new(
        dfreq_axis: Vec<f64>,
        gain_axis: Vec<f64>,
        mean_larmor_hz: f64,
        base: SystemParams,
    ) -> Result<Self, SweepError> {
        for (name, axis) in [("dfreq", &dfreq_axis), ("gain", &gain_axis)] {
            if axis.is_empty() {
                return Err(SweepError::InvalidGrid(format!("{name} axis is empty")));
            }
            if axis.iter().any(|v| !v.is_finite()) {
                return Err(SweepError::InvalidGrid(format!("{name} axis has non-finite values")));
            }
            if axis.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(SweepError::InvalidGrid(format!("{name} axis must be strictly increasing")));
            }
        }
        if !mean_larmor_hz.is_finite() {
            return Err(SweepError::InvalidGrid("mean Larmor frequency must be finite".into()));
        }
        Ok(Self {
            dfreq_axis,
            gain_axis,
            mean_larmor_hz,
            base,
        })
    }

    /// `n` evenly spaced values from `lo` to `hi` inclusive.
    pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        match n {
            0 => vec![],
            1 => vec![lo],
            _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
        }
    }

    /// 31 × 25 points over Δf ∈ [0, 300] Hz and α ∈ [0.5, 24]·α_c.
    pub fn default_paper(base: SystemParams, mean_larmor_hz: f64) -> Result<Self, SweepError> {
        Self::new(
            Self::linspace(0.0, 300.0, 31),
            Self::linspace(0.5, 24.0, 25),
            mean_larmor_hz,
            base,
        )
    }

    pub fn dfreq_axis(&self) -> &[f64] {
        &self.dfreq_axis
    }

    pub fn gain_axis(&self) -> &[f64] {
        &self.gain_axis
    }

    pub fn mean_larmor_hz(&self) -> f64 {
        self.mean_larmor_hz
    }

    pub fn base(&self) -> &SystemParams {
        &self.base
    }

    pub fn len(&self) -> usize {
        self.dfreq_axis.len() * self.gain_axis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat index of (gain row, Δf column).
    pub fn index(&self, gain_idx: usize, dfreq_idx: usize) -> usize {
        gain_idx * self.dfreq_axis.len() + dfreq_idx
    }

    pub fn coords(&self, flat: usize) -> (usize, usize) {
        (flat / self.dfreq_axis.len(), flat % self.dfreq_axis.len())
    }

    pub fn params_at(&self, gain_idx: usize, dfreq_idx: usize) -> Result<SystemParams, BlochError> {
        let mean = 2.0 * PI * self.mean_larmor_hz;
        let half = PI * self.dfreq_axis[dfreq_idx];
        let p = self
            .base
            .with_cells([CellParams::new(mean + half)?, CellParams::new(mean - half)?])?;
        p.with_alpha(self.gain_axis[gain_idx] * critical_alpha(&self.base))
    }

    /// Fingerprint of everything that determines the sweep's output.
    pub fn fingerprint(&self, cfg: &IntegrationConfig, th: &Thresholds, opts: &SweepOptions) -> String {
        let mut h = Sha256::new();
        let mut f = |v: f64| h.update(v.to_bits().to_le_bytes());
        for &v in self.dfreq_axis.iter().chain(&self.gain_axis) {
            f(v);
        }
        f(self.mean_larmor_hz);
        let b = &self.base;
        for v in [b.t1(), b.t2(), b.m0(), b.gamma(), cfg.dt, cfg.t_total, cfg.t_transient] {
            f(v);
        }
        for v in [
            th.eps_sig,
            th.rel_threshold,
            th.min_separation_hz,
            th.k_threshold,
            th.larmor_margin_hz,
            th.chaos.samples_per_period,
            opts.tilt,
        ] {
            f(v);
        }
        for n in [
            self.dfreq_axis.len() as u64,
            self.gain_axis.len() as u64,
            cfg.sample_stride as u64,
            cfg.allow_coarse_step as u64,
            th.chaos.n_phases as u64,
            th.chaos.min_len as u64,
            th.chaos.max_len as u64,
            opts.seed,
        ] {
            h.update(n.to_le_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Outcome at one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PointLabel {
    Regime(Regime),
    /// Integration blew up or analysis failed at this point.
    Failed,
}

impl PointLabel {
    pub fn regime(self) -> Option<Regime> {
        match self {
            PointLabel::Regime(r) => Some(r),
            PointLabel::Failed => None,
        }
    }
}

impl fmt::Display for PointLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointLabel::Regime(r) => r.fmt(f),
            PointLabel::Failed => f.write_str("Failed"),
        }
    }
}

impl FromStr for PointLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "Failed" {
            return Ok(PointLabel::Failed);
        }
        s.parse::<Regime>().map(PointLabel::Regime).map_err(|e| e.to_string())
    }
}

/// Deterministic per-point result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub label: PointLabel,
    pub k_statistic: Option<f64>,
    pub peak_count: usize,
    pub dominant_freq_hz: Option<f64>,
}

impl PointResult {
    fn failed() -> Self {
        Self {
            label: PointLabel::Failed,
            k_statistic: None,
            peak_count: 0,
            dominant_freq_hz: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDiagram {
    pub grid: SweepGrid,
    /// Row-major over (gain row, Δf column).
    pub points: Vec<PointResult>,
    /// Wall-clock seconds spent per point. Not part of the deterministic
    /// output; points restored from a checkpoint keep their recorded time.
    pub runtimes: Vec<f64>,
}

impl PhaseDiagram {
    pub fn at(&self, gain_idx: usize, dfreq_idx: usize) -> &PointResult {
        &self.points[self.grid.index(gain_idx, dfreq_idx)]
    }

    pub fn label(&self, gain_idx: usize, dfreq_idx: usize) -> PointLabel {
        self.at(gain_idx, dfreq_idx).label
    }

    /// Labels along the column of fixed Δf, from low to high gain.
    pub fn column(&self, dfreq_idx: usize) -> Vec<PointLabel> {
        (0..self.grid.gain_axis.len())
            .map(|g| self.label(g, dfreq_idx))
            .collect()
    }

    pub fn contains(&self, label: PointLabel) -> bool {
        self.points.iter().any(|p| p.label == label)
    }

    /// Per-point results only, for equality checks that ignore timing.
    pub fn same_results(&self, other: &PhaseDiagram) -> bool {
        self.grid == other.grid && self.points == other.points
    }
}

/// Execution options that do not change the physics.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub workers: usize,
    pub checkpoint: Option<PathBuf>,
    /// Discard an existing checkpoint, even one from a different grid.
    pub fresh: bool,
    /// Stop after this many newly computed points (simulated interruption).
    pub stop_after: Option<usize>,
    pub tilt: f64,
    pub seed: u64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            workers: 1,
            checkpoint: None,
            fresh: false,
            stop_after: None,
            tilt: crate::bloch::DEFAULT_TILT,
            seed: 0,
        }
    }
}

/// SplitMix64 finalizer over the global seed and the point indices.
pub fn point_seed(seed: u64, gain_idx: usize, dfreq_idx: usize) -> u64 {
    let mut z = seed
        ^ (gain_idx as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (dfreq_idx as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F).rotate_left(32);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Integrate and classify one grid point.
pub fn evaluate_point(
    grid: &SweepGrid,
    gain_idx: usize,
    dfreq_idx: usize,
    cfg: &IntegrationConfig,
    th: &Thresholds,
    opts: &SweepOptions,
) -> PointResult {
    let seed = point_seed(opts.seed, gain_idx, dfreq_idx);
    let run = || -> Result<PointResult, Box<dyn std::error::Error>> {
        let params = grid.params_at(gain_idx, dfreq_idx)?;
        let init = default_initial_state(&params, opts.tilt)?;
        let traj = integrate(&params, &init, &IntegrationConfig { seed, ..*cfg })?;
        let mut th = *th;
        th.chaos.seed = seed;
        let label = classify_regime(&traj, &params, &th)?;
        Ok(PointResult {
            label: PointLabel::Regime(label.regime),
            k_statistic: label.k_statistic,
            peak_count: label.peak_count,
            dominant_freq_hz: label.dominant_freq_hz,
        })
    };
    run().unwrap_or_else(|_| PointResult::failed())
}

fn check_config(grid: &SweepGrid, cfg: &IntegrationConfig) -> Result<(), SweepError> {
    // The largest |ω| sits at the widest split.
    let last = grid.dfreq_axis.len() - 1;
    for d in [0, last] {
        cfg.validate(&grid.params_at(0, d)?)?;
    }
    Ok(())
}

/// Run (or resume) a sweep. With `opts.checkpoint` set, finished points are
/// appended to that file as they complete and points already present are
/// not recomputed.
pub fn run_sweep(
    grid: &SweepGrid,
    cfg: &IntegrationConfig,
    th: &Thresholds,
    opts: &SweepOptions,
) -> Result<PhaseDiagram, SweepError> {
    if opts.workers == 0 {
        return Err(SweepError::InvalidGrid("worker count must be at least 1".into()));
    }
    check_config(grid, cfg)?;
    let hash = grid.fingerprint(cfg, th, opts);

    let mut done: BTreeMap<usize, (PointResult, f64)> = BTreeMap::new();
    let mut writer = match &opts.checkpoint {
        Some(path) => {
            if !opts.fresh && path.exists() {
                done = read_checkpoint(path, &hash, grid)?;
            }
            Some(rewrite_checkpoint(path, &hash, grid, &done)?)
        }
        None => None,
    };

    let pending: Vec<usize> = (0..grid.len()).filter(|i| !done.contains_key(i)).collect();
    let next = AtomicUsize::new(0);
    let stop = AtomicBool::new(false);
    let limit = opts.stop_after.unwrap_or(usize::MAX);
    let mut fresh_count = 0;
    let mut io_error = None;

    std::thread::scope(|scope| {
        let (tx, rx) = mpsc::channel::<(usize, PointResult, f64)>();
        for _ in 0..opts.workers.min(pending.len().max(1)) {
            let tx = tx.clone();
            let (pending, next, stop) = (&pending, &next, &stop);
            scope.spawn(move || {
                while !stop.load(Ordering::Relaxed) {
                    let slot = next.fetch_add(1, Ordering::Relaxed);
                    let Some(&flat) = pending.get(slot) else { break };
                    let (g, d) = grid.coords(flat);
                    let start = Instant::now();
                    let result = evaluate_point(grid, g, d, cfg, th, opts);
                    if tx.send((flat, result, start.elapsed().as_secs_f64())).is_err() {
                        break;
                    }
                }
            });
        }
        drop(tx);
        // single writer
        for (flat, result, secs) in rx {
            if fresh_count >= limit {
                continue;
            }
            if let Some(w) = writer.as_mut() {
                if let Err(e) = append_record(w, grid, flat, &result, secs) {
                    io_error.get_or_insert(e);
                    stop.store(true, Ordering::Relaxed);
                }
            }
            done.insert(flat, (result, secs));
            fresh_count += 1;
            if fresh_count >= limit {
                stop.store(true, Ordering::Relaxed);
            }
        }
    });

    if let Some(e) = io_error {
        return Err(e.into());
    }
    if done.len() < grid.len() {
        return Err(SweepError::Interrupted {
            completed: fresh_count,
        });
    }
    let (points, runtimes) = done.into_values().unzip();
    Ok(PhaseDiagram {
        grid: grid.clone(),
        points,
        runtimes,
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| x.to_string())
}

fn parse_opt(s: &str) -> Result<Option<f64>, String> {
    if s == "-" {
        Ok(None)
    } else {
        s.parse::<f64>().map(Some).map_err(|e| e.to_string())
    }
}

fn append_record(w: &mut File, grid: &SweepGrid, flat: usize, r: &PointResult, secs: f64) -> std::io::Result<()> {
    let (g, d) = grid.coords(flat);
    writeln!(
        w,
        "{g}\t{d}\t{}\t{}\t{}\t{}\t{secs}",
        r.label,
        fmt_opt(r.k_statistic),
        r.peak_count,
        fmt_opt(r.dominant_freq_hz)
    )?;
    w.flush()
}

fn parse_record(line: &str, grid: &SweepGrid) -> Result<(usize, PointResult, f64), String> {
    let f: Vec<&str> = line.split('\t').collect();
    if f.len() != 7 {
        return Err(format!("expected 7 fields, found {}", f.len()));
    }
    let g: usize = f[0].parse().map_err(|e| format!("{e}"))?;
    let d: usize = f[1].parse().map_err(|e| format!("{e}"))?;
    if g >= grid.gain_axis.len() || d >= grid.dfreq_axis.len() {
        return Err(format!("index ({g}, {d}) outside the grid"));
    }
    let result = PointResult {
        label: f[2].parse()?,
        k_statistic: parse_opt(f[3])?,
        peak_count: f[4].parse().map_err(|e| format!("{e}"))?,
        dominant_freq_hz: parse_opt(f[5])?,
    };
    let secs = f[6].parse().map_err(|e| format!("{e}"))?;
    Ok((grid.index(g, d), result, secs))
}

/// Load finished points. A torn final line (crash mid-write) is dropped;
/// a bad line anywhere else is an error.
fn read_checkpoint(
    path: &Path,
    hash: &str,
    grid: &SweepGrid,
) -> Result<BTreeMap<usize, (PointResult, f64)>, SweepError> {
    let malformed = |reason: String| SweepError::MalformedCheckpoint {
        path: path.to_path_buf(),
        reason,
    };
    let lines: Vec<String> = BufReader::new(File::open(path)?).lines().collect::<Result<_, _>>()?;
    if lines.first().map(String::as_str) != Some(CHECKPOINT_MAGIC) {
        return Err(malformed("missing header".into()));
    }
    let found = lines
        .get(1)
        .and_then(|l| l.strip_prefix("# grid "))
        .ok_or_else(|| malformed("missing grid hash".into()))?;
    if found != hash {
        return Err(SweepError::StaleCheckpoint {
            path: path.to_path_buf(),
            found: found.to_string(),
            expected: hash.to_string(),
        });
    }
    let body = &lines[2..];
    let mut done = BTreeMap::new();
    for (n, line) in body.iter().enumerate() {
        match parse_record(line, grid) {
            Ok((flat, r, secs)) => {
                done.insert(flat, (r, secs));
            }
            Err(_) if n + 1 == body.len() => {}
            Err(e) => return Err(malformed(format!("line {}: {e}", n + 3))),
        }
    }
    Ok(done)
}

/// Write header and known records to a fresh file, then reopen it for
/// appending.
fn rewrite_checkpoint(
    path: &Path,
    hash: &str,
    grid: &SweepGrid,
    done: &BTreeMap<usize, (PointResult, f64)>,
) -> Result<File, SweepError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("ckpt.tmp");
    {
        let mut f = File::create(&tmp)?;
        writeln!(f, "{CHECKPOINT_MAGIC}")?;
        writeln!(f, "# grid {hash}")?;
        for (&flat, (r, secs)) in done {
            append_record(&mut f, grid, flat, r, *secs)?;
        }
    }
    fs::rename(&tmp, path)?;
    Ok(OpenOptions::new().append(true).open(path)?)
}

/// Pair of 4-neighbours with different labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct BoundarySegment {
    /// (gain row, Δf column) of the first point.
    pub a: (usize, usize),
    /// The neighbour, one step further along Δf or gain.
    pub b: (usize, usize),
    pub label_a: PointLabel,
    pub label_b: PointLabel,
}

/// All 4-neighbour pairs whose labels differ, sorted by position.
pub fn boundary_extract(pd: &PhaseDiagram) -> Vec<BoundarySegment> {
    let (ng, nd) = (pd.grid.gain_axis.len(), pd.grid.dfreq_axis.len());
    let mut out = Vec::new();
    for g in 0..ng {
        for d in 0..nd {
            let here = pd.label(g, d);
            for (g2, d2) in [(g, d + 1), (g + 1, d)] {
                if g2 < ng && d2 < nd {
                    let there = pd.label(g2, d2);
                    if there != here {
                        out.push(BoundarySegment {
                            a: (g, d),
                            b: (g2, d2),
                            label_a: here,
                            label_b: there,
                        });
                    }
                }
            }
        }
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> SystemParams {
        SystemParams::split_hz(1000.0, 0.0, 1.0).unwrap()
    }

    fn diagram(labels: &[&[Regime]]) -> PhaseDiagram {
        let ng = labels.len();
        let nd = labels[0].len();
        let grid = SweepGrid::new(
            SweepGrid::linspace(0.0, 10.0 * (nd - 1) as f64, nd),
            SweepGrid::linspace(1.0, ng as f64, ng),
            1000.0,
            base(),
        )
        .unwrap();
        let points = labels
            .iter()
            .flat_map(|row| row.iter())
            .map(|&r| PointResult {
                label: PointLabel::Regime(r),
                k_statistic: None,
                peak_count: 1,
                dominant_freq_hz: None,
            })
            .collect();
        PhaseDiagram {
            grid,
            points,
            runtimes: vec![0.0; ng * nd],
        }
    }

    #[test]
    fn grid_validation() {
        assert!(SweepGrid::new(vec![], vec![1.0], 1000.0, base()).is_err());
        assert!(SweepGrid::new(vec![0.0, 0.0], vec![1.0], 1000.0, base()).is_err());
        assert!(SweepGrid::new(vec![0.0, 1.0], vec![2.0, 1.0], 1000.0, base()).is_err());
        assert!(SweepGrid::new(vec![f64::NAN], vec![1.0], 1000.0, base()).is_err());
        let g = SweepGrid::default_paper(base(), 1000.0).unwrap();
        assert_eq!(g.len(), 31 * 25);
        assert_eq!(g.dfreq_axis()[30], 300.0);
        assert_eq!(g.gain_axis()[24], 24.0);
    }

    #[test]
    fn split_keeps_mean_fixed() {
        let g = SweepGrid::new(vec![0.0, 50.0, 220.0], vec![2.0, 16.0], 1000.0, base()).unwrap();
        for d in 0..3 {
            let p = g.params_at(1, d).unwrap();
            let [w1, w2] = p.larmor();
            assert!((0.5 * (w1 + w2) - 2.0 * PI * 1000.0).abs() < 1e-9);
            assert!((p.delta_omega() - 2.0 * PI * g.dfreq_axis()[d]).abs() < 1e-9);
            assert!((p.alpha() - 16.0 * critical_alpha(&p)).abs() < 1e-9);
        }
    }

    #[test]
    fn flat_index_round_trip() {
        let g = SweepGrid::new(vec![0.0, 1.0, 2.0], vec![1.0, 2.0], 1000.0, base()).unwrap();
        for flat in 0..g.len() {
            let (a, b) = g.coords(flat);
            assert_eq!(g.index(a, b), flat);
        }
    }

    #[test]
    fn seeds_differ_between_points() {
        let mut seen = std::collections::HashSet::new();
        for g in 0..25 {
            for d in 0..31 {
                assert!(seen.insert(point_seed(0, g, d)));
            }
        }
        assert_ne!(point_seed(1, 0, 0), point_seed(0, 0, 0));
    }

    #[test]
    fn fingerprint_tracks_inputs() {
        let g = SweepGrid::new(vec![0.0, 1.0], vec![1.0, 2.0], 1000.0, base()).unwrap();
        let cfg = IntegrationConfig::default();
        let th = Thresholds::default();
        let opts = SweepOptions::default();
        let h = g.fingerprint(&cfg, &th, &opts);
        assert_eq!(h.len(), 64);
        assert_eq!(h, g.fingerprint(&cfg, &th, &SweepOptions { workers: 8, ..opts.clone() }));
        assert_ne!(h, g.fingerprint(&cfg, &th, &SweepOptions { seed: 1, ..opts.clone() }));
        let th2 = Thresholds {
            k_threshold: 0.7,
            ..th
        };
        assert_ne!(h, g.fingerprint(&cfg, &th2, &opts));
    }

    #[test]
    fn uniform_diagram_has_no_boundary() {
        let pd = diagram(&[&[Regime::Chaos; 4], &[Regime::Chaos; 4]]);
        assert!(boundary_extract(&pd).is_empty());
    }

    #[test]
    fn vertical_boundary_between_halves() {
        use Regime::*;
        let row: &[Regime] = &[LimitCycle, LimitCycle, QuasiPeriodic, QuasiPeriodic];
        let pd = diagram(&[row, row, row]);
        let b = boundary_extract(&pd);
        assert_eq!(b.len(), 3);
        for (g, seg) in b.iter().enumerate() {
            assert_eq!(seg.a, (g, 1));
            assert_eq!(seg.b, (g, 2));
            assert_eq!(seg.label_a, PointLabel::Regime(LimitCycle));
        }
    }

    #[test]
    fn labels_parse() {
        assert_eq!("Failed".parse::<PointLabel>().unwrap(), PointLabel::Failed);
        assert_eq!("Chaos".parse::<PointLabel>().unwrap(), PointLabel::Regime(Regime::Chaos));
        assert!("chaos".parse::<PointLabel>().is_err());
    }

    #[test]
    fn records_round_trip_exactly() {
        let g = SweepGrid::new(vec![0.0, 1.0], vec![1.0, 2.0], 1000.0, base()).unwrap();
        let r = PointResult {
            label: PointLabel::Regime(Regime::QuasiPeriodic),
            k_statistic: Some(0.123_456_789_012_345_67),
            peak_count: 3,
            dominant_freq_hz: Some(1_135.000_000_1),
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.ckpt");
        let mut f = File::create(&path).unwrap();
        append_record(&mut f, &g, 3, &r, 0.5).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let (flat, back, secs) = parse_record(text.trim_end(), &g).unwrap();
        assert_eq!((flat, back, secs), (3, r, 0.5));
        assert!(parse_record("0\t0\tChaos", &g).is_err());
        assert!(parse_record("5\t0\tChaos\t-\t1\t-\t0", &g).is_err());
    }
}
