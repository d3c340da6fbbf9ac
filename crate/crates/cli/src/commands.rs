use std::fs;
use std::path::{Path, PathBuf};

use dualcell_core::analysis::robustness::robustness_curve;
use dualcell_core::analysis::{
    chaos01_raw, chaos01_series, classify_regime, detect_peaks, poincare_section, spectrum, Regime,
};
use dualcell_core::sweep::{boundary_extract, run_sweep, PointLabel, SweepOptions};
use dualcell_core::{default_initial_state, integrate_noisy};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{ensure_dir, header, num, opt, write_file, write_json, write_table};
use crate::plots;

#[derive(Serialize)]
struct PeakOut {
    freq_hz: f64,
    amp: f64,
}

#[derive(Serialize)]
struct SimulateSummary<'a> {
    program: &'static str,
    version: &'static str,
    command: &'static str,
    seed: u64,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    label: Option<Regime>,
    k_statistic: Option<f64>,
    peak_count: usize,
    dominant_freq_hz: Option<f64>,
    peaks: Vec<PeakOut>,
    larmor_hz: [f64; 2],
    alpha_over_alpha_c: f64,
    poincare_crossings: usize,
    config: &'a RunConfig,
}

pub fn simulate(cfg: &RunConfig, out: &Path) -> Result<String, CliError> {
    ensure_dir(out)?;
    let params = cfg.system_params()?;
    let init = default_initial_state(&params, cfg.system.tilt)?;
    let larmor_hz = params.larmor().map(|w| w / (2.0 * std::f64::consts::PI));
    let mut summary = SimulateSummary {
        program: "dualcell",
        version: dualcell_core::VERSION,
        command: "simulate",
        seed: cfg.seed,
        status: "ok",
        error: None,
        label: None,
        k_statistic: None,
        peak_count: 0,
        dominant_freq_hz: None,
        peaks: vec![],
        larmor_hz,
        alpha_over_alpha_c: cfg.system.alpha_over_alpha_c,
        poincare_crossings: 0,
        config: cfg,
    };

    let traj = match integrate_noisy(&params, &init, &cfg.integration(), &cfg.noise()) {
        Ok(t) => t,
        Err(e) => {
            let err = CliError::from(e);
            if matches!(err, CliError::Numerical(_)) {
                summary.status = "failed";
                summary.error = Some(err.to_string());
                write_json(&out.join("summary.json"), &summary)?;
            }
            return Err(err);
        }
    };
    let th = cfg.thresholds();
    let label = classify_regime(&traj, &params, &th)?;
    let spec = spectrum(&traj)?;
    let peaks = detect_peaks(&spec, th.rel_threshold, th.min_separation_hz)?;
    let section = poincare_section(&traj).ok();

    let cols = ["t_s", "mx1", "my1", "mz1", "mx2", "my2", "mz2", "mx"];
    write_table(
        &out.join("trajectory.tsv"),
        &header("simulate", cfg, &cols),
        traj.states()
            .iter()
            .enumerate()
            .step_by(cfg.output.trajectory_stride)
            .map(|(k, s)| {
                let mut row = vec![num(traj.time(k))];
                row.extend(s.0.iter().map(|&v| num(v)));
                row.push(num(s.mx_total()));
                row
            }),
    )?;
    write_table(
        &out.join("spectrum.tsv"),
        &header("simulate", cfg, &["freq_hz", "amp"]),
        spec.freqs.iter().zip(&spec.amps).map(|(&f, &a)| vec![num(f), num(a)]),
    )?;
    let points = section.as_ref().map_or(&[][..], |s| &s.points[..]);
    let times = section.as_ref().map_or(&[][..], |s| &s.times[..]);
    write_table(
        &out.join("poincare.tsv"),
        &header("simulate", cfg, &["mx_total", "mz_total", "t_s"]),
        points.iter().zip(times).map(|(p, &t)| vec![num(p[0]), num(p[1]), num(t)]),
    )?;

    summary.label = Some(label.regime);
    summary.k_statistic = label.k_statistic;
    summary.peak_count = label.peak_count;
    summary.dominant_freq_hz = label.dominant_freq_hz;
    summary.peaks = peaks
        .peaks
        .iter()
        .map(|p| PeakOut {
            freq_hz: p.freq,
            amp: p.amp,
        })
        .collect();
    summary.poincare_crossings = section.as_ref().map_or(0, |s| s.crossing_count);
    write_json(&out.join("summary.json"), &summary)?;
    if cfg.output.plot_scripts {
        write_file(&out.join("plot_simulate.py"), plots::simulate().as_bytes())?;
    }
    Ok(format!(
        "label {}  K {}  peaks {}  dominant {} Hz",
        label.regime,
        label.k_statistic.map_or("-".into(), |k| format!("{k:.4}")),
        label.peak_count,
        label.dominant_freq_hz.map_or("-".into(), |f| format!("{f:.3}")),
    ))
}

#[derive(Serialize)]
struct SweepSummary<'a> {
    program: &'static str,
    version: &'static str,
    command: &'static str,
    seed: u64,
    points: usize,
    counts: Vec<(String, usize)>,
    boundary_segments: usize,
    config: &'a RunConfig,
}

pub struct SweepRun {
    pub workers: usize,
    pub fresh: bool,
    pub stop_after: Option<usize>,
}

pub fn sweep(cfg: &RunConfig, out: &Path, run: &SweepRun) -> Result<String, CliError> {
    ensure_dir(out)?;
    let grid = cfg.grid()?;
    let opts = SweepOptions {
        workers: run.workers,
        checkpoint: Some(out.join("sweep.ckpt")),
        fresh: run.fresh,
        stop_after: run.stop_after,
        tilt: cfg.system.tilt,
        seed: cfg.seed,
    };
    let pd = run_sweep(&grid, &cfg.integration(), &cfg.thresholds(), &opts)?;

    let cols = ["dfreq_hz", "alpha_over_alpha_c", "label", "k", "dominant_freq_hz", "peak_count"];
    write_table(
        &out.join("phase_diagram.tsv"),
        &header("sweep", cfg, &cols),
        pd.points.iter().enumerate().map(|(flat, p)| {
            let (g, d) = grid.coords(flat);
            vec![
                num(grid.dfreq_axis()[d]),
                num(grid.gain_axis()[g]),
                p.label.to_string(),
                opt(p.k_statistic),
                opt(p.dominant_freq_hz),
                p.peak_count.to_string(),
            ]
        }),
    )?;
    let segments = boundary_extract(&pd);
    let cols = ["dfreq_a_hz", "alpha_a", "dfreq_b_hz", "alpha_b", "label_a", "label_b"];
    write_table(
        &out.join("boundaries.tsv"),
        &header("sweep", cfg, &cols),
        segments.iter().map(|s| {
            vec![
                num(grid.dfreq_axis()[s.a.1]),
                num(grid.gain_axis()[s.a.0]),
                num(grid.dfreq_axis()[s.b.1]),
                num(grid.gain_axis()[s.b.0]),
                s.label_a.to_string(),
                s.label_b.to_string(),
            ]
        }),
    )?;
    let labels = Regime::ALL
        .iter()
        .map(|&r| PointLabel::Regime(r))
        .chain([PointLabel::Failed]);
    let counts: Vec<(String, usize)> = labels
        .map(|l| (l.to_string(), pd.points.iter().filter(|p| p.label == l).count()))
        .collect();
    let line = counts.iter().map(|(l, n)| format!("{l} {n}")).collect::<Vec<_>>().join(", ");
    write_json(
        &out.join("summary.json"),
        &SweepSummary {
            program: "dualcell",
            version: dualcell_core::VERSION,
            command: "sweep",
            seed: cfg.seed,
            points: pd.points.len(),
            counts,
            boundary_segments: segments.len(),
            config: cfg,
        },
    )?;
    if cfg.output.plot_scripts {
        write_file(&out.join("plot_phase_diagram.py"), plots::phase_diagram().as_bytes())?;
    }
    Ok(format!("{} points: {line}", pd.points.len()))
}

pub fn robustness(cfg: &RunConfig, out: &Path) -> Result<String, CliError> {
    let r = &cfg.robustness;
    if r.sigma_b_nt.len() < 3 {
        return Err(CliError::Usage("robustness.sigma_b_nt needs at least 3 values".into()));
    }
    if r.repeats < 3 {
        return Err(CliError::Usage("robustness.repeats must be at least 3".into()));
    }
    if r.points.is_empty() {
        return Err(CliError::Usage("robustness.points is empty".into()));
    }
    ensure_dir(out)?;
    let integration = cfg.integration();
    let mut rows = Vec::new();
    let mut lines = Vec::new();
    for point in &r.points {
        let params = cfg.params_at(point.dfreq_hz, point.alpha_over_alpha_c)?;
        let init = default_initial_state(&params, cfg.system.tilt)?;
        let curve = robustness_curve(&params, &init, &integration, &r.sigma_b_nt, r.mode, r.repeats)?;
        lines.push(format!(
            "{}: Q = {}",
            point.name,
            curve.iter().map(|c| format!("{:.3}", c.q_mean)).collect::<Vec<_>>().join(" ")
        ));
        for c in curve {
            rows.push(vec![
                point.name.clone(),
                num(point.dfreq_hz),
                num(point.alpha_over_alpha_c),
                num(c.sigma_b),
                num(c.q_mean),
                num(c.q_std),
            ]);
        }
    }
    let cols = ["point", "dfreq_hz", "alpha_over_alpha_c", "sigma_b_nt", "q_mean", "q_std"];
    write_table(&out.join("robustness.tsv"), &header("robustness", cfg, &cols), rows)?;
    if cfg.output.plot_scripts {
        write_file(&out.join("plot_robustness.py"), plots::robustness().as_bytes())?;
    }
    Ok(lines.join("\n"))
}

/// K of a one-column series (used as is) or a `(t, value)` table (sample
/// rate from the time column, then downsampled to the dominant period).
pub fn chaos_test(cfg: &RunConfig, input: &PathBuf) -> Result<f64, CliError> {
    let text = fs::read_to_string(input)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", input.display())))?;
    let table = parse_table(&text).map_err(|e| CliError::Usage(format!("{}: {e}", input.display())))?;
    let chaos = cfg.thresholds().chaos;
    let k = match table[0].len() {
        1 => {
            let series: Vec<f64> = table.iter().map(|r| r[0]).collect();
            chaos01_raw(&series, &chaos)?
        }
        _ => {
            let n = table.len();
            if n < 2 {
                return Err(CliError::Usage(format!("{}: need at least two rows", input.display())));
            }
            let dt = (table[n - 1][0] - table[0][0]) / (n - 1) as f64;
            if !(dt > 0.0) {
                return Err(CliError::Usage(format!("{}: time column must increase", input.display())));
            }
            let series: Vec<f64> = table.iter().map(|r| r[1]).collect();
            chaos01_series(&series, 1.0 / dt, &chaos)?
        }
    };
    Ok(k)
}

fn parse_table(text: &str) -> Result<Vec<Vec<f64>>, String> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|f| !f.is_empty())
            .map(|f| f.parse::<f64>().map_err(|_| format!("line {}: `{f}` is not a number", n + 1)))
            .collect::<Result<Vec<f64>, String>>()?;
        if !(1..=2).contains(&row.len()) {
            return Err(format!("line {}: expected 1 or 2 columns, found {}", n + 1, row.len()));
        }
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(format!("line {}: inconsistent column count", n + 1));
            }
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(format!("line {}: non-finite value", n + 1));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err("no data rows".into());
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_parse() {
        assert_eq!(parse_table("# c\n1\n2.5\n").unwrap(), vec![vec![1.0], vec![2.5]]);
        assert_eq!(parse_table("0 1\n0.1,2\n").unwrap(), vec![vec![0.0, 1.0], vec![0.1, 2.0]]);
        assert!(parse_table("").is_err());
        assert!(parse_table("# only\n").is_err());
        assert!(parse_table("1\n2 3\n").is_err());
        assert!(parse_table("1 2 3\n").is_err());
        assert!(parse_table("x\n").is_err());
        assert!(parse_table("nan\n").is_err());
    }
}
