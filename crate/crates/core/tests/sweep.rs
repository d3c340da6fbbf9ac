use std::fs;

use dualcell_core::analysis::{Regime, Thresholds};
use dualcell_core::sweep::{run_sweep, PointLabel, SweepError, SweepGrid, SweepOptions};
use dualcell_core::{IntegrationConfig, SystemParams};

fn short_cfg() -> IntegrationConfig {
    IntegrationConfig {
        t_total: 1.5,
        t_transient: 0.5,
        ..Default::default()
    }
}

fn small_grid() -> SweepGrid {
    let base = SystemParams::split_hz(1000.0, 0.0, 1.0).unwrap();
    SweepGrid::new(vec![0.0, 40.0, 220.0], vec![0.5, 16.0], 1000.0, base).unwrap()
}

#[test]
fn single_point_sweep() {
    let base = SystemParams::split_hz(1000.0, 0.0, 1.0).unwrap();
    let grid = SweepGrid::new(vec![40.0], vec![16.0], 1000.0, base).unwrap();
    let pd = run_sweep(&grid, &short_cfg(), &Thresholds::default(), &SweepOptions::default()).unwrap();
    assert_eq!(pd.points.len(), 1);
    assert_eq!(pd.label(0, 0), PointLabel::Regime(Regime::LimitCycle));
}

#[test]
fn worker_count_does_not_change_results() {
    let grid = small_grid();
    let th = Thresholds::default();
    let one = run_sweep(&grid, &short_cfg(), &th, &SweepOptions::default()).unwrap();
    let four = run_sweep(&grid, &short_cfg(), &th, &SweepOptions { workers: 4, ..Default::default() }).unwrap();
    assert!(one.same_results(&four));
    assert!(one.column(0).iter().all(|l| matches!(
        l,
        PointLabel::Regime(Regime::NoSignal | Regime::LimitCycle)
    )));
    assert_eq!(one.label(0, 2), PointLabel::Regime(Regime::NoSignal));
    assert_eq!(one.label(1, 2), PointLabel::Regime(Regime::QuasiPeriodic));
}

#[test]
fn interrupted_sweep_resumes_to_the_same_diagram() {
    let grid = small_grid();
    let th = Thresholds::default();
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("sweep.ckpt");
    let opts = SweepOptions {
        workers: 2,
        checkpoint: Some(ckpt.clone()),
        ..Default::default()
    };

    let err = run_sweep(&grid, &short_cfg(), &th, &SweepOptions { stop_after: Some(2), ..opts.clone() }).unwrap_err();
    assert!(matches!(err, SweepError::Interrupted { completed: 2 }));
    let records = fs::read_to_string(&ckpt).unwrap().lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(records, 2);

    // simulate a crash in the middle of writing the next record
    let mut text = fs::read_to_string(&ckpt).unwrap();
    text.push_str("1\t2\tQuasi");
    fs::write(&ckpt, text).unwrap();

    let resumed = run_sweep(&grid, &short_cfg(), &th, &opts).unwrap();
    let straight = run_sweep(&grid, &short_cfg(), &th, &SweepOptions::default()).unwrap();
    assert!(resumed.same_results(&straight));

    // a finished checkpoint is reused without recomputation
    let again = run_sweep(&grid, &short_cfg(), &th, &opts).unwrap();
    assert_eq!(again.runtimes, resumed.runtimes);
}

#[test]
fn checkpoint_from_another_sweep_is_refused() {
    let grid = small_grid();
    let th = Thresholds::default();
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("sweep.ckpt");
    let opts = SweepOptions {
        checkpoint: Some(ckpt.clone()),
        stop_after: Some(1),
        ..Default::default()
    };
    let _ = run_sweep(&grid, &short_cfg(), &th, &opts);

    let other = SweepOptions { seed: 9, ..opts.clone() };
    assert!(matches!(
        run_sweep(&grid, &short_cfg(), &th, &other),
        Err(SweepError::StaleCheckpoint { .. })
    ));
    let fresh = SweepOptions { fresh: true, ..other };
    assert!(matches!(
        run_sweep(&grid, &short_cfg(), &th, &fresh),
        Err(SweepError::Interrupted { completed: 1 })
    ));
}

#[test]
fn malformed_checkpoint_is_an_error() {
    let grid = small_grid();
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("sweep.ckpt");
    fs::write(&ckpt, "not a checkpoint\n").unwrap();
    let opts = SweepOptions {
        checkpoint: Some(ckpt),
        ..Default::default()
    };
    assert!(matches!(
        run_sweep(&grid, &short_cfg(), &Thresholds::default(), &opts),
        Err(SweepError::MalformedCheckpoint { .. })
    ));
}

#[test]
fn coarse_step_is_rejected_up_front() {
    let grid = small_grid();
    let cfg = IntegrationConfig {
        dt: 1e-4,
        ..short_cfg()
    };
    assert!(matches!(
        run_sweep(&grid, &cfg, &Thresholds::default(), &SweepOptions::default()),
        Err(SweepError::Integration(_))
    ));
}
