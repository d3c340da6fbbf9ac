use std::f64::consts::PI;

use dualcell_core::analysis::poincare::{clusters, max_gap_fraction, section_dimension};
use dualcell_core::analysis::{classify_regime, poincare_section, Regime, Thresholds};
use dualcell_core::bloch::DEFAULT_MEAN_LARMOR_HZ;
use dualcell_core::integrator::convergence_order;
use dualcell_core::{default_initial_state, integrate, IntegrationConfig, SpinState, SystemParams, Trajectory};

fn run(dfreq: f64, gain: f64) -> (SystemParams, Trajectory) {
    let p = SystemParams::split_hz(DEFAULT_MEAN_LARMOR_HZ, dfreq, gain).unwrap();
    let init = default_initial_state(&p, 0.1).unwrap();
    let traj = integrate(&p, &init, &IntegrationConfig::default()).unwrap();
    (p, traj)
}

#[test]
fn limit_cycle_anchor() {
    let (p, traj) = run(40.0, 16.0);
    let label = classify_regime(&traj, &p, &Thresholds::default()).unwrap();
    assert_eq!(label.regime, Regime::LimitCycle);
    assert_eq!(label.peak_count, 1);

    let sec = poincare_section(&traj).unwrap();
    let link = 0.01 * sec.attractor_extent;
    assert_eq!(clusters(&sec.points, link).len(), 1);
    assert!(section_dimension(&sec) < 0.2);
}

#[test]
fn quasi_periodic_anchor() {
    let (p, traj) = run(220.0, 16.0);
    let label = classify_regime(&traj, &p, &Thresholds::default()).unwrap();
    assert_eq!(label.regime, Regime::QuasiPeriodic, "{label:?}");
    assert!(label.peak_count >= 2);
    assert!(label.k_statistic.unwrap() < 0.8);

    let sec = poincare_section(&traj).unwrap();
    assert!(clusters(&sec.points, 0.01 * sec.attractor_extent).len() > 1);
    assert!(max_gap_fraction(&sec.points) < 0.05);
    let d = section_dimension(&sec);
    assert!((d - 1.0).abs() < 0.2, "{d}");
}

#[test]
fn chaos_anchor() {
    let (p, traj) = run(110.0, 20.0);
    let label = classify_regime(&traj, &p, &Thresholds::default()).unwrap();
    assert_eq!(label.regime, Regime::Chaos, "{label:?}");
    assert!(label.k_statistic.unwrap() >= 0.8);

    let sec = poincare_section(&traj).unwrap();
    assert!(section_dimension(&sec) > 1.2);
}

#[test]
fn subcritical_gain_decays() {
    for dfreq in [0.0, 40.0, 220.0] {
        let (p, traj) = run(dfreq, 0.5);
        let label = classify_regime(&traj, &p, &Thresholds::default()).unwrap();
        assert_eq!(label.regime, Regime::NoSignal);
        let last = traj.states().last().unwrap();
        assert!(last.0[2] > 0.999 * p.m0() && last.0[5] > 0.999 * p.m0());
    }
}

#[test]
fn rk4_converges_at_fourth_order() {
    let p = SystemParams::split_hz(DEFAULT_MEAN_LARMOR_HZ, 50.0, 0.0).unwrap();
    let init = SpinState([0.3, 0.0, 0.4, 0.0, 0.2, -0.1]);
    let report = convergence_order(&p, &init, &[4e-5, 2e-5, 1e-5], 0.05).unwrap();
    assert!(!report.inconclusive, "{report:?}");
    assert!((3.7..=4.3).contains(&report.order), "{report:?}");
}

#[test]
fn locked_frequency_sits_near_the_mean() {
    // The feedback pulls the common line by a few Hz at most.
    let (p, traj) = run(40.0, 16.0);
    let label = classify_regime(&traj, &p, &Thresholds::default()).unwrap();
    let f = label.dominant_freq_hz.unwrap();
    let mean = 0.5 * (p.larmor()[0] + p.larmor()[1]) / (2.0 * PI);
    assert!((f - mean).abs() < 15.0, "{f}");
}
