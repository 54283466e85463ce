//! Cross-model checks of the time dependent solver against the resonant
//! approximation, expansion-order convergence, and Floquet stability for
//! the operating points used throughout the crate.

use num_complex::Complex64;
use optomech::full_model::{drive_for_targets, evolve_full, floquet_exponents};
use optomech::mean_field::FieldMode;
use optomech::params::SystemParams;
use optomech::rwa;

/// Sideband-resolved operating point: couplings near the cavity linewidth,
/// the requested mechanical frequencies far above it.
fn resolved_targets(omega: (f64, f64), g1: f64, nbar: (f64, f64)) -> SystemParams {
    let mut p = SystemParams::with_couplings(omega, 1.0, (1e-4, 1e-4), (g1, 1.0), 0.01, nbar)
        .unwrap();
    p.g_single = 1e-4;
    p
}

/// Largest pointwise gap between two sampled curves.
fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn half_unit_grid(t_end: f64) -> Vec<f64> {
    let n = (2.0 * t_end).round() as usize;
    (0..=n).map(|i| 0.5 * i as f64).collect()
}

/// Observation window of the trajectory comparisons. The entanglement of
/// every operating point used here saturates well inside it (the slowest
/// case has a saturation time near 6.4 inverse linewidths), and the
/// finite-order field expansion is still trustworthy: its slowly decaying
/// polynomial terms, which eventually overwhelm any fixed truncation
/// order, stay negligible up to roughly sixty inverse linewidths.
const OBSERVATION_WINDOW: f64 = 50.0;

#[test]
fn transient_sixth_order_tracks_resonant_model() {
    let targets = resolved_targets((50.0, 100.0), 0.918, (200.0, 100.0));
    let p = drive_for_targets(&targets, 6).unwrap();
    let grid = half_unit_grid(OBSERVATION_WINDOW);
    let cm0 = rwa::thermal_initial_state(&targets).unwrap();

    let resonant = rwa::evolve(&cm0, &targets, &grid).unwrap();
    let full = evolve_full(&cm0, &p, &grid, 6, FieldMode::Transient).unwrap();

    let en_gap = max_gap(&full.en, &resonant.en);
    let photon_gap = max_gap(&full.photon_number, &resonant.photon_number);
    let at = grid
        .iter()
        .enumerate()
        .max_by(|(i, _), (j, _)| {
            let gi = (full.photon_number[*i] - resonant.photon_number[*i]).abs();
            let gj = (full.photon_number[*j] - resonant.photon_number[*j]).abs();
            gi.partial_cmp(&gj).unwrap()
        })
        .map(|(_, &t)| t)
        .unwrap();
    eprintln!("resolved case: en gap {en_gap:.4}, photon gap {photon_gap:.4} at t {at}");
    assert!(en_gap < 0.05, "entanglement gap {en_gap}");
    // The cavity photon number carries the periodic micromotion that the
    // resonant model averages away, the ramp of the drive tones at early
    // times, and at the edge of the window the first sign of the series'
    // polynomial terms. All of it stays far below the thermal scale of
    // the baths (several hundred quanta here).
    assert!(photon_gap < 60.0, "photon-number gap {photon_gap}");
    assert!(*resonant.en.last().unwrap() > 1.0);
}

#[test]
fn steady_expansion_orders_converge() {
    let targets = resolved_targets((50.0, 100.0), 0.918, (200.0, 100.0));
    let p = drive_for_targets(&targets, 6).unwrap();
    let grid = half_unit_grid(20.0);
    let cm0 = rwa::thermal_initial_state(&targets).unwrap();

    let runs: Vec<Vec<f64>> = [2, 4, 6]
        .iter()
        .map(|&ord| evolve_full(&cm0, &p, &grid, ord, FieldMode::Steady).unwrap().en)
        .collect();
    let gap24 = max_gap(&runs[0], &runs[1]);
    let gap46 = max_gap(&runs[1], &runs[2]);
    eprintln!("order gaps: 2-4 {gap24:.2e}, 4-6 {gap46:.2e}");
    assert!(gap24 < 1e-3, "order 2 vs 4 gap {gap24}");
    assert!(gap46 < 1e-3, "order 4 vs 6 gap {gap46}");
}

/// With the mechanical frequencies only a few tens of linewidths up, the
/// late-time departure from the resonant model needs the transient fields
/// and the higher expansion orders together. Either ingredient alone
/// stays close to the resonant curve: the first-order runs share a small
/// offset from sitting at a slightly displaced operating point (the drive
/// is resolved against the sixth-order fields), the ringing of the
/// transient fields averages out at any order, and the sixth-order terms
/// with settled fields only add bounded micromotion. The combination
/// instead activates the slowly decaying polynomial terms of the series
/// and the trajectory leaves the resonant one entirely.
#[test]
fn transient_and_high_orders_deviate_only_in_combination() {
    let targets = resolved_targets((25.0, 50.0), 0.918, (200.0, 100.0));
    let p = drive_for_targets(&targets, 6).unwrap();
    let grid = half_unit_grid(60.0);
    let cm0 = rwa::thermal_initial_state(&targets).unwrap();
    let resonant = rwa::evolve(&cm0, &targets, &grid).unwrap();

    // Deviation after the entanglement has settled, so that the small
    // timing differences of the rise do not dominate the comparison.
    let late_deviation = |order: usize, mode: FieldMode| -> f64 {
        let run = evolve_full(&cm0, &p, &grid, order, mode).unwrap();
        grid.iter()
            .enumerate()
            .filter(|(_, &t)| t >= 40.0)
            .map(|(i, _)| (run.en[i] - resonant.en[i]).abs())
            .fold(0.0, f64::max)
    };
    let combined = late_deviation(6, FieldMode::Transient);
    let steady_high = late_deviation(6, FieldMode::Steady);
    let transient_low = late_deviation(1, FieldMode::Transient);
    let steady_low = late_deviation(1, FieldMode::Steady);
    eprintln!(
        "late deviations: combined {combined:.4}, steady order 6 {steady_high:.4}, \
         transient order 1 {transient_low:.4}, steady order 1 {steady_low:.4}"
    );
    for single in [steady_high, transient_low, steady_low] {
        assert!(single < 0.1, "single-ingredient deviation {single}");
        assert!(combined > 5.0 * single);
    }
    assert!(combined > 0.3, "combined deviation {combined}");
}

/// Operating point with a small sideband gap: the resonant model predicts
/// a stable steady state, the periodic model does not.
#[test]
fn floquet_flags_instability_missed_by_resonant_model() {
    let mut targets = resolved_targets((51.0, 100.0), 1.0, (20.0, 10.0));
    targets.gamma1 = 1e-3;
    targets.gamma2 = 1e-3;
    let report = rwa::stability_check(&targets).unwrap();
    assert!(report.stable, "resonant model should be stable here");

    let p = drive_for_targets(&targets, 2).unwrap();
    let exponents = floquet_exponents(&p, 2).unwrap();
    let max_re = exponents[0].re;
    eprintln!("small-gap case: max Floquet exponent {max_re:.3e}");
    assert!(max_re > 0.0, "expected a positive Floquet exponent, got {max_re:.3e}");
}

/// Even at the well-resolved operating point the periodic terms heat the
/// weakly damped mechanical pair slightly faster than its bare damping
/// can remove, so the strict Floquet verdict is unstable. The rate is a
/// small fraction of a linewidth: growth over the observation window is
/// invisible there, which is why the bounded trajectories above coexist
/// with this verdict. Damping two orders of magnitude stronger restores
/// strict stability.
#[test]
fn resolved_operating_point_heats_slower_than_the_observation_window() {
    let targets = resolved_targets((50.0, 100.0), 0.918, (200.0, 100.0));
    let p = drive_for_targets(&targets, 6).unwrap();
    let exponents = floquet_exponents(&p, 6).unwrap();
    let max_re = exponents[0].re;
    eprintln!("resolved case: max Floquet exponent {max_re:.3e}");
    assert!(max_re > 0.0, "heating rate {max_re:.3e}");
    assert!(max_re < 2e-3, "heating rate {max_re:.3e}");
    assert!((max_re * OBSERVATION_WINDOW).exp() < 1.1);

    // The exponents come in conjugate pairs and their sum matches the
    // time-averaged trace of the drift.
    let sum: Complex64 = exponents.iter().sum();
    let trace = -2.0 * p.kappa - p.gamma1 - p.gamma2;
    assert!((sum.re - trace).abs() < 1e-9, "sum {} vs trace {}", sum.re, trace);
    assert!(sum.im.abs() < 1e-9);

    // The truncation order does not move the verdict.
    let low_order = floquet_exponents(&drive_for_targets(&targets, 2).unwrap(), 2).unwrap();
    assert!((low_order[0].re - max_re).abs() < 1e-6);

    let mut damped = resolved_targets((50.0, 100.0), 0.918, (200.0, 100.0));
    damped.gamma1 = 1e-2;
    damped.gamma2 = 1e-2;
    let pd = drive_for_targets(&damped, 2).unwrap();
    assert!(floquet_exponents(&pd, 2).unwrap()[0].re < 0.0);
}
