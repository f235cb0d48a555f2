use fracdml::experiments::{hopf_family, HopfCurve};
use fracdml::{
    bifurcation_sweep, hopf_curve, oscillation_metrics, run_experiment, solve_fde, Coupling,
    DmlParams, DmlSystem, FractionalOrder, SigmoidCoupling, SolverConfig, SweepRange, TailSettings,
};

fn single(i: f64) -> DmlSystem {
    DmlSystem::single(DmlParams::default().with_current(i)).unwrap()
}

fn order(b: f64) -> FractionalOrder {
    FractionalOrder::new(b).unwrap()
}

fn reduced() -> SolverConfig {
    SolverConfig::new(0.0, 1500.0, 0.05)
}

/// The full protocol grid, on the FFT path so it finishes in seconds.
fn full() -> SolverConfig {
    SolverConfig::new(0.0, 6000.0, 0.01).with_fft(true)
}

#[test]
fn reduced_grid_dichotomy() {
    let settings = TailSettings::new(10_000, 500);
    let below = run_experiment(
        &single(0.019),
        order(0.97),
        &[0.1, 0.1],
        &reduced(),
        &settings,
    )
    .unwrap();
    assert!(below.converged, "amplitude {}", below.tail_amplitude_x);
    assert!((below.final_state[0] - 0.40772).abs() < 1e-3);
    let above = run_experiment(
        &single(0.019),
        order(0.99),
        &[0.1, 0.1],
        &reduced(),
        &settings,
    )
    .unwrap();
    assert!(!above.converged);
    assert!(above.tail_amplitude_x > 0.05);
}

#[test]
fn full_protocol_runs() {
    let defaults = TailSettings::default();
    let low = run_experiment(&single(0.019), order(0.9), &[0.1, 0.1], &full(), &defaults).unwrap();
    assert!(low.converged);
    assert!((low.final_state[0] - 0.40772).abs() < 1e-3);
    assert_eq!(low.post_transient().count(), 500_001);

    let high =
        run_experiment(&single(0.019), order(0.99), &[0.1, 0.1], &full(), &defaults).unwrap();
    assert!(!high.converged);
    assert!(
        high.tail_amplitude_x > 0.05,
        "amplitude {}",
        high.tail_amplitude_x
    );
}

#[test]
fn linear_dimer_synchronises_below_threshold() {
    let sys = DmlSystem::new(DmlParams::default(), Coupling::Linear { theta: 0.001 }).unwrap();
    let s = run_experiment(
        &sys,
        order(0.93),
        &[0.1, 0.1, -0.2, 0.1],
        &full(),
        &TailSettings::default(),
    )
    .unwrap();
    assert!(s.converged, "{:?}", s.tail_amplitudes);
    let x1 = s.tail_voltage(0);
    let x2 = s.tail_voltage(1);
    let gap = x1
        .iter()
        .zip(&x2)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(gap < 1e-4, "gap {gap:e}");
    assert!((x1[499] - 0.40772).abs() < 1e-3);
}

#[test]
fn classical_limit_cycle_has_many_extrema_after_transient() {
    let s = run_experiment(
        &single(0.019),
        order(1.0),
        &[0.1, 0.1],
        &full(),
        &TailSettings::default(),
    )
    .unwrap();
    let x = s.trajectory.component(0);
    let m = oscillation_metrics(&x[s.discard..]).unwrap();
    assert!(m.is_oscillating);
    assert!(m.extrema_count > 10, "{m:?}");
}

#[test]
#[ignore = "500 samples at h = 0.01 span 5 time units; the limit-cycle period is about 44"]
fn classical_limit_cycle_extrema_in_default_tail() {
    let s = run_experiment(
        &single(0.019),
        order(1.0),
        &[0.1, 0.1],
        &full(),
        &TailSettings::default(),
    )
    .unwrap();
    let m = oscillation_metrics(&s.tail_voltage(0)).unwrap();
    assert!(m.is_oscillating);
    assert!(m.extrema_count > 10, "{m:?}");
}

#[test]
fn one_point_sweep_equals_single_run() {
    let sys = single(0.019);
    let cfg = SolverConfig::new(0.0, 300.0, 0.05);
    let scan = bifurcation_sweep(
        &sys,
        &SweepRange::descending(0.95, 0.95, 0.002),
        &[0.1, 0.1],
        &cfg,
        500,
    )
    .unwrap();
    assert_eq!(scan.beta_values, vec![0.95]);
    let run = run_experiment(
        &sys,
        order(0.95),
        &[0.1, 0.1],
        &cfg,
        &TailSettings::new(0, 500),
    )
    .unwrap();
    assert_eq!(scan.columns[0].tails[0], run.tail_voltage(0));
    assert_eq!(
        scan.columns[0].final_state.as_deref(),
        Some(run.final_state.as_slice())
    );
}

#[test]
fn sweep_warm_start_is_bitwise_continuous() {
    let sys = DmlSystem::new(DmlParams::default(), Coupling::Linear { theta: 0.008 }).unwrap();
    let cfg = SolverConfig::new(0.0, 200.0, 0.05);
    let y0 = [0.1, 0.1, -0.2, 0.1];
    let scan = bifurcation_sweep(
        &sys,
        &SweepRange::descending(1.0, 0.99, 0.002),
        &y0,
        &cfg,
        100,
    )
    .unwrap();
    assert_eq!(scan.columns.len(), 6);
    assert_eq!(scan.columns[0].initial_state, y0);
    for w in scan.columns.windows(2) {
        assert_eq!(w[0].final_state.as_ref().unwrap(), &w[1].initial_state);
    }
    for c in &scan.columns {
        assert_eq!(c.tails.len(), 2);
        assert!(c.tails.iter().all(|t| t.len() == 100));
    }
    assert!(scan.beta_values.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn sweep_records_failed_cells_and_continues() {
    // An enormous initial voltage overflows at every order, so each cell
    // fails and the next one restarts from the same state.
    let sys = single(0.019);
    let cfg = SolverConfig::new(0.0, 50.0, 0.05);
    let scan = bifurcation_sweep(
        &sys,
        &SweepRange::descending(1.0, 0.98, 0.01),
        &[1e200, 0.1],
        &cfg,
        10,
    )
    .unwrap();
    assert_eq!(scan.columns.len(), 3);
    for c in &scan.columns {
        assert!(c.error.is_some() && c.tails.is_empty() && c.final_state.is_none());
        assert_eq!(c.initial_state, scan.columns[0].initial_state);
    }
}

#[test]
fn reduced_sweep_onset_near_threshold_at_0_019() {
    let scan = bifurcation_sweep(
        &single(0.019),
        &SweepRange::descending(1.0, 0.9, 0.002),
        &[0.1, 0.1],
        &reduced(),
        500,
    )
    .unwrap();
    assert_eq!(scan.columns.len(), 51);
    let onset = scan.last_oscillating().unwrap();
    assert!((onset - 0.98233).abs() < 0.005, "onset {onset}");
    for c in &scan.columns {
        if c.beta < 0.975 {
            assert!(c.spread().unwrap() < 1e-4, "β = {}", c.beta);
        }
    }
}

#[test]
fn full_resolution_sweeps_bracket_thresholds() {
    let range = SweepRange::descending(1.0, 0.97, 0.002);
    let at_019 = bifurcation_sweep(&single(0.019), &range, &[0.1, 0.1], &full(), 500).unwrap();
    for c in &at_019.columns {
        if c.beta < 0.982 - 1e-9 {
            assert!(c.spread().unwrap() < 1e-4, "β = {}", c.beta);
        }
    }
    let onset = at_019.last_oscillating().unwrap();
    assert!((onset - 0.98233).abs() < 0.005, "onset {onset}");

    let at_022 = bifurcation_sweep(&single(0.022), &range, &[0.1, 0.1], &full(), 500).unwrap();
    let onset = at_022.last_oscillating().unwrap();
    assert!(
        (0.986 - 1e-9..=0.990 + 1e-9).contains(&onset),
        "onset {onset}"
    );
}

#[test]
#[ignore = "the 500-sample tail covers about a ninth of a period, so its spread depends on phase"]
fn full_resolution_spread_above_threshold() {
    let range = SweepRange::descending(1.0, 0.97, 0.002);
    let scan = bifurcation_sweep(&single(0.019), &range, &[0.1, 0.1], &full(), 500).unwrap();
    for c in &scan.columns {
        if c.beta >= 0.985 {
            assert!(
                c.spread().unwrap() > 0.05,
                "β = {}: {}",
                c.beta,
                c.spread().unwrap()
            );
        }
    }
}

#[test]
#[ignore = "direct quadratic path at 6e5 steps; minutes per run"]
fn full_resolution_direct_path() {
    let cfg = SolverConfig::new(0.0, 6000.0, 0.01);
    let defaults = TailSettings::default();
    let below = run_experiment(&single(0.019), order(0.97), &[0.1, 0.1], &cfg, &defaults).unwrap();
    assert!(below.converged);
    assert!((below.final_state[0] - 0.40772).abs() < 1e-3);
    let above = run_experiment(&single(0.019), order(0.99), &[0.1, 0.1], &cfg, &defaults).unwrap();
    assert!(above.tail_amplitude_x > 0.05);
}

fn curve_through(curve: &HopfCurve, i: f64) -> f64 {
    curve
        .points
        .iter()
        .find(|p| (p.i - i).abs() < 1e-12)
        .map(|p| p.beta_star)
        .unwrap_or_else(|| panic!("no point at I = {i}"))
}

#[test]
fn hopf_curve_reference_points() {
    // 141 points put nodes exactly on 0.019 and 0.022 up to rounding.
    let curve = hopf_curve(&DmlParams::default(), &Coupling::None, (0.016, 0.03), 141);
    assert!(curve.omitted.is_empty());
    assert!(curve.points.windows(2).all(|w| w[0].i < w[1].i));
    assert!((curve_through(&curve, 0.019) - 0.98233).abs() < 1e-4);
    assert!((curve_through(&curve, 0.022) - 0.98772).abs() < 1e-4);
    assert!(curve
        .points
        .iter()
        .all(|p| p.beta_star > 0.0 && p.beta_star <= 1.0));
}

#[test]
fn hopf_curve_sigmoid_family() {
    let p = DmlParams::default();
    let range = (0.016, 0.0235);
    let base = hopf_curve(&p, &Coupling::None, range, 100);
    let sigmoid = |s: f64| Coupling::Sigmoid(SigmoidCoupling::default().with_sigma(s));
    let zero = hopf_curve(&p, &sigmoid(0.0), range, 100);
    assert_eq!(base.points.len(), zero.points.len());
    for (a, b) in base.points.iter().zip(&zero.points) {
        assert!((a.beta_star - b.beta_star).abs() < 1e-12);
    }

    let sigmas = [0.0001, 0.0005, 0.001, 0.003];
    let family = hopf_family(&p, &sigmas.map(sigmoid), range, 100);
    for pair in family.windows(2) {
        assert_eq!(pair[0].points.len(), pair[1].points.len());
        for (lo, hi) in pair[0].points.iter().zip(&pair[1].points) {
            assert!(hi.beta_star >= lo.beta_star, "I = {}", lo.i);
        }
    }
    assert_eq!(family[2].coupling_value, 0.001);
}

#[test]
fn hopf_curve_is_deterministic() {
    let c = Coupling::Sigmoid(SigmoidCoupling::default());
    let a = hopf_curve(&DmlParams::default(), &c, (0.016, 0.03), 50);
    let b = hopf_curve(&DmlParams::default(), &c, (0.016, 0.03), 50);
    assert_eq!(a, b);
}

#[test]
fn dimer_permutation_symmetry() {
    let cfg = SolverConfig::new(0.0, 200.0, 0.05);
    for c in [
        Coupling::Linear { theta: 0.008 },
        Coupling::Sigmoid(SigmoidCoupling::default()),
    ] {
        let sys = DmlSystem::new(DmlParams::default(), c).unwrap();
        let a = solve_fde(&sys, order(0.95), &cfg, &[0.1, 0.1, -0.2, 0.1]).unwrap();
        let b = solve_fde(&sys, order(0.95), &cfg, &[-0.2, 0.1, 0.1, 0.1]).unwrap();
        for (ra, rb) in a.rows().zip(b.rows()) {
            assert_eq!([ra[2], ra[3], ra[0], ra[1]], rb);
        }
    }
}
