//! Scan invariants: grid order, serial/parallel agreement, regime
//! consistency, and bifurcation-column oracles.

use hyperfin_core::*;

type RecordBits = (u64, Vec<u64>, Option<Regime>, Vec<u64>, bool);

fn bits(r: &SweepResult) -> Vec<RecordBits> {
    r.records
        .iter()
        .map(|rec| {
            (
                rec.param_value.to_bits(),
                rec.spectrum.as_ref().map(|s| s.exponents.iter().map(|v| v.to_bits()).collect()).unwrap_or_default(),
                rec.regime,
                rec.samples.iter().map(|v| v.to_bits()).collect(),
                rec.diverged,
            )
        })
        .collect()
}

fn small_plan(parameter: SweepParameter, lo: f64, hi: f64) -> SweepPlan {
    let mut plan = SweepPlan::new(parameter, lo, hi, Scenario::baseline(0.3, 2.0, 1.0).unwrap());
    plan.grid_points = 6;
    plan.lyapunov = LyapunovSettings { transient: 2_000, iterations: 10_000, ..Default::default() };
    plan.bifurcation = BifurcationSettings { transient: 2_000, samples: 50, ..Default::default() };
    plan
}

#[test]
fn serial_and_parallel_scans_agree() {
    // the p range includes a divergent endpoint, so NaN records are compared too
    let mut plan = small_plan(SweepParameter::P, 1.0, 2.0);
    plan.workers = Some(1);
    let serial = spectrum_scan(&plan).unwrap();
    plan.workers = Some(4);
    let parallel = spectrum_scan(&plan).unwrap();
    assert_eq!(bits(&serial), bits(&parallel));

    plan.workers = Some(1);
    let serial = bifurcation_scan(&plan, 4).unwrap();
    plan.workers = Some(3);
    let parallel = bifurcation_scan(&plan, 4).unwrap();
    assert_eq!(bits(&serial), bits(&parallel));
}

#[test]
fn records_follow_grid_and_labels_are_consistent() {
    let plan = small_plan(SweepParameter::Alpha(4), 0.232, 0.328);
    let result = spectrum_scan(&plan).unwrap();
    assert_eq!(result.records.len(), plan.grid_points);
    let values = plan.values();
    for (rec, v) in result.records.iter().zip(&values) {
        assert_eq!(rec.param_value, *v);
        let spec = rec.spectrum.as_ref().unwrap();
        assert_eq!(rec.regime, Some(classify_regime(spec, plan.lyapunov.eps_positive)));
        assert_eq!(rec.diverged, spec.diverged());
    }
}

#[test]
fn narrow_scan_gives_near_identical_records() {
    let mut plan = small_plan(SweepParameter::K, 2.0, 2.0 + 1e-12);
    plan.grid_points = 2;
    let result = spectrum_scan(&plan).unwrap();
    let a = &result.records[0].spectrum.as_ref().unwrap().exponents;
    let b = &result.records[1].spectrum.as_ref().unwrap().exponents;
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).abs() < 1e-3);
    }
}

fn stable_3d() -> Scenario {
    let model = Model::new(ModelKind::Finance3d, FinanceParams::default(), 3).unwrap();
    Scenario::new(model, OrderVector::classical(3), vec![0.2, 1.0, -0.1], 0.05).unwrap()
}

#[test]
fn stable_points_collapse_to_a_single_value() {
    // a=0.8, b=0.6, c=1: the equilibrium (0, 1/b, 0) is a stable focus
    let mut plan = SweepPlan::new(SweepParameter::C, 1.0, 1.2, stable_3d());
    plan.grid_points = 3;
    plan.lyapunov = LyapunovSettings { transient: 20_000, iterations: 20_000, eps_positive: 1e-3, ..Default::default() };
    plan.bifurcation = BifurcationSettings { transient: 20_000, samples: 200, ..Default::default() };
    let spectra = spectrum_scan(&plan).unwrap();
    for rec in &spectra.records {
        assert_eq!(rec.regime, Some(Regime::Stable), "{:?}", rec.spectrum);
    }
    for component in 0..3 {
        let bif = bifurcation_scan(&plan, component).unwrap();
        for rec in &bif.records {
            let lo = rec.samples.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = rec.samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert!(hi - lo < 1e-6, "component {component}: spread {}", hi - lo);
        }
    }
    let trace = attractor_trace(&stable_3d(), 40_000, 39_000, [0, 1, 2], DEFAULT_GUARD).unwrap();
    let y = 1.0 / 0.6;
    assert!(trace.points.iter().all(|p| p[0].abs() < 1e-6 && (p[1] - y).abs() < 1e-6 && p[2].abs() < 1e-6));
}

fn has_short_cycle(samples: &[f64], max_period: usize, tol: f64) -> bool {
    (1..=max_period).any(|k| samples.windows(k + 1).all(|w| (w[k] - w[0]).abs() <= tol))
}

fn std_dev(v: &[f64]) -> f64 {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

/// Two-sample Kolmogorov-Smirnov statistic.
fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0_f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

#[test]
fn ks_statistic_sanity() {
    let a: Vec<f64> = (0..100).map(|i| i as f64).collect();
    assert_eq!(ks_statistic(&a, &a), 0.0);
    let b: Vec<f64> = (0..100).map(|i| i as f64 + 1000.0).collect();
    assert_eq!(ks_statistic(&a, &b), 1.0);
    let c: Vec<f64> = (0..100).map(|i| i as f64 + 50.0).collect();
    assert!((ks_statistic(&a, &c) - 0.5).abs() < 1e-12);
}

#[test]
fn hyperchaotic_point_fills_a_band() {
    let scenario = Scenario::baseline(0.24, 2.0, 1.0).unwrap();
    let (u, diverged) = bifurcation_samples(&scenario, 4, &BifurcationSettings::default()).unwrap();
    assert!(!diverged);
    assert_eq!(u.len(), 200);
    assert!(std_dev(&u) > 0.01);
    assert!(!has_short_cycle(&u, 8, 1e-9));
}

#[test]
fn bifurcation_samples_insensitive_to_doubled_transient() {
    let scenario = Scenario::baseline(0.24, 2.0, 1.0).unwrap();
    let short = BifurcationSettings::default();
    let long = BifurcationSettings { transient: 2 * short.transient, ..short };
    let (a, _) = bifurcation_samples(&scenario, 4, &short).unwrap();
    let (b, _) = bifurcation_samples(&scenario, 4, &long).unwrap();
    let d = ks_statistic(&a, &b);
    assert!(d < 0.05, "KS statistic {d}: u samples {:.3}..{:.3} vs {:.3}..{:.3}", a[0], a[a.len() - 1], b[0], b[b.len() - 1]);
}
