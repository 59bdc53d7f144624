use d2d_core::analytic::{integrate_fn, QuadratureSpec};
use d2d_core::sir::{default_thresholds, run_d2d_samples};
use d2d_core::{
    run_cellular_batch, run_d2d_batch, CellularConfig, D2dBatchConfig, EmpiricalCcdf, PppConfig, ScheduleConfig,
    SimWindow,
};

fn batch(lambda_d: f64, r_d: f64, schedule: ScheduleConfig, alpha: f64, aps: f64, seed: u64) -> D2dBatchConfig<f64> {
    let ppp = PppConfig::new(1.0, lambda_d, r_d, seed)
        .unwrap()
        .with_window(SimWindow::for_expected_count(1.0, aps).unwrap());
    D2dBatchConfig { ppp, schedule, alpha }
}

/// Exact uncoordinated ccdf when interferers only live in the disc window.
fn windowed_ccdf(lambda_d: f64, n: u32, r_d: f64, alpha: f64, radius: f64, theta: f64) -> f64 {
    let spec = QuadratureSpec::default();
    let radial = integrate_fn(|u: f64| u / (1.0 + (u / r_d).powf(alpha) / theta), 0.0, radius, &spec)
        .unwrap()
        .value;
    (-(lambda_d / n as f64) * 2.0 * std::f64::consts::PI * radial).exp()
}

#[test]
fn uncoordinated_matches_the_exact_law() {
    let th = default_thresholds::<f64>();
    let trials = 20_000;
    for (lambda_d, n, r_d, alpha) in [(10.0, 10, 0.3, 4.0), (5.0, 2, 0.2, 4.0), (20.0, 4, 0.15, 3.0), (10.0, 1, 0.1, 5.0)] {
        let cfg = batch(lambda_d, r_d, ScheduleConfig::uncoordinated(n).unwrap(), alpha, 60.0, 7);
        let ccdf = run_d2d_batch(&cfg, &th, trials).unwrap();
        for (&t, &p) in ccdf.thresholds.iter().zip(&ccdf.survival) {
            let exact = windowed_ccdf(lambda_d, n, r_d, alpha, cfg.ppp.window.radius, t);
            let se = (exact * (1.0 - exact) / trials as f64).sqrt();
            assert!((p - exact).abs() <= 3.0 * se + 1e-12, "{lambda_d} {n} {r_d} {alpha} theta={t}: {p} vs {exact}");
        }
    }
}

#[test]
fn coordination_dominates() {
    let th = default_thresholds::<f64>();
    let trials = 20_000;
    for n in [2, 10] {
        let c = run_d2d_batch(&batch(10.0, 0.3, ScheduleConfig::coordinated(n).unwrap(), 4.0, 30.0, 3), &th, trials).unwrap();
        let u = run_d2d_batch(&batch(10.0, 0.3, ScheduleConfig::uncoordinated(n).unwrap(), 4.0, 30.0, 4), &th, trials).unwrap();
        // Up to 10 dB. Further out coordination can lose: every loaded
        // neighbour cell is then certain to field a co-channel transmitter,
        // so interference-free neighbourhoods get rarer.
        for i in 0..=30 {
            assert!(c.survival[i] >= u.survival[i] - (c.half_width[i] + u.half_width[i]), "N={n} i={i}");
        }
    }
}

#[test]
fn single_subchannel_schemes_coincide() {
    let th = default_thresholds::<f64>();
    let c = run_d2d_batch(&batch(10.0, 0.3, ScheduleConfig::coordinated(1).unwrap(), 4.0, 30.0, 5), &th, 3000).unwrap();
    let u = run_d2d_batch(&batch(10.0, 0.3, ScheduleConfig::uncoordinated(1).unwrap(), 4.0, 30.0, 5), &th, 3000).unwrap();
    assert_eq!(c, u);
}

#[test]
fn outage_grows_with_distance_and_threshold() {
    let th: Vec<f64> = [-10.0f64, 0.0, 10.0].iter().map(|&d| d2d_core::db_to_linear(d)).collect();
    let trials = 5000;
    let curves: Vec<EmpiricalCcdf<f64>> = [0.1, 0.2, 0.3, 0.45, 0.6]
        .iter()
        .map(|&r_d| run_d2d_batch(&batch(10.0, r_d, ScheduleConfig::coordinated(10).unwrap(), 4.0, 30.0, 11), &th, trials).unwrap())
        .collect();
    for w in curves.windows(2) {
        for i in 0..th.len() {
            let slack = w[0].half_width[i] + w[1].half_width[i];
            assert!(w[1].outage()[i] >= w[0].outage()[i] - slack);
        }
    }
    for c in &curves {
        assert!(c.outage().windows(2).all(|o| o[1] >= o[0]));
    }
}

#[test]
fn samples_keep_trial_order_and_counts() {
    let cfg = batch(10.0, 0.3, ScheduleConfig::coordinated(5).unwrap(), 4.0, 30.0, 8);
    let a = run_d2d_samples(&cfg, 200).unwrap();
    let b: Vec<_> = (0..200).map(|t| d2d_core::sir::run_d2d_trial(&cfg, t).unwrap().sample).collect();
    assert_eq!(a, b);
    assert!(a.iter().all(|s| s.sir > 0.0));
}

#[test]
fn cellular_coverage_and_tdma_share() {
    let trials = 20_000;
    let est = run_cellular_batch(&CellularConfig::new(1.0, 20.0, 4.0, 2).unwrap(), &[1.0], trials).unwrap();
    let p = est.coverage.survival[0];
    let exact = 1.0 / (1.0 + std::f64::consts::FRAC_PI_4);
    // Far-field truncation of the 1000-AP window lifts coverage by < 0.002.
    assert!((p - exact).abs() < 3.0 * (exact * (1.0 - exact) / trials as f64).sqrt() + 0.002, "{p}");
    // Jensen: 1/E[K_c] < E[1/K_c] < 1, with E[K_c] = 1 + 20 * 1.2802 for the
    // cell containing the typical user.
    let m = est.inv_k.mean;
    assert!(m > 1.0 / (1.0 + 20.0 * 1.2802) && m < 1.0, "{m}");

    let lone = run_cellular_batch(&CellularConfig::new(1.0, 1e-7, 4.0, 2).unwrap(), &[1.0], 2000).unwrap();
    assert!(lone.inv_k.mean > 0.999);
}
