use approx::assert_relative_eq;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ramsey_core::coefficients::{dynamic_coefficients, short_time_constants, CoefficientSet, TransitGeometry};
use ramsey_core::dynamics::oracle::{exact_expectations, ProbeState};
use ramsey_core::estimation::*;
use ramsey_core::noise::{Cutoff, SpectralModel};
use ramsey_core::numerics::fit_power_law;

fn exp_model() -> SpectralModel {
    SpectralModel::new(1.0, 3.0, Cutoff::Exponential)
}

fn sym(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> DMatrix<f64> {
    let x = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
    (&x + x.transpose()) * scale
}

fn psd(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> DMatrix<f64> {
    let x = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
    &x * x.transpose() * (scale / n as f64)
}

fn coeffs_from(chi: &DMatrix<f64>, psi: &DMatrix<f64>, t: f64) -> CoefficientSet {
    let n = chi.nrows();
    CoefficientSet { t, kappa: chi / 4.0, xi: psi / 4.0, vartheta: DMatrix::zeros(n, n) }
}

#[test]
fn noise_free_css_is_sql() {
    for &n in &[2usize, 4, 10, 1000] {
        let (tt, t) = (3.0, 0.2);
        let sql = 1.0 / (n as f64 * tt * t).sqrt();
        assert_relative_eq!(css_collective(n, tt, t, 0.0, 0.0), sql, max_relative = 1e-14);
        assert_relative_eq!(css_even_odd(n, tt, t, 0.0, 0.0, 0.0, 0.0), sql, max_relative = 1e-14);
        if n <= 10 {
            let z = DMatrix::zeros(n, n);
            assert_relative_eq!(css_matrices(tt, t, &z, &z).unwrap(), sql, max_relative = 1e-13);
        }
    }
}

#[test]
fn propagate_noiseless_css() {
    let (n, t, tt) = (8.0, 0.5, 2.0);
    let m = MomentPair { jy_mean: 0.0, jy2_mean: n / 4.0, d_jy_mean_db: n * t / 2.0 };
    assert_relative_eq!(propagate(&m, tt / t).unwrap(), 1.0 / (n * tt * t).sqrt(), max_relative = 1e-14);
    let flat = MomentPair { d_jy_mean_db: 0.0, ..m };
    assert!(propagate(&flat, 1.0).unwrap().is_infinite());
    let tiny = MomentPair { jy_mean: 1.0, jy2_mean: 1.0 - 1e-14, d_jy_mean_db: 1.0 };
    assert_eq!(propagate(&tiny, 1.0).unwrap(), 0.0);
    let bad = MomentPair { jy_mean: 1.0, jy2_mean: 0.5, d_jy_mean_db: 1.0 };
    assert!(propagate(&bad, 1.0).is_err());
}

#[test]
fn singular_only_where_cos_psi_vanishes() {
    let half_pi = std::f64::consts::FRAC_PI_2;
    assert!(css_collective(10, 1.0, 1.0, 0.1, half_pi) > 1e100);
    assert!(css_collective(10, 1.0, 1.0, 0.1, 2.0).is_finite());
    // Psi -> Psi + pi leaves the form unchanged.
    let (a, b) = (css_collective(10, 1.0, 1.0, 0.1, 0.4), css_collective(10, 1.0, 1.0, 0.1, 0.4 + std::f64::consts::PI));
    assert!((a / b - 1.0).abs() < 1e-12);
    assert!(css_even_odd(10, 1.0, 1.0, 0.1, 0.1, 0.1, 1.7).is_finite());
}

proptest! {
    #[test]
    fn even_odd_at_zero_separation_is_collective(n2 in 1usize..200, chi in 0.0f64..3.0, psi in -1.5f64..1.5, t in 0.01f64..10.0) {
        let n = 2 * n2;
        let a = css_collective(n, 1.0, t, chi, psi);
        let b = css_even_odd(n, 1.0, t, chi, psi, chi, psi);
        prop_assume!(a.is_finite());
        prop_assert!(((a - b) / a).abs() < 1e-10, "{} vs {}", a, b);
    }

    #[test]
    fn structured_css_matches_matrix_form(n2 in 2usize..6, chi_s in 0.0f64..1.0, psi_s in -0.6f64..0.6,
                                          frac in -1.0f64..1.0, psi_d in -0.6f64..0.6) {
        let n = 2 * n2;
        let chi_d = frac * chi_s;
        let pick = |i: usize, j: usize, a: f64, b: f64| if i % 2 == j % 2 { a } else { b };
        let chi = DMatrix::from_fn(n, n, |i, j| pick(i, j, chi_s, chi_d));
        let psi = DMatrix::from_fn(n, n, |i, j| pick(i, j, psi_s, psi_d));
        let a = css_even_odd(n, 1.5, 0.7, chi_s, psi_s, chi_d, psi_d);
        let b = css_matrices(1.5, 0.7, &chi, &psi).unwrap();
        prop_assert!(((a - b) / b).abs() < 1e-10, "{} vs {}", a, b);
    }

    #[test]
    fn collective_ordering_without_quantum_phase(n in 2usize..500, chi in 0.0f64..2.0, psi in -1.5f64..1.5) {
        prop_assert!(css_collective(n, 1.0, 0.3, chi, 0.0) <= css_collective(n, 1.0, 0.3, chi, psi) * (1.0 + 1e-12));
    }
}

#[test]
fn closed_css_matches_enumeration() {
    let model = exp_model();
    for &(n, ref geom) in &[(6usize, TransitGeometry::collective(6)), (8, TransitGeometry::even_odd(8, 0.7)), (10, TransitGeometry::collective(10))] {
        for &t in &[0.05, 0.3, 0.8] {
            let coeffs = dynamic_coefficients(&model, geom, t).unwrap();
            let m = exact_expectations(ProbeState::css_x(), &coeffs, 0.0, t).unwrap();
            let exact = propagate(&m, 2.0 / t).unwrap();
            let mut cfg = ProtocolConfig::new(ProtocolState::Css, geom.clone(), model);
            cfg.total_time = 2.0;
            let closed = css_uncertainty(&cfg, t).unwrap();
            assert_relative_eq!(closed, exact, max_relative = 1e-8);
            let _ = n;
        }
    }
}

#[test]
fn matrix_css_matches_enumeration_for_positions() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in [4usize, 7, 9] {
        let chi = psd(&mut rng, n, 0.8);
        let psi = sym(&mut rng, n, 0.6);
        let t = 0.4;
        let m = exact_expectations(ProbeState::css_x(), &coeffs_from(&chi, &psi, t), 0.0, t).unwrap();
        let exact = propagate(&m, 1.0 / t).unwrap();
        assert_relative_eq!(css_matrices(1.0, t, &chi, &psi).unwrap(), exact, max_relative = 1e-9);
    }
}

#[test]
fn oats_noise_free_precession() {
    for n in [4usize, 9, 50] {
        let z = DMatrix::zeros(n, n);
        let m = oats_moments(&z, &z, 0.0, 0.0, core::f64::consts::FRAC_PI_2, 1.0).unwrap();
        assert_relative_eq!(m.jy_mean, n as f64 / 2.0, max_relative = 1e-12);
        let c = oats_moments_collective(n, 0.0, 0.0, 0.0, 0.0, core::f64::consts::FRAC_PI_2, 1.0).unwrap();
        assert_relative_eq!(c.jy_mean, n as f64 / 2.0, max_relative = 1e-12);
    }
}

#[test]
fn noise_free_variance_formula_matches_enumeration() {
    for n in [4usize, 7, 10] {
        let ang = optimal_angles(n).unwrap();
        for &(th, be) in &[(ang.theta_opt, ang.beta_opt), (0.3, 1.1), (0.0, 0.0), (1.2, 2.5)] {
            let coeffs = CoefficientSet::zeros(n, 1.0);
            let ex = exact_expectations(ProbeState::Oats { theta: th, beta: be }, &coeffs, 0.0, 1.0).unwrap();
            assert_relative_eq!(ex.variance(), oats_variance(n, th, be), max_relative = 1e-10);
        }
        assert_relative_eq!(ang.variance, oats_variance(n, ang.theta_opt, ang.beta_opt), max_relative = 1e-12);
    }
}

#[test]
fn noise_free_cumulant_variance_converges() {
    let mut last = f64::INFINITY;
    for n in [10usize, 40, 160, 640] {
        let ang = optimal_angles(n).unwrap();
        let k = oats_moments_collective(n, 0.0, 0.0, ang.theta_opt, ang.beta_opt, 0.0, 1.0).unwrap();
        let rel = (k.variance() / ang.variance - 1.0).abs();
        assert!(rel < last, "n={} rel={}", n, rel);
        last = rel;
    }
    assert!(last < 0.02);
    let k = oats_moments_collective(12, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0).unwrap();
    assert_relative_eq!(k.variance(), 3.0, max_relative = 1e-12);
    assert_relative_eq!(k.d_jy_mean_db, 6.0, max_relative = 1e-12);
}

#[test]
fn oats_structured_forms_match_matrix_form() {
    let (n, th, be, b, t) = (10usize, 0.35, 1.2, 0.9, 0.6);
    let (cs, ps, cd, pd) = (0.3, 0.12, -0.05, 0.07);
    let pick = |i: usize, j: usize, a: f64, b: f64| if i % 2 == j % 2 { a } else { b };
    let chi = DMatrix::from_fn(n, n, |i, j| pick(i, j, cs, cd));
    let psi = DMatrix::from_fn(n, n, |i, j| pick(i, j, ps, pd));
    let a = oats_moments(&chi, &psi, th, be, b, t).unwrap();
    let e = oats_moments_even_odd(n, cs, ps, cd, pd, th, be, b, t).unwrap();
    for (x, y) in [(a.jy_mean, e.jy_mean), (a.jy2_mean, e.jy2_mean), (a.d_jy_mean_db, e.d_jy_mean_db)] {
        assert_relative_eq!(x, y, max_relative = 1e-11, epsilon = 1e-13);
    }
    let c = oats_moments_collective(n, cs, ps, th, be, b, t).unwrap();
    let ec = oats_moments_even_odd(n, cs, ps, cs, ps, th, be, b, t).unwrap();
    assert_relative_eq!(c.jy2_mean, ec.jy2_mean, max_relative = 1e-12);
    assert_relative_eq!(c.jy_mean, ec.jy_mean, max_relative = 1e-12);
}

#[test]
fn oats_weak_noise_close_to_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 6;
    let chi = psd(&mut rng, n, 0.02);
    let psi = sym(&mut rng, n, 0.02);
    for &(th, be, bt) in &[(0.4, 1.3, 0.5), (0.2, 0.5, 1.1)] {
        let ex = exact_expectations(ProbeState::Oats { theta: th, beta: be }, &coeffs_from(&chi, &psi, 1.0), bt, 1.0).unwrap();
        let k = oats_moments(&chi, &psi, th, be, bt, 1.0).unwrap();
        assert!((k.jy_mean - ex.jy_mean).abs() < 1e-3 * n as f64);
        assert!((k.jy2_mean - ex.jy2_mean).abs() < 1e-3 * (n * n) as f64);
        assert!((k.d_jy_mean_db - ex.d_jy_mean_db).abs() < 1e-3 * n as f64);
    }
}

/// Relative error of the cumulant Delta b against enumeration, collective
/// noise, optimal angles, `omega_c t = 0.01`.
fn collective_oats_error(n: usize) -> f64 {
    let model = exp_model();
    let t = 0.01;
    let ang = optimal_angles(n).unwrap();
    let coeffs = dynamic_coefficients(&model, &TransitGeometry::collective(n), t).unwrap();
    let state = ProbeState::Oats { theta: ang.theta_opt, beta: ang.beta_opt };
    let ex = propagate(&exact_expectations(state, &coeffs, 0.0, t).unwrap(), 1.0 / t).unwrap();
    let mut cfg = ProtocolConfig::new(ProtocolState::Oats { theta: ang.theta_opt, beta: ang.beta_opt }, TransitGeometry::collective(n), model);
    cfg.total_time = 1.0;
    let k = uncertainty(&cfg, t).unwrap();
    ((k - ex) / ex).abs()
}

#[test]
fn oats_cumulant_error_decreases_with_n() {
    let errs: Vec<f64> = (4..=12).map(collective_oats_error).collect();
    for w in errs.windows(2) {
        assert!(w[1] < w[0], "{:?}", errs);
    }
    assert!(errs[6] < 0.05, "{:?}", errs);
}

#[test]
fn angles_limits_and_asymptotics() {
    assert_relative_eq!(oats_variance(20, 0.0, 0.7), 5.0, max_relative = 1e-14);
    let a = optimal_angles(10_000).unwrap();
    assert!((a.theta_opt / a.theta_asymptotic - 1.0).abs() < 0.02, "{:?}", a);
    assert!((a.beta_opt - a.beta_asymptotic).abs() < 0.02);
    assert_relative_eq!(a.a, 1.0 - a.theta_opt.cos().powi(9998), max_relative = 1e-9);
    let pts: Vec<(f64, f64)> = [1e3, 3e3, 1e4, 3e4, 1e5]
        .iter()
        .map(|&n| (n, optimal_angles(n as usize).unwrap().variance))
        .collect();
    let fit = fit_power_law(&pts).unwrap();
    assert!((fit.exponent - 1.0 / 3.0).abs() < 0.02, "{:?}", fit);
}

#[test]
fn optimize_recovers_synthetic_minimum() {
    let (a, c) = (2.0, 0.5);
    let curve = optimize_curve(|t| Ok(a / t.sqrt() + c * t.powf(1.5)), (0.01, 100.0), 50).unwrap();
    let exact = (a / (3.0 * c)).sqrt();
    assert!((curve.tau_opt / exact - 1.0).abs() < 1e-6);
    assert!(!curve.at_boundary);
    let edge = optimize_curve(|t| Ok(1.0 / t), (0.1, 1.0), 10).unwrap();
    assert!(edge.at_boundary);
}

#[test]
fn collective_css_scaling() {
    let model = exp_model();
    let st = short_time_constants(&model, 0.0).unwrap();
    let mut taus = vec![];
    let mut dbs = vec![];
    for &n in &[1e3, 3e3, 1e4, 3e4, 1e5] {
        let n = n as usize;
        let cfg = ProtocolConfig::new(ProtocolState::Css, TransitGeometry::collective(n), model);
        let c = optimize_time(&cfg, (1e-4, 1.0), 60).unwrap();
        assert!(!c.at_boundary);
        let asym = collective_css_short_time(st.chi0_sq, n);
        assert!((c.delta_b_opt / asym.delta_b_opt_sqrt_t - 1.0).abs() < 0.05);
        assert!((c.tau_opt / asym.tau_opt - 1.0).abs() < 0.05);
        taus.push((n as f64, c.tau_opt));
        dbs.push((n as f64, c.delta_b_opt));
    }
    assert!((fit_power_law(&dbs).unwrap().exponent + 0.25).abs() < 0.02);
    assert!((fit_power_law(&taus).unwrap().exponent + 0.5).abs() < 0.02);
}

#[test]
fn even_odd_far_clusters_ratio() {
    let model = exp_model();
    let n = 20_000;
    let coll = optimize_time(&ProtocolConfig::new(ProtocolState::Css, TransitGeometry::collective(n), model), (1e-4, 1.0), 60).unwrap();
    let eo = optimize_time(&ProtocolConfig::new(ProtocolState::Css, TransitGeometry::even_odd(n, 2e3), model), (1e-4, 1.0), 60).unwrap();
    assert!((eo.delta_b_opt / coll.delta_b_opt / 2f64.powf(-0.25) - 1.0).abs() < 0.01);
}

#[test]
fn even_odd_short_time_optimum_matches_numeric() {
    let model = exp_model();
    let n = 20_000;
    for &x in &[0.3, 0.72654, 2.0] {
        let st = short_time_constants(&model, x).unwrap();
        let eo = optimize_time(&ProtocolConfig::new(ProtocolState::Css, TransitGeometry::even_odd(n, x), model), (1e-4, 1.0), 60).unwrap();
        let asym = even_odd_css_short_time(st.chi0_sq, st.chi_d0_sq, n);
        assert!((eo.tau_opt / asym.tau_opt - 1.0).abs() < 0.02, "x={} {} {}", x, eo.tau_opt, asym.tau_opt);
        assert!((eo.delta_b_opt / asym.delta_b_opt_sqrt_t - 1.0).abs() < 0.02);
    }
}

#[test]
fn collective_oats_scaling() {
    let model = exp_model();
    let st = short_time_constants(&model, 0.0).unwrap();
    let mut dbs = vec![];
    for &n in &[1e3, 3e3, 1e4, 3e4, 1e5] {
        let n = n as usize;
        let ang = optimal_angles(n).unwrap();
        let cfg = ProtocolConfig::new(ProtocolState::Oats { theta: ang.theta_opt, beta: ang.beta_opt }, TransitGeometry::collective(n), model);
        let c = optimize_time(&cfg, (1e-5, 1.0), 60).unwrap();
        assert!(!c.at_boundary);
        let tau = collective_oats_tau_opt(st.chi0_sq, n);
        assert!((c.tau_opt / tau - 1.0).abs() < 0.15, "n={} {} {}", n, c.tau_opt, tau);
        dbs.push((n as f64, c.delta_b_opt));
    }
    let fit = fit_power_law(&dbs).unwrap();
    assert!((fit.exponent + 5.0 / 12.0).abs() < 0.02, "{:?}", fit);
}

#[test]
fn config_validation() {
    let model = exp_model();
    let mut cfg = ProtocolConfig::new(ProtocolState::Oats { theta: 4.0, beta: 0.0 }, TransitGeometry::collective(10), model);
    assert!(cfg.validate().is_err());
    cfg.state = ProtocolState::Ghz;
    assert!(uncertainty(&cfg, 0.1).is_err());
    cfg.state = ProtocolState::Css;
    cfg.total_time = 0.0;
    assert!(cfg.validate().is_err());
}
