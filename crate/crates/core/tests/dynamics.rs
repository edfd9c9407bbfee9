use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use ramsey_core::coefficients::*;
use ramsey_core::dynamics::oracle::exact_expectations_dense;
use ramsey_core::dynamics::*;
use ramsey_core::noise::{Cutoff, SpectralModel};
use ramsey_core::numerics::{sample_standard_normals, RngStream};
use std::f64::consts::PI;

fn random_coeffs(n: usize, seed: u64, scale: f64, with_vartheta: bool) -> CoefficientSet {
    let z = sample_standard_normals(RngStream::new(seed, 0), 3 * n * n);
    let a = DMatrix::from_fn(n, n, |i, j| z[i * n + j]);
    let kappa = (&a * a.transpose()) * (scale / n as f64);
    let xi = DMatrix::from_fn(n, n, |i, j| scale * (z[n * n + i.min(j) * n + i.max(j)]));
    let vartheta = if with_vartheta {
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                0.0
            } else {
                let v = scale * z[2 * n * n + i.min(j) * n + i.max(j)];
                if i < j { v } else { -v }
            }
        })
    } else {
        DMatrix::zeros(n, n)
    };
    CoefficientSet { t: 1.0, kappa, xi, vartheta }
}

fn random_pair(n: usize, seed: u64) -> BasisPair {
    let z = sample_standard_normals(RngStream::new(seed, 9), 2 * n);
    let spin = |v: f64| if v > 0.0 { 1 } else { -1 };
    BasisPair::new(z[..n].iter().map(|&v| spin(v)).collect(), z[n..].iter().map(|&v| spin(v)).collect()).unwrap()
}

fn exp_model() -> SpectralModel {
    SpectralModel::new(1.0, 3.0, Cutoff::Exponential)
}

#[test]
fn diagonal_elements_do_not_evolve() {
    let c = random_coeffs(5, 1, 0.3, true);
    let p = BasisPair::new(vec![1, -1, 1, 1, -1], vec![1, -1, 1, 1, -1]).unwrap();
    let f = element_factor(&p, &c, 0.7, 2.0).unwrap();
    assert_eq!((f.gamma, f.phi0, f.phi1, f.signal_phase), (0.0, 0.0, 0.0, 0.0));
    assert_eq!(f.factor(), Complex64::new(1.0, 0.0));
}

#[test]
fn ghz_antidiagonal_factor() {
    let n = 4;
    let c = random_coeffs(n, 2, 0.2, true);
    let p = BasisPair::new(vec![1; n], vec![-1; n]).unwrap();
    let (b, t) = (0.3, 1.7);
    let f = element_factor(&p, &c, b, t).unwrap();
    assert!((f.gamma - 2.0 * c.kappa.sum()).abs() < 1e-12);
    assert!(f.phi0.abs() < 1e-12 && f.phi1.abs() < 1e-12);
    assert!((f.signal_phase + n as f64 * b * t).abs() < 1e-12);
    let g = ghz_evolve(n, &c, b, t).unwrap();
    assert!((g.matrix[0][1] - f.factor() * 0.5).norm() < 1e-14);
}

#[test]
fn collective_singlet_like_pair_is_protected() {
    let c = CoefficientSet::uniform(2, 1.0, 0.4, 0.1);
    let p = BasisPair::new(vec![1, -1], vec![-1, 1]).unwrap();
    assert!(element_factor(&p, &c, 0.0, 1.0).unwrap().gamma.abs() < 1e-15);
}

#[test]
fn single_flip_decays_with_half_chi() {
    let c = random_coeffs(3, 5, 0.3, false);
    let p = BasisPair::new(vec![1, 1, -1], vec![1, -1, -1]).unwrap();
    let f = element_factor(&p, &c, 0.0, 1.0).unwrap();
    assert!((f.gamma - 0.5 * 4.0 * c.kappa[(1, 1)]).abs() < 1e-14);
}

#[test]
fn element_factor_rejects_mismatch() {
    let c = random_coeffs(3, 5, 0.3, false);
    let p = BasisPair::new(vec![1, 1], vec![1, -1]).unwrap();
    assert!(element_factor(&p, &c, 0.0, 1.0).is_err());
    assert!(BasisPair::new(vec![1, 2], vec![1, -1]).is_err());
}

#[test]
fn ghz_limits() {
    let g = ghz_evolve(3, &CoefficientSet::zeros(3, 0.0), 1.0, 0.0).unwrap();
    assert_eq!(g.matrix[0][1], Complex64::new(0.5, 0.0));
    let k = 0.05;
    let g = ghz_evolve(6, &CoefficientSet::uniform(6, 1.0, k, 0.0), 0.0, 1.0).unwrap();
    assert!((g.gamma - 2.0 * 36.0 * k).abs() < 1e-12);
    let mut diag = CoefficientSet::zeros(6, 1.0);
    for i in 0..6 {
        diag.kappa[(i, i)] = k;
    }
    let g = ghz_evolve(6, &diag, 0.0, 1.0).unwrap();
    assert!((g.gamma - 2.0 * 6.0 * k).abs() < 1e-12);
}

#[test]
fn qni_reference_counts() {
    let g = qni_enumerate(QniRegime::General, 3).unwrap();
    assert_eq!((g.enumerated, g.formula), (Some(16), 16));
    let c = qni_enumerate(QniRegime::Collective, 2).unwrap();
    assert_eq!((c.enumerated, c.formula), (Some(8), 12));
    let e = qni_enumerate(QniRegime::EvenOdd, 4).unwrap();
    assert_eq!(e.formula, 72);
    assert_eq!(e.enumerated, Some(56));
    let e6 = qni_enumerate(QniRegime::EvenOdd, 6).unwrap();
    assert_eq!((e6.enumerated, e6.formula), (Some(800), 800));
    assert!(qni_enumerate(QniRegime::EvenOdd, 3).is_err());
    assert_eq!(qni_enumerate(QniRegime::General, 20).unwrap().method, QniMethod::FormulaOnly);
}

#[test]
fn qni_general_matches_formula_for_small_n() {
    for n in 1..=8 {
        let g = qni_enumerate(QniRegime::General, n).unwrap();
        assert_eq!(g.enumerated, Some(g.formula));
    }
}

#[test]
fn qni_matches_phase_evaluation_on_random_coefficients() {
    // Structural zeros must coincide with zeros for generic coefficients.
    let n = 4;
    let mut c = random_coeffs(n, 77, 1.0, true);
    // impose even-odd symmetry with generic xi_s, xi_d, vartheta_eo
    let (xs, xd, th) = (0.31, -0.77, 0.45);
    for i in 0..n {
        for j in 0..n {
            c.xi[(i, j)] = if i % 2 == j % 2 { xs } else { xd };
            c.vartheta[(i, j)] = if i % 2 == j % 2 { 0.0 } else if i % 2 == 0 { th } else { -th };
        }
    }
    let mut count = 0;
    for a in 0..16u64 {
        for b in 0..16u64 {
            let f = element_factor(&BasisPair::from_bits(n, a, b), &c, 0.0, 1.0).unwrap();
            if f.phi0.abs() < 1e-12 && f.phi1.abs() < 1e-12 {
                count += 1;
            }
        }
    }
    assert_eq!(Some(count), qni_enumerate(QniRegime::EvenOdd, n).unwrap().enumerated);
}

#[test]
fn concurrence_zero_at_start() {
    let c = two_qubit_concurrence(&exp_model(), 100, 0.0, 0.0).unwrap();
    assert!(c.abs() < 1e-12);
}

#[test]
fn concurrence_of_bell_state_is_one() {
    let mut rho = nalgebra::Matrix4::<Complex64>::zeros();
    for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
        rho[(i, j)] = Complex64::new(0.5, 0.0);
    }
    assert!((concurrence(&rho) - 1.0).abs() < 1e-12);
}

#[test]
fn reduced_state_matches_enumeration() {
    let n = 4;
    let m = exp_model();
    for tau in [0.05, 0.3, 1.2] {
        let p = PairEvaluator::new(m).pair(tau, 0.0).unwrap();
        let c = CoefficientSet::uniform(n, tau, p.kappa, p.xi);
        let b = 0.9;
        let closed = reduced_two_qubit_state(n, p.kappa, p.xi, b * tau).unwrap();
        let amp = 1.0 / 16.0; // |2^{-N/2}|^2
        for i in 0..4u64 {
            for j in 0..4u64 {
                let mut acc = Complex64::new(0.0, 0.0);
                for rest in 0..4u64 {
                    let a = i | (rest << 2);
                    let bb = j | (rest << 2);
                    // bit0 = qubit 1, bit1 = qubit 2; closed form orders |q1 q2> with q1 the high bit
                    let f = element_factor(&BasisPair::from_bits(n, a, bb), &c, b, tau).unwrap();
                    acc += f.factor() * amp;
                }
                let swap = |x: u64| ((x & 1) << 1) | (x >> 1);
                let e = closed[(swap(i) as usize, swap(j) as usize)];
                assert!((acc - e).norm() < 1e-12, "tau {tau} ({i},{j}): {acc} vs {e}");
            }
        }
    }
}

#[test]
fn ru_oracle_trivial_cases() {
    let c = random_coeffs(4, 3, 0.2, false);
    let p = BasisPair::new(vec![1, -1, 1, 1], vec![1, -1, 1, 1]).unwrap();
    let r = ru_decay_oracle(&p, &c, 100, RngStream::new(1, 0)).unwrap();
    assert_eq!(r.mean, Complex64::new(1.0, 0.0));
    let z = CoefficientSet::zeros(4, 1.0);
    let q = BasisPair::new(vec![1, 1, 1, 1], vec![-1, 1, -1, 1]).unwrap();
    assert_eq!(ru_decay_oracle(&q, &z, 100, RngStream::new(1, 0)).unwrap().mean, Complex64::new(1.0, 0.0));
    let bad = random_coeffs(4, 3, 0.2, true);
    assert!(ru_decay_oracle(&q, &bad, 10, RngStream::new(1, 0)).is_err());
}

#[test]
fn ru_oracle_matches_exact_decay() {
    for n in [4usize, 5, 6] {
        let c = random_coeffs(n, 100 + n as u64, 0.1, false);
        for k in 0..20u64 {
            let p = random_pair(n, 1000 * n as u64 + k);
            let exact = (-element_factor(&p, &c, 0.0, 1.0).unwrap().gamma).exp();
            let r = ru_decay_oracle(&p, &c, 100_000, RngStream::new(5, k)).unwrap();
            assert!((r.mean.re - exact).abs() <= 3.0 * r.std_error + 1e-12, "n {n} pair {k}: {} vs {exact}", r.mean);
        }
    }
}

#[test]
fn ru_oracle_on_physical_geometry() {
    let pos: Vec<[f64; 3]> = (0..4).map(|i| [0.7 * i as f64, 0.0, 0.0]).collect();
    let c = dynamic_coefficients(&exp_model(), &TransitGeometry::positions(pos, 1), 0.8).unwrap();
    for k in 0..5u64 {
        let p = random_pair(4, 50 + k);
        let exact = (-element_factor(&p, &c, 0.0, 1.0).unwrap().gamma).exp();
        let r = ru_decay_oracle(&p, &c, 100_000, RngStream::new(8, k)).unwrap();
        assert!((r.mean.re - exact).abs() <= 3.0 * r.std_error + 1e-12);
    }
}

#[test]
fn noiseless_css_precesses() {
    for n in [2usize, 5, 8] {
        let c = CoefficientSet::zeros(n, 1.0);
        let t = 1.0;
        let b = PI / 2.0;
        let m = exact_expectations(ProbeState::css_x(), &c, b, t).unwrap();
        assert!((m.jy_mean - 0.5 * n as f64).abs() < 1e-12);
        let m0 = exact_expectations(ProbeState::css_x(), &c, 0.0, t).unwrap();
        assert!((m0.jy2_mean - 0.25 * n as f64).abs() < 1e-12);
        assert!((m0.d_jy_mean_db - 0.5 * n as f64 * t).abs() < 1e-12);
    }
}

#[test]
fn ghz_has_no_transverse_signal() {
    let c = random_coeffs(5, 4, 0.2, false);
    let m = exact_expectations(ProbeState::Ghz, &c, 0.4, 1.3).unwrap();
    assert!(m.jy_mean.abs() < 1e-14);
}

#[test]
fn fast_enumeration_matches_dense() {
    for n in [3usize, 4, 6] {
        for with_vartheta in [false, true] {
            let c = random_coeffs(n, 40 + n as u64, 0.15, with_vartheta);
            for state in [ProbeState::css_x(), ProbeState::Oats { theta: 0.4, beta: 1.1 }, ProbeState::Css { polar: 1.0, azimuth: 0.3 }] {
                let a = exact_expectations(state, &c, 0.6, 1.4).unwrap();
                let b = exact_expectations_dense(state, &c, 0.6, 1.4).unwrap();
                assert!((a.jy_mean - b.jy_mean).abs() < 1e-12);
                assert!((a.jy2_mean - b.jy2_mean).abs() < 1e-12);
                assert!((a.d_jy_mean_db - b.d_jy_mean_db).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn oats_amplitudes_are_normalized() {
    let v = ProbeState::Oats { theta: 0.7, beta: 0.9 }.amplitudes(6);
    let norm: f64 = v.iter().map(|c| c.norm_sqr()).sum();
    assert!((norm - 1.0).abs() < 1e-13);
}

#[test]
fn exact_rejects_large_n() {
    assert!(exact_expectations(ProbeState::css_x(), &CoefficientSet::zeros(15, 1.0), 0.0, 1.0).is_err());
}

#[test]
fn purity_decay_is_monotone_while_kappa_grows() {
    // For s = 3 with exponential cutoff, collective kappa rises until tau = sqrt(3).
    let m = exp_model();
    let p = BasisPair::new(vec![1, 1, -1], vec![-1, 1, -1]).unwrap();
    let mut last = 1.0;
    let mut last_kappa = 0.0;
    for k in 1..=34 {
        let t = 0.05 * k as f64;
        let c = dynamic_coefficients(&m, &TransitGeometry::collective(3), t).unwrap();
        assert!(c.kappa[(0, 0)] >= last_kappa);
        let f = element_factor(&p, &c, 0.0, t).unwrap().factor().norm();
        assert!(f <= last + 1e-15);
        last = f;
        last_kappa = c.kappa[(0, 0)];
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ghz_phases_vanish(seed in 0u64..1_000_000, n in 2usize..7) {
        let c = random_coeffs(n, seed, 1.0, true);
        let p = BasisPair::new(vec![1; n], vec![-1; n]).unwrap();
        let f = element_factor(&p, &c, 0.3, 1.0).unwrap();
        prop_assert!(f.phi0.abs() < 1e-12 && f.phi1.abs() < 1e-12);
    }

    #[test]
    fn diagonal_factors_are_one(seed in 0u64..1_000_000, bits in 0u64..64) {
        let c = random_coeffs(6, seed, 1.0, true);
        let f = element_factor(&BasisPair::from_bits(6, bits, bits), &c, 0.3, 2.0).unwrap();
        prop_assert_eq!(f.factor(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn factor_magnitude_bounded(seed in 0u64..1_000_000, a in 0u64..32, b in 0u64..32) {
        let c = random_coeffs(5, seed, 0.5, true);
        let f = element_factor(&BasisPair::from_bits(5, a, b), &c, 0.3, 2.0).unwrap();
        prop_assert!(f.gamma >= -1e-12);
        prop_assert!(f.factor().norm() <= 1.0 + 1e-12);
    }
}
