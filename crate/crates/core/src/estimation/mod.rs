//! Uncertainty of the frequency estimate: closed CSS formulas, one-axis
//! twisted state moments, optimal angles, error propagation and time
//! optimization.
//!
//! Operating point for the closed forms is `bt = 0 (mod pi)`, where
//! `<J_y> = 0` and its slope in `b` is largest.

pub mod oats;

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};
use nalgebra::DMatrix;

use crate::coefficients::{decay_phase_map, dynamic_coefficients_with, PairEvaluator, Regime, TransitGeometry};
use crate::error::{Error, Result};
use crate::noise::SpectralModel;
use crate::numerics::{golden_section, grid, minimize_sampled};
pub use oats::{oats_moments, oats_moments_collective, oats_moments_even_odd};

/// First two moments of `J_y` and the analytic derivative of `<J_y>` in `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentPair {
    pub jy_mean: f64,
    pub jy2_mean: f64,
    pub d_jy_mean_db: f64,
}

impl MomentPair {
    pub fn variance(&self) -> f64 {
        self.jy2_mean - self.jy_mean * self.jy_mean
    }
}

/// Probe state of a protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProtocolState {
    Css,
    /// Twisting angle `theta` and rotation angle `beta`.
    Oats { theta: f64, beta: f64 },
    Ghz,
}

/// A Ramsey protocol with `N` probes and total time `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig {
    pub n: usize,
    pub total_time: f64,
    pub b: f64,
    pub state: ProtocolState,
    pub geometry: TransitGeometry,
    pub model: SpectralModel,
}

impl ProtocolConfig {
    pub fn new(state: ProtocolState, geometry: TransitGeometry, model: SpectralModel) -> Self {
        Self { n: geometry.n, total_time: 1.0, b: 0.0, state, geometry, model }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidInput("protocol needs N >= 2"));
        }
        if self.geometry.n != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: self.geometry.n });
        }
        if !(self.total_time > 0.0) {
            return Err(Error::InvalidInput("total time must be positive"));
        }
        if !self.b.is_finite() {
            return Err(Error::InvalidInput("b must be finite"));
        }
        if let ProtocolState::Oats { theta, beta } = self.state {
            if !((0.0..=PI).contains(&theta) && (0.0..=PI).contains(&beta)) {
                return Err(Error::InvalidInput("OATS angles must lie in [0, pi]"));
            }
        }
        self.geometry.validate()?;
        self.model.validate()
    }
}

/// Decay and phase parameters at one time, in the most compact form the
/// geometry allows.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseParameters {
    Collective { chi: f64, psi: f64 },
    /// Intra-cluster `(chi_s, psi_s)` and inter-cluster `(chi_d, psi_d)`.
    EvenOdd { chi_s: f64, psi_s: f64, chi_d: f64, psi_d: f64 },
    Matrices { chi: DMatrix<f64>, psi: DMatrix<f64> },
}

impl NoiseParameters {
    /// Noise-free parameters.
    pub fn zero() -> Self {
        NoiseParameters::Collective { chi: 0.0, psi: 0.0 }
    }
}

/// `chi = 4 kappa`, `Psi = 4 xi` for the geometry at physical time `t`.
pub fn noise_parameters(eval: &PairEvaluator, geometry: &TransitGeometry, t: f64) -> Result<NoiseParameters> {
    geometry.validate()?;
    let tau = eval.model.omega_c * t;
    match geometry.regime {
        Regime::Collective => {
            let p = eval.pair(tau, 0.0)?;
            Ok(NoiseParameters::Collective { chi: 4.0 * p.kappa, psi: 4.0 * p.xi })
        }
        Regime::EvenOdd { x } => {
            let s = eval.pair(tau, 0.0)?;
            let d = eval.pair(tau, x)?;
            Ok(NoiseParameters::EvenOdd { chi_s: 4.0 * s.kappa, psi_s: 4.0 * s.xi, chi_d: 4.0 * d.kappa, psi_d: 4.0 * d.xi })
        }
        Regime::Positions(_) => {
            let set = dynamic_coefficients_with(eval, geometry, t)?;
            let (chi, psi) = decay_phase_map(&set);
            Ok(NoiseParameters::Matrices { chi, psi })
        }
    }
}

/// `x^k` for integer `k`, allowing negative bases.
fn powi(x: f64, k: i64) -> f64 {
    libm::pow(x, k as f64)
}

/// `a e^{la} - b e^{lb}` evaluated as `e^{la} (a - b e^{lb - la})` with
/// `expm1` for the near-cancelling case `a = b`.
fn diff_exp(a: f64, la: f64, b: f64, lb: f64) -> f64 {
    let d = lb - la;
    libm::exp(la) * ((a - b) - b * libm::expm1(d))
}

/// `c^k` as `(sign, log|c|^k)`; the sign is 0 when `c = 0`.
fn signed_log_pow(c: f64, k: i64) -> (f64, f64) {
    if c == 0.0 {
        return (if k == 0 { 1.0 } else { 0.0 }, 0.0);
    }
    let sign = if c < 0.0 && k % 2 != 0 { -1.0 } else { 1.0 };
    (sign, k as f64 * libm::log(libm::fabs(c)))
}

/// `e^{l1} - s e^{l2}` where `s` carries the sign of a power.
fn exp_minus(l1: f64, sign: f64, l2: f64) -> f64 {
    if sign == 0.0 {
        libm::exp(l1)
    } else if sign > 0.0 {
        diff_exp(1.0, l1, 1.0, l2)
    } else {
        libm::exp(l1) + libm::exp(l2)
    }
}

/// Collective CSS: `db^2 = [(N+1) e^chi - (N-1) e^{-chi} cos(2Psi)^{N-2}] /
/// (2 N T t cos(Psi)^{2N-2})`; `+inf` where `cos(Psi) = 0`. The power is
/// even, so the form stays finite for `cos(Psi) < 0`.
pub fn css_collective(n: usize, total_time: f64, t: f64, chi: f64, psi: f64) -> f64 {
    let cpsi = libm::fabs(libm::cos(psi));
    if cpsi == 0.0 || t <= 0.0 {
        return f64::INFINITY;
    }
    let nf = n as f64;
    let ni = n as i64;
    let (sign, lc2) = signed_log_pow(libm::cos(2.0 * psi), ni - 2);
    // (N+1) e^chi - (N-1) e^{-chi} c2 = 2 e^chi + (N-1) (e^chi - e^{-chi} c2)
    let num = 2.0 * libm::exp(chi) + (nf - 1.0) * exp_minus(chi, sign, -chi + lc2);
    let log_den = libm::log(2.0 * nf * total_time * t) + (2 * ni - 2) as f64 * libm::log(cpsi);
    libm::sqrt(num * libm::exp(-log_den))
}

/// Even-odd CSS: the two-cluster closed form with the global factor `1/4`
/// that restores the noise-free limit `1/(N T t)`.
pub fn css_even_odd(n: usize, total_time: f64, t: f64, chi_s: f64, psi_s: f64, chi_d: f64, psi_d: f64) -> f64 {
    // N is even, so cos(Psi_s)^{N-2} cos(Psi_d)^N only sees magnitudes.
    let (cs, cd) = (libm::fabs(libm::cos(psi_s)), libm::fabs(libm::cos(psi_d)));
    if cs == 0.0 || cd == 0.0 || t <= 0.0 {
        return f64::INFINITY;
    }
    let nf = n as f64;
    let ni = n as i64;
    let j = ni / 2;
    let (s1, l1) = signed_log_pow(libm::cos(2.0 * psi_s), j - 2);
    let (s2, l2) = signed_log_pow(libm::cos(2.0 * psi_d), j);
    // (N+2) e^chi_s - (N-2) e^{-chi_s} c = 4 e^chi_s + (N-2)(e^chi_s - e^{-chi_s} c)
    let first = (4.0 * libm::exp(chi_s) + (nf - 2.0) * exp_minus(chi_s, s1 * s2, -chi_s + l1 + l2)) / nf;
    let (sm, lm) = signed_log_pow(libm::cos(psi_s - psi_d), ni - 2);
    let (sp, lp) = signed_log_pow(libm::cos(psi_s + psi_d), ni - 2);
    let second = if sm > 0.0 {
        exp_minus(chi_d + lm, sp, -chi_d + lp)
    } else {
        sm * libm::exp(chi_d + lm) - sp * libm::exp(-chi_d + lp)
    };
    let log_den = libm::log(total_time * t) + (ni - 2) as f64 * libm::log(cs) + nf * libm::log(cd);
    libm::sqrt(0.25 * (first + second) * libm::exp(-log_den))
}

/// Exact CSS uncertainty at `bt = 0` for arbitrary `chi`, `Psi` matrices
/// (`O(N^3)`).
pub fn css_matrices(total_time: f64, t: f64, chi: &DMatrix<f64>, psi: &DMatrix<f64>) -> Result<f64> {
    let n = chi.nrows();
    if chi.ncols() != n || psi.nrows() != n || psi.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: psi.nrows() });
    }
    let mut slope = 0.0;
    for i in 0..n {
        let mut p = libm::exp(-0.5 * chi[(i, i)]);
        for l in 0..n {
            if l != i {
                p *= libm::cos(psi[(i, l)]);
            }
        }
        slope += 0.5 * t * p;
    }
    let mut jy2 = 0.25 * n as f64;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let (mut minus, mut plus) = (1.0, 1.0);
            for l in 0..n {
                if l != i && l != j {
                    minus *= libm::cos(psi[(i, l)] - psi[(j, l)]);
                    plus *= libm::cos(psi[(i, l)] + psi[(j, l)]);
                }
            }
            let chi_ij = 0.5 * (chi[(i, j)] + chi[(j, i)]);
            let w = libm::exp(-0.5 * (chi[(i, i)] + chi[(j, j)]));
            jy2 += 0.125 * w * (libm::exp(chi_ij) * minus - libm::exp(-chi_ij) * plus);
        }
    }
    let moments = MomentPair { jy_mean: 0.0, jy2_mean: jy2, d_jy_mean_db: slope };
    propagate(&moments, total_time / t)
}

/// CSS uncertainty from precomputed noise parameters.
pub fn css_from_parameters(n: usize, total_time: f64, t: f64, params: &NoiseParameters) -> Result<f64> {
    Ok(match params {
        NoiseParameters::Collective { chi, psi } => css_collective(n, total_time, t, *chi, *psi),
        NoiseParameters::EvenOdd { chi_s, psi_s, chi_d, psi_d } => {
            if n % 2 != 0 {
                return Err(Error::InvalidInput("even-odd regime needs an even qubit number"));
            }
            css_even_odd(n, total_time, t, *chi_s, *psi_s, *chi_d, *psi_d)
        }
        NoiseParameters::Matrices { chi, psi } => css_matrices(total_time, t, chi, psi)?,
    })
}

/// CSS uncertainty of a protocol at physical time `t`.
pub fn css_uncertainty(config: &ProtocolConfig, t: f64) -> Result<f64> {
    config.validate()?;
    if config.state != ProtocolState::Css {
        return Err(Error::InvalidInput("css_uncertainty needs a CSS protocol"));
    }
    if !(t > 0.0) {
        return Err(Error::InvalidInput("time must be positive"));
    }
    let params = noise_parameters(&PairEvaluator::new(config.model), &config.geometry, t)?;
    css_from_parameters(config.n, config.total_time, t, &params)
}

/// OATS moments from precomputed noise parameters.
pub fn oats_from_parameters(n: usize, theta: f64, beta: f64, b: f64, t: f64, params: &NoiseParameters) -> Result<MomentPair> {
    match params {
        NoiseParameters::Collective { chi, psi } => oats_moments_collective(n, *chi, *psi, theta, beta, b, t),
        NoiseParameters::EvenOdd { chi_s, psi_s, chi_d, psi_d } => {
            oats_moments_even_odd(n, *chi_s, *psi_s, *chi_d, *psi_d, theta, beta, b, t)
        }
        NoiseParameters::Matrices { chi, psi } => oats_moments(chi, psi, theta, beta, b, t),
    }
}

/// Variances below zero by less than this (relative to `<J_y^2>`) are roundoff.
pub const VARIANCE_FLOOR: f64 = 1e-12;

/// `db = Delta J_y / (sqrt(nu) |d<J_y>/db|)`; `+inf` for a vanishing slope.
pub fn propagate(moments: &MomentPair, nu: f64) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(Error::InvalidInput("repetition count must be positive"));
    }
    let mut var = moments.variance();
    if var < 0.0 {
        if var >= -VARIANCE_FLOOR * moments.jy2_mean.abs().max(1.0) {
            var = 0.0;
        } else {
            return Err(Error::Domain("negative J_y variance"));
        }
    }
    let slope = moments.d_jy_mean_db.abs();
    if slope == 0.0 || !slope.is_finite() {
        return Ok(f64::INFINITY);
    }
    Ok(libm::sqrt(var / nu) / slope)
}

/// Uncertainty of any CSS or OATS protocol at physical time `t`.
pub fn uncertainty(config: &ProtocolConfig, t: f64) -> Result<f64> {
    config.validate()?;
    if !(t > 0.0) {
        return Err(Error::InvalidInput("time must be positive"));
    }
    let eval = PairEvaluator::new(config.model);
    uncertainty_with(config, &eval, t)
}

fn uncertainty_with(config: &ProtocolConfig, eval: &PairEvaluator, t: f64) -> Result<f64> {
    match config.state {
        ProtocolState::Css => {
            let params = noise_parameters(eval, &config.geometry, t)?;
            css_from_parameters(config.n, config.total_time, t, &params)
        }
        ProtocolState::Oats { theta, beta } => {
            let params = noise_parameters(eval, &config.geometry, t)?;
            let m = oats_from_parameters(config.n, theta, beta, config.b, t, &params)?;
            propagate(&m, config.total_time / t)
        }
        ProtocolState::Ghz => Err(Error::Unsupported("GHZ uncertainty is provided by the randomized module")),
    }
}

/// Sampled uncertainty curve with its refined minimum.
#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintyCurve {
    /// Physical times (reduced times when `omega_c = 1`).
    pub times: Vec<f64>,
    pub delta_b: Vec<f64>,
    pub dispersion: Option<Vec<f64>>,
    pub tau_opt: f64,
    pub delta_b_opt: f64,
    /// The minimum sat on an end of the time range.
    pub at_boundary: bool,
}

/// Relative tolerance of the golden-section refinement in `t`.
pub const TIME_TOLERANCE: f64 = 1e-6;

/// Minimizes any curve `f(t)` on a log grid followed by golden section.
pub fn optimize_curve<F: FnMut(f64) -> Result<f64>>(mut f: F, t_range: (f64, f64), points: usize) -> Result<UncertaintyCurve> {
    let (lo, hi) = t_range;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidInput("time range needs 0 < t_lo < t_hi"));
    }
    if points < 3 {
        return Err(Error::InvalidInput("time grid needs at least 3 points"));
    }
    let times = grid(lo, hi, points, true);
    let mut values = Vec::with_capacity(points);
    for &t in &times {
        values.push(f(t)?);
    }
    let mut err = None;
    let best = minimize_sampled(
        |t| match f(t) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                f64::INFINITY
            }
        },
        &times,
        &values,
        TIME_TOLERANCE,
    );
    if let Some(e) = err {
        return Err(e);
    }
    if !best.value.is_finite() {
        return Err(Error::Domain("uncertainty is infinite over the whole time range"));
    }
    Ok(UncertaintyCurve {
        times,
        delta_b: values,
        dispersion: None,
        tau_opt: best.x,
        delta_b_opt: best.value,
        at_boundary: best.at_boundary,
    })
}

/// Uncertainty curve of a CSS or OATS protocol over `t_range`.
pub fn optimize_time(config: &ProtocolConfig, t_range: (f64, f64), points: usize) -> Result<UncertaintyCurve> {
    config.validate()?;
    let eval = PairEvaluator::new(config.model);
    optimize_curve(|t| uncertainty_with(config, &eval, t), t_range, points)
}

/// Optimal twisting and rotation angles of the noise-free OATS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleResult {
    pub theta_opt: f64,
    pub beta_opt: f64,
    pub a: f64,
    pub b: f64,
    pub delta: f64,
    /// Minimized `Delta J_y^2`.
    pub variance: f64,
    /// `12^{1/6} 2^{2/3} N^{-2/3}`.
    pub theta_asymptotic: f64,
    /// `pi/2 - 3^{-1/6} N^{-1/3} - 3^{1/6}/2 N^{-2/3}`.
    pub beta_asymptotic: f64,
}

/// `ln cos(theta)` accurate for small `theta`.
fn ln_cos(theta: f64) -> f64 {
    let s = libm::sin(0.5 * theta);
    libm::log1p(-2.0 * s * s)
}

/// `(A, B)` of the twisted-state variance.
pub fn squeezing_ab(n: usize, theta: f64) -> (f64, f64) {
    let k = n as f64 - 2.0;
    let c = libm::cos(theta);
    let a = if c > 0.0 { -libm::expm1(k * ln_cos(theta)) } else { 1.0 - powi(c, n as i64 - 2) };
    let b = 4.0 * libm::sin(0.5 * theta) * libm::pow(libm::cos(0.5 * theta), k);
    (a, b)
}

/// Noise-free `Delta J_y^2 = N/4 {1 + (N-1)/4 [A + sqrt(A^2+B^2) cos(2 beta + 2 delta)]}`.
pub fn oats_variance(n: usize, theta: f64, beta: f64) -> f64 {
    let (a, b) = squeezing_ab(n, theta);
    let delta = 0.5 * libm::atan2(b, a);
    let nf = n as f64;
    0.25 * nf * (1.0 + 0.25 * (nf - 1.0) * (a + libm::hypot(a, b) * libm::cos(2.0 * beta + 2.0 * delta)))
}

/// `Delta J_y^2` at `beta = pi/2 - delta(theta)`.
fn variance_at_best_beta(n: usize, theta: f64) -> f64 {
    let (a, b) = squeezing_ab(n, theta);
    let nf = n as f64;
    let h = libm::hypot(a, b);
    let gap = if h > 0.0 { -b * b / (a + h) } else { 0.0 };
    0.25 * nf * (1.0 + 0.25 * (nf - 1.0) * gap)
}

/// Exact `beta_opt = pi/2 - delta` with `theta_opt` minimizing the variance.
pub fn optimal_angles(n: usize) -> Result<AngleResult> {
    if n < 3 {
        return Err(Error::InvalidInput("optimal angles need N >= 3"));
    }
    let nf = n as f64;
    let m = crate::numerics::minimize_on_grid(|th| variance_at_best_beta(n, th), 1e-7, FRAC_PI_2, 600, true, 1e-12);
    let (theta, variance) = golden_section(
        |th| variance_at_best_beta(n, th),
        m.x * (1.0 - 0.05),
        (m.x * 1.05).min(FRAC_PI_2),
        1e-13,
    );
    let (theta, variance) = if variance <= m.value { (theta, variance) } else { (m.x, m.value) };
    let (a, b) = squeezing_ab(n, theta);
    let delta = 0.5 * libm::atan2(b, a);
    Ok(AngleResult {
        theta_opt: theta,
        beta_opt: FRAC_PI_2 - delta,
        a,
        b,
        delta,
        variance,
        theta_asymptotic: libm::pow(12.0, 1.0 / 6.0) * libm::pow(2.0, 2.0 / 3.0) * libm::pow(nf, -2.0 / 3.0),
        beta_asymptotic: FRAC_PI_2
            - libm::pow(3.0, -1.0 / 6.0) * libm::pow(nf, -1.0 / 3.0)
            - 0.5 * libm::pow(3.0, 1.0 / 6.0) * libm::pow(nf, -2.0 / 3.0),
    })
}

/// Leading short-time optimum of a curve `db^2 T t ~ 1/N + c t^2` style law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShortTimeOptimum {
    pub tau_opt: f64,
    /// `db_opt sqrt(T)`.
    pub delta_b_opt_sqrt_t: f64,
}

/// Collective CSS: `tau_opt = chi0^{-1} N^{-1/2}`, `db_opt = (2 chi0)^{1/2} T^{-1/2} N^{-1/4}`.
pub fn collective_css_short_time(chi0_sq: f64, n: usize) -> ShortTimeOptimum {
    let chi0 = libm::sqrt(chi0_sq);
    let nf = n as f64;
    ShortTimeOptimum { tau_opt: 1.0 / (chi0 * libm::sqrt(nf)), delta_b_opt_sqrt_t: libm::sqrt(2.0 * chi0) * libm::pow(nf, -0.25) }
}

/// Even-odd CSS with `S = chi_s0^2 + chi_d0^2`: `tau_opt = sqrt(2/(N S))`,
/// `db_opt = (2 S)^{1/4} T^{-1/2} N^{-1/4}`.
pub fn even_odd_css_short_time(chi_s0_sq: f64, chi_d0_sq: f64, n: usize) -> ShortTimeOptimum {
    let s = chi_s0_sq + chi_d0_sq;
    let nf = n as f64;
    ShortTimeOptimum { tau_opt: libm::sqrt(2.0 / (nf * s)), delta_b_opt_sqrt_t: libm::pow(2.0 * s / nf, 0.25) }
}

/// Collective OATS: `tau_opt = 3^{1/3} 2^{-1/2} chi0^{-1} N^{-5/6}`.
pub fn collective_oats_tau_opt(chi0_sq: f64, n: usize) -> f64 {
    libm::pow(3.0, 1.0 / 3.0) * core::f64::consts::FRAC_1_SQRT_2 / libm::sqrt(chi0_sq) * libm::pow(n as f64, -5.0 / 6.0)
}
