//! Randomized-coupling protocol: qubit positions are redrawn from an isotropic
//! Gaussian of width `epsilon` before every batch of Ramsey runs.
//!
//! Transit times between two sampled qubits are `N(0, 2/eta^2)` per axis with
//! `eta = v / (epsilon omega_c)`, so `E{cos(u x_nm)} = e^{-u^2/eta^2}`.

mod cumulants;

use alloc::vec::Vec;

use crate::coefficients::{dynamic_coefficients_with, PairEvaluator, TransitGeometry};
use crate::dynamics::BasisPair;
use crate::error::{Error, Result};
use crate::estimation::{
    oats_moments, oats_variance, optimize_curve, propagate, MomentPair, ProtocolConfig, ProtocolState, UncertaintyCurve,
};
use crate::noise::{one_minus_cos, u_minus_sin, Cutoff, SpectralModel};
use crate::numerics::{gamma, integrate, integrate_oscillatory, minimize_sampled, normal_quantile, sample_standard_normals};
use crate::numerics::{QuadratureSpec, RngStream};
pub use cumulants::{spatial_cumulant_coefficients, spatial_second_cumulants, CumulantWeights, SpatialSecondCumulants};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RcConfig {
    /// Spatial standard deviation per axis (length units).
    pub epsilon: f64,
    pub eta: f64,
    /// Number of sampled layouts.
    pub k: usize,
    pub seed: u64,
    pub dimension: u8,
}

impl RcConfig {
    /// Configuration with `epsilon = v / (eta omega_c)` for the model.
    pub fn new(model: &SpectralModel, eta: f64, k: usize, seed: u64) -> Self {
        Self { epsilon: model.speed / (eta * model.omega_c), eta, k, seed, dimension: model.dimension }
    }

    pub fn validate(&self, model: &SpectralModel) -> Result<()> {
        if !(self.epsilon > 0.0 && self.eta > 0.0) {
            return Err(Error::InvalidInput("epsilon and eta must be positive"));
        }
        if self.k < 2 {
            return Err(Error::InvalidInput("need at least two layouts"));
        }
        if !(1..=3).contains(&self.dimension) {
            return Err(Error::InvalidInput("dimension must be 1, 2 or 3"));
        }
        let implied = model.speed / (self.epsilon * model.omega_c);
        if ((implied - self.eta) / self.eta).abs() > 1e-9 {
            return Err(Error::InvalidInput("eta must equal v / (epsilon omega_c)"));
        }
        Ok(())
    }
}

/// Positions of layout `index`, each coordinate `N(0, epsilon^2)`.
pub fn sample_layout(n: usize, rc: &RcConfig, index: u64) -> TransitGeometry {
    let d = rc.dimension as usize;
    let z = sample_standard_normals(RngStream::new(rc.seed, index), n * d);
    let positions = (0..n)
        .map(|i| {
            let mut p = [0.0; 3];
            for (k, c) in p.iter_mut().enumerate().take(d) {
                *c = rc.epsilon * z[i * d + k];
            }
            p
        })
        .collect();
    TransitGeometry::positions(positions, rc.dimension)
}

/// Spatial means of the dynamic coefficients at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialMeans {
    /// `E{kappa_nn}`
    pub kappa0_bar: f64,
    /// `E{kappa_nm}`, `n != m`
    pub kappa1_bar: f64,
    /// `E{xi_nm}`, `n != m`
    pub xi_bar: f64,
    /// `kappa0_bar(t) ~ kappa0_sq (omega_c t)^2`; Gaussian cutoff only.
    pub kappa0_sq: Option<f64>,
    /// `xi_bar(t) ~ eta^{s+2} xi0_cu (omega_c t)^3`; Gaussian cutoff only.
    pub xi0_cu: Option<f64>,
}

/// Dawson integral by quadrature of `int_0^z e^{t^2 - z^2} dt`.
fn dawson(z: f64) -> Result<f64> {
    if z == 0.0 {
        return Ok(0.0);
    }
    let spec = QuadratureSpec::default();
    integrate(|t| libm::exp((t - z) * (t + z)), 0.0, z, &spec)
}

/// `E{f_D(u x_nm)}` for a sampled pair.
fn averaged_angular(dimension: u8, u: f64, eta: f64) -> Result<f64> {
    let g = libm::exp(-u * u / (eta * eta));
    match dimension {
        1 => Ok(2.0 * g),
        2 => {
            let z = u / eta;
            if z < 1e-6 {
                Ok(2.0)
            } else {
                Ok(2.0 * dawson(z)? / z)
            }
        }
        3 => Ok(4.0 * core::f64::consts::PI * g),
        _ => Err(Error::InvalidInput("dimension must be 1, 2 or 3")),
    }
}

fn zero_point(dimension: u8) -> f64 {
    if dimension == 3 {
        4.0 * core::f64::consts::PI
    } else {
        2.0
    }
}

/// `kappa0_bar`, `kappa1_bar`, `xi_bar` by quadrature, with the coefficient
/// normalization of the coefficients module (`1/4` and `1/8` times `f_D`).
pub fn spatial_means(model: &SpectralModel, rc: &RcConfig, t: f64) -> Result<SpatialMeans> {
    model.validate()?;
    rc.validate(model)?;
    if !(t >= 0.0) {
        return Err(Error::InvalidInput("time must be non-negative"));
    }
    let tau = model.omega_c * t;
    // Means scale like eta^{s+1} tau^2 and can sit far below the default floor.
    let spec = QuadratureSpec { absolute_tolerance: 1e-300, ..QuadratureSpec::default() };
    let eta = rc.eta;
    let d = rc.dimension;
    let short = short_time_means(model, d)?;
    if tau == 0.0 {
        return Ok(SpatialMeans { kappa0_bar: 0.0, kappa1_bar: 0.0, xi_bar: 0.0, kappa0_sq: short.0, xi0_cu: short.1 });
    }
    let g = |u: f64| model.reduced_density(u) * model.thermal_factor(u) * one_minus_cos(u * tau) / (u * u);
    let h = |u: f64| model.reduced_density(u) * u_minus_sin(u * tau) / (u * u);
    let mut err = None;
    let mut weight = |u: f64| match averaged_angular(d, u, eta) {
        Ok(w) => w,
        Err(e) => {
            err.get_or_insert(e);
            0.0
        }
    };
    let kappa0 = 0.25 * zero_point(d) * integrate_oscillatory(g, &spec, 1.0, tau)?;
    let scale = eta.min(1.0);
    let kappa1 = 0.25 * integrate_oscillatory(|u| g(u) * weight(u), &spec, scale, tau)?;
    let xi = 0.125 * integrate_oscillatory(|u| h(u) * weight(u), &spec, scale, tau)?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(SpatialMeans { kappa0_bar: kappa0, kappa1_bar: kappa1, xi_bar: xi, kappa0_sq: short.0, xi0_cu: short.1 })
}

/// Gaussian-cutoff short-time constants for `D = 1`: `Gamma((s+1)/2)/8` and
/// `s Gamma(s/2)/96`.
fn short_time_means(model: &SpectralModel, dimension: u8) -> Result<(Option<f64>, Option<f64>)> {
    if model.cutoff != Cutoff::Gaussian || dimension != 1 {
        return Ok((None, None));
    }
    let s = model.ohmicity;
    Ok((
        Some(model.alpha * gamma(0.5 * (s + 1.0))? / 8.0),
        Some(model.alpha * s * gamma(0.5 * s)? / 96.0),
    ))
}

/// First-order cumulants `E{gamma}`, `E{phi_0}` of a basis pair.
pub fn mean_cumulants(pair: &BasisPair, means: &SpatialMeans) -> (f64, f64) {
    let d = pair.differences();
    let sum: f64 = d.iter().sum();
    let sq: f64 = d.iter().map(|x| x * x).sum();
    let gamma = 0.5 * (sq * means.kappa0_bar + (sum * sum - sq) * means.kappa1_bar);
    let sa: f64 = pair.alpha.iter().map(|&a| a as f64).sum();
    let sb: f64 = pair.beta.iter().map(|&b| b as f64).sum();
    (gamma, (sb * sb - sa * sa) * means.xi_bar)
}

/// Sufficient conditions for first-order cumulants to dominate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Validity {
    /// `eta (omega_c t)^2 N`
    pub cond_i: f64,
    /// `eta^{s+1} (omega_c t)^2 N^2`
    pub cond_ii: f64,
    pub valid: bool,
}

pub const VALIDITY_THRESHOLD: f64 = 0.1;

pub fn validity_check(rc: &RcConfig, n: usize, t: f64, model: &SpectralModel) -> Validity {
    validity_check_with(rc, n, t, model, VALIDITY_THRESHOLD)
}

pub fn validity_check_with(rc: &RcConfig, n: usize, t: f64, model: &SpectralModel, threshold: f64) -> Validity {
    let tau = model.omega_c * t;
    let nf = n as f64;
    let cond_i = rc.eta * tau * tau * nf;
    let cond_ii = libm::pow(rc.eta, model.ohmicity + 1.0) * tau * tau * nf * nf;
    Validity { cond_i, cond_ii, valid: cond_i < threshold && cond_ii < threshold }
}

/// `K_min = ceil((z_{1 - eps/2} sigma / delta_e)^2)`, at least 1.
pub fn required_samples(sigma: f64, delta_e: f64, epsilon_conf: f64) -> Result<u64> {
    if !(delta_e > 0.0) {
        return Err(Error::InvalidInput("delta_e must be positive"));
    }
    if !(epsilon_conf > 0.0 && epsilon_conf < 1.0) {
        return Err(Error::InvalidInput("confidence parameter must lie in (0, 1)"));
    }
    if !(sigma >= 0.0) {
        return Err(Error::InvalidInput("sigma must be non-negative"));
    }
    let z = normal_quantile(1.0 - 0.5 * epsilon_conf)?;
    // Relative slack absorbs quantile roundoff at exact integers.
    let k = libm::ceil((z * sigma / delta_e) * (z * sigma / delta_e) * (1.0 - 1e-12));
    Ok((k as u64).max(1))
}

/// Sampled and reference (`eta = 0`) uncertainty curves.
#[derive(Debug, Clone, PartialEq)]
pub struct RcCurves {
    /// Finite-`K` estimate with dispersion.
    pub sampled: UncertaintyCurve,
    /// Spatially uncorrelated limit.
    pub reference: UncertaintyCurve,
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.len() < 3 {
        return Err(Error::InvalidInput("time grid needs at least 3 points"));
    }
    if times.iter().any(|t| !(*t > 0.0)) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("time grid must be positive and increasing"));
    }
    Ok(())
}

fn curve_on_grid<F: FnMut(f64) -> Result<f64>>(times: &[f64], values: Vec<f64>, mut f: F) -> Result<UncertaintyCurve> {
    let mut err = None;
    let best = minimize_sampled(
        |t| match f(t) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                f64::INFINITY
            }
        },
        times,
        &values,
        crate::estimation::TIME_TOLERANCE,
    );
    if let Some(e) = err {
        return Err(e);
    }
    Ok(UncertaintyCurve {
        times: times.to_vec(),
        delta_b: values,
        dispersion: None,
        tau_opt: best.x,
        delta_b_opt: best.value,
        at_boundary: best.at_boundary,
    })
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / k;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1.0);
    (mean, var)
}

/// `E{kappa_nn}(t)` from the model, exact in `t`.
pub fn kappa0_bar(model: &SpectralModel, t: f64) -> Result<f64> {
    Ok(PairEvaluator::new(*model).pair(model.omega_c * t, 0.0)?.kappa)
}

/// GHZ in the spatially uncorrelated limit: `y = e^{4 N kappa0_bar(t)}`.
pub fn ghz_reference(n: usize, total_time: f64, model: &SpectralModel, t: f64) -> Result<f64> {
    let k0 = kappa0_bar(model, t)?;
    Ok(libm::exp(2.0 * n as f64 * k0) / (n as f64 * libm::sqrt(total_time * t)))
}

/// `y = e^{2 gamma_GHZ}` with `gamma_GHZ = 2 sum_nm kappa_nm` for one layout
/// at each time: the inverse squared coherence `|2 rho_ud|^{-2}`.
pub fn ghz_layout_samples(eval: &PairEvaluator, layout: &TransitGeometry, times: &[f64]) -> Result<Vec<f64>> {
    times
        .iter()
        .map(|&t| {
            let c = dynamic_coefficients_with(eval, layout, t)?;
            Ok(libm::exp(4.0 * c.kappa.sum()))
        })
        .collect()
}

/// Finite-`K` GHZ estimate `sqrt(mean y)/(N sqrt(T t))` and its dispersion
/// from per-layout samples `y[layout][time]`.
pub fn assemble_ghz(n: usize, total_time: f64, times: &[f64], y: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let k = y.len();
    let mut db = Vec::with_capacity(times.len());
    let mut sigma = Vec::with_capacity(times.len());
    for (j, &t) in times.iter().enumerate() {
        let col: Vec<f64> = y.iter().map(|row| row[j]).collect();
        let (mean, var) = mean_var(&col);
        let d = libm::sqrt(mean) / (n as f64 * libm::sqrt(total_time * t));
        db.push(d);
        sigma.push(d / (2.0 * mean) * libm::sqrt(var / k as f64));
    }
    (db, sigma)
}

fn check_rc(config: &ProtocolConfig, rc: &RcConfig) -> Result<()> {
    config.validate()?;
    rc.validate(&config.model)?;
    if rc.dimension != config.model.dimension {
        return Err(Error::InvalidInput("RC and model dimensions differ"));
    }
    Ok(())
}

/// GHZ randomized protocol on the time grid, with `K` sampled layouts.
pub fn ghz_rc(config: &ProtocolConfig, rc: &RcConfig, times: &[f64]) -> Result<RcCurves> {
    check_rc(config, rc)?;
    if config.state != ProtocolState::Ghz {
        return Err(Error::InvalidInput("ghz_rc needs a GHZ protocol"));
    }
    let layouts: Vec<TransitGeometry> = (0..rc.k as u64).map(|i| sample_layout(config.n, rc, i)).collect();
    ghz_rc_from_layouts(config, &layouts, times)
}

/// GHZ curves for explicit layouts (at least two).
pub fn ghz_rc_from_layouts(config: &ProtocolConfig, layouts: &[TransitGeometry], times: &[f64]) -> Result<RcCurves> {
    check_times(times)?;
    if layouts.len() < 2 {
        return Err(Error::InvalidInput("need at least two layouts"));
    }
    let eval = PairEvaluator::new(config.model);
    let mut y = Vec::with_capacity(layouts.len());
    for l in layouts {
        y.push(ghz_layout_samples(&eval, l, times)?);
    }
    finish_ghz(config, layouts, times, &y)
}

/// Builds both GHZ curves from precomputed samples; `layouts` are reused to
/// refine the sampled minimum.
pub fn finish_ghz(config: &ProtocolConfig, layouts: &[TransitGeometry], times: &[f64], y: &[Vec<f64>]) -> Result<RcCurves> {
    let (n, tt) = (config.n, config.total_time);
    let eval = PairEvaluator::new(config.model);
    let (db, sigma) = assemble_ghz(n, tt, times, y);
    let mut sampled = curve_on_grid(times, db, |t| {
        let mut ys = Vec::with_capacity(layouts.len());
        for l in layouts {
            ys.push(ghz_layout_samples(&eval, l, &[t])?);
        }
        Ok(assemble_ghz(n, tt, &[t], &ys).0[0])
    })?;
    sampled.dispersion = Some(sigma);
    let model = config.model;
    let reference_values = times.iter().map(|&t| ghz_reference(n, tt, &model, t)).collect::<Result<Vec<_>>>()?;
    let reference = curve_on_grid(times, reference_values, |t| ghz_reference(n, tt, &model, t))?;
    Ok(RcCurves { sampled, reference })
}

/// OATS in the spatially uncorrelated limit:
/// `db^2 = [N (e^{4 kappa0_bar} - 1) + 4 V_0] / (N^2 T t cos(theta/2)^{2N-2})`.
pub fn oats_reference(n: usize, total_time: f64, theta: f64, beta: f64, model: &SpectralModel, t: f64) -> Result<f64> {
    let k0 = kappa0_bar(model, t)?;
    let nf = n as f64;
    let v0 = oats_variance(n, theta, beta);
    let num = nf * libm::expm1(4.0 * k0) + 4.0 * v0;
    let den = nf * nf * total_time * t * libm::pow(libm::cos(0.5 * theta), 2.0 * nf - 2.0);
    Ok(libm::sqrt(num / den))
}

/// Per-layout `(d<J_y>/db, Var J_y)` from the cumulant moments at each time.
pub fn oats_layout_samples(
    eval: &PairEvaluator,
    layout: &TransitGeometry,
    theta: f64,
    beta: f64,
    b: f64,
    times: &[f64],
) -> Result<Vec<(f64, f64)>> {
    times
        .iter()
        .map(|&t| {
            let c = dynamic_coefficients_with(eval, layout, t)?;
            let (chi, psi) = crate::coefficients::decay_phase_map(&c);
            let m = oats_moments(&chi, &psi, theta, beta, b, t)?;
            Ok((m.d_jy_mean_db, m.variance()))
        })
        .collect()
}

/// Finite-`K` OATS estimate from averaged `x1 = d<J_y>/db`, `x2 = Var J_y`
/// and the two-term dispersion.
pub fn assemble_oats(total_time: f64, times: &[f64], samples: &[Vec<(f64, f64)>]) -> Result<(Vec<f64>, Vec<f64>)> {
    let k = samples.len() as f64;
    let mut db = Vec::with_capacity(times.len());
    let mut sigma = Vec::with_capacity(times.len());
    for (j, &t) in times.iter().enumerate() {
        let x1: Vec<f64> = samples.iter().map(|row| row[j].0).collect();
        let x2: Vec<f64> = samples.iter().map(|row| row[j].1).collect();
        let (m1, v1) = mean_var(&x1);
        let (m2, v2) = mean_var(&x2);
        let moments = MomentPair { jy_mean: 0.0, jy2_mean: m2, d_jy_mean_db: m1 };
        let d = propagate(&moments, total_time / t)?;
        let (g1, g2) = if m2 > 0.0 { (d / m1, 0.5 * d / m2) } else { (0.0, 0.0) };
        db.push(d);
        sigma.push(libm::sqrt(g1 * g1 * v1 / k + g2 * g2 * v2 / k));
    }
    Ok((db, sigma))
}

/// OATS randomized protocol on the time grid; the state angles come from the
/// configuration.
pub fn oats_rc(config: &ProtocolConfig, rc: &RcConfig, times: &[f64]) -> Result<RcCurves> {
    check_rc(config, rc)?;
    if !matches!(config.state, ProtocolState::Oats { .. }) {
        return Err(Error::InvalidInput("oats_rc needs an OATS protocol"));
    }
    let layouts: Vec<TransitGeometry> = (0..rc.k as u64).map(|i| sample_layout(config.n, rc, i)).collect();
    oats_rc_from_layouts(config, &layouts, times)
}

pub fn oats_rc_from_layouts(config: &ProtocolConfig, layouts: &[TransitGeometry], times: &[f64]) -> Result<RcCurves> {
    check_times(times)?;
    if layouts.len() < 2 {
        return Err(Error::InvalidInput("need at least two layouts"));
    }
    let ProtocolState::Oats { theta, beta } = config.state else {
        return Err(Error::InvalidInput("oats_rc needs an OATS protocol"));
    };
    let eval = PairEvaluator::new(config.model);
    let mut samples = Vec::with_capacity(layouts.len());
    for l in layouts {
        samples.push(oats_layout_samples(&eval, l, theta, beta, config.b, times)?);
    }
    finish_oats(config, layouts, times, &samples)
}

pub fn finish_oats(
    config: &ProtocolConfig,
    layouts: &[TransitGeometry],
    times: &[f64],
    samples: &[Vec<(f64, f64)>],
) -> Result<RcCurves> {
    let ProtocolState::Oats { theta, beta } = config.state else {
        return Err(Error::InvalidInput("oats_rc needs an OATS protocol"));
    };
    let (n, tt, b) = (config.n, config.total_time, config.b);
    let eval = PairEvaluator::new(config.model);
    let (db, sigma) = assemble_oats(tt, times, samples)?;
    let mut sampled = curve_on_grid(times, db, |t| {
        let mut s = Vec::with_capacity(layouts.len());
        for l in layouts {
            s.push(oats_layout_samples(&eval, l, theta, beta, b, &[t])?);
        }
        Ok(assemble_oats(tt, &[t], &s)?.0[0])
    })?;
    sampled.dispersion = Some(sigma);
    let model = config.model;
    let values = times
        .iter()
        .map(|&t| oats_reference(n, tt, theta, beta, &model, t))
        .collect::<Result<Vec<_>>>()?;
    let reference = curve_on_grid(times, values, |t| oats_reference(n, tt, theta, beta, &model, t))?;
    Ok(RcCurves { sampled, reference })
}

/// Large-`N` form of the OATS reference: `V_0 -> (3^{2/3}/8) N^{1/3}` and
/// `cos(theta/2)^{2N-2} -> 1`, i.e.
/// `db^2 = [N (e^{4 kappa0_bar} - 1) + (3^{2/3}/2) N^{1/3}] / (N^2 T t)`.
pub fn oats_reference_asymptotic(n: usize, total_time: f64, model: &SpectralModel, t: f64) -> Result<f64> {
    let k0 = kappa0_bar(model, t)?;
    let nf = n as f64;
    let num = nf * libm::expm1(4.0 * k0) + 0.5 * libm::pow(3.0, 2.0 / 3.0) * libm::cbrt(nf);
    Ok(libm::sqrt(num / (nf * nf * total_time * t)))
}

/// Optimum of the GHZ reference curve over a log grid.
pub fn ghz_reference_optimum(n: usize, total_time: f64, model: &SpectralModel, t_range: (f64, f64)) -> Result<UncertaintyCurve> {
    optimize_curve(|t| ghz_reference(n, total_time, model, t), t_range, 80)
}

/// Optimum of the OATS reference curve over a log grid.
pub fn oats_reference_optimum(
    n: usize,
    total_time: f64,
    theta: f64,
    beta: f64,
    model: &SpectralModel,
    t_range: (f64, f64),
) -> Result<UncertaintyCurve> {
    optimize_curve(|t| oats_reference(n, total_time, theta, beta, model, t), t_range, 80)
}

/// Optimum of the large-`N` OATS reference curve over a log grid.
pub fn oats_reference_asymptotic_optimum(n: usize, total_time: f64, model: &SpectralModel, t_range: (f64, f64)) -> Result<UncertaintyCurve> {
    optimize_curve(|t| oats_reference_asymptotic(n, total_time, model, t), t_range, 80)
}
