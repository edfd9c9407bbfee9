//! Bath description: spectral density, filter functions, angular factors and
//! the spatially averaged two-point correlator.

use core::f64::consts::PI;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{gamma, hyp1f1, integrate_oscillatory, QuadratureSpec};

/// High-frequency cutoff shape `K(omega, omega_c)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cutoff {
    /// `exp(-(omega/omega_c)^2)`
    Gaussian,
    /// `exp(-omega/omega_c)`
    Exponential,
}

impl Cutoff {
    /// `K` as a function of `u = omega/omega_c`.
    pub fn factor(self, u: f64) -> f64 {
        match self {
            Cutoff::Gaussian => libm::exp(-u * u),
            Cutoff::Exponential => libm::exp(-u),
        }
    }
}

/// Spin-boson bath parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralModel {
    pub alpha: f64,
    pub ohmicity: f64,
    pub cutoff: Cutoff,
    pub omega_c: f64,
    pub speed: f64,
    /// Inverse temperature; `f64::INFINITY` means zero temperature.
    pub inv_temperature: f64,
    pub dimension: u8,
}

impl SpectralModel {
    pub fn new(alpha: f64, ohmicity: f64, cutoff: Cutoff) -> Self {
        Self {
            alpha,
            ohmicity,
            cutoff,
            omega_c: 1.0,
            speed: 1.0,
            inv_temperature: f64::INFINITY,
            dimension: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) {
            return Err(Error::InvalidInput("alpha must be positive"));
        }
        if !(self.ohmicity > 1.0) {
            return Err(Error::InvalidInput("ohmicity must exceed 1"));
        }
        if !(self.omega_c > 0.0 && self.speed > 0.0) {
            return Err(Error::InvalidInput("omega_c and speed must be positive"));
        }
        if !(self.inv_temperature > 0.0) {
            return Err(Error::InvalidInput("inverse temperature must be positive"));
        }
        if !(1..=3).contains(&self.dimension) {
            return Err(Error::InvalidInput("dimension must be 1, 2 or 3"));
        }
        Ok(())
    }

    pub fn is_zero_temperature(&self) -> bool {
        self.inv_temperature.is_infinite()
    }

    /// `J(u)/omega_c` with `u = omega/omega_c`.
    pub fn reduced_density(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        self.alpha * libm::pow(u, self.ohmicity) * self.cutoff.factor(u)
    }

    /// `coth(beta omega / 2)` at `u = omega/omega_c`; 1 at zero temperature.
    pub fn thermal_factor(&self, u: f64) -> f64 {
        if self.is_zero_temperature() {
            return 1.0;
        }
        let arg = 0.5 * self.inv_temperature * self.omega_c * u;
        if arg > 20.0 {
            1.0
        } else {
            1.0 / libm::tanh(arg)
        }
    }
}

/// `J(omega) = alpha omega_c (omega/omega_c)^s K(omega, omega_c)`.
pub fn spectral_density(model: &SpectralModel, omega: f64) -> Result<f64> {
    if !(omega >= 0.0) {
        return Err(Error::Domain("spectral density requires omega >= 0"));
    }
    Ok(model.omega_c * model.reduced_density(omega / model.omega_c))
}

/// First- and second-order free-evolution filter functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterPair {
    pub f_plus: f64,
    pub f_minus: Complex64,
}

const FILTER_TAYLOR: f64 = 1e-4;

/// `2 sin^2(u/2)`, i.e. `1 - cos u` without cancellation.
pub fn one_minus_cos(u: f64) -> f64 {
    let h = libm::sin(0.5 * u);
    2.0 * h * h
}

/// `u - sin u` without cancellation.
pub fn u_minus_sin(u: f64) -> f64 {
    if u.abs() < 1.0 {
        let u2 = u * u;
        let mut term = u * u2 / 6.0;
        let mut sum = term;
        let mut k = 2.0;
        while term.abs() > 1e-18 * sum.abs() {
            term *= -u2 / ((2.0 * k) * (2.0 * k + 1.0));
            sum += term;
            k += 1.0;
        }
        sum
    } else {
        u - libm::sin(u)
    }
}

/// `F+ = 2(1 - cos wt)/w^2`, `F- = (1 - e^{iwt} + iwt)/w^2`.
pub fn filter_functions(omega: f64, t: f64) -> FilterPair {
    let u = omega * t;
    let t2 = t * t;
    if u.abs() < FILTER_TAYLOR {
        let u2 = u * u;
        let f_plus = t2 * (1.0 - u2 / 12.0 + u2 * u2 / 360.0);
        let re = t2 * (0.5 - u2 / 24.0);
        let im = t2 * (u / 6.0 - u * u2 / 120.0);
        return FilterPair { f_plus, f_minus: Complex64::new(re, im) };
    }
    let w2 = omega * omega;
    let omc = one_minus_cos(u);
    FilterPair {
        f_plus: 2.0 * omc / w2,
        f_minus: Complex64::new(omc / w2, u_minus_sin(u) / w2),
    }
}

fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-4 {
        1.0 - u * u / 6.0
    } else {
        libm::sin(u) / u
    }
}

/// Direction-averaged plane-wave factor `f_D(u)`.
pub fn angular_factor(dimension: u8, u: f64) -> Result<f64> {
    match dimension {
        1 => Ok(2.0 * libm::cos(u)),
        2 => Ok(2.0 * sinc(u)),
        3 => Ok(4.0 * PI * sinc(u)),
        _ => Err(Error::InvalidInput("dimension must be 1, 2 or 3")),
    }
}

/// Spatially averaged correlator for `D = 1` and a Gaussian cutoff, in units of
/// `omega_c^2`, evaluated at dimensionless time `tau = omega_c t`.
///
/// The closed form keeps only the spatial Gaussian `exp(-u^2/eta^2)`; the
/// bath's own cutoff is dropped, which is exact up to relative `O(eta^2)`.
pub fn averaged_correlator(model: &SpectralModel, eta: f64, tau: f64) -> Result<Complex64> {
    check_correlator_inputs(model, eta)?;
    let s = model.ohmicity;
    let y = eta * tau;
    let z = -0.25 * y * y;
    let re = gamma(0.5 * (s + 1.0))? * hyp1f1(0.5 * (s + 1.0), 0.5, z)?;
    let im = y * gamma(0.5 * s + 1.0)? * hyp1f1(0.5 * (s + 2.0), 1.5, z)?;
    let pref = 0.5 * model.alpha * libm::pow(eta, s + 1.0);
    Ok(Complex64::new(pref * re, -pref * im))
}

/// Direct quadrature of `int J(omega) exp(-omega^2 eps^2/v^2) exp(-i omega t)`,
/// including the bath cutoff, in units of `omega_c^2`.
pub fn averaged_correlator_quadrature(
    model: &SpectralModel,
    eta: f64,
    tau: f64,
    spec: &QuadratureSpec,
) -> Result<Complex64> {
    check_correlator_inputs(model, eta)?;
    let scale = eta.min(1.0);
    let weight = |u: f64| model.reduced_density(u) * libm::exp(-u * u / (eta * eta));
    let re = integrate_oscillatory(|u| weight(u) * libm::cos(u * tau), spec, scale, tau)?;
    let im = integrate_oscillatory(|u| weight(u) * libm::sin(u * tau), spec, scale, tau)?;
    Ok(Complex64::new(re, -im))
}

fn check_correlator_inputs(model: &SpectralModel, eta: f64) -> Result<()> {
    model.validate()?;
    if model.cutoff != Cutoff::Gaussian {
        return Err(Error::Unsupported("averaged correlator closed form needs a Gaussian cutoff"));
    }
    if model.dimension != 1 {
        return Err(Error::Unsupported("averaged correlator is derived for D = 1"));
    }
    if !(eta > 0.0) {
        return Err(Error::InvalidInput("eta must be positive"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn u_minus_sin_branches_agree() {
        let a = u_minus_sin(0.999_999_999);
        let b = 0.999_999_999 - libm::sin(0.999_999_999);
        assert!((a / b - 1.0).abs() < 1e-12);
    }
}
