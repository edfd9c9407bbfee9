//! Closed-form Fourier transforms of `u^(p-1) K(u)` and the one-dimensional,
//! zero-temperature dynamic coefficients built from them.

use num_complex::Complex64;

use crate::error::Result;
use crate::numerics::{gamma, hyp1f1};

/// Frequency profile multiplying the power law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    /// `exp(-u)`
    Exponential,
    /// `exp(-a u^2)`
    Gaussian { a: f64 },
}

/// `int_0^inf u^(p-1) K(u) exp(i u y) du` for `p > 0`.
pub fn transform(profile: Profile, p: f64, y: f64) -> Result<Complex64> {
    match profile {
        Profile::Exponential => {
            let mag = gamma(p)? * libm::pow(1.0 + y * y, -0.5 * p);
            let ph = p * libm::atan(y);
            Ok(Complex64::new(mag * libm::cos(ph), mag * libm::sin(ph)))
        }
        Profile::Gaussian { a } => Ok(Complex64::new(gauss_cos(a, p, y)?, gauss_sin(a, p, y)?)),
    }
}

/// Real part of [`transform`].
pub fn transform_cos(profile: Profile, p: f64, y: f64) -> Result<f64> {
    match profile {
        Profile::Exponential => Ok(transform(profile, p, y)?.re),
        Profile::Gaussian { a } => gauss_cos(a, p, y),
    }
}

/// Imaginary part of [`transform`].
pub fn transform_sin(profile: Profile, p: f64, y: f64) -> Result<f64> {
    match profile {
        Profile::Exponential => Ok(transform(profile, p, y)?.im),
        Profile::Gaussian { a } => gauss_sin(a, p, y),
    }
}

fn gauss_cos(a: f64, p: f64, y: f64) -> Result<f64> {
    let z = -0.25 * y * y / a;
    Ok(0.5 * libm::pow(a, -0.5 * p) * gamma(0.5 * p)? * hyp1f1(0.5 * p, 0.5, z)?)
}

fn gauss_sin(a: f64, p: f64, y: f64) -> Result<f64> {
    if y == 0.0 {
        return Ok(0.0);
    }
    let z = -0.25 * y * y / a;
    let q = 0.5 * (p + 1.0);
    Ok(0.5 * y * libm::pow(a, -q) * gamma(q)? * hyp1f1(q, 1.5, z)?)
}

/// Below this `tau` the coefficients are summed from their Taylor series.
pub const TAYLOR_SWITCH: f64 = 0.1;

/// Power law `alpha u^s` times a profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairKernel {
    pub alpha: f64,
    pub s: f64,
    pub profile: Profile,
}

impl PairKernel {
    /// `C_q(x) = alpha int u^(s+q) K cos(u x) du`.
    pub fn moment_cos(&self, q: f64, x: f64) -> Result<f64> {
        Ok(self.alpha * transform_cos(self.profile, self.s + q + 1.0, x)?)
    }

    /// `(kappa, xi)` for one pair at reduced time `tau` and transit time `x`,
    /// with `f_1 = 2 cos`.
    pub fn kappa_xi(&self, tau: f64, x: f64) -> Result<(f64, f64)> {
        if tau == 0.0 {
            return Ok((0.0, 0.0));
        }
        if tau < TAYLOR_SWITCH {
            return self.kappa_xi_series(tau, x);
        }
        let s = self.s;
        let pr = self.profile;
        let m = |y: f64| transform_cos(pr, s - 1.0, y);
        let sn = |y: f64| transform_sin(pr, s - 1.0, y);
        let kappa = 0.5 * self.alpha * (m(x)? - 0.5 * m(x + tau)? - 0.5 * m(x - tau)?);
        let c_m1 = transform_cos(pr, s, x)?;
        let xi = 0.25 * self.alpha * (tau * c_m1 - 0.5 * (sn(tau + x)? + sn(tau - x)?));
        Ok((kappa, xi))
    }

    fn kappa_xi_series(&self, tau: f64, x: f64) -> Result<(f64, f64)> {
        // |C_q(x)| <= C_q(0), so terms are bounded by their x = 0 values; the
        // sum stops once that bound is negligible against the leading term.
        let t2 = tau * tau;
        let mut kappa = 0.0;
        let mut xi = 0.0;
        // tau^(2k)/(2k)! and tau^(2k+1)/(2k+1)!
        let mut ck = 0.5 * t2;
        let mut cx = t2 * tau / 6.0;
        let k_scale = ck * self.moment_cos(0.0, 0.0)?;
        let x_scale = cx * self.moment_cos(1.0, 0.0)?;
        let mut k_done = false;
        let mut x_done = false;
        for k in 1..80 {
            let kf = k as f64;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            if !k_done {
                let q = 2.0 * kf - 2.0;
                kappa += sign * ck * self.moment_cos(q, x)?;
                k_done = ck * self.moment_cos(q, 0.0)? <= 1e-17 * k_scale;
            }
            if !x_done {
                let q = 2.0 * kf - 1.0;
                xi += sign * cx * self.moment_cos(q, x)?;
                x_done = cx * self.moment_cos(q, 0.0)? <= 1e-17 * x_scale;
            }
            if k_done && x_done {
                break;
            }
            ck *= t2 / ((2.0 * kf + 1.0) * (2.0 * kf + 2.0));
            cx *= t2 / ((2.0 * kf + 2.0) * (2.0 * kf + 3.0));
        }
        Ok((0.5 * kappa, 0.25 * xi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn taylor_switch_is_continuous() {
        for profile in [Profile::Exponential, Profile::Gaussian { a: 1.0 }] {
            let k = PairKernel { alpha: 1.0, s: 3.0, profile };
            for x in [0.0, 0.7, 3.0] {
                let (a1, b1) = k.kappa_xi(TAYLOR_SWITCH * (1.0 - 1e-12), x).unwrap();
                let (a2, b2) = k.kappa_xi(TAYLOR_SWITCH * (1.0 + 1e-12), x).unwrap();
                assert!((a1 - a2).abs() < 1e-11 * a1.abs().max(1e-3), "{profile:?} {x}");
                assert!((b1 - b2).abs() < 1e-9 * b1.abs().max(1e-4), "{profile:?} {x}");
            }
        }
    }
}
