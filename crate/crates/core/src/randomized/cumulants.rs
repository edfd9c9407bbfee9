//! Spatial second cumulants of `gamma` and `phi_0` for `D = 1`.
//!
//! With `kappa(x) = 1/2 int g(u) cos(ux)` and `xi(x) = 1/4 int h(u) cos(ux)`,
//! the covariance of two transit times with correlation `rho` reduces to
//! `int int g(u) g(v) e^{-(u^2+v^2)/eta^2} (cosh(2 rho u v/eta^2) - 1)`.
//! Identical pairs have `rho = 1`, pairs sharing one qubit `|rho| = 1/2`,
//! disjoint pairs are independent.

use alloc::vec::Vec;

use super::RcConfig;
use crate::dynamics::BasisPair;
use crate::error::{Error, Result};
use crate::noise::{one_minus_cos, u_minus_sin, Cutoff, SpectralModel};
use crate::numerics::gauss_legendre_nodes;

/// Time-dependent factors of the spatial (co)variances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialSecondCumulants {
    /// `Var kappa_nm`
    pub f1: f64,
    /// `Cov(kappa_nm, kappa_nl)`
    pub f2: f64,
    /// `Var xi_nm`
    pub g1: f64,
    /// `Cov(xi_nm, xi_nl)`
    pub g2: f64,
    /// `Cov(kappa_nm, xi_nl)`
    pub fg2: f64,
}

/// `e^{-(u^2+v^2)/eta^2} (cosh(c u v/eta^2) - 1)` without cancellation.
fn spatial_kernel(u: f64, v: f64, eta2: f64, c: f64) -> f64 {
    let a = (u * u + v * v) / eta2;
    let z = c * u * v / eta2;
    if z < 1.0 {
        let sh = libm::sinh(0.5 * z);
        2.0 * libm::exp(-a) * sh * sh
    } else {
        0.5 * (libm::exp(z - a) + libm::exp(-z - a)) - libm::exp(-a)
    }
}

fn upper_limit(model: &SpectralModel) -> f64 {
    match model.cutoff {
        Cutoff::Gaussian => 9.0 + 0.5 * model.ohmicity,
        Cutoff::Exponential => 60.0 + 2.0 * model.ohmicity,
    }
}

/// `int int a(u) b(v) K_c(u, v) du dv` over the quadrant by a composite
/// Gauss-Legendre product rule. Panels resolve both the kernel width `eta`
/// and the filter period; entries with `|u - v| > 12 eta` (for `c = 2`) or
/// `u, v > 40 eta` (for `c = 1`) are below `e^{-140}` and skipped.
fn double_integral<A: Fn(f64) -> f64, B: Fn(f64) -> f64>(a: &A, b: &B, eta: f64, c: f64, hi: f64, tau: f64) -> f64 {
    let eta2 = eta * eta;
    let top = if c < 2.0 { hi.min(40.0 * eta) } else { hi };
    let h = (0.5 * eta).min(0.5).min(0.5 * core::f64::consts::PI / tau.max(1e-300));
    let panels = libm::ceil(top / h).max(1.0) as usize;
    let nodes = gauss_legendre_nodes(0.0, top, panels);
    let fa: Vec<f64> = nodes.iter().map(|&(u, w)| w * a(u)).collect();
    let fb: Vec<f64> = nodes.iter().map(|&(u, w)| w * b(u)).collect();
    let band = if c < 2.0 { f64::INFINITY } else { 12.0 * eta };
    let mut lo = 0;
    let mut total = 0.0;
    for (i, &(u, _)) in nodes.iter().enumerate() {
        if fa[i] == 0.0 {
            continue;
        }
        while nodes[lo].0 < u - band {
            lo += 1;
        }
        let mut row = 0.0;
        for j in lo..nodes.len() {
            let v = nodes[j].0;
            if v > u + band {
                break;
            }
            row += fb[j] * spatial_kernel(u, v, eta2, c);
        }
        total += fa[i] * row;
    }
    total
}

/// `F_1, F_2, G_1, G_2, FG_2` at physical time `t` (`D = 1`).
pub fn spatial_cumulant_coefficients(model: &SpectralModel, rc: &RcConfig, t: f64) -> Result<SpatialSecondCumulants> {
    model.validate()?;
    rc.validate(model)?;
    if model.dimension != 1 || rc.dimension != 1 {
        return Err(Error::Unsupported("spatial second cumulants are derived for D = 1"));
    }
    if !(t >= 0.0) {
        return Err(Error::InvalidInput("time must be non-negative"));
    }
    let tau = model.omega_c * t;
    if tau == 0.0 {
        return Ok(SpatialSecondCumulants { f1: 0.0, f2: 0.0, g1: 0.0, g2: 0.0, fg2: 0.0 });
    }
    let g = |u: f64| {
        if u <= 0.0 {
            0.0
        } else {
            model.reduced_density(u) * model.thermal_factor(u) * one_minus_cos(u * tau) / (u * u)
        }
    };
    let h = |u: f64| if u <= 0.0 { 0.0 } else { model.reduced_density(u) * u_minus_sin(u * tau) / (u * u) };
    let hi = upper_limit(model);
    let eta = rc.eta;
    Ok(SpatialSecondCumulants {
        f1: 0.25 * double_integral(&g, &g, eta, 2.0, hi, tau),
        f2: 0.25 * double_integral(&g, &g, eta, 1.0, hi, tau),
        g1: 0.0625 * double_integral(&h, &h, eta, 2.0, hi, tau),
        g2: 0.0625 * double_integral(&h, &h, eta, 1.0, hi, tau),
        fg2: 0.125 * double_integral(&g, &h, eta, 1.0, hi, tau),
    })
}

/// State-dependent weights multiplying the cumulant coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CumulantWeights {
    /// `sum_{n<m} (d_n d_m)^2`
    pub gamma_same: f64,
    /// `sum_n d_n^2 [(S - d_n)^2 - (Q - d_n^2)]`
    pub gamma_shared: f64,
    /// `sum_{n<m} e_nm^2`
    pub phi_same: f64,
    /// `sum_n [(sum_{m!=n} e_nm)^2 - sum_{m!=n} e_nm^2]`
    pub phi_shared: f64,
    /// `sum_n d_n [(S - d_n) E_n - sum_{m!=n} d_m e_nm]`
    pub cross_shared: f64,
}

impl CumulantWeights {
    /// Weights for `gamma = 1/2 sum d_n d_m kappa_nm` and
    /// `phi_0 = sum (beta_n beta_m - alpha_n alpha_m) xi_nm`, `d = alpha - beta`.
    pub fn new(pair: &BasisPair) -> Self {
        let n = pair.n();
        let d = pair.differences();
        let a: Vec<f64> = pair.alpha.iter().map(|&x| x as f64).collect();
        let b: Vec<f64> = pair.beta.iter().map(|&x| x as f64).collect();
        let e = |i: usize, j: usize| b[i] * b[j] - a[i] * a[j];
        let s: f64 = d.iter().sum();
        let q: f64 = d.iter().map(|x| x * x).sum();
        let mut w = CumulantWeights { gamma_same: 0.0, gamma_shared: 0.0, phi_same: 0.0, phi_shared: 0.0, cross_shared: 0.0 };
        for i in 0..n {
            let mut row = 0.0;
            let mut row_sq = 0.0;
            let mut dm_e = 0.0;
            for j in 0..n {
                if j == i {
                    continue;
                }
                let eij = e(i, j);
                row += eij;
                row_sq += eij * eij;
                dm_e += d[j] * eij;
                if j > i {
                    w.gamma_same += (d[i] * d[j]) * (d[i] * d[j]);
                    w.phi_same += eij * eij;
                }
            }
            w.gamma_shared += d[i] * d[i] * ((s - d[i]) * (s - d[i]) - (q - d[i] * d[i]));
            w.phi_shared += row * row - row_sq;
            w.cross_shared += d[i] * ((s - d[i]) * row - dm_e);
        }
        w
    }

    /// `(Var gamma, Var phi_0, Cov(gamma, phi_0))`.
    pub fn combine(&self, c: &SpatialSecondCumulants) -> (f64, f64, f64) {
        (
            c.f1 * self.gamma_same + c.f2 * self.gamma_shared,
            4.0 * (c.g1 * self.phi_same + c.g2 * self.phi_shared),
            2.0 * c.fg2 * self.cross_shared,
        )
    }
}

/// Spatial variance of `gamma`, variance of `phi_0` and their covariance for
/// one basis pair.
pub fn spatial_second_cumulants(model: &SpectralModel, rc: &RcConfig, t: f64, pair: &BasisPair) -> Result<(f64, f64, f64)> {
    let c = spatial_cumulant_coefficients(model, rc, t)?;
    Ok(CumulantWeights::new(pair).combine(&c))
}
