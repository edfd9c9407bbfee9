//! Dynamic coefficients `kappa`, `xi`, `vartheta` of the spin-boson model and
//! the derived decay/phase parameters `chi = 4 kappa`, `Psi = 4 (xi + vartheta)`.
//!
//! Normalization: `kappa_nm = 1/4 int J (1 - cos wt)/w^2 f_D coth` and
//! `xi_nm = 1/8 int J (wt - sin wt)/w^2 f_D`, which reproduces the short-time
//! constants `kappa^2(0) = alpha Gamma(s+1)/4` and `xi^3(0) = alpha Gamma(s+2)/24`.

pub mod kernel;

use alloc::vec::Vec;
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::noise::{angular_factor, one_minus_cos, u_minus_sin, Cutoff, SpectralModel};
use crate::numerics::{gamma, integrate_oscillatory, QuadratureSpec};
use kernel::{PairKernel, Profile};

/// Cross terms beyond this dimensionless transit time are set to zero.
pub const X_CLAMP: f64 = 1e3;

/// Spatial arrangement of the qubits.
#[derive(Debug, Clone, PartialEq)]
pub enum Regime {
    /// All transit times vanish.
    Collective,
    /// Two clusters (even and odd qubit indices) at mutual transit time `x`.
    EvenOdd { x: f64 },
    /// Explicit positions (length units); unused coordinates are ignored.
    Positions(Vec<[f64; 3]>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitGeometry {
    pub n: usize,
    pub regime: Regime,
    pub dimension: u8,
}

impl TransitGeometry {
    pub fn collective(n: usize) -> Self {
        Self { n, regime: Regime::Collective, dimension: 1 }
    }

    pub fn even_odd(n: usize, x: f64) -> Self {
        Self { n, regime: Regime::EvenOdd { x }, dimension: 1 }
    }

    pub fn positions(positions: Vec<[f64; 3]>, dimension: u8) -> Self {
        Self { n: positions.len(), regime: Regime::Positions(positions), dimension }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidInput("geometry needs at least one qubit"));
        }
        if !(1..=3).contains(&self.dimension) {
            return Err(Error::InvalidInput("dimension must be 1, 2 or 3"));
        }
        match &self.regime {
            Regime::Collective => Ok(()),
            Regime::EvenOdd { x } => {
                if !(*x >= 0.0) {
                    Err(Error::InvalidInput("even-odd transit time must be non-negative"))
                } else if self.n % 2 != 0 {
                    Err(Error::InvalidInput("even-odd regime needs an even qubit number"))
                } else {
                    Ok(())
                }
            }
            Regime::Positions(p) => {
                if p.len() != self.n {
                    Err(Error::DimensionMismatch { expected: self.n, got: p.len() })
                } else if p.iter().flatten().any(|c| !c.is_finite()) {
                    Err(Error::InvalidInput("positions must be finite"))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Dimensionless transit times `x_nm = omega_c |r_n - r_m| / v`.
    pub fn transit_matrix(&self, model: &SpectralModel) -> Result<DMatrix<f64>> {
        self.validate()?;
        let n = self.n;
        Ok(match &self.regime {
            Regime::Collective => DMatrix::zeros(n, n),
            Regime::EvenOdd { x } => DMatrix::from_fn(n, n, |i, j| if i % 2 == j % 2 { 0.0 } else { *x }),
            Regime::Positions(p) => {
                let d = self.dimension as usize;
                let scale = model.omega_c / model.speed;
                DMatrix::from_fn(n, n, |i, j| {
                    let r2: f64 = (0..d).map(|k| (p[i][k] - p[j][k]) * (p[i][k] - p[j][k])).sum();
                    scale * libm::sqrt(r2)
                })
            }
        })
    }
}

/// Coefficient matrices at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    pub t: f64,
    pub kappa: DMatrix<f64>,
    pub xi: DMatrix<f64>,
    pub vartheta: DMatrix<f64>,
}

impl CoefficientSet {
    pub fn zeros(n: usize, t: f64) -> Self {
        Self { t, kappa: DMatrix::zeros(n, n), xi: DMatrix::zeros(n, n), vartheta: DMatrix::zeros(n, n) }
    }

    pub fn n(&self) -> usize {
        self.kappa.nrows()
    }

    /// Constant matrices, as produced by collective noise.
    pub fn uniform(n: usize, t: f64, kappa: f64, xi: f64) -> Self {
        Self {
            t,
            kappa: DMatrix::from_element(n, n, kappa),
            xi: DMatrix::from_element(n, n, xi),
            vartheta: DMatrix::zeros(n, n),
        }
    }
}

/// `kappa` and `xi` for a single transit time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairCoefficients {
    pub kappa: f64,
    pub xi: f64,
}

/// How coefficient integrals are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Closed-form transforms when available (D = 1, zero temperature),
    /// quadrature otherwise.
    #[default]
    Auto,
    Quadrature,
}

fn profile(cutoff: Cutoff) -> Profile {
    match cutoff {
        Cutoff::Exponential => Profile::Exponential,
        Cutoff::Gaussian => Profile::Gaussian { a: 1.0 },
    }
}

/// Closed-form kernel for the model, if one exists.
pub fn model_kernel(model: &SpectralModel) -> Option<PairKernel> {
    if model.dimension == 1 && model.is_zero_temperature() {
        Some(PairKernel { alpha: model.alpha, s: model.ohmicity, profile: profile(model.cutoff) })
    } else {
        None
    }
}

/// Evaluates pair coefficients for one model at a fixed method.
#[derive(Debug, Clone, Copy)]
pub struct PairEvaluator {
    pub model: SpectralModel,
    pub method: Method,
    pub spec: QuadratureSpec,
}

impl PairEvaluator {
    pub fn new(model: SpectralModel) -> Self {
        Self { model, method: Method::Auto, spec: QuadratureSpec::default() }
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    /// Coefficients at reduced time `tau = omega_c t` and transit time `x`.
    pub fn pair(&self, tau: f64, x: f64) -> Result<PairCoefficients> {
        if !(tau >= 0.0) {
            return Err(Error::InvalidInput("time must be non-negative"));
        }
        if x > X_CLAMP || tau == 0.0 {
            return Ok(PairCoefficients { kappa: 0.0, xi: 0.0 });
        }
        if self.method == Method::Auto {
            if let Some(k) = model_kernel(&self.model) {
                let (kappa, xi) = k.kappa_xi(tau, x)?;
                return Ok(PairCoefficients { kappa, xi });
            }
        }
        pair_quadrature(&self.model, tau, x, &self.spec)
    }
}

/// Coefficients by direct quadrature of the frequency integrals.
pub fn pair_quadrature(model: &SpectralModel, tau: f64, x: f64, spec: &QuadratureSpec) -> Result<PairCoefficients> {
    model.validate()?;
    if tau == 0.0 {
        return Ok(PairCoefficients { kappa: 0.0, xi: 0.0 });
    }
    let d = model.dimension;
    let osc = tau.max(x);
    let kappa = integrate_oscillatory(
        |u| {
            let f = angular_factor(d, u * x).unwrap_or(0.0);
            model.reduced_density(u) * one_minus_cos(u * tau) / (u * u) * f * model.thermal_factor(u)
        },
        spec,
        1.0,
        osc,
    )?;
    let xi = integrate_oscillatory(
        |u| {
            let f = angular_factor(d, u * x).unwrap_or(0.0);
            model.reduced_density(u) * u_minus_sin(u * tau) / (u * u) * f
        },
        spec,
        1.0,
        osc,
    )?;
    Ok(PairCoefficients { kappa: 0.25 * kappa, xi: 0.125 * xi })
}

/// Full coefficient matrices at physical time `t`.
pub fn dynamic_coefficients(model: &SpectralModel, geometry: &TransitGeometry, t: f64) -> Result<CoefficientSet> {
    dynamic_coefficients_with(&PairEvaluator::new(*model), geometry, t)
}

pub fn dynamic_coefficients_with(eval: &PairEvaluator, geometry: &TransitGeometry, t: f64) -> Result<CoefficientSet> {
    eval.model.validate()?;
    if !(t >= 0.0) {
        return Err(Error::InvalidInput("time must be non-negative"));
    }
    if geometry.dimension != eval.model.dimension {
        return Err(Error::InvalidInput("geometry and model dimensions differ"));
    }
    let n = geometry.n;
    let tau = eval.model.omega_c * t;
    match &geometry.regime {
        Regime::Collective => {
            geometry.validate()?;
            let p = eval.pair(tau, 0.0)?;
            Ok(CoefficientSet::uniform(n, t, p.kappa, p.xi))
        }
        Regime::EvenOdd { x } => {
            geometry.validate()?;
            let same = eval.pair(tau, 0.0)?;
            let cross = eval.pair(tau, *x)?;
            let pick = |i: usize, j: usize| if i % 2 == j % 2 { same } else { cross };
            Ok(CoefficientSet {
                t,
                kappa: DMatrix::from_fn(n, n, |i, j| pick(i, j).kappa),
                xi: DMatrix::from_fn(n, n, |i, j| pick(i, j).xi),
                vartheta: DMatrix::zeros(n, n),
            })
        }
        Regime::Positions(_) => {
            let xs = geometry.transit_matrix(&eval.model)?;
            let mut set = CoefficientSet::zeros(n, t);
            let diag = eval.pair(tau, 0.0)?;
            for i in 0..n {
                set.kappa[(i, i)] = diag.kappa;
                set.xi[(i, i)] = diag.xi;
                for j in 0..i {
                    let p = eval.pair(tau, xs[(i, j)])?;
                    set.kappa[(i, j)] = p.kappa;
                    set.kappa[(j, i)] = p.kappa;
                    set.xi[(i, j)] = p.xi;
                    set.xi[(j, i)] = p.xi;
                }
            }
            Ok(set)
        }
    }
}

/// `(chi, Psi) = (4 kappa, 4 (xi + vartheta))`.
pub fn decay_phase_map(coeffs: &CoefficientSet) -> (DMatrix<f64>, DMatrix<f64>) {
    (&coeffs.kappa * 4.0, (&coeffs.xi + &coeffs.vartheta) * 4.0)
}

/// Leading short-time behaviour `kappa ~ kappa2 tau^2`, `xi ~ xi3 tau^3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShortTimeConstants {
    pub x: f64,
    pub kappa2: f64,
    pub xi3: f64,
    /// `chi_0^2 = 4 kappa2(0)`
    pub chi0_sq: f64,
    /// `Psi_0^3 = 4 xi3(0)`
    pub psi0_cu: f64,
    /// `4 kappa2(x)`
    pub chi_d0_sq: f64,
    /// `4 xi3(x)`
    pub psi_d0_cu: f64,
}

fn assemble_constants(x: f64, k0: f64, x0: f64, kx: f64, xx: f64) -> ShortTimeConstants {
    ShortTimeConstants {
        x,
        kappa2: kx,
        xi3: xx,
        chi0_sq: 4.0 * k0,
        psi0_cu: 4.0 * x0,
        chi_d0_sq: 4.0 * kx,
        psi_d0_cu: 4.0 * xx,
    }
}

/// Closed-form constants for the exponential cutoff (D = 1).
pub fn short_time_constants(model: &SpectralModel, x: f64) -> Result<ShortTimeConstants> {
    model.validate()?;
    if model.cutoff != Cutoff::Exponential {
        return Err(Error::Unsupported(
            "closed-form short-time constants need an exponential cutoff; use short_time_constants_numeric",
        ));
    }
    if !(x >= 0.0) {
        return Err(Error::InvalidInput("transit time must be non-negative"));
    }
    let (a, s) = (model.alpha, model.ohmicity);
    let k2 = |x: f64| -> Result<f64> {
        Ok(a * gamma(s + 1.0)? / 4.0 * libm::cos((s + 1.0) * libm::atan(x)) / libm::pow(1.0 + x * x, 0.5 * (s + 1.0)))
    };
    let x3 = |x: f64| -> Result<f64> {
        Ok(a * gamma(s + 2.0)? / 24.0 * libm::cos((s + 2.0) * libm::atan(x)) / libm::pow(1.0 + x * x, 0.5 * s + 1.0))
    };
    Ok(assemble_constants(x, k2(0.0)?, x3(0.0)?, k2(x)?, x3(x)?))
}

/// Short-time constants for any cutoff: `kappa2 = C_0(x)/4`, `xi3 = C_1(x)/24`
/// with `C_q(x) = alpha int u^(s+q) K cos(u x)`, evaluated by quadrature.
pub fn short_time_constants_numeric(model: &SpectralModel, x: f64, spec: &QuadratureSpec) -> Result<ShortTimeConstants> {
    model.validate()?;
    let c = |q: f64, x: f64| -> Result<f64> {
        integrate_oscillatory(|u| model.reduced_density(u) * libm::pow(u, q) * libm::cos(u * x), spec, 1.0, x)
    };
    Ok(assemble_constants(x, c(0.0, 0.0)? / 4.0, c(1.0, 0.0)? / 24.0, c(0.0, x)? / 4.0, c(1.0, x)? / 24.0))
}
