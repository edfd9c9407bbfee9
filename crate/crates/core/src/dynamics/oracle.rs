//! Brute-force oracles: the random-unitary Monte Carlo and full `2^N`
//! enumeration of collective-spin moments.

use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{element_factor, BasisPair};
use crate::coefficients::CoefficientSet;
use crate::error::{Error, Result};
use crate::estimation::MomentPair;
use crate::numerics::RngStream;

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuEstimate {
    pub mean: Complex64,
    pub std_error: f64,
}

const PSD_TOL: f64 = 1e-10;

/// Symmetric square root with small negative eigenvalues clamped.
pub fn symmetric_sqrt(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = SymmetricEigen::new(m.clone());
    let min = eig.eigenvalues.min();
    let scale = eig.eigenvalues.amax().max(1.0);
    if min < -PSD_TOL * scale {
        return Err(Error::NotPsd(min));
    }
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| libm::sqrt(v.max(0.0))));
    Ok(&eig.eigenvectors * d * eig.eigenvectors.transpose())
}

/// Averages `exp(i sum (beta_n - alpha_n) Phi_n)` over Gaussian phases with
/// covariance `kappa`; the expectation is `e^{-gamma}`.
pub fn ru_decay_oracle(pair: &BasisPair, coeffs: &CoefficientSet, samples: usize, stream: RngStream) -> Result<RuEstimate> {
    let n = pair.n();
    if coeffs.n() != n {
        return Err(Error::DimensionMismatch { expected: coeffs.n(), got: n });
    }
    if coeffs.vartheta.iter().any(|&v| v != 0.0) {
        return Err(Error::Unsupported("random-unitary oracle requires vartheta = 0"));
    }
    if samples == 0 {
        return Err(Error::InvalidInput("need at least one sample"));
    }
    let root = symmetric_sqrt(&coeffs.kappa)?;
    let d = DVector::from_vec(pair.differences());
    // Only the projection w = root * d matters: d . Phi = w . z with z standard normal.
    let w = &root * &d;
    let mut rng = stream.generator();
    let (mut sc, mut ss, mut sc2, mut ss2) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..samples {
        let mut phase = 0.0;
        for k in 0..n {
            let z: f64 = rng.sample(StandardNormal);
            phase += w[k] * z;
        }
        let (s, c) = libm::sincos(phase);
        sc += c;
        ss += s;
        sc2 += c * c;
        ss2 += s * s;
    }
    let k = samples as f64;
    let mean = Complex64::new(sc / k, ss / k);
    let var = if samples > 1 { ((sc2 + ss2) - k * mean.norm_sqr()) / (k - 1.0) } else { 0.0 };
    Ok(RuEstimate { mean, std_error: libm::sqrt(var.max(0.0) / k) })
}

/// Initial probe state for the enumeration oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProbeState {
    /// Product state along the Bloch direction `(polar, azimuth)`.
    Css { polar: f64, azimuth: f64 },
    /// `e^{-i beta J_x} e^{-i theta J_z^2 / 2} |+x>^N`.
    Oats { theta: f64, beta: f64 },
    /// `(|up..up> + |down..down>)/sqrt 2`.
    Ghz,
}

impl ProbeState {
    pub fn css_x() -> Self {
        ProbeState::Css { polar: core::f64::consts::FRAC_PI_2, azimuth: 0.0 }
    }

    /// State vector indexed by bit patterns (bit set = spin down).
    pub fn amplitudes(&self, n: usize) -> Vec<Complex64> {
        let dim = 1usize << n;
        match *self {
            ProbeState::Css { polar, azimuth } => {
                let up = Complex64::new(libm::cos(0.5 * polar), 0.0);
                let down = Complex64::from_polar(libm::sin(0.5 * polar), azimuth);
                (0..dim)
                    .map(|s| {
                        let d = (s as u64).count_ones() as usize;
                        up.powu((n - d) as u32) * down.powu(d as u32)
                    })
                    .collect()
            }
            ProbeState::Ghz => {
                let mut v = vec![Complex64::new(0.0, 0.0); dim];
                let h = core::f64::consts::FRAC_1_SQRT_2;
                v[0] = Complex64::new(h, 0.0);
                v[dim - 1] = Complex64::new(h, 0.0);
                v
            }
            ProbeState::Oats { theta, beta } => {
                let norm = libm::pow(2.0, -0.5 * n as f64);
                let mut v: Vec<Complex64> = (0..dim)
                    .map(|s| {
                        let m = 0.5 * (n as f64 - 2.0 * (s as u64).count_ones() as f64);
                        Complex64::from_polar(norm, -0.5 * theta * m * m)
                    })
                    .collect();
                let c = Complex64::new(libm::cos(0.5 * beta), 0.0);
                let s = Complex64::new(0.0, -libm::sin(0.5 * beta));
                for q in 0..n {
                    let bit = 1usize << q;
                    for idx in 0..dim {
                        if idx & bit == 0 {
                            let (u, d) = (v[idx], v[idx | bit]);
                            v[idx] = c * u + s * d;
                            v[idx | bit] = s * u + c * d;
                        }
                    }
                }
                v
            }
        }
    }
}

pub const EXACT_MAX_N: usize = 14;

/// `<up|sigma_y|down> = -i`, `<down|sigma_y|up> = +i`; `bit_out` is the row spin.
fn sigma_y(bit_out_down: bool) -> Complex64 {
    if bit_out_down {
        Complex64::new(0.0, 1.0)
    } else {
        Complex64::new(0.0, -1.0)
    }
}

/// `<J_y>`, `<J_y^2>` and `d<J_y>/db` by full enumeration of the `z` basis.
pub fn exact_expectations(state: ProbeState, coeffs: &CoefficientSet, b: f64, t: f64) -> Result<MomentPair> {
    let n = coeffs.n();
    if n > EXACT_MAX_N {
        return Err(Error::TooLarge { n, limit: EXACT_MAX_N });
    }
    if n == 0 {
        return Err(Error::InvalidInput("need at least one qubit"));
    }
    let amps = state.amplitudes(n);
    let psi = (&coeffs.xi + &coeffs.vartheta) * 4.0;
    let kap = &coeffs.kappa;
    let bt = b * t;
    let mut jy = Complex64::new(0.0, 0.0);
    let mut djy = Complex64::new(0.0, 0.0);
    let mut jy2 = Complex64::new(0.0, 0.0);
    let mut spins = vec![0.0f64; n];
    let mut rows = vec![0.0f64; n];
    for (a, &ca) in amps.iter().enumerate() {
        if ca.norm_sqr() == 0.0 {
            continue;
        }
        for k in 0..n {
            spins[k] = if (a >> k) & 1 == 1 { -1.0 } else { 1.0 };
        }
        for k in 0..n {
            rows[k] = (0..n).map(|m| psi[(k, m)] * spins[m]).sum();
        }
        // Element <a|rho|b> with b = a flipped on set F:
        //   gamma = 2 sum_{F x F} a_n a_m kappa_nm
        //   phi0 + phi1 = -sum_{n in F, m not in F} a_n a_m Psi_nm
        //   signal = (bt/2) sum_F (-2 a_n)
        let flip_phase = |f: &[usize]| -> f64 {
            let mut p = 0.0;
            for &i in f {
                let mut r = rows[i];
                for &j in f {
                    r -= psi[(i, j)] * spins[j];
                }
                p -= spins[i] * r;
            }
            p
        };
        for i in 0..n {
            let bidx = a ^ (1 << i);
            let cb = amps[bidx];
            if cb.norm_sqr() == 0.0 {
                continue;
            }
            let gamma = 2.0 * kap[(i, i)];
            let sig = -spins[i];
            let f = Complex64::from_polar(libm::exp(-gamma), flip_phase(&[i]) + 0.5 * bt * 2.0 * sig);
            // rho_{ab} O_{ba}: O_{ba} = <b|sigma_y^i|a>, row spin is b_i = -a_i.
            let term = ca * cb.conj() * f * sigma_y(spins[i] > 0.0) * 0.5;
            jy += term;
            djy += term * Complex64::new(0.0, 0.5 * t * 2.0 * sig);
        }
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let bidx = a ^ (1 << i) ^ (1 << j);
                let cb = amps[bidx];
                if cb.norm_sqr() == 0.0 {
                    continue;
                }
                let gamma = 2.0
                    * (kap[(i, i)] + kap[(j, j)] + 2.0 * spins[i] * spins[j] * kap[(i, j)]);
                let sig = -(spins[i] + spins[j]);
                let f = Complex64::from_polar(libm::exp(-gamma), flip_phase(&[i, j]) + 0.5 * bt * 2.0 * sig);
                let o = sigma_y(spins[i] > 0.0) * sigma_y(spins[j] > 0.0);
                jy2 += ca * cb.conj() * f * o * 0.25;
            }
        }
    }
    let norm: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
    Ok(MomentPair {
        jy_mean: jy.re / norm,
        jy2_mean: 0.25 * n as f64 + jy2.re / norm,
        d_jy_mean_db: djy.re / norm,
    })
}

/// Reference implementation through the generic [`element_factor`], `O(4^N N^2)`.
pub fn exact_expectations_dense(state: ProbeState, coeffs: &CoefficientSet, b: f64, t: f64) -> Result<MomentPair> {
    let n = coeffs.n();
    if n > 8 {
        return Err(Error::TooLarge { n, limit: 8 });
    }
    let amps = state.amplitudes(n);
    let dim = amps.len();
    let mut jy = 0.0;
    let mut djy = 0.0;
    let mut jy2 = 0.0;
    for a in 0..dim {
        for bb in 0..dim {
            let rho0 = amps[a] * amps[bb].conj();
            if rho0.norm_sqr() == 0.0 {
                continue;
            }
            let pair = BasisPair::from_bits(n, a as u64, bb as u64);
            let ef = element_factor(&pair, coeffs, b, t)?;
            let rho = rho0 * ef.factor();
            let diff = a ^ bb;
            let ones = diff.count_ones();
            let signal: f64 = pair.differences().iter().sum::<f64>();
            if ones == 1 {
                let i = diff.trailing_zeros() as usize;
                let o = sigma_y((bb >> i) & 1 == 1) * 0.5;
                jy += (rho * o).re;
                djy += (rho * o * Complex64::new(0.0, 0.5 * t * signal)).re;
            } else if ones == 2 {
                let i = diff.trailing_zeros() as usize;
                let j = (diff & !(1 << i)).trailing_zeros() as usize;
                let o = sigma_y((bb >> i) & 1 == 1) * sigma_y((bb >> j) & 1 == 1) * 0.5;
                jy2 += (rho * o).re;
            }
        }
    }
    Ok(MomentPair { jy_mean: jy, jy2_mean: 0.25 * n as f64 + jy2, d_jy_mean_db: djy })
}
