//! Exact reduced dynamics in the `z` basis.
//!
//! A density-matrix element evolves as
//! `<a|rho(t)|b> = e^{i (bt/2) sum(b_n - a_n)} e^{-gamma + i phi0 + i phi1} <a|rho0|b>`
//! with `gamma = 1/2 sum (a_n - b_n)(a_m - b_m) kappa_nm`, so that a single
//! flipped qubit decays as `e^{-chi_nn / 2}`.

pub mod concurrence;
pub mod oracle;

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::coefficients::CoefficientSet;
use crate::error::{Error, Result};

pub use concurrence::{concurrence, reduced_two_qubit_state, two_qubit_concurrence};
pub use oracle::{exact_expectations, ru_decay_oracle, ProbeState, RuEstimate};

/// A `z`-basis matrix-element index `<alpha| . |beta>` with entries `+-1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BasisPair {
    pub alpha: Vec<i8>,
    pub beta: Vec<i8>,
}

impl BasisPair {
    pub fn new(alpha: Vec<i8>, beta: Vec<i8>) -> Result<Self> {
        if alpha.len() != beta.len() {
            return Err(Error::DimensionMismatch { expected: alpha.len(), got: beta.len() });
        }
        if alpha.iter().chain(beta.iter()).any(|&v| v != 1 && v != -1) {
            return Err(Error::InvalidInput("basis entries must be +1 or -1"));
        }
        Ok(Self { alpha, beta })
    }

    /// Bit `n` set means qubit `n` is down (`-1`).
    pub fn from_bits(n: usize, alpha: u64, beta: u64) -> Self {
        let spin = |bits: u64, k: usize| if (bits >> k) & 1 == 1 { -1 } else { 1 };
        Self { alpha: (0..n).map(|k| spin(alpha, k)).collect(), beta: (0..n).map(|k| spin(beta, k)).collect() }
    }

    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    /// `m = sum(alpha)/2`.
    pub fn m(&self) -> f64 {
        0.5 * self.alpha.iter().map(|&v| v as f64).sum::<f64>()
    }

    /// `m' = sum(beta)/2`.
    pub fn m_prime(&self) -> f64 {
        0.5 * self.beta.iter().map(|&v| v as f64).sum::<f64>()
    }

    /// Angle with `N cos(theta) = sum alpha_n beta_n`.
    pub fn theta_ab(&self) -> f64 {
        let dot: f64 = self.alpha.iter().zip(&self.beta).map(|(&a, &b)| (a * b) as f64).sum();
        libm::acos((dot / self.n() as f64).clamp(-1.0, 1.0))
    }

    /// `(m_e, m_o, m'_e, m'_o)`: half-magnetizations of the even- and odd-index clusters.
    pub fn cluster_magnetizations(&self) -> (f64, f64, f64, f64) {
        let half = |v: &[i8], parity: usize| 0.5 * v.iter().skip(parity).step_by(2).map(|&x| x as f64).sum::<f64>();
        (half(&self.alpha, 0), half(&self.alpha, 1), half(&self.beta, 0), half(&self.beta, 1))
    }

    /// `beta_n - alpha_n`.
    pub fn differences(&self) -> Vec<f64> {
        self.alpha.iter().zip(&self.beta).map(|(&a, &b)| (b - a) as f64).collect()
    }
}

/// Decay, bath phases and signal phase of one element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementFactor {
    pub gamma: f64,
    pub phi0: f64,
    pub phi1: f64,
    pub signal_phase: f64,
}

impl ElementFactor {
    pub fn factor(&self) -> Complex64 {
        Complex64::from_polar(libm::exp(-self.gamma), self.signal_phase + self.phi0 + self.phi1)
    }
}

/// Exact evolution factor for `<alpha|rho|beta>`; `b` and `t` enter only via `bt`.
pub fn element_factor(pair: &BasisPair, coeffs: &CoefficientSet, b: f64, t: f64) -> Result<ElementFactor> {
    let n = pair.n();
    if coeffs.n() != n {
        return Err(Error::DimensionMismatch { expected: coeffs.n(), got: n });
    }
    let a: Vec<f64> = pair.alpha.iter().map(|&v| v as f64).collect();
    let be: Vec<f64> = pair.beta.iter().map(|&v| v as f64).collect();
    let (mut gamma, mut phi0, mut phi1) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let di = a[i] - be[i];
        for j in 0..n {
            let dj = a[j] - be[j];
            gamma += di * dj * coeffs.kappa[(i, j)];
            phi0 += (be[i] * be[j] - a[i] * a[j]) * coeffs.xi[(i, j)];
            phi1 += (be[i] * a[j] - a[i] * be[j]) * coeffs.vartheta[(i, j)];
        }
    }
    let signal: f64 = be.iter().zip(&a).map(|(x, y)| x - y).sum();
    Ok(ElementFactor { gamma: 0.5 * gamma, phi0, phi1, signal_phase: 0.5 * b * t * signal })
}

/// Reduced GHZ dynamics in the `{|up...up>, |down...down>}` subspace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhzState {
    /// `[[rho_uu, rho_ud], [rho_du, rho_dd]]`
    pub matrix: [[Complex64; 2]; 2],
    pub gamma: f64,
}

/// `gamma_GHZ = 2 sum_nm kappa_nm`; coherence `(1/2) e^{-gamma_GHZ} e^{-iNbt}`.
pub fn ghz_evolve(n: usize, coeffs: &CoefficientSet, b: f64, t: f64) -> Result<GhzState> {
    if coeffs.n() != n {
        return Err(Error::DimensionMismatch { expected: coeffs.n(), got: n });
    }
    let gamma = 2.0 * coeffs.kappa.sum();
    let c = Complex64::from_polar(0.5 * libm::exp(-gamma), -(n as f64) * b * t);
    let half = Complex64::new(0.5, 0.0);
    Ok(GhzState { matrix: [[half, c], [c.conj(), half]], gamma })
}

/// Noise symmetry assumed when counting quantum-noise-insensitive elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QniRegime {
    General,
    Collective,
    EvenOdd,
}

/// How the enumerated count was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QniMethod {
    /// Every `(alpha, beta)` pair visited.
    Exhaustive,
    /// Every `alpha` visited; `beta` counted by cluster magnetization classes.
    Grouped,
    /// Too large; only the formula is reported.
    FormulaOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QniCount {
    pub regime: QniRegime,
    pub n: usize,
    pub enumerated: Option<u64>,
    pub formula: u64,
    pub method: QniMethod,
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u64 = 1;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// Formula counts: general `2^{N+1}`, collective `2 C(2N, N)`, even-odd `2 C(N, N/2)^2`.
pub fn qni_formula(regime: QniRegime, n: usize) -> u64 {
    let n = n as u64;
    match regime {
        QniRegime::General => 1u64 << (n + 1),
        QniRegime::Collective => 2 * binomial(2 * n, n),
        QniRegime::EvenOdd => 2 * binomial(n, n / 2) * binomial(n, n / 2),
    }
}

pub const QNI_EXHAUSTIVE_MAX: usize = 12;
pub const QNI_GROUPED_MAX: usize = 16;

/// Counts elements whose bath phases vanish for every admissible coefficient
/// set of the regime (arbitrary `xi` and antisymmetric `vartheta` with the
/// regime's symmetry).
pub fn qni_enumerate(regime: QniRegime, n: usize) -> Result<QniCount> {
    if n == 0 {
        return Err(Error::InvalidInput("N must be positive"));
    }
    if regime == QniRegime::EvenOdd && n % 2 != 0 {
        return Err(Error::InvalidInput("even-odd regime needs an even N"));
    }
    let formula = qni_formula(regime, n);
    let (enumerated, method) = if n <= QNI_EXHAUSTIVE_MAX {
        (Some(qni_exhaustive(regime, n)), QniMethod::Exhaustive)
    } else if n <= QNI_GROUPED_MAX {
        (Some(qni_grouped(regime, n)), QniMethod::Grouped)
    } else {
        (None, QniMethod::FormulaOnly)
    };
    Ok(QniCount { regime, n, enumerated, formula, method })
}

/// Twice the cluster magnetizations `(2 m_e, 2 m_o)` of a bit pattern.
fn cluster_sums(bits: u64, n: usize) -> (i32, i32) {
    let even_mask: u64 = (0..n).step_by(2).fold(0, |m, k| m | (1 << k));
    let odd_mask: u64 = (1..n).step_by(2).fold(0, |m, k| m | (1 << k));
    let ne = (n as i32 + 1) / 2;
    let no = n as i32 / 2;
    (ne - 2 * (bits & even_mask).count_ones() as i32, no - 2 * (bits & odd_mask).count_ones() as i32)
}

fn eo_insensitive(a: (i32, i32), b: (i32, i32)) -> bool {
    let (me, mo) = a;
    let (pe, po) = b;
    // xi_s weight, xi_d weight, vartheta_eo weight
    pe * pe + po * po == me * me + mo * mo && pe * po == me * mo && pe * mo == me * po
}

fn qni_exhaustive(regime: QniRegime, n: usize) -> u64 {
    let full: u64 = (1u64 << n) - 1;
    let mut count = 0u64;
    for a in 0..=full {
        match regime {
            QniRegime::General => {
                // Pairwise weights vanish for all n < m iff beta = +-alpha.
                for b in 0..=full {
                    let d = a ^ b;
                    if d == 0 || d == full {
                        count += 1;
                    }
                }
            }
            QniRegime::Collective => {
                let ma = n as i32 - 2 * a.count_ones() as i32;
                for b in 0..=full {
                    let mb = n as i32 - 2 * b.count_ones() as i32;
                    if ma * ma == mb * mb {
                        count += 1;
                    }
                }
            }
            QniRegime::EvenOdd => {
                let ca = cluster_sums(a, n);
                for b in 0..=full {
                    if eo_insensitive(ca, cluster_sums(b, n)) {
                        count += 1;
                    }
                }
            }
        }
    }
    count
}

fn qni_grouped(regime: QniRegime, n: usize) -> u64 {
    let full: u64 = (1u64 << n) - 1;
    let ne = (n + 1) / 2;
    let no = n / 2;
    let mut count = 0u64;
    for a in 0..=full {
        match regime {
            QniRegime::General => count += if n == 0 { 1 } else { 2 },
            QniRegime::Collective => {
                let ma = n as i64 - 2 * a.count_ones() as i64;
                for k in 0..=n {
                    let mb = n as i64 - 2 * k as i64;
                    if ma * ma == mb * mb {
                        count += binomial(n as u64, k as u64);
                    }
                }
            }
            QniRegime::EvenOdd => {
                let ca = cluster_sums(a, n);
                for ke in 0..=ne {
                    for ko in 0..=no {
                        let cb = (ne as i32 - 2 * ke as i32, no as i32 - 2 * ko as i32);
                        if eo_insensitive(ca, cb) {
                            count += binomial(ne as u64, ke as u64) * binomial(no as u64, ko as u64);
                        }
                    }
                }
            }
        }
    }
    count
}
