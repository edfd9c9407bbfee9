//! Two-qubit reduced state of a collectively dephased coherent spin state and
//! its Wootters concurrence.

use nalgebra::{Matrix4, SymmetricEigen};
use num_complex::Complex64;

use crate::coefficients::PairEvaluator;
use crate::error::{Error, Result};
use crate::noise::SpectralModel;

/// Reduced state of qubits 1, 2 for an `N`-qubit CSS along `+x` under
/// collective noise with scalar `kappa`, `xi` at reduced time; basis order
/// `|uu>, |ud>, |du>, |dd>`.
///
/// The trace over the other `N - 2` qubits factorizes: each contributes
/// `cos(Delta Psi / 2)` where `Delta = (b1 + b2) - (a1 + a2)`.
pub fn reduced_two_qubit_state(n: usize, kappa: f64, xi: f64, bt: f64) -> Result<Matrix4<Complex64>> {
    if n < 2 {
        return Err(Error::InvalidInput("need at least two qubits"));
    }
    let psi = 4.0 * xi;
    let spins = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];
    Ok(Matrix4::from_fn(|i, j| {
        let (a1, a2) = spins[i];
        let (b1, b2) = spins[j];
        let delta = (b1 + b2) - (a1 + a2);
        let amp = 0.25 * libm::exp(-0.5 * kappa * delta * delta) * libm::pow(libm::cos(0.5 * delta * psi), (n - 2) as f64);
        let phase = 0.5 * bt * delta + 0.5 * psi * (b1 * b2 - a1 * a2);
        Complex64::from_polar(amp, phase)
    }))
}

/// Hermitian square root of a positive semidefinite matrix.
fn sqrt_psd(m: &Matrix4<Complex64>) -> Matrix4<Complex64> {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let mut d = Matrix4::<Complex64>::zeros();
    for k in 0..4 {
        d[(k, k)] = Complex64::new(libm::sqrt(eig.eigenvalues[k].max(0.0)), 0.0);
    }
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

/// Wootters concurrence `max(0, l1 - l2 - l3 - l4)`.
pub fn concurrence(rho: &Matrix4<Complex64>) -> f64 {
    let mut yy = Matrix4::<Complex64>::zeros();
    // sigma_y (x) sigma_y in the |uu>,|ud>,|du>,|dd> basis
    yy[(0, 3)] = Complex64::new(-1.0, 0.0);
    yy[(1, 2)] = Complex64::new(1.0, 0.0);
    yy[(2, 1)] = Complex64::new(1.0, 0.0);
    yy[(3, 0)] = Complex64::new(-1.0, 0.0);
    let tilde = yy * rho.conjugate() * yy;
    let root = sqrt_psd(rho);
    let r = &root * tilde * &root;
    let r = (r + r.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(r);
    let mut l: [f64; 4] = [0.0; 4];
    for k in 0..4 {
        let v = eig.eigenvalues[k];
        l[k] = if v < 1e-14 { 0.0 } else { libm::sqrt(v) };
    }
    l.sort_by(|a, b| b.total_cmp(a));
    (l[0] - l[1] - l[2] - l[3]).max(0.0)
}

/// Concurrence of any two qubits of a collectively dephased `+x` CSS.
pub fn two_qubit_concurrence(model: &SpectralModel, n: usize, t: f64, b: f64) -> Result<f64> {
    let p = PairEvaluator::new(*model).pair(model.omega_c * t, 0.0)?;
    Ok(concurrence(&reduced_two_qubit_state(n, p.kappa, p.xi, b * t)?))
}
