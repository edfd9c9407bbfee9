//! Second-order cumulant (Kubo) approximation to the moments of `J_y` for the
//! one-axis twisted state `e^{-i beta J_x} e^{-i theta J_z^2/2} |+x>^N` under
//! dephasing with decay matrix `chi` and phase matrix `Psi`.
//!
//! Each single-qubit (pair) term isolates the qubit(s) carrying the raising or
//! lowering operator; the remaining `M` qubits enter through the generating
//! function `E(P, Q)` of the twisting phase and the bath-induced phases
//! `c_l z_l`, truncated at second order.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::MomentPair;
use crate::error::{Error, Result};

type Op = [[Complex64; 2]; 2];

const SPINS: [f64; 2] = [1.0, -1.0];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `R^dagger sigma R` with `R = e^{-i beta sigma_x/2}`; index 0 is spin up.
/// `raising` selects `sigma^+ = |up><down|`.
fn rotated(beta: f64, raising: bool) -> Op {
    let (cb, sb) = (libm::cos(0.5 * beta), libm::sin(0.5 * beta));
    let r = [[c(cb, 0.0), c(0.0, -sb)], [c(0.0, -sb), c(cb, 0.0)]];
    let mut sigma = [[c(0.0, 0.0); 2]; 2];
    if raising {
        sigma[0][1] = c(1.0, 0.0);
    } else {
        sigma[1][0] = c(1.0, 0.0);
    }
    let mut out = [[c(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let mut acc = c(0.0, 0.0);
            for k in 0..2 {
                for l in 0..2 {
                    acc += r[k][i].conj() * sigma[k][l] * r[l][j];
                }
            }
            out[i][j] = acc;
        }
    }
    out
}

/// Twisting and rotation angles shared by every term.
#[derive(Debug, Clone, Copy)]
struct Context {
    n: usize,
    theta: f64,
    beta: f64,
    plus: Op,
    minus: Op,
}

impl Context {
    fn new(n: usize, theta: f64, beta: f64) -> Self {
        Self { n, theta, beta, plus: rotated(beta, true), minus: rotated(beta, false) }
    }

    fn op(&self, eps: f64) -> &Op {
        if eps > 0.0 {
            &self.plus
        } else {
            &self.minus
        }
    }

    /// `log E(P, Q)` for `m` spectator qubits with phase sums `s1 = sum c`,
    /// `s2 = sum c^2`.
    fn log_e(&self, p: f64, q: f64, m: usize, s1: f64, s2: f64) -> Complex64 {
        let th = self.theta;
        let (cb, sb) = (libm::cos(self.beta), libm::sin(self.beta));
        let mf = m as f64;
        let half_cos = libm::cos(0.5 * th);
        let (sin1, yy) = if m >= 2 {
            (
                libm::sin(0.5 * th) * libm::pow(half_cos, mf - 2.0),
                0.5 * (1.0 - libm::pow(libm::cos(th), mf - 2.0)),
            )
        } else {
            (0.0, 0.0)
        };
        let c2 = s2 + (s1 * s1 - s2) * (2.0 * cb * sb * sin1 + sb * sb * yy);
        let u = 0.5 * s1 * (cb + sb * (mf - 1.0) * sin1);
        let v = 0.5 * s1 * sb * libm::pow(half_cos, mf - 1.0);
        let re = -th * th * mf * (p - q) * (p - q) / 32.0 - 0.5 * c2 + 0.5 * th * (q - p) * u;
        let im = 0.5 * th * (p + q) * v;
        c(re, im)
    }

    /// `e^{-chi_nn/2} <sigma^-_n e^{i sum c z}>` for one qubit.
    fn single(&self, chi_nn: f64, s1: f64, s2: f64) -> Complex64 {
        let mut g = c(0.0, 0.0);
        for (ip, &p) in SPINS.iter().enumerate() {
            for (iq, &q) in SPINS.iter().enumerate() {
                let m = self.minus[ip][iq];
                if m.norm_sqr() == 0.0 {
                    continue;
                }
                g += m * self.log_e(p, q, self.n - 1, s1, s2).exp();
            }
        }
        g * (0.5 * libm::exp(-0.5 * chi_nn))
    }

    /// `<sigma^a_n sigma^b_m e^{i sum c z}>` for a pair, without noise weights.
    fn pair(&self, ea: f64, eb: f64, s1: f64, s2: f64) -> Complex64 {
        let (oa, ob) = (self.op(ea), self.op(eb));
        let th = self.theta;
        let mut h = c(0.0, 0.0);
        for (ip, &p) in SPINS.iter().enumerate() {
            for (iq, &q) in SPINS.iter().enumerate() {
                let a = oa[ip][iq];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for (ir, &r) in SPINS.iter().enumerate() {
                    for (iw, &w) in SPINS.iter().enumerate() {
                        let bv = ob[ir][iw];
                        if bv.norm_sqr() == 0.0 {
                            continue;
                        }
                        let (pp, qq) = (p + r, q + w);
                        let twist = Complex64::from_polar(1.0, th * (pp * pp - qq * qq) / 8.0);
                        h += twist * a * bv * self.log_e(pp, qq, self.n - 2, s1, s2).exp();
                    }
                }
            }
        }
        h * 0.25
    }
}

/// Phase sums over spectators for each sign pair `(eps_a, eps_b)` in the
/// order `(+,+), (+,-), (-,+), (-,-)`.
type PairSums = [(f64, f64); 4];

const SIGNS: [(f64, f64); 4] = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];

/// Sum over `(eps_a, eps_b)` of `-eps_a eps_b e^{i(eps_a+eps_b) bt}
/// e^{-(chi_nn+chi_mm)/2 - eps_a eps_b chi_nm} H_ab`; the real part is the
/// ordered-pair contribution to `4 <J_y^2> - N`.
fn pair_contribution(ctx: &Context, bt: f64, chi_nn: f64, chi_mm: f64, chi_nm: f64, sums: &PairSums) -> f64 {
    let mut tot = c(0.0, 0.0);
    for (k, &(ea, eb)) in SIGNS.iter().enumerate() {
        let (s1, s2) = sums[k];
        let h = ctx.pair(ea, eb, s1, s2);
        let w = libm::exp(-0.5 * (chi_nn + chi_mm) - ea * eb * chi_nm);
        tot += Complex64::from_polar(-ea * eb * w, (ea + eb) * bt) * h;
    }
    tot.re
}

/// Accumulates `<J_y>` and its `b` derivative from a single-qubit term with
/// multiplicity `count`.
fn add_single(acc: &mut MomentPair, g: Complex64, bt: f64, t: f64, count: f64) {
    let w = Complex64::from_polar(1.0, -bt) * g;
    acc.jy_mean += -count * w.im;
    acc.d_jy_mean_db += -count * (c(0.0, -t) * w).im;
}

fn check(n: usize, theta: f64, beta: f64, t: f64) -> Result<()> {
    if n < 4 {
        return Err(Error::InvalidInput("cumulant moments need N >= 4"));
    }
    if !(theta.is_finite() && beta.is_finite() && t >= 0.0) {
        return Err(Error::InvalidInput("angles and time must be finite, time non-negative"));
    }
    Ok(())
}

/// Moments for arbitrary `chi`, `Psi` matrices, `O(N^3)` for the Gram matrix
/// of `Psi` and `O(N^2)` over pairs.
pub fn oats_moments(chi: &DMatrix<f64>, psi: &DMatrix<f64>, theta: f64, beta: f64, b: f64, t: f64) -> Result<MomentPair> {
    let n = chi.nrows();
    if chi.ncols() != n || psi.nrows() != n || psi.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: psi.nrows() });
    }
    check(n, theta, beta, t)?;
    let ctx = Context::new(n, theta, beta);
    let bt = b * t;
    let mut off = psi.clone();
    off.fill_diagonal(0.0);
    let row: alloc::vec::Vec<f64> = (0..n).map(|i| off.row(i).sum()).collect();
    let sq: alloc::vec::Vec<f64> = (0..n).map(|i| off.row(i).iter().map(|v| v * v).sum()).collect();
    let gram = &off * &off;

    let mut acc = MomentPair { jy_mean: 0.0, jy2_mean: 0.0, d_jy_mean_db: 0.0 };
    for i in 0..n {
        let g = ctx.single(chi[(i, i)], -row[i], sq[i]);
        add_single(&mut acc, g, bt, t, 1.0);
    }
    let mut pairs = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let p = off[(i, j)];
            let (ri, rj) = (row[i] - p, row[j] - p);
            let q = sq[i] + sq[j] - 2.0 * p * p;
            let mut sums = [(0.0, 0.0); 4];
            for (k, &(ea, eb)) in SIGNS.iter().enumerate() {
                sums[k] = (ea * ri + eb * rj, q + 2.0 * ea * eb * gram[(i, j)]);
            }
            pairs += pair_contribution(&ctx, bt, chi[(i, i)], chi[(j, j)], 0.5 * (chi[(i, j)] + chi[(j, i)]), &sums);
        }
    }
    acc.jy2_mean = 0.25 * n as f64 + 0.25 * pairs;
    Ok(acc)
}

/// Moments for collective noise: every entry of `chi` equals `chi`, every
/// entry of `Psi` equals `psi`.
pub fn oats_moments_collective(n: usize, chi: f64, psi: f64, theta: f64, beta: f64, b: f64, t: f64) -> Result<MomentPair> {
    check(n, theta, beta, t)?;
    let ctx = Context::new(n, theta, beta);
    let bt = b * t;
    let nf = n as f64;
    let mut acc = MomentPair { jy_mean: 0.0, jy2_mean: 0.0, d_jy_mean_db: 0.0 };
    let g = ctx.single(chi, -(nf - 1.0) * psi, (nf - 1.0) * psi * psi);
    add_single(&mut acc, g, bt, t, nf);
    let mut sums = [(0.0, 0.0); 4];
    for (k, &(ea, eb)) in SIGNS.iter().enumerate() {
        let cl = (ea + eb) * psi;
        sums[k] = ((nf - 2.0) * cl, (nf - 2.0) * cl * cl);
    }
    let pairs = nf * (nf - 1.0) * pair_contribution(&ctx, bt, chi, chi, chi, &sums);
    acc.jy2_mean = 0.25 * nf + 0.25 * pairs;
    Ok(acc)
}

/// Moments for two equal clusters with intra-cluster `(chi_s, psi_s)` and
/// inter-cluster `(chi_d, psi_d)`.
#[allow(clippy::too_many_arguments)]
pub fn oats_moments_even_odd(
    n: usize,
    chi_s: f64,
    psi_s: f64,
    chi_d: f64,
    psi_d: f64,
    theta: f64,
    beta: f64,
    b: f64,
    t: f64,
) -> Result<MomentPair> {
    check(n, theta, beta, t)?;
    if n % 2 != 0 {
        return Err(Error::InvalidInput("even-odd regime needs an even qubit number"));
    }
    let ctx = Context::new(n, theta, beta);
    let bt = b * t;
    let nf = n as f64;
    let j = 0.5 * nf;
    let mut acc = MomentPair { jy_mean: 0.0, jy2_mean: 0.0, d_jy_mean_db: 0.0 };
    let s1 = -((j - 1.0) * psi_s + j * psi_d);
    let s2 = (j - 1.0) * psi_s * psi_s + j * psi_d * psi_d;
    add_single(&mut acc, ctx.single(chi_s, s1, s2), bt, t, nf);

    let mut same = [(0.0, 0.0); 4];
    let mut cross = [(0.0, 0.0); 4];
    for (k, &(ea, eb)) in SIGNS.iter().enumerate() {
        let (cs, cd) = ((ea + eb) * psi_s, (ea + eb) * psi_d);
        same[k] = ((j - 2.0) * cs + j * cd, (j - 2.0) * cs * cs + j * cd * cd);
        let (u, w) = (ea * psi_s + eb * psi_d, ea * psi_d + eb * psi_s);
        cross[k] = ((j - 1.0) * (u + w), (j - 1.0) * (u * u + w * w));
    }
    let pairs = nf * (j - 1.0) * pair_contribution(&ctx, bt, chi_s, chi_s, chi_s, &same)
        + nf * j * pair_contribution(&ctx, bt, chi_s, chi_s, chi_d, &cross);
    acc.jy2_mean = 0.25 * nf + 0.25 * pairs;
    Ok(acc)
}
