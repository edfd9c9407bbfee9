//! Post-processing shared by the subcommands and the acceptance harness:
//! concurrence dips, optimum sweeps and power-law fits.

use rayon::prelude::*;

use ramsey_core::coefficients::PairEvaluator;
use ramsey_core::dynamics::{concurrence, reduced_two_qubit_state};
use ramsey_core::estimation::{css_collective, optimize_time, ProtocolConfig, ProtocolState};
use ramsey_core::noise::SpectralModel;
use ramsey_core::numerics::{fit_power_law, golden_section, PowerLawFit};
use ramsey_core::randomized::{ghz_reference_optimum, oats_reference_optimum};
use ramsey_core::Result;

/// Collective CSS precision with and without the phase `Psi`, and the
/// two-qubit concurrence, on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcurrenceCurves {
    pub times: Vec<f64>,
    pub delta_b: Vec<f64>,
    pub delta_b_nqn: Vec<f64>,
    pub concurrence: Vec<f64>,
}

struct Point {
    db: f64,
    nqn: f64,
    c: f64,
}

fn point(eval: &PairEvaluator, n: usize, total_time: f64, t: f64) -> Result<Point> {
    let p = eval.pair(eval.model.omega_c * t, 0.0)?;
    let (chi, psi) = (4.0 * p.kappa, 4.0 * p.xi);
    Ok(Point {
        db: css_collective(n, total_time, t, chi, psi),
        nqn: css_collective(n, total_time, t, chi, 0.0),
        c: concurrence(&reduced_two_qubit_state(n, p.kappa, p.xi, 0.0)?),
    })
}

pub fn concurrence_curves(model: &SpectralModel, n: usize, total_time: f64, times: &[f64]) -> Result<ConcurrenceCurves> {
    let eval = PairEvaluator::new(*model);
    let pts = times.par_iter().map(|&t| point(&eval, n, total_time, t)).collect::<Result<Vec<_>>>()?;
    Ok(ConcurrenceCurves {
        times: times.to_vec(),
        delta_b: pts.iter().map(|p| p.db).collect(),
        delta_b_nqn: pts.iter().map(|p| p.nqn).collect(),
        concurrence: pts.iter().map(|p| p.c).collect(),
    })
}

/// One concurrence zero with the nearest precision minimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dip {
    pub t_zero: f64,
    pub t_min: f64,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DipReport {
    /// Interior local minima of the precision curve.
    pub minima: Vec<f64>,
    /// Isolated zeros of the concurrence between two entangled stretches.
    pub zeros: Vec<f64>,
    pub dips: Vec<Dip>,
}

impl DipReport {
    /// Offsets shrink from each dip to the next.
    pub fn offsets_decrease(&self) -> bool {
        self.dips.windows(2).all(|w| w[1].offset < w[0].offset)
    }
}

/// Refines every interior grid minimum of `f` by golden section.
fn refine_minima<F: Fn(f64) -> f64>(times: &[f64], values: &[f64], f: F, accept: impl Fn(usize, f64) -> bool) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 1..values.len().saturating_sub(1) {
        let (a, b, c) = (values[i - 1], values[i], values[i + 1]);
        if b.is_finite() && b < a && b <= c {
            let (x, v) = golden_section(&f, times[i - 1], times[i + 1], 1e-10);
            if accept(i, v) {
                out.push(x);
            }
        }
    }
    out
}

/// Half-width (in time) of the neighbourhood searched for entanglement on
/// each side of a candidate concurrence zero.
pub const ZERO_NEIGHBOURHOOD: f64 = 0.1;

/// Finds precision minima and concurrence zeros on the curve grid.
///
/// A concurrence zero is an interior local minimum of `C` with significant
/// entanglement on both sides: within `ZERO_NEIGHBOURHOOD` each side must
/// reach `1e-6` of the global maximum and exceed the refined minimum by a
/// factor `1e3`. Roundoff ripples where `C` vanishes identically fail this.
pub fn concurrence_dips(model: &SpectralModel, n: usize, total_time: f64, curves: &ConcurrenceCurves) -> Result<DipReport> {
    let eval = PairEvaluator::new(*model);
    let db = |t: f64| point(&eval, n, total_time, t).map(|p| p.db).unwrap_or(f64::INFINITY);
    let cc = |t: f64| point(&eval, n, total_time, t).map(|p| p.c).unwrap_or(f64::INFINITY);
    let minima = refine_minima(&curves.times, &curves.delta_b, db, |_, _| true);
    let (times, c) = (&curves.times, &curves.concurrence);
    let floor = 1e-6 * c.iter().cloned().fold(0.0, f64::max);
    let side_peak = |i: usize, left: bool| {
        let t0 = times[i];
        let idx: Vec<usize> = if left { (0..i).rev().collect() } else { (i + 1..c.len()).collect() };
        idx.into_iter().take_while(|&j| (times[j] - t0).abs() <= ZERO_NEIGHBOURHOOD).map(|j| c[j]).fold(0.0, f64::max)
    };
    let zeros = refine_minima(times, c, cc, |i, v| {
        let (l, r) = (side_peak(i, true), side_peak(i, false));
        l.min(r) >= floor && v.max(0.0) * 1e3 <= l.min(r)
    });
    let dips = zeros
        .iter()
        .filter_map(|&z| {
            minima
                .iter()
                .map(|&m| (m, (m - z).abs()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .map(|(m, d)| Dip { t_zero: z, t_min: m, offset: d })
        })
        .collect();
    Ok(DipReport { minima, zeros, dips })
}

/// Optimum of one sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Optimum {
    pub value: f64,
    pub tau_opt: f64,
    pub delta_b_opt: f64,
    pub at_boundary: bool,
}

/// Time-optimized precision of a CSS or OATS protocol.
pub fn protocol_optimum(config: &ProtocolConfig, window: (f64, f64), points: usize) -> Result<(f64, f64, bool)> {
    let c = optimize_time(config, window, points)?;
    Ok((c.tau_opt, c.delta_b_opt, c.at_boundary))
}

/// Optimum of the spatially uncorrelated randomized-coupling curve.
pub fn reference_optimum(config: &ProtocolConfig, window: (f64, f64)) -> Result<(f64, f64, bool)> {
    let c = match config.state {
        ProtocolState::Ghz => ghz_reference_optimum(config.n, config.total_time, &config.model, window)?,
        ProtocolState::Oats { theta, beta } => {
            oats_reference_optimum(config.n, config.total_time, theta, beta, &config.model, window)?
        }
        ProtocolState::Css => {
            return Err(ramsey_core::Error::Unsupported("the randomized reference curve exists for GHZ and OATS only"))
        }
    };
    Ok((c.tau_opt, c.delta_b_opt, c.at_boundary))
}

/// Power-law fits of `tau_opt` and `delta_b_opt` against the swept value.
pub fn fit_optima(optima: &[Optimum]) -> Result<(PowerLawFit, PowerLawFit)> {
    let tau: Vec<(f64, f64)> = optima.iter().map(|o| (o.value, o.tau_opt)).collect();
    let db: Vec<(f64, f64)> = optima.iter().map(|o| (o.value, o.delta_b_opt)).collect();
    Ok((fit_power_law(&tau)?, fit_power_law(&db)?))
}
