//! Subcommand implementations. Each returns a table plus manifest extras;
//! writing files is left to the caller.

use std::fmt;

use rayon::prelude::*;
use serde_json::{json, Value};

use ramsey_core::coefficients::{PairEvaluator, TransitGeometry};
use ramsey_core::dynamics::{qni_enumerate, QniRegime};
use ramsey_core::estimation::{
    css_from_parameters, noise_parameters, uncertainty, NoiseParameters, ProtocolConfig, ProtocolState,
};
use ramsey_core::numerics::grid;
use ramsey_core::randomized::{
    finish_ghz, finish_oats, ghz_layout_samples, oats_layout_samples, sample_layout, validity_check, RcConfig, RcCurves,
};
use ramsey_core::Error;

use crate::analysis::{concurrence_curves, concurrence_dips, fit_optima, protocol_optimum, reference_optimum, Optimum};
use crate::checks::run_checks;
use crate::output::{Cell, RunOutput, Table};
use crate::scenario::{CutoffKind, RegimeKind, Scenario, StateKind, UsageError};

#[derive(Debug, Clone, PartialEq)]
pub enum RunError {
    Usage(UsageError),
    Numeric(Error),
    /// The run finished but a check failed.
    Failed(String),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Usage(e) => write!(f, "usage error: {e}"),
            RunError::Numeric(e) => write!(f, "numerical failure: {e}"),
            RunError::Failed(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<UsageError> for RunError {
    fn from(e: UsageError) -> Self {
        RunError::Usage(e)
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Numeric(e)
    }
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Usage(_) => 1,
            RunError::Numeric(_) | RunError::Failed(_) => 2,
        }
    }
}

pub type RunResult = Result<RunOutput, RunError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Coeffs,
    Css,
    Oats,
    GhzRc,
    OatsRc,
    Concurrence,
    Qni,
    Sweep,
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Coeffs => "coeffs",
            Command::Css => "css",
            Command::Oats => "oats",
            Command::GhzRc => "ghz-rc",
            Command::OatsRc => "oats-rc",
            Command::Concurrence => "concurrence",
            Command::Qni => "qni",
            Command::Sweep => "sweep",
            Command::Validate => "validate",
        }
    }

    fn default_cutoff(self, sc: &Scenario) -> CutoffKind {
        match self {
            Command::GhzRc | Command::OatsRc => CutoffKind::Gauss,
            Command::Sweep if sc.regime == RegimeKind::Rc => CutoffKind::Gauss,
            _ => CutoffKind::Exp,
        }
    }

    /// Resolves defaults that depend on the subcommand so the manifest holds
    /// the complete configuration.
    pub fn resolve(self, mut sc: Scenario) -> Result<Scenario, UsageError> {
        sc.cutoff = Some(self.default_cutoff(&sc));
        match self {
            Command::GhzRc => sc.state = StateKind::Ghz,
            Command::OatsRc => sc.state = StateKind::Oats,
            Command::Css => sc.state = StateKind::Css,
            Command::Oats => sc.state = StateKind::Oats,
            Command::Concurrence => {
                sc.state = StateKind::Css;
                sc.regime = RegimeKind::Collective;
            }
            _ => {}
        }
        if matches!(self, Command::GhzRc | Command::OatsRc) {
            sc.regime = RegimeKind::Rc;
            let eta = sc.eta_value()?;
            sc.eta = Some(eta);
            sc.epsilon = Some(1.0 / eta);
        }
        if sc.state == StateKind::Oats && sc.theta.is_none() && sc.beta.is_none() && sc.sweep_n.is_none() {
            let (t, b) = sc.angles()?;
            sc.theta = Some(t);
            sc.beta = Some(b);
        }
        Ok(sc)
    }

    pub fn run(self, sc: &Scenario, fit: bool) -> RunResult {
        sc.check()?;
        let cutoff = self.default_cutoff(sc);
        match self {
            Command::Coeffs => coeffs(sc, cutoff),
            Command::Css | Command::Oats => match sc.sweep_axis()? {
                Some((axis, values)) => sweep(sc, cutoff, axis, &values, fit),
                None => curve(sc, cutoff),
            },
            Command::GhzRc | Command::OatsRc => rc_curve(sc, cutoff),
            Command::Concurrence => concurrence(sc, cutoff),
            Command::Qni => qni(sc),
            Command::Sweep => match sc.sweep_axis()? {
                Some((axis, values)) => sweep(sc, cutoff, axis, &values, fit),
                None => Err(UsageError("sweep needs one of --sweep-N, --sweep-x, --sweep-eta".into()).into()),
            },
            Command::Validate => validate(),
        }
    }
}

fn log_times(sc: &Scenario, lo: f64, hi: f64, points: usize) -> Result<Vec<f64>, UsageError> {
    let (lo, hi, n) = sc.window(lo, hi, points)?;
    Ok(grid(lo, hi, n, true))
}

fn coeffs(sc: &Scenario, cutoff: CutoffKind) -> RunResult {
    let model = sc.model(cutoff)?;
    let x = match sc.regime {
        RegimeKind::Collective => 0.0,
        RegimeKind::EvenOdd => sc.x,
        _ => return Err(UsageError("coeffs supports the collective and even-odd regimes".into()).into()),
    };
    let times = log_times(sc, 1e-3, 10.0, 200)?;
    let eval = PairEvaluator::new(model);
    let rows = times
        .par_iter()
        .map(|&t| {
            let tau = model.omega_c * t;
            let s = eval.pair(tau, 0.0)?;
            let d = eval.pair(tau, x)?;
            Ok(vec![t.into(), x.into(), s.kappa.into(), s.xi.into(), d.kappa.into(), d.xi.into()])
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let mut table = Table::new(&["t", "x", "kappa_self", "xi_self", "kappa_cross", "xi_cross"]);
    table.rows = rows;
    Ok(RunOutput { table, ..Default::default() })
}

fn without_phase(p: NoiseParameters) -> NoiseParameters {
    match p {
        NoiseParameters::Collective { chi, .. } => NoiseParameters::Collective { chi, psi: 0.0 },
        NoiseParameters::EvenOdd { chi_s, chi_d, .. } => NoiseParameters::EvenOdd { chi_s, psi_s: 0.0, chi_d, psi_d: 0.0 },
        NoiseParameters::Matrices { chi, psi } => {
            let z = psi * 0.0;
            NoiseParameters::Matrices { chi, psi: z }
        }
    }
}

fn curve(sc: &Scenario, cutoff: CutoffKind) -> RunResult {
    let config = sc.protocol(cutoff)?;
    let times = log_times(sc, 1e-3, 10.0, 200)?;
    let sqrt_t = config.total_time.sqrt();
    let eval = PairEvaluator::new(config.model);
    let mut table;
    if config.state == ProtocolState::Css {
        table = Table::new(&["t", "delta_b_sqrt_t", "delta_b_nqn_sqrt_t"]);
        table.rows = times
            .par_iter()
            .map(|&t| {
                let p = noise_parameters(&eval, &config.geometry, t)?;
                let db = css_from_parameters(config.n, config.total_time, t, &p)?;
                let nqn = css_from_parameters(config.n, config.total_time, t, &without_phase(p))?;
                Ok(vec![t.into(), (db * sqrt_t).into(), (nqn * sqrt_t).into()])
            })
            .collect::<Result<Vec<_>, Error>>()?;
    } else {
        table = Table::new(&["t", "delta_b_sqrt_t"]);
        table.rows = times
            .par_iter()
            .map(|&t| Ok(vec![t.into(), (uncertainty(&config, t)? * sqrt_t).into()]))
            .collect::<Result<Vec<_>, Error>>()?;
    }
    let db: Vec<f64> = table.rows.iter().map(|r| if let Cell::Float(v) = r[1] { v } else { f64::NAN }).collect();
    let (i, best) = db.iter().enumerate().fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    let mut warnings = Vec::new();
    if i == 0 || i + 1 == db.len() {
        warnings.push(format!("grid minimum at the window edge (t = {})", times[i]));
    }
    let results = json!({ "grid_minimum": { "t": times[i], "delta_b_sqrt_t": best } });
    Ok(RunOutput { table, results, warnings })
}

fn rc_curve(sc: &Scenario, cutoff: CutoffKind) -> RunResult {
    let config = sc.protocol(cutoff)?;
    let rc = sc.rc(&config.model)?;
    let times = log_times(sc, 1e-3, 3.0, 80)?;
    let curves = rc_curves(&config, &rc, &times)?;
    let sqrt_t = config.total_time.sqrt();
    let mut table = Table::new(&["t", "delta_b_sqrt_t", "dispersion_sqrt_t", "reference_sqrt_t", "valid"]);
    let disp = curves.sampled.dispersion.clone().unwrap_or_default();
    for (j, &t) in times.iter().enumerate() {
        let v = validity_check(&rc, config.n, t, &config.model);
        table.push(vec![
            t.into(),
            (curves.sampled.delta_b[j] * sqrt_t).into(),
            (disp[j] * sqrt_t).into(),
            (curves.reference.delta_b[j] * sqrt_t).into(),
            v.valid.into(),
        ]);
    }
    let mut warnings = Vec::new();
    for (name, c) in [("sampled", &curves.sampled), ("reference", &curves.reference)] {
        if c.at_boundary {
            warnings.push(format!("{name} minimum on the window edge (t = {})", c.tau_opt));
        }
    }
    let results = json!({
        "sampled": { "tau_opt": curves.sampled.tau_opt, "delta_b_opt_sqrt_t": curves.sampled.delta_b_opt * sqrt_t },
        "reference": { "tau_opt": curves.reference.tau_opt, "delta_b_opt_sqrt_t": curves.reference.delta_b_opt * sqrt_t },
        "eta": rc.eta,
        "epsilon": rc.epsilon,
    });
    Ok(RunOutput { table, results, warnings })
}

/// Randomized-coupling curves with layouts evaluated in parallel.
pub fn rc_curves(config: &ProtocolConfig, rc: &RcConfig, times: &[f64]) -> Result<RcCurves, Error> {
    let layouts: Vec<TransitGeometry> = (0..rc.k as u64).map(|i| sample_layout(config.n, rc, i)).collect();
    let eval = PairEvaluator::new(config.model);
    match config.state {
        ProtocolState::Ghz => {
            let y = layouts.par_iter().map(|l| ghz_layout_samples(&eval, l, times)).collect::<Result<Vec<_>, _>>()?;
            finish_ghz(config, &layouts, times, &y)
        }
        ProtocolState::Oats { theta, beta } => {
            let s = layouts
                .par_iter()
                .map(|l| oats_layout_samples(&eval, l, theta, beta, config.b, times))
                .collect::<Result<Vec<_>, _>>()?;
            finish_oats(config, &layouts, times, &s)
        }
        ProtocolState::Css => Err(Error::Unsupported("randomized curves exist for GHZ and OATS only")),
    }
}

fn concurrence(sc: &Scenario, cutoff: CutoffKind) -> RunResult {
    let model = sc.model(cutoff)?;
    let (lo, hi, n) = sc.window(0.01, 10.0, 5000)?;
    let times = grid(lo, hi, n, false);
    let c = concurrence_curves(&model, sc.n, sc.total_time, &times)?;
    let sqrt_t = sc.total_time.sqrt();
    let mut table = Table::new(&["t", "delta_b_sqrt_t", "delta_b_nqn_sqrt_t", "concurrence"]);
    for j in 0..times.len() {
        table.push(vec![
            times[j].into(),
            (c.delta_b[j] * sqrt_t).into(),
            (c.delta_b_nqn[j] * sqrt_t).into(),
            c.concurrence[j].into(),
        ]);
    }
    let dips = concurrence_dips(&model, sc.n, sc.total_time, &c)?;
    let results = json!({
        "precision_minima": dips.minima,
        "concurrence_zeros": dips.zeros,
        "offsets": dips.dips.iter().map(|d| d.offset).collect::<Vec<_>>(),
        "offsets_decrease": dips.offsets_decrease(),
    });
    Ok(RunOutput { table, results, warnings: Vec::new() })
}

fn qni(sc: &Scenario) -> RunResult {
    let (regime, label) = match sc.regime {
        RegimeKind::General => (QniRegime::General, "general"),
        RegimeKind::Collective => (QniRegime::Collective, "collective"),
        RegimeKind::EvenOdd => (QniRegime::EvenOdd, "even_odd"),
        RegimeKind::Rc => return Err(UsageError("qni supports general, collective and even-odd".into()).into()),
    };
    let ns: Vec<usize> = match &sc.sweep_n {
        Some(a) => a.values()?.iter().map(|&v| v as usize).collect(),
        None => vec![sc.n],
    };
    let mut table = Table::new(&["regime", "N", "enumerated", "formula"]);
    let mut mismatches = Vec::new();
    for n in ns {
        let c = qni_enumerate(regime, n)?;
        let e = c.enumerated.map(Cell::from).unwrap_or(Cell::Text(String::new()));
        if let Some(v) = c.enumerated {
            if v != c.formula {
                mismatches.push(json!({ "N": n, "enumerated": v, "formula": c.formula }));
            }
        }
        table.push(vec![label.into(), n.into(), e, c.formula.into()]);
    }
    let warnings = if mismatches.is_empty() {
        Vec::new()
    } else {
        vec![format!("{label}: enumeration differs from the closed formula; enumeration is ground truth")]
    };
    Ok(RunOutput { table, results: json!({ "mismatches": mismatches }), warnings })
}

fn with_axis(sc: &Scenario, axis: &str, v: f64) -> Result<Scenario, UsageError> {
    let mut s = sc.clone();
    s.sweep_n = None;
    s.sweep_x = None;
    s.sweep_eta = None;
    match axis {
        "N" => {
            if v < 2.0 || v.fract() != 0.0 {
                return Err(UsageError(format!("sweep value N = {v} is not an integer >= 2")));
            }
            s.n = v as usize;
        }
        "x" => s.x = v,
        "eta" => {
            s.eta = Some(v);
            s.epsilon = None;
        }
        _ => unreachable!("axis names are fixed"),
    }
    Ok(s)
}

fn sweep_point(sc: &Scenario, cutoff: CutoffKind, axis: &str, v: f64) -> Result<Optimum, RunError> {
    let s = with_axis(sc, axis, v)?;
    let config = s.protocol(cutoff)?;
    let (lo, hi, n) = s.window(1e-4, 10.0, 200)?;
    let (tau, db, edge) = if s.regime == RegimeKind::Rc {
        if axis == "eta" {
            let rc = s.rc(&config.model)?;
            let c = rc_curves(&config, &rc, &grid(lo, hi, n, true))?.sampled;
            (c.tau_opt, c.delta_b_opt, c.at_boundary)
        } else {
            reference_optimum(&config, (lo, hi))?
        }
    } else {
        if axis == "eta" {
            return Err(UsageError("an eta sweep needs --regime rc".into()).into());
        }
        protocol_optimum(&config, (lo, hi), n)?
    };
    Ok(Optimum { value: v, tau_opt: tau, delta_b_opt: db * s.total_time.sqrt(), at_boundary: edge })
}

fn sweep(sc: &Scenario, cutoff: CutoffKind, axis: &'static str, values: &[f64], fit: bool) -> RunResult {
    if axis == "x" && sc.regime != RegimeKind::EvenOdd {
        return Err(UsageError("an x sweep needs --regime even-odd".into()).into());
    }
    let optima = values.par_iter().map(|&v| sweep_point(sc, cutoff, axis, v)).collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(&[axis, "tau_opt", "delta_b_opt_sqrt_t", "at_boundary"]);
    let mut warnings = Vec::new();
    for o in &optima {
        table.push(vec![o.value.into(), o.tau_opt.into(), o.delta_b_opt.into(), o.at_boundary.into()]);
        if o.at_boundary {
            warnings.push(format!("boundary minimum at {axis} = {}", o.value));
        }
    }
    let best = optima.iter().min_by(|a, b| a.delta_b_opt.total_cmp(&b.delta_b_opt)).copied();
    let mut results = json!({ "argmin": best.map(|b| json!({ axis: b.value, "tau_opt": b.tau_opt, "delta_b_opt_sqrt_t": b.delta_b_opt })) });
    if fit {
        let (tau, db) = fit_optima(&optima)?;
        let pack = |f: ramsey_core::numerics::PowerLawFit| json!({ "exponent": f.exponent, "prefactor": f.prefactor, "r_squared": f.r_squared });
        results["fit"] = json!({ "axis": axis, "tau_opt": pack(tau), "delta_b_opt_sqrt_t": pack(db) });
    }
    Ok(RunOutput { table, results, warnings })
}

fn validate() -> RunResult {
    let checks = run_checks()?;
    let mut table = Table::new(&["check", "value", "tolerance", "pass"]);
    let mut failed = Vec::new();
    for c in &checks {
        table.push(vec![c.name.into(), c.value.into(), c.tolerance.into(), c.pass.into()]);
        if !c.pass {
            failed.push(c.name);
        }
    }
    let warnings = failed.iter().map(|f| format!("check failed: {f}")).collect();
    Ok(RunOutput { table, results: Value::Null, warnings })
}
