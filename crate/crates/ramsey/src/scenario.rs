//! Run configuration: JSON file keys, flag overrides and resolution into
//! core types.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use ramsey_core::coefficients::TransitGeometry;
use ramsey_core::estimation::{optimal_angles, ProtocolConfig, ProtocolState};
use ramsey_core::noise::{Cutoff, SpectralModel};
use ramsey_core::randomized::RcConfig;

/// Configuration or usage problem; maps to exit code 1.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage<T>(msg: impl Into<String>) -> Result<T, UsageError> {
    Err(UsageError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Css,
    Oats,
    Ghz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegimeKind {
    #[serde(rename = "collective")]
    Collective,
    #[serde(rename = "even-odd")]
    EvenOdd,
    /// Randomized coupling; `sweep` uses the uncorrelated reference curve.
    #[serde(rename = "rc")]
    Rc,
    /// Arbitrary positions; only meaningful for QNI counting.
    #[serde(rename = "general")]
    General,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CutoffKind {
    Exp,
    Gauss,
}

/// Sweep over `lo:hi:count` (linear) or an explicit comma list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    List(Vec<f64>),
    Range(String),
}

impl Axis {
    pub fn values(&self) -> Result<Vec<f64>, UsageError> {
        match self {
            Axis::List(v) => {
                if v.is_empty() {
                    return usage("sweep axis is empty");
                }
                Ok(v.clone())
            }
            Axis::Range(s) => parse_axis(s),
        }
    }
}

/// `lo:hi:count` gives a linear grid, anything else a comma list.
pub fn parse_axis(s: &str) -> Result<Vec<f64>, UsageError> {
    let num = |p: &str| p.trim().parse::<f64>().map_err(|_| UsageError(format!("bad number '{p}' in axis '{s}'")));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let (lo, hi) = (num(parts[0])?, num(parts[1])?);
        let n: usize = parts[2].trim().parse().map_err(|_| UsageError(format!("bad count in axis '{s}'")))?;
        if n < 2 {
            return usage("axis range needs at least 2 points");
        }
        return Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect());
    }
    if parts.len() != 1 {
        return usage(format!("axis '{s}' is neither lo:hi:count nor a list"));
    }
    let v = s.split(',').map(num).collect::<Result<Vec<_>, _>>()?;
    if v.is_empty() {
        return usage("sweep axis is empty");
    }
    Ok(v)
}

/// Every configurable value; JSON keys match the config file format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "T")]
    pub total_time: f64,
    pub b: f64,
    pub state: StateKind,
    pub theta: Option<f64>,
    pub beta: Option<f64>,
    pub regime: RegimeKind,
    pub x: f64,
    pub s: f64,
    pub alpha: f64,
    pub cutoff: Option<CutoffKind>,
    /// Inverse temperature; absent means zero temperature.
    pub beta_temp: Option<f64>,
    pub dimension: u8,
    pub eta: Option<f64>,
    pub epsilon: Option<f64>,
    #[serde(rename = "K")]
    pub k: usize,
    pub seed: u64,
    pub t_lo: Option<f64>,
    pub t_hi: Option<f64>,
    pub grid: Option<usize>,
    pub out: Option<String>,
    pub sweep_n: Option<Axis>,
    pub sweep_x: Option<Axis>,
    pub sweep_eta: Option<Axis>,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            n: 100,
            total_time: 1.0,
            b: 0.0,
            state: StateKind::Css,
            theta: None,
            beta: None,
            regime: RegimeKind::Collective,
            x: 1.0,
            s: 3.0,
            alpha: 1.0,
            cutoff: None,
            beta_temp: None,
            dimension: 1,
            eta: None,
            epsilon: None,
            k: 20,
            seed: 0,
            t_lo: None,
            t_hi: None,
            grid: None,
            out: None,
            sweep_n: None,
            sweep_x: None,
            sweep_eta: None,
        }
    }
}

/// Manifests embed the scenario under `config`; both shapes load.
#[derive(Deserialize)]
struct Wrapped {
    config: Scenario,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, UsageError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| UsageError(format!("malformed config: {e}")))?;
        let parsed = if value.get("config").is_some() {
            serde_json::from_value::<Wrapped>(value).map(|w| w.config)
        } else {
            serde_json::from_value::<Scenario>(value)
        };
        parsed.map_err(|e| UsageError(format!("malformed config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, UsageError> {
        let text = std::fs::read_to_string(path).map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Cutoff, defaulting to exponential for the deterministic figures and
    /// Gaussian for the randomized ones.
    pub fn cutoff_or(&self, default: CutoffKind) -> CutoffKind {
        self.cutoff.unwrap_or(default)
    }

    pub fn model(&self, default_cutoff: CutoffKind) -> Result<SpectralModel, UsageError> {
        let cutoff = match self.cutoff_or(default_cutoff) {
            CutoffKind::Exp => Cutoff::Exponential,
            CutoffKind::Gauss => Cutoff::Gaussian,
        };
        let mut m = SpectralModel::new(self.alpha, self.s, cutoff);
        m.dimension = self.dimension;
        if let Some(bt) = self.beta_temp {
            m.inv_temperature = bt;
        }
        m.validate().map_err(|e| UsageError(format!("invalid bath: {e}")))?;
        Ok(m)
    }

    pub fn geometry(&self) -> Result<TransitGeometry, UsageError> {
        match self.regime {
            RegimeKind::Collective => Ok(TransitGeometry::collective(self.n)),
            RegimeKind::EvenOdd => {
                if self.n % 2 != 0 {
                    return usage("even-odd regime needs an even N");
                }
                if !(self.x >= 0.0) {
                    return usage("transit time x must be non-negative");
                }
                Ok(TransitGeometry::even_odd(self.n, self.x))
            }
            RegimeKind::Rc | RegimeKind::General => usage("this regime has no fixed geometry here"),
        }
    }

    /// OATS angles, defaulting to the optimum for `N`.
    pub fn angles(&self) -> Result<(f64, f64), UsageError> {
        match (self.theta, self.beta) {
            (Some(t), Some(b)) => Ok((t, b)),
            (None, None) => {
                let a = optimal_angles(self.n).map_err(|e| UsageError(format!("angle optimization: {e}")))?;
                Ok((a.theta_opt, a.beta_opt))
            }
            _ => usage("give both theta and beta or neither"),
        }
    }

    pub fn protocol(&self, default_cutoff: CutoffKind) -> Result<ProtocolConfig, UsageError> {
        let state = match self.state {
            StateKind::Css => ProtocolState::Css,
            StateKind::Oats => {
                let (theta, beta) = self.angles()?;
                ProtocolState::Oats { theta, beta }
            }
            StateKind::Ghz => ProtocolState::Ghz,
        };
        let geometry = if self.regime == RegimeKind::Rc { TransitGeometry::collective(self.n) } else { self.geometry()? };
        let mut c = ProtocolConfig::new(state, geometry, self.model(default_cutoff)?);
        c.total_time = self.total_time;
        c.b = self.b;
        c.validate().map_err(|e| UsageError(format!("invalid protocol: {e}")))?;
        Ok(c)
    }

    /// `eta`, from `eta` or `epsilon` (`eta = v / (epsilon omega_c)`, `v = omega_c = 1`).
    pub fn eta_value(&self) -> Result<f64, UsageError> {
        match (self.eta, self.epsilon) {
            (Some(e), None) => Ok(e),
            (None, Some(eps)) => Ok(1.0 / eps),
            (Some(e), Some(eps)) => {
                if ((e * eps) - 1.0).abs() > 1e-9 {
                    usage("eta and epsilon disagree (need eta = 1/epsilon)")
                } else {
                    Ok(e)
                }
            }
            (None, None) => usage("randomized runs need eta or epsilon"),
        }
    }

    pub fn rc(&self, model: &SpectralModel) -> Result<RcConfig, UsageError> {
        let eta = self.eta_value()?;
        if !(eta > 0.0) {
            return usage("eta must be positive");
        }
        let rc = RcConfig::new(model, eta, self.k, self.seed);
        rc.validate(model).map_err(|e| UsageError(format!("invalid RC settings: {e}")))?;
        Ok(rc)
    }

    /// Time window and point count with per-command defaults.
    pub fn window(&self, lo: f64, hi: f64, points: usize) -> Result<(f64, f64, usize), UsageError> {
        let (lo, hi, n) = (self.t_lo.unwrap_or(lo), self.t_hi.unwrap_or(hi), self.grid.unwrap_or(points));
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return usage("time window needs 0 < t_lo < t_hi");
        }
        if n < 2 {
            return usage("grid needs at least 2 points");
        }
        Ok((lo, hi, n))
    }

    /// The single active sweep axis, if any.
    pub fn sweep_axis(&self) -> Result<Option<(&'static str, Vec<f64>)>, UsageError> {
        let axes = [("N", &self.sweep_n), ("x", &self.sweep_x), ("eta", &self.sweep_eta)];
        let active: Vec<_> = axes.iter().filter(|(_, a)| a.is_some()).collect();
        match active.len() {
            0 => Ok(None),
            1 => {
                let (name, axis) = active[0];
                Ok(Some((name, axis.as_ref().map(|a| a.values()).transpose()?.unwrap_or_default())))
            }
            _ => usage("conflicting sweep axes: give exactly one of sweep-N, sweep-x, sweep-eta"),
        }
    }

    pub fn check(&self) -> Result<(), UsageError> {
        if self.n < 2 {
            return usage("N must be at least 2");
        }
        if !(self.total_time > 0.0) {
            return usage("T must be positive");
        }
        if !self.b.is_finite() {
            return usage("b must be finite");
        }
        if !(1..=3).contains(&self.dimension) {
            return usage("dimension must be 1, 2 or 3");
        }
        if let Some(t) = self.beta_temp {
            if !(t > 0.0) {
                return usage("beta_temp must be positive");
            }
        }
        Ok(())
    }
}
