//! Flag parsing and the run driver used by the binary.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::commands::{Command, RunError};
use crate::output::write_run;
use crate::scenario::{Axis, CutoffKind, RegimeKind, Scenario, StateKind, UsageError};

#[derive(Debug, Parser)]
#[command(name = "ramsey", version, about = "Ramsey frequency-estimation precision under correlated dephasing")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Dynamic coefficients against time.
    Coeffs(Flags),
    /// CSS precision curve (collective or even-odd), or optima along a sweep axis.
    Css(Flags),
    /// OATS precision curve from cumulant moments, or optima along a sweep axis.
    Oats(Flags),
    /// GHZ under randomized coupling: sampled curve, dispersion and reference.
    GhzRc(Flags),
    /// OATS under randomized coupling: sampled curve, dispersion and reference.
    OatsRc(Flags),
    /// Collective CSS precision and two-qubit concurrence on one grid.
    Concurrence(Flags),
    /// Counts of quantum-noise-insensitive matrix elements.
    Qni(Flags),
    /// Optimal points along one axis, optionally with a power-law fit.
    Sweep(Flags),
    /// Runs the oracle suite.
    Validate(Flags),
}

impl Sub {
    fn split(&self) -> (Command, &Flags) {
        match self {
            Sub::Coeffs(f) => (Command::Coeffs, f),
            Sub::Css(f) => (Command::Css, f),
            Sub::Oats(f) => (Command::Oats, f),
            Sub::GhzRc(f) => (Command::GhzRc, f),
            Sub::OatsRc(f) => (Command::OatsRc, f),
            Sub::Concurrence(f) => (Command::Concurrence, f),
            Sub::Qni(f) => (Command::Qni, f),
            Sub::Sweep(f) => (Command::Sweep, f),
            Sub::Validate(f) => (Command::Validate, f),
        }
    }
}

/// Every scenario key as a flag; set flags override the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// JSON scenario or a manifest from an earlier run.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long = "T")]
    pub total_time: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long, value_parser = parse_state)]
    pub state: Option<StateKind>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, value_parser = parse_regime)]
    pub regime: Option<RegimeKind>,
    #[arg(long)]
    pub x: Option<f64>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, value_parser = parse_cutoff)]
    pub cutoff: Option<CutoffKind>,
    #[arg(long = "beta-temp")]
    pub beta_temp: Option<f64>,
    #[arg(long)]
    pub dimension: Option<u8>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long = "K")]
    pub k: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long = "t-lo")]
    pub t_lo: Option<f64>,
    #[arg(long = "t-hi")]
    pub t_hi: Option<f64>,
    #[arg(long)]
    pub grid: Option<usize>,
    /// Output CSV path; the manifest goes to `<out>.manifest.json`.
    #[arg(long)]
    pub out: Option<String>,
    /// `lo:hi:count` or a comma list.
    #[arg(long = "sweep-N")]
    pub sweep_n: Option<String>,
    #[arg(long = "sweep-x")]
    pub sweep_x: Option<String>,
    #[arg(long = "sweep-eta")]
    pub sweep_eta: Option<String>,
    /// Fit power laws to the swept optima.
    #[arg(long)]
    pub fit: bool,
}

fn parse_with<T: serde::de::DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| format!("unknown value '{s}'"))
}

fn parse_state(s: &str) -> Result<StateKind, String> {
    parse_with(s)
}

fn parse_regime(s: &str) -> Result<RegimeKind, String> {
    parse_with(&s.replace('_', "-"))
}

fn parse_cutoff(s: &str) -> Result<CutoffKind, String> {
    match s {
        "exp" | "exponential" => Ok(CutoffKind::Exp),
        "gauss" | "gaussian" => Ok(CutoffKind::Gauss),
        _ => Err(format!("unknown cutoff '{s}' (exp or gauss)")),
    }
}

impl Flags {
    /// Config file (if any) with the set flags applied on top.
    pub fn scenario(&self) -> Result<Scenario, UsageError> {
        let mut sc = match &self.config {
            Some(p) => Scenario::load(p)?,
            None => Scenario::default(),
        };
        macro_rules! over {
            ($($f:ident),*) => { $( if let Some(v) = self.$f.clone() { sc.$f = v; } )* };
        }
        over!(n, total_time, b, state, regime, x, s, alpha, dimension, k, seed);
        macro_rules! over_opt {
            ($($f:ident),*) => { $( if let Some(v) = self.$f.clone() { sc.$f = Some(v); } )* };
        }
        over_opt!(theta, beta, cutoff, beta_temp, eta, epsilon, t_lo, t_hi, grid, out);
        if self.eta.is_some() && self.epsilon.is_none() {
            sc.epsilon = None;
        }
        if self.epsilon.is_some() && self.eta.is_none() {
            sc.eta = None;
        }
        for (flag, slot) in [(&self.sweep_n, &mut sc.sweep_n), (&self.sweep_x, &mut sc.sweep_x), (&self.sweep_eta, &mut sc.sweep_eta)] {
            if let Some(text) = flag {
                crate::scenario::parse_axis(text)?;
                *slot = Some(Axis::Range(text.clone()));
            }
        }
        Ok(sc)
    }
}

/// Outcome of a CLI run: exit code and a message for stderr.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub message: Option<String>,
}

/// Parses, runs and writes one invocation.
pub fn execute<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => 0,
                _ => 1,
            };
            let text = e.render().to_string();
            if code == 0 {
                print!("{text}");
                return Outcome { code, message: None };
            }
            return Outcome { code, message: Some(text) };
        }
    };
    let (command, flags) = cli.command.split();
    match run(command, flags) {
        Ok(msg) => Outcome { code: 0, message: msg },
        Err(e) => Outcome { code: e.exit_code(), message: Some(e.to_string()) },
    }
}

fn run(command: Command, flags: &Flags) -> Result<Option<String>, RunError> {
    let sc = command.resolve(flags.scenario()?)?;
    let out = sc.out.clone().unwrap_or_else(|| format!("{}.csv", command.name()));
    let result = command.run(&sc, flags.fit)?;
    let manifest = write_run(command.name(), &sc, Path::new(&out), &result)
        .map_err(|e| RunError::Failed(format!("cannot write {out}: {e}")))?;
    if command == Command::Validate && !result.warnings.is_empty() {
        return Err(RunError::Failed(result.warnings.join("; ")));
    }
    let mut note = format!("wrote {out} ({} rows)", result.table.rows.len());
    for w in &result.warnings {
        note.push_str(&format!("\nwarning: {w}"));
    }
    if !manifest["results"].is_null() {
        note.push_str(&format!("\n{}", manifest["results"]));
    }
    Ok(Some(note))
}
