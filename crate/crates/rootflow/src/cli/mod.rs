//! Experiment runner: config ingestion, orchestration of engine runs, rate
//! fitting, and deterministic CSV/JSON emission.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::coupling::ExperimentConfig;
use crate::error::{Error, Result};

mod suite;

pub use suite::{run_suite, Subcommand, SuiteResult};

/// Invocation options resolved by the binary from flags and environment.
#[derive(Clone, Debug)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    /// Worker bound for parallel sweeps; `None` uses the global pool.
    pub workers: Option<usize>,
    /// Overrides the perturbation seed from the config file.
    pub seed_override: Option<u64>,
}

/// Read, parse and validate a JSON experiment config, filling defaults.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let mut config: ExperimentConfig = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    config.validate()?;
    config.grid_size = Some(config.effective_grid_size());
    Ok(config)
}

/// Which regression the fit runs: `Rate` regresses `log y` on `x` (decay
/// exponents in time), `Power` regresses `log y` on `log x` (scaling slopes).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FitMode {
    Rate,
    Power,
}

/// Least-squares slope and r-squared of the chosen log-linear model.
pub fn fit_loglinear(xs: &[f64], ys: &[f64], mode: FitMode) -> Result<(f64, f64)> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidFit(format!(
            "{} abscissae vs {} ordinates",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 3 {
        return Err(Error::InvalidFit(format!("{} points", xs.len())));
    }
    if let Some(bad) = ys.iter().find(|&&y| !(y > 0.0)) {
        return Err(Error::InvalidFit(format!("nonpositive ordinate {bad}")));
    }
    let txs: Vec<f64> = match mode {
        FitMode::Rate => xs.to_vec(),
        FitMode::Power => xs.iter().map(|x| x.ln()).collect(),
    };
    let tys: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = txs.len() as f64;
    let mx = txs.iter().sum::<f64>() / n;
    let my = tys.iter().sum::<f64>() / n;
    let sxx: f64 = txs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = txs
        .iter()
        .zip(&tys)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum();
    if sxx == 0.0 {
        return Err(Error::InvalidFit("degenerate abscissae".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = tys.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 = txs
        .iter()
        .zip(&tys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok((slope, r_squared))
}

/// One named pass/fail outcome of a suite run.
#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    pub fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PhaseTiming {
    pub name: String,
    pub seconds: f64,
}

/// Structured record of one invocation: config echo, outputs, and the
/// pass/fail summary of every check the subcommand ran.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub engine_version: String,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    pub phases: Vec<PhaseTiming>,
    pub outputs: Vec<String>,
    pub checks: Vec<CheckOutcome>,
    pub abort: Option<String>,
    pub passed: bool,
}

/// Exit status contract: 0 pass, 1 check failure, 2 configuration error,
/// 3 engine abort.
pub fn exit_code_for_error(e: &Error) -> i32 {
    match e {
        Error::Config(_)
        | Error::NonPositiveDensity { .. }
        | Error::InvalidFit(_)
        | Error::PerturbationTooLarge { .. } => 2,
        _ => 3,
    }
}
