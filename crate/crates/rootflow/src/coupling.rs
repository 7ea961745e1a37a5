//! Coupled experiments: root configurations matched to a density, the error
//! vector between discrete gaps and the PDE density, the arccot gap-split
//! prediction, and the full alternating evolution.
//!
//! The error of gap `j` at time `t` is
//! `E_j = x_{j+1} - x_j - 1/(2n u(xbar_j, t))`, measured at the checkpoint
//! times `t = k/(2n)` where one differentiation step corresponds to one PDE
//! interval.

use std::f64::consts::{PI, TAU};
use std::path::PathBuf;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::KahanSum;
use crate::pde::{self, ObservableRecord, PdeState};
use crate::spectral::{CumulativeDensity, GridFunction};
use crate::trigpoly::{self, RootConfiguration};

/// Per-gap deviations between root gaps and the density prediction.
#[derive(Clone, Debug)]
pub struct ErrorVector {
    entries: Vec<f64>,
    midpoints: Vec<f64>,
    sup_norm: f64,
}

impl ErrorVector {
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn midpoints(&self) -> &[f64] {
        &self.midpoints
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Place the 2n roots at the quantiles `(j - 1/2)/(2n)` of the density so
/// every inter-root arc carries mass `1/(2n)`. Midpoint-rule cancellation
/// makes the initial error O(n^-3).
pub fn quantile_init(u0: &GridFunction, n: usize) -> Result<RootConfiguration> {
    if n == 0 {
        return Err(Error::Config("polynomial degree n must be positive".into()));
    }
    let cdf = CumulativeDensity::new(u0)?;
    let mass = cdf.total_mass();
    let two_n = 2 * n;
    let roots: Result<Vec<f64>> = (1..=two_n)
        .map(|j| cdf.invert((j as f64 - 0.5) / two_n as f64 * mass))
        .collect();
    RootConfiguration::new(roots?, 1.0)
}

/// Add i.i.d. uniform offsets in `[-Z0 n^(-1-eps), Z0 n^(-1-eps)]` to every
/// root, from a seeded generator. Requires the amplitude to stay below a
/// quarter of the minimum gap so sortedness and distinctness survive.
pub fn perturb_roots(
    cfg: &RootConfiguration,
    z0: f64,
    eps: f64,
    seed: u64,
) -> Result<RootConfiguration> {
    if z0 == 0.0 {
        return Ok(cfg.clone());
    }
    let amplitude = z0 * (cfg.degree() as f64).powf(-1.0 - eps);
    let min_gap = cfg.min_gap();
    if !(amplitude < 0.25 * min_gap) {
        return Err(Error::PerturbationTooLarge { amplitude, min_gap });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let angles: Vec<f64> = cfg
        .roots()
        .iter()
        .map(|&x| x + rng.gen_range(-amplitude..amplitude))
        .collect();
    cfg.with_roots(angles)
}

/// Cyclic gaps and midpoints against the density, `E_j = gap_j - 1/(2n u(xbar_j))`.
pub fn error_vector(cfg: &RootConfiguration, u: &GridFunction) -> ErrorVector {
    assert!(u.min_value() > 0.0, "error_vector requires u > 0 on the grid");
    let interp = u.interpolant();
    let two_n = cfg.num_roots() as f64;
    let mut entries = Vec::with_capacity(cfg.num_roots());
    let mut midpoints = Vec::with_capacity(cfg.num_roots());
    let mut sup: f64 = 0.0;
    for m in 0..cfg.num_roots() {
        let mid = cfg.midpoint(m);
        let e = cfg.gap(m) - 1.0 / (two_n * interp.evaluate(mid));
        sup = sup.max(e.abs());
        entries.push(e);
        midpoints.push(mid);
    }
    ErrorVector {
        entries,
        midpoints,
        sup_norm: sup,
    }
}

/// Predicted sub-gaps `(y_m - x_m, x_{m+1} - y_m)` from the arccot formula,
/// with `arccot` on the `(0, pi)` branch realized as `pi/2 - arctan`. The two
/// predictions sum to the density gap `1/(2n u(xbar_m))`.
pub fn predict_gap_split(cfg: &RootConfiguration, u: &GridFunction, m: usize) -> (f64, f64) {
    let hu = u.hilbert();
    predict_split_at(cfg, &u.interpolant(), &hu.interpolant(), m)
}

/// All gap-split predictions, sharing one Hilbert transform.
pub fn predict_all_gap_splits(cfg: &RootConfiguration, u: &GridFunction) -> Vec<(f64, f64)> {
    let hu = u.hilbert();
    let ui = u.interpolant();
    let hi = hu.interpolant();
    (0..cfg.num_roots())
        .map(|m| predict_split_at(cfg, &ui, &hi, m))
        .collect()
}

fn predict_split_at(
    cfg: &RootConfiguration,
    u: &crate::spectral::Interpolant,
    hu: &crate::spectral::Interpolant,
    m: usize,
) -> (f64, f64) {
    let mid = cfg.midpoint(m);
    let uu = u.evaluate(mid);
    let ratio = hu.evaluate(mid) / uu;
    let scale = 1.0 / (TAU * cfg.degree() as f64 * uu);
    let first = scale * (0.5 * PI + ratio.atan());
    let second = scale * (0.5 * PI - ratio.atan());
    (first, second)
}

fn default_stride() -> usize {
    1
}

/// How the initial density is specified.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum DensitySpec {
    /// `u(x) = (1 + amplitude cos x) / (2 pi)`, total mass exactly 1.
    Cosine { amplitude: f64 },
    /// `u(x) = mean + sum_j (cos[j-1] cos(jx) + sin[j-1] sin(jx))`.
    Fourier {
        #[serde(default = "default_fourier_mean")]
        mean: f64,
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
}

fn default_fourier_mean() -> f64 {
    1.0 / TAU
}

impl DensitySpec {
    pub fn build(&self, grid_size: usize) -> Result<GridFunction> {
        match self {
            DensitySpec::Cosine { amplitude } => {
                let a = *amplitude;
                GridFunction::from_fn(grid_size, |x| (1.0 + a * x.cos()) / TAU)
            }
            DensitySpec::Fourier { mean, cos, sin } => {
                let modes = cos.len().max(sin.len());
                if 2 * modes >= grid_size {
                    return Err(Error::Config(format!(
                        "fourier density with {modes} modes needs a grid larger than {}",
                        2 * modes
                    )));
                }
                GridFunction::from_fn(grid_size, |x| {
                    let mut v = *mean;
                    for (j, &a) in cos.iter().enumerate() {
                        v += a * ((j + 1) as f64 * x).cos();
                    }
                    for (j, &b) in sin.iter().enumerate() {
                        v += b * ((j + 1) as f64 * x).sin();
                    }
                    v
                })
            }
        }
    }
}

/// Seeded uniform root perturbation, realizing initial errors of size
/// `Z0 n^(-1-eps)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSpec {
    pub z0: f64,
    pub eps: f64,
    #[serde(default)]
    pub seed: u64,
}

/// Tolerances used by the CLI check runner; module defaults follow the
/// engine contracts.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub mean_drift_per_unit_time: f64,
    pub max_principle_slack: f64,
    pub row_sum_margin: f64,
    pub contraction_rho: f64,
    pub envelope_ratio_max: f64,
    pub prediction_sum_abs: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            mean_drift_per_unit_time: 1e-12,
            max_principle_slack: 1e-10,
            row_sum_margin: 0.15,
            contraction_rho: 0.05,
            envelope_ratio_max: 50.0,
            prediction_sum_abs: 1e-14,
        }
    }
}

/// Full description of one experiment.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    /// PDE grid size; defaults to `max(256, 8 n)`.
    #[serde(default)]
    pub grid_size: Option<usize>,
    pub density: DensitySpec,
    #[serde(default)]
    pub perturbation: Option<PerturbationSpec>,
    pub t_final: f64,
    #[serde(default = "default_stride")]
    pub checkpoint_stride: usize,
    /// Times at which full (roots, u) snapshots are kept, rounded to the
    /// nearest checkpoint.
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    /// Degrees for the scaling-sweep subcommand.
    #[serde(default)]
    pub sweep_n: Option<Vec<usize>>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl ExperimentConfig {
    pub fn effective_grid_size(&self) -> usize {
        self.grid_size.unwrap_or_else(|| 256.max(8 * self.n))
    }

    /// Validate and build the initial density on the effective grid.
    pub fn build_density(&self) -> Result<GridFunction> {
        let grid = self.effective_grid_size();
        if grid % 2 != 0 || grid < 16 {
            return Err(Error::Config(format!(
                "grid_size must be even and at least 16, got {grid}"
            )));
        }
        let u = self.density.build(grid)?;
        let min = u.min_value();
        if min <= 0.0 {
            let i = (0..u.len())
                .min_by(|&a, &b| u.samples()[a].partial_cmp(&u.samples()[b]).unwrap())
                .unwrap();
            return Err(Error::NonPositiveDensity {
                theta: u.node(i),
                value: u.samples()[i],
            });
        }
        let mass = u.mean() * TAU;
        if (mass - 1.0).abs() > 1e-10 {
            return Err(Error::Config(format!(
                "density must have total mass 1, measured {mass:.12}"
            )));
        }
        Ok(u)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("n must be positive".into()));
        }
        if !(self.t_final > 0.0) {
            return Err(Error::Config(format!(
                "t_final must be positive, got {}",
                self.t_final
            )));
        }
        if self.checkpoint_stride == 0 {
            return Err(Error::Config("checkpoint_stride must be positive".into()));
        }
        if let Some(p) = &self.perturbation {
            if p.z0 < 0.0 {
                return Err(Error::Config(format!("Z0 must be nonnegative, got {}", p.z0)));
            }
            if p.z0 > 0.0 && !(p.eps > 0.0) {
                return Err(Error::Config(format!("eps must be positive, got {}", p.eps)));
            }
        }
        if let Some(ns) = &self.sweep_n {
            if ns.is_empty() || ns.iter().any(|&v| v == 0) {
                return Err(Error::Config("sweep_n must list positive degrees".into()));
            }
        }
        self.build_density().map(|_| ())
    }
}

/// One checkpoint row of a coupled run.
#[derive(Clone, Debug)]
pub struct CoupledRecord {
    pub t: f64,
    pub observables: ObservableRecord,
    /// `max_j |E_j^t|`.
    pub e_inf: f64,
    /// `sum_j E_j u(xbar_j)`.
    pub sum_e_u: f64,
    /// `max_j |gap_j - pi/n|`, the crystallization measure.
    pub gap_dev_max: f64,
    /// `max_m |(y_m - x_m) - predicted|`, the gap-split prediction residual.
    pub pred_resid_max: f64,
}

/// Full (roots, density) snapshot at one checkpoint, including the next root
/// configuration for kernel evaluation.
#[derive(Clone, Debug)]
pub struct CoupledSnapshot {
    pub t: f64,
    pub roots: RootConfiguration,
    pub roots_next: RootConfiguration,
    pub u: GridFunction,
}

/// Outcome of a coupled run; `abort` carries the engine error when the run
/// stopped early, with the records collected so far.
#[derive(Debug)]
pub struct CoupledRun {
    pub records: Vec<CoupledRecord>,
    pub snapshots: Vec<CoupledSnapshot>,
    pub abort: Option<Error>,
}

/// Alternate one differentiation step with PDE evolution over each interval
/// `[k/(2n), (k+1)/(2n)]`, recording diagnostics at every `checkpoint_stride`-th
/// checkpoint.
pub fn run_coupled(config: &ExperimentConfig) -> Result<CoupledRun> {
    config.validate()?;
    let u0 = config.build_density()?;
    let n = config.n;
    let two_n = 2 * n;
    let mut roots = quantile_init(&u0, n)?;
    if let Some(p) = &config.perturbation {
        roots = perturb_roots(&roots, p.z0, p.eps, p.seed)?;
    }
    let mut state = PdeState::new(u0, 0.0)?;

    let total_steps = (two_n as f64 * config.t_final).round() as usize;
    let snapshot_steps: Vec<usize> = {
        let mut ks: Vec<usize> = config
            .snapshot_times
            .iter()
            .map(|&t| ((t * two_n as f64).round() as i64).clamp(0, total_steps as i64) as usize)
            .collect();
        ks.sort_unstable();
        ks.dedup();
        ks
    };

    let mut records = Vec::new();
    let mut snapshots = Vec::new();
    let mut abort = None;

    for k in 0..=total_steps {
        let t_k = k as f64 / two_n as f64;
        let step_result = (|| -> Result<Vec<f64>> {
            let raw = trigpoly::derivative_roots_in_gaps(&roots)?;
            let predictions = predict_all_gap_splits(&roots, state.u());
            let errors = error_vector(&roots, state.u());
            let pred_resid_max = raw
                .iter()
                .zip(&predictions)
                .enumerate()
                .map(|(m, (&y, &(first, _)))| ((y - roots.roots()[m]) - first).abs())
                .fold(0.0f64, f64::max);
            let gap_dev_max = (0..two_n)
                .map(|m| (roots.gap(m) - PI / n as f64).abs())
                .fold(0.0f64, f64::max);

            if k % config.checkpoint_stride == 0 || k == total_steps {
                records.push(CoupledRecord {
                    t: t_k,
                    observables: pde::observables(&state),
                    e_inf: errors.sup_norm(),
                    sum_e_u: crate::kernel::mean_compatibility(&errors, state.u()),
                    gap_dev_max,
                    pred_resid_max,
                });
            }
            if snapshot_steps.binary_search(&k).is_ok() {
                snapshots.push(CoupledSnapshot {
                    t: t_k,
                    roots: roots.clone(),
                    roots_next: trigpoly::configuration_from_gap_roots(&roots, &raw)?,
                    u: state.u().clone(),
                });
            }
            Ok(raw)
        })();

        let raw = match step_result {
            Ok(r) => r,
            Err(e) => {
                abort = Some(e);
                break;
            }
        };

        if k < total_steps {
            let advanced = (|| -> Result<(RootConfiguration, PdeState)> {
                let next_roots = trigpoly::configuration_from_gap_roots(&roots, &raw)?;
                let t_next = (k + 1) as f64 / two_n as f64;
                let states = pde::evolve_to(&state, t_next, &[t_next])?;
                Ok((next_roots, states.into_iter().next().expect("one checkpoint")))
            })();
            match advanced {
                Ok((r, s)) => {
                    roots = r;
                    state = s;
                }
                Err(e) => {
                    abort = Some(e);
                    break;
                }
            }
        }
    }

    Ok(CoupledRun {
        records,
        snapshots,
        abort,
    })
}

/// Total of the cyclic gaps; must close the circle.
pub fn gap_closure_defect(cfg: &RootConfiguration) -> f64 {
    let mut acc = KahanSum::new();
    for m in 0..cfg.num_roots() {
        acc += cfg.gap(m);
    }
    (acc.value() - TAU).abs()
}
