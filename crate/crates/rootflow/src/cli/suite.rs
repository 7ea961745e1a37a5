//! Subcommand drivers: each runs one experiment kind, writes CSV series and
//! a JSON manifest, and reports named pass/fail checks.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::coupling::{self, CoupledRecord, ExperimentConfig};
use crate::error::{Error, Result};
use crate::kernel;
use crate::pde::{self, ObservableRecord, PdeState};
use crate::trigpoly;

use super::{CheckOutcome, PhaseTiming, RunManifest, RunOptions};

/// Manifest plus the process exit code implied by it.
#[derive(Debug)]
pub struct SuiteResult {
    pub manifest: RunManifest,
    pub manifest_path: PathBuf,
    pub exit_code: i32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subcommand {
    PdeRun,
    RootsRun,
    CoupledRun,
    ScalingSweep,
    KernelCheck,
    PredictCheck,
}

impl Subcommand {
    pub fn name(&self) -> &'static str {
        match self {
            Subcommand::PdeRun => "pde-run",
            Subcommand::RootsRun => "roots-run",
            Subcommand::CoupledRun => "coupled-run",
            Subcommand::ScalingSweep => "scaling-sweep",
            Subcommand::KernelCheck => "kernel-check",
            Subcommand::PredictCheck => "predict-check",
        }
    }
}

struct SubOutput {
    checks: Vec<CheckOutcome>,
    outputs: Vec<PathBuf>,
    abort: Option<String>,
}

/// Execute a subcommand, write its series and manifest, and compute the exit
/// code: 0 all checks pass, 1 check failure, 3 engine abort. Configuration
/// errors surface as `Err` (exit 2 in the binary).
pub fn run_suite(
    sub: Subcommand,
    config: &ExperimentConfig,
    opts: &RunOptions,
) -> Result<SuiteResult> {
    config.validate()?;
    let mut config = config.clone();
    if let (Some(seed), Some(p)) = (opts.seed_override, config.perturbation.as_mut()) {
        p.seed = seed;
    }
    fs::create_dir_all(&opts.out_dir)?;

    let started = Instant::now();
    let out = match sub {
        Subcommand::PdeRun => pde_run(&config, &opts.out_dir)?,
        Subcommand::RootsRun => roots_run(&config, &opts.out_dir)?,
        Subcommand::CoupledRun => coupled_run(&config, &opts.out_dir)?,
        Subcommand::ScalingSweep => scaling_sweep(&config, opts)?,
        Subcommand::KernelCheck => kernel_check(&config, &opts.out_dir)?,
        Subcommand::PredictCheck => predict_check(&config, &opts.out_dir)?,
    };
    let phases = vec![PhaseTiming {
        name: sub.name().to_string(),
        seconds: started.elapsed().as_secs_f64(),
    }];

    let passed = out.abort.is_none() && out.checks.iter().all(|c| c.passed);
    let manifest = RunManifest {
        subcommand: sub.name().to_string(),
        engine_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: config.perturbation.as_ref().map(|p| p.seed),
        config: serde_json::to_value(&config)?,
        phases,
        outputs: out
            .outputs
            .iter()
            .map(|p| p.to_string_lossy().into_owned())
            .collect(),
        checks: out.checks,
        abort: out.abort,
        passed,
    };
    let manifest_path = opts.out_dir.join("manifest.json");
    fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)?;

    let exit_code = if manifest.abort.is_some() {
        3
    } else if manifest.passed {
        0
    } else {
        1
    };
    Ok(SuiteResult {
        manifest,
        manifest_path,
        exit_code,
    })
}

fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut text = String::with_capacity(rows.len() * header.len() * 26 + 256);
    text.push_str(&header.join(","));
    text.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        let mut first = true;
        for &v in row {
            if !first {
                text.push(',');
            }
            text.push_str(&format_value(v));
            first = false;
        }
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(())
}

fn checkpoint_indices(total: usize, stride: usize) -> Vec<usize> {
    (0..=total)
        .filter(|&k| k % stride == 0 || k == total)
        .collect()
}

fn conservation_check(means: &[f64], t_span: f64, tol_per_unit_time: f64) -> CheckOutcome {
    let drift = means
        .iter()
        .map(|m| (m - means[0]).abs())
        .fold(0.0f64, f64::max);
    let tol = tol_per_unit_time * t_span.max(1.0);
    CheckOutcome::new(
        "mean_conservation",
        drift <= tol,
        format!("max mean drift {drift:.3e} (tol {tol:.3e})"),
    )
}

fn max_principle_check(obs: &[ObservableRecord], slack: f64) -> CheckOutcome {
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for w in obs.windows(2) {
        let up = w[1].max - w[0].max;
        let down = w[0].min - w[1].min;
        worst = worst.max(up).max(down);
        if up > slack || down > slack {
            ok = false;
        }
    }
    CheckOutcome::new(
        "maximum_principle",
        ok,
        format!("worst monotonicity violation {worst:.3e} (slack {slack:.3e})"),
    )
}

const PDE_HEADER: [&str; 9] = [
    "t", "V", "mean_u", "min_u", "max_u", "du1_inf", "du2_inf", "du3_inf", "Hu_inf",
];

fn pde_run(config: &ExperimentConfig, out_dir: &Path) -> Result<SubOutput> {
    let u0 = config.build_density()?;
    let state = PdeState::new(u0, 0.0)?;
    let two_n = 2.0 * config.n as f64;
    let total = (two_n * config.t_final).round() as usize;
    let times: Vec<f64> = checkpoint_indices(total, config.checkpoint_stride)
        .iter()
        .map(|&k| k as f64 / two_n)
        .collect();
    let t_target = total as f64 / two_n;

    let states = match pde::evolve_to(&state, t_target, &times) {
        Ok(s) => s,
        Err(e) => {
            return Ok(SubOutput {
                checks: vec![],
                outputs: vec![],
                abort: Some(e.to_string()),
            })
        }
    };
    let obs: Vec<ObservableRecord> = states.iter().map(pde::observables).collect();
    let rows: Vec<Vec<f64>> = obs
        .iter()
        .map(|r| {
            vec![
                r.t,
                r.amplitude,
                r.mean,
                r.min,
                r.max,
                r.derivative_sup[0],
                r.derivative_sup[1],
                r.derivative_sup[2],
                r.hilbert_sup,
            ]
        })
        .collect();
    let csv = out_dir.join("pde_run.csv");
    write_csv(&csv, &PDE_HEADER, &rows)?;

    let means: Vec<f64> = obs.iter().map(|r| r.mean).collect();
    let checks = vec![
        conservation_check(
            &means,
            config.t_final,
            config.tolerances.mean_drift_per_unit_time,
        ),
        max_principle_check(&obs, config.tolerances.max_principle_slack),
    ];
    Ok(SubOutput {
        checks,
        outputs: vec![csv],
        abort: None,
    })
}

const ROOTS_HEADER: [&str; 4] = ["t", "gap_min", "gap_max", "gap_dev_max"];

fn roots_run(config: &ExperimentConfig, out_dir: &Path) -> Result<SubOutput> {
    let u0 = config.build_density()?;
    let mut roots = coupling::quantile_init(&u0, config.n)?;
    if let Some(p) = &config.perturbation {
        roots = coupling::perturb_roots(&roots, p.z0, p.eps, p.seed)?;
    }
    let two_n = roots.num_roots();
    let total = (two_n as f64 * config.t_final).round() as usize;
    let ideal = PI / config.n as f64;

    let mut rows = Vec::new();
    let mut interlaced = true;
    let mut abort = None;
    for k in 0..=total {
        if k % config.checkpoint_stride == 0 || k == total {
            let gaps: Vec<f64> = (0..two_n).map(|m| roots.gap(m)).collect();
            rows.push(vec![
                k as f64 / two_n as f64,
                gaps.iter().cloned().fold(f64::INFINITY, f64::min),
                gaps.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                gaps.iter().map(|g| (g - ideal).abs()).fold(0.0f64, f64::max),
            ]);
        }
        if k == total {
            break;
        }
        match trigpoly::derivative_roots_in_gaps(&roots) {
            Ok(raw) => {
                for m in 0..two_n {
                    let a = roots.roots()[m];
                    if !(raw[m] > a && raw[m] < a + roots.gap(m)) {
                        interlaced = false;
                    }
                }
                match trigpoly::configuration_from_gap_roots(&roots, &raw) {
                    Ok(next) => roots = next,
                    Err(e) => {
                        abort = Some(format!("step {k}: {e}"));
                        break;
                    }
                }
            }
            Err(e) => {
                abort = Some(format!("step {k}: {e}"));
                break;
            }
        }
    }

    let csv = out_dir.join("roots_run.csv");
    write_csv(&csv, &ROOTS_HEADER, &rows)?;
    let checks = vec![CheckOutcome::new(
        "interlacing",
        interlaced,
        if interlaced {
            "every derivative root stayed inside its gap".to_string()
        } else {
            "a derivative root escaped its gap".to_string()
        },
    )];
    Ok(SubOutput {
        checks,
        outputs: vec![csv],
        abort,
    })
}

const COUPLED_HEADER: [&str; 12] = [
    "t",
    "E_inf",
    "V",
    "mean_u",
    "min_u",
    "sum_E_u",
    "gap_dev_max",
    "pred_resid_max",
    "du1_inf",
    "du2_inf",
    "du3_inf",
    "Hu_inf",
];

fn coupled_rows(records: &[CoupledRecord]) -> Vec<Vec<f64>> {
    records
        .iter()
        .map(|r| {
            vec![
                r.t,
                r.e_inf,
                r.observables.amplitude,
                r.observables.mean,
                r.observables.min,
                r.sum_e_u,
                r.gap_dev_max,
                r.pred_resid_max,
                r.observables.derivative_sup[0],
                r.observables.derivative_sup[1],
                r.observables.derivative_sup[2],
                r.observables.hilbert_sup,
            ]
        })
        .collect()
}

fn coupled_run(config: &ExperimentConfig, out_dir: &Path) -> Result<SubOutput> {
    let run = coupling::run_coupled(config)?;
    let csv = out_dir.join("coupled_run.csv");
    write_csv(&csv, &COUPLED_HEADER, &coupled_rows(&run.records))?;

    let obs: Vec<ObservableRecord> = run.records.iter().map(|r| r.observables).collect();
    let means: Vec<f64> = obs.iter().map(|r| r.mean).collect();
    let finite = run.records.iter().all(|r| {
        r.e_inf.is_finite() && r.sum_e_u.is_finite() && r.pred_resid_max.is_finite()
    });
    let mut checks = vec![CheckOutcome::new(
        "error_norm_finite",
        finite,
        format!("{} checkpoint records", run.records.len()),
    )];
    if !means.is_empty() {
        checks.push(conservation_check(
            &means,
            config.t_final,
            config.tolerances.mean_drift_per_unit_time,
        ));
        checks.push(max_principle_check(
            &obs,
            config.tolerances.max_principle_slack,
        ));
    }
    Ok(SubOutput {
        checks,
        outputs: vec![csv],
        abort: run.abort.map(|e| e.to_string()),
    })
}

#[derive(Serialize)]
struct SweepSummary {
    n: Vec<usize>,
    e_inf_t05: Vec<f64>,
    pred_resid_t0: Vec<f64>,
    mean_compat_t025: Vec<f64>,
    pred_sum_defect_max: f64,
    slope_e_inf_t05: f64,
    slope_pred_resid: f64,
    slope_mean_compat: f64,
    bound_constant: f64,
}

fn record_at(records: &[CoupledRecord], t: f64) -> &CoupledRecord {
    records
        .iter()
        .min_by(|a, b| {
            (a.t - t)
                .abs()
                .partial_cmp(&(b.t - t).abs())
                .expect("finite times")
        })
        .expect("nonempty records")
}

fn scaling_sweep(config: &ExperimentConfig, opts: &RunOptions) -> Result<SubOutput> {
    let out_dir = &opts.out_dir;
    let mut ns = config
        .sweep_n
        .clone()
        .ok_or_else(|| Error::Config("scaling-sweep requires sweep_n".into()))?;
    ns.sort_unstable();
    ns.dedup();
    if ns.len() < 3 {
        return Err(Error::Config(
            "scaling-sweep needs at least 3 distinct degrees in sweep_n".into(),
        ));
    }
    if config.t_final < 0.5 {
        return Err(Error::Config(
            "scaling-sweep measures at t = 0.5 and needs t_final >= 0.5".into(),
        ));
    }

    let member = |n: usize| -> ExperimentConfig {
        let mut c = config.clone();
        c.n = n;
        c.grid_size = None;
        c.sweep_n = None;
        c.snapshot_times = vec![];
        c.checkpoint_stride = 1;
        c
    };

    let run_all = || -> Vec<(usize, Result<coupling::CoupledRun>)> {
        ns.par_iter()
            .map(|&n| (n, coupling::run_coupled(&member(n))))
            .collect()
    };
    let results = match opts.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?
            .install(run_all),
        None => run_all(),
    };

    let mut outputs = Vec::new();
    let mut abort = None;
    let mut e05 = Vec::new();
    let mut pred0 = Vec::new();
    let mut mc025 = Vec::new();
    for (n, result) in &results {
        match result {
            Ok(run) => {
                let csv = out_dir.join(format!("coupled_n{n}.csv"));
                write_csv(&csv, &COUPLED_HEADER, &coupled_rows(&run.records))?;
                outputs.push(csv);
                if let Some(e) = &run.abort {
                    abort = Some(format!("n = {n}: {e}"));
                    break;
                }
                e05.push(record_at(&run.records, 0.5).e_inf);
                pred0.push(run.records[0].pred_resid_max);
                mc025.push(record_at(&run.records, 0.25).sum_e_u.abs());
            }
            Err(e) => {
                abort = Some(format!("n = {n}: {e}"));
                break;
            }
        }
    }
    if let Some(msg) = abort {
        return Ok(SubOutput {
            checks: vec![],
            outputs,
            abort: Some(msg),
        });
    }

    // Exactness of the arccot split against the density gap at t = 0.
    let mut pred_sum_defect_max: f64 = 0.0;
    for &n in &ns {
        let c = member(n);
        let u0 = c.build_density()?;
        let mut roots = coupling::quantile_init(&u0, n)?;
        if let Some(p) = &c.perturbation {
            roots = coupling::perturb_roots(&roots, p.z0, p.eps, p.seed)?;
        }
        let splits = coupling::predict_all_gap_splits(&roots, &u0);
        let interp = u0.interpolant();
        for (m, &(a, b)) in splits.iter().enumerate() {
            let gap = 1.0 / (2.0 * n as f64 * interp.evaluate(roots.midpoint(m)));
            pred_sum_defect_max = pred_sum_defect_max.max((a + b - gap).abs());
        }
    }

    let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let (slope_e, _) = super::fit_loglinear(&xs, &e05, super::FitMode::Power)?;
    let (slope_pred, _) = super::fit_loglinear(&xs, &pred0, super::FitMode::Power)?;
    let (slope_mc, _) = super::fit_loglinear(&xs, &mc025, super::FitMode::Power)?;
    let bound_constant = e05[0] * xs[0].powf(1.5);
    let bound_ok = ns
        .iter()
        .zip(&e05)
        .skip(1)
        .all(|(&n, &e)| e <= 3.0 * bound_constant * (n as f64).powf(-1.5));

    let summary = SweepSummary {
        n: ns.clone(),
        e_inf_t05: e05.clone(),
        pred_resid_t0: pred0.clone(),
        mean_compat_t025: mc025.clone(),
        pred_sum_defect_max,
        slope_e_inf_t05: slope_e,
        slope_pred_resid: slope_pred,
        slope_mean_compat: slope_mc,
        bound_constant,
    };
    let summary_path = out_dir.join("summary.json");
    fs::write(&summary_path, serde_json::to_string_pretty(&summary)?)?;
    outputs.push(summary_path);

    let tol = &config.tolerances;
    let checks = vec![
        CheckOutcome::new(
            "slope_e_inf_t05",
            slope_e <= -1.25,
            format!("fitted slope {slope_e:.3} (require <= -1.25)"),
        ),
        CheckOutcome::new(
            "e_inf_n_bound",
            bound_ok,
            format!("C = {bound_constant:.3e} calibrated at n = {}", ns[0]),
        ),
        CheckOutcome::new(
            "slope_pred_resid",
            slope_pred <= -1.4,
            format!("fitted slope {slope_pred:.3} (require <= -1.4)"),
        ),
        CheckOutcome::new(
            "slope_mean_compat",
            slope_mc <= -1.8,
            format!("fitted slope {slope_mc:.3} (require <= -1.8)"),
        ),
        CheckOutcome::new(
            "prediction_sums_exact",
            pred_sum_defect_max <= tol.prediction_sum_abs,
            format!("max defect {pred_sum_defect_max:.3e}"),
        ),
    ];
    Ok(SubOutput {
        checks,
        outputs,
        abort: None,
    })
}

const KERNEL_HEADER: [&str; 4] = ["t", "m", "row_sum", "f_bound"];

#[derive(Serialize)]
struct KernelSnapshotSummary {
    t: f64,
    max_row_sum: f64,
    max_excess_over_f: f64,
}

#[derive(Serialize)]
struct KernelSummary {
    f_at_half_pi: f64,
    envelope_c1: f64,
    envelope_c2: f64,
    envelope_ratio: f64,
    snapshots: Vec<KernelSnapshotSummary>,
}

fn kernel_check(config: &ExperimentConfig, out_dir: &Path) -> Result<SubOutput> {
    let mut cfg = config.clone();
    if cfg.snapshot_times.is_empty() {
        cfg.snapshot_times = [0.0, 0.25, 0.5, 1.0]
            .into_iter()
            .filter(|&t| t <= config.t_final + 1e-12)
            .collect();
    }
    let run = coupling::run_coupled(&cfg)?;
    if let Some(e) = run.abort {
        return Ok(SubOutput {
            checks: vec![],
            outputs: vec![],
            abort: Some(e.to_string()),
        });
    }

    let mut rows = Vec::new();
    let mut positive = true;
    let mut all_below_one = true;
    let mut majorant_ok = true;
    let mut late_max_s: f64 = 0.0;
    let mut has_late = false;
    let mut c1 = f64::INFINITY;
    let mut c2: f64 = 0.0;
    let mut summaries = Vec::new();
    for snap in &run.snapshots {
        let hu = snap.u.hilbert();
        let ui = snap.u.interpolant();
        let hi = hu.interpolant();
        let mut max_s: f64 = 0.0;
        let mut max_excess = f64::NEG_INFINITY;
        for m in 0..snap.roots.num_roots() {
            let row = kernel::kappa_row(&snap.roots, &snap.roots_next, &snap.u, m)?;
            let mid = snap.roots.midpoint(m);
            let a = 0.5 * PI - (hi.evaluate(mid) / ui.evaluate(mid)).atan();
            let f_a = kernel::f_bound(a)?;
            rows.push(vec![snap.t, m as f64, row.row_sum(), f_a]);
            max_s = max_s.max(row.row_sum());
            max_excess = max_excess.max(row.row_sum() - f_a);
            if row.row_sum() >= 1.0 {
                all_below_one = false;
            }
            if row.row_sum() > f_a + config.tolerances.row_sum_margin {
                majorant_ok = false;
            }
            for j in 0..snap.roots.num_roots() {
                if j == m {
                    continue;
                }
                let v = row.kappa(j);
                if v <= 0.0 {
                    positive = false;
                }
                let d = row.cyclic_distance(j) as f64;
                c1 = c1.min(v * d * d);
                c2 = c2.max(v * d * d);
            }
        }
        if snap.t >= 1.0 - 1e-12 {
            has_late = true;
            late_max_s = late_max_s.max(max_s);
        }
        summaries.push(KernelSnapshotSummary {
            t: snap.t,
            max_row_sum: max_s,
            max_excess_over_f: max_excess,
        });
    }

    let csv = out_dir.join("kernel_rows.csv");
    write_csv(&csv, &KERNEL_HEADER, &rows)?;
    let summary = KernelSummary {
        f_at_half_pi: kernel::f_bound(0.5 * PI)?,
        envelope_c1: c1,
        envelope_c2: c2,
        envelope_ratio: c2 / c1,
        snapshots: summaries,
    };
    let summary_path = out_dir.join("kernel_summary.json");
    fs::write(&summary_path, serde_json::to_string_pretty(&summary)?)?;

    let tol = &config.tolerances;
    let mut checks = vec![
        CheckOutcome::new(
            "kernel_rows_positive",
            positive,
            "kappa(j, m) > 0 for all j != m".to_string(),
        ),
        CheckOutcome::new(
            "kernel_row_sums_below_one",
            all_below_one,
            "S < 1 on every computed row".to_string(),
        ),
        CheckOutcome::new(
            "kernel_row_sum_majorant",
            majorant_ok,
            format!("S <= F(a) + {}", tol.row_sum_margin),
        ),
        CheckOutcome::new(
            "kernel_envelope_ratio",
            summary.envelope_ratio <= tol.envelope_ratio_max,
            format!("c2/c1 = {:.2}", summary.envelope_ratio),
        ),
    ];
    if has_late {
        checks.push(CheckOutcome::new(
            "kernel_late_time_contraction",
            late_max_s <= 1.0 - tol.contraction_rho,
            format!(
                "max S at t >= 1 is {late_max_s:.4} (require <= {:.2})",
                1.0 - tol.contraction_rho
            ),
        ));
    }
    Ok(SubOutput {
        checks,
        outputs: vec![csv, summary_path],
        abort: None,
    })
}

const PREDICT_HEADER: [&str; 5] = ["m", "actual", "predicted", "residual", "sum_defect"];

fn predict_check(config: &ExperimentConfig, out_dir: &Path) -> Result<SubOutput> {
    let u0 = config.build_density()?;
    let mut roots = coupling::quantile_init(&u0, config.n)?;
    if let Some(p) = &config.perturbation {
        roots = coupling::perturb_roots(&roots, p.z0, p.eps, p.seed)?;
    }
    let raw = match trigpoly::derivative_roots_in_gaps(&roots) {
        Ok(r) => r,
        Err(e) => {
            return Ok(SubOutput {
                checks: vec![],
                outputs: vec![],
                abort: Some(e.to_string()),
            })
        }
    };
    let splits = coupling::predict_all_gap_splits(&roots, &u0);
    let interp = u0.interpolant();

    let mut rows = Vec::new();
    let mut resid_max: f64 = 0.0;
    let mut defect_max: f64 = 0.0;
    for m in 0..roots.num_roots() {
        let actual = raw[m] - roots.roots()[m];
        let (a, b) = splits[m];
        let gap = 1.0 / (2.0 * config.n as f64 * interp.evaluate(roots.midpoint(m)));
        let residual = (actual - a).abs();
        let defect = (a + b - gap).abs();
        resid_max = resid_max.max(residual);
        defect_max = defect_max.max(defect);
        rows.push(vec![m as f64, actual, a, residual, defect]);
    }
    let csv = out_dir.join("predict_check.csv");
    write_csv(&csv, &PREDICT_HEADER, &rows)?;

    let checks = vec![
        CheckOutcome::new(
            "prediction_sums_exact",
            defect_max <= config.tolerances.prediction_sum_abs,
            format!("max defect {defect_max:.3e}"),
        ),
        CheckOutcome::new(
            "prediction_residual_finite",
            resid_max.is_finite(),
            format!("max residual {resid_max:.3e}"),
        ),
    ];
    Ok(SubOutput {
        checks,
        outputs: vec![csv],
        abort: None,
    })
}
