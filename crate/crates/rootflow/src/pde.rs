//! Time integration of the root-flow PDE in conservative flux form,
//! `du/dt = -(1/pi) d/dx arctan(Hu/u)`, on the periodic grid.
//!
//! The nonlinearity is evaluated pointwise in physical space, the flux is
//! truncated by the 2/3 rule before the spectral derivative, and time is
//! advanced by classical RK4 with an automatic step from the linearized
//! symbol. Because the right-hand side is a perfect spatial derivative the
//! mean is conserved to rounding per step.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::spectral::GridFunction;

/// Strictly positive density together with its time.
#[derive(Clone, Debug)]
pub struct PdeState {
    u: GridFunction,
    t: f64,
}

impl PdeState {
    pub fn new(u: GridFunction, t: f64) -> Result<Self> {
        let min_u = u.min_value();
        if min_u <= 0.0 {
            return Err(Error::PositivityLoss { min_u });
        }
        Ok(Self { u, t })
    }

    pub fn u(&self) -> &GridFunction {
        &self.u
    }

    pub fn t(&self) -> f64 {
        self.t
    }
}

/// Scalar diagnostics of a state at one time.
#[derive(Clone, Copy, Debug)]
pub struct ObservableRecord {
    pub t: f64,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// Amplitude `V = max - min`.
    pub amplitude: f64,
    /// Sup norms of the first three spatial derivatives.
    pub derivative_sup: [f64; 3],
    pub hilbert_sup: f64,
}

/// `-(1/pi) d/dx arctan(Hu/u)`, with the principal arctan branch (the
/// derivative is branch-independent) and 2/3-rule dealiasing of the flux.
pub fn rhs(u: &GridFunction) -> Result<GridFunction> {
    let min_u = u.min_value();
    if min_u <= 0.0 {
        return Err(Error::PositivityLoss { min_u });
    }
    let hu = u.hilbert();
    let flux: Vec<f64> = u
        .samples()
        .iter()
        .zip(hu.samples())
        .map(|(&ui, &hi)| (hi / ui).atan() / PI)
        .collect();
    let flux = GridFunction::new(flux)?;
    let d = flux.dealiased_derivative();
    GridFunction::new(d.samples().iter().map(|v| -v).collect())
}

/// Largest admissible RK4 step for the current state:
/// `0.8 * 2 / lambda_max` with `lambda_max = (N/2) (1/(pi min u) + max |psi|)`,
/// `psi = Hu / (u^2 + Hu^2)`.
pub fn stability_dt(u: &GridFunction) -> f64 {
    let min_u = u.min_value();
    let hu = u.hilbert();
    let mut psi_max: f64 = 0.0;
    for (&ui, &hi) in u.samples().iter().zip(hu.samples()) {
        psi_max = psi_max.max((hi / (ui * ui + hi * hi)).abs());
    }
    let lambda = (u.len() as f64 / 2.0) * (1.0 / (PI * min_u) + psi_max);
    0.8 * 2.0 / lambda
}

/// One classical RK4 step. Errors if `dt` is not positive, exceeds the
/// stability bound, or positivity is lost in any substage.
pub fn step(state: &PdeState, dt: f64) -> Result<PdeState> {
    if !(dt > 0.0) {
        return Err(Error::Config(format!("time step must be positive, got {dt}")));
    }
    // 10% slack: the driver re-estimates the bound only every 10 steps.
    let bound = stability_dt(&state.u);
    if dt > 1.1 * bound {
        return Err(Error::UnstableTimeStep { dt, bound });
    }

    let u = &state.u;
    let k1 = rhs(u)?;
    let k2 = rhs(&axpy(u, 0.5 * dt, &k1))?;
    let k3 = rhs(&axpy(u, 0.5 * dt, &k2))?;
    let k4 = rhs(&axpy(u, dt, &k3))?;

    let samples: Vec<f64> = (0..u.len())
        .map(|i| {
            u.samples()[i]
                + dt / 6.0
                    * (k1.samples()[i]
                        + 2.0 * k2.samples()[i]
                        + 2.0 * k3.samples()[i]
                        + k4.samples()[i])
        })
        .collect();
    PdeState::new(GridFunction::new(samples)?, state.t + dt)
}

fn axpy(u: &GridFunction, a: f64, k: &GridFunction) -> GridFunction {
    GridFunction::new(
        u.samples()
            .iter()
            .zip(k.samples())
            .map(|(&ui, &ki)| ui + a * ki)
            .collect(),
    )
    .expect("axpy preserves grid shape")
}

const ESTIMATE_INTERVAL: usize = 10;

/// Integrate to `t_target` with the automatic step, landing exactly on each
/// checkpoint, and return the states at all checkpoints.
pub fn evolve_to(state: &PdeState, t_target: f64, checkpoints: &[f64]) -> Result<Vec<PdeState>> {
    if t_target < state.t {
        return Err(Error::Config(format!(
            "t_target {t_target} earlier than state time {}",
            state.t
        )));
    }
    let slack = 1e-12 * t_target.abs().max(1.0);
    for w in checkpoints.windows(2) {
        if w[1] < w[0] {
            return Err(Error::Config("checkpoints must be sorted".into()));
        }
    }
    if let (Some(&first), Some(&last)) = (checkpoints.first(), checkpoints.last()) {
        if first < state.t - slack || last > t_target + slack {
            return Err(Error::Config(format!(
                "checkpoints [{first}, {last}] outside [{}, {t_target}]",
                state.t
            )));
        }
    }

    let mut s = state.clone();
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut dt_auto = stability_dt(&s.u);
    let mut steps = 0usize;
    let mut advance_to = |s: &mut PdeState, target: f64| -> Result<()> {
        while s.t < target - 1e-15 {
            if steps % ESTIMATE_INTERVAL == 0 {
                dt_auto = stability_dt(&s.u);
            }
            let remaining = target - s.t;
            let landing = remaining <= dt_auto;
            let dt = remaining.min(dt_auto);
            *s = step(s, dt)?;
            if landing {
                s.t = target;
            }
            steps += 1;
        }
        Ok(())
    };

    for &cp in checkpoints {
        advance_to(&mut s, cp)?;
        out.push(s.clone());
    }
    advance_to(&mut s, t_target)?;
    Ok(out)
}

/// All scalar diagnostics of a state.
pub fn observables(state: &PdeState) -> ObservableRecord {
    let u = &state.u;
    let min = u.min_value();
    let max = u.max_value();
    let mean = u.mean();
    debug_assert!(min <= mean && mean <= max);
    let d1 = u.derivative();
    let d2 = d1.derivative();
    let d3 = d2.derivative();
    ObservableRecord {
        t: state.t,
        mean,
        min,
        max,
        amplitude: max - min,
        derivative_sup: [d1.sup_norm(), d2.sup_norm(), d3.sup_norm()],
        hilbert_sup: u.hilbert().sup_norm(),
    }
}
