//! Trigonometric polynomials in root representation.
//!
//! A degree-n trigonometric polynomial with 2n distinct roots on the circle
//! factors as `c * prod_j sin((x - x_j)/2)`. Differentiating it gives
//! `p'(x) = (1/2) p(x) * sum_j cot((x - x_j)/2)`, so the roots of `p'` are the
//! zeros of the cotangent sum, one in each cyclic gap between consecutive
//! roots. [`differentiate_roots`] advances the configuration one step of this
//! flow; [`derivative_roots_oracle`] recomputes the same roots from Fourier
//! coefficients and a sign scan, as an independent verification path.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::{reduce_angle, KahanSum};
use crate::spectral::GridFunction;

const POLE_THRESHOLD: f64 = 1e-15;
const MAX_NEWTON_ITERATIONS: usize = 200;
const MIN_GAP: f64 = 1e-12;
/// Threshold above which the product form switches to log-magnitude
/// accumulation and the per-gap solves run in parallel.
const LOG_PRODUCT_THRESHOLD: usize = 64;

/// Sorted angular roots of a degree-2n trigonometric polynomial, with the
/// differentiation step counter and the leading factor of the product form.
///
/// Each differentiation multiplies the leading factor by O(n), so after many
/// steps it leaves f64 range; it is stored as sign and log magnitude.
#[derive(Clone, Debug)]
pub struct RootConfiguration {
    roots: Vec<f64>,
    step_index: u64,
    leading_sign: f64,
    leading_log: f64,
}

impl RootConfiguration {
    /// Build from roots already sorted strictly increasing in `(-pi, pi]`.
    pub fn new(roots: Vec<f64>, leading_factor: f64) -> Result<Self> {
        Self::with_step(roots, leading_factor, 0)
    }

    pub fn with_step(roots: Vec<f64>, leading_factor: f64, step_index: u64) -> Result<Self> {
        if !leading_factor.is_finite() || leading_factor == 0.0 {
            return Err(Error::InvalidRoots(format!(
                "leading factor must be finite and nonzero, got {leading_factor}"
            )));
        }
        Self::from_parts(
            roots,
            leading_factor.signum(),
            leading_factor.abs().ln(),
            step_index,
        )
    }

    pub(crate) fn from_parts(
        roots: Vec<f64>,
        leading_sign: f64,
        leading_log: f64,
        step_index: u64,
    ) -> Result<Self> {
        let m = roots.len();
        if m < 2 || m % 2 != 0 {
            return Err(Error::InvalidRoots(format!(
                "need a positive even number of roots, got {m}"
            )));
        }
        if !leading_log.is_finite() || leading_sign.abs() != 1.0 {
            return Err(Error::InvalidRoots(format!(
                "degenerate leading factor (sign {leading_sign}, log {leading_log})"
            )));
        }
        if roots.iter().any(|r| !r.is_finite()) {
            return Err(Error::InvalidRoots("non-finite root".into()));
        }
        if roots[0] <= -PI || roots[m - 1] > PI {
            return Err(Error::InvalidRoots(format!(
                "roots must lie in (-pi, pi], got range [{}, {}]",
                roots[0],
                roots[m - 1]
            )));
        }
        if roots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidRoots("roots must be strictly increasing".into()));
        }
        Ok(Self {
            roots,
            step_index,
            leading_sign,
            leading_log,
        })
    }

    /// Build from arbitrary angles: reduce to `(-pi, pi]`, sort, validate.
    pub fn from_angles(angles: Vec<f64>, leading_factor: f64, step_index: u64) -> Result<Self> {
        if !leading_factor.is_finite() || leading_factor == 0.0 {
            return Err(Error::InvalidRoots(format!(
                "leading factor must be finite and nonzero, got {leading_factor}"
            )));
        }
        let mut roots: Vec<f64> = angles.into_iter().map(reduce_angle).collect();
        roots.sort_by(f64::total_cmp);
        Self::from_parts(
            roots,
            leading_factor.signum(),
            leading_factor.abs().ln(),
            step_index,
        )
    }

    /// Same polynomial scale and step counter, new root angles.
    pub fn with_roots(&self, angles: Vec<f64>) -> Result<Self> {
        let mut roots: Vec<f64> = angles.into_iter().map(reduce_angle).collect();
        roots.sort_by(f64::total_cmp);
        Self::from_parts(roots, self.leading_sign, self.leading_log, self.step_index)
    }

    /// Number of roots, `2n`.
    pub fn num_roots(&self) -> usize {
        self.roots.len()
    }

    /// Polynomial degree `n`.
    pub fn degree(&self) -> usize {
        self.roots.len() / 2
    }

    pub fn roots(&self) -> &[f64] {
        &self.roots
    }

    pub fn step_index(&self) -> u64 {
        self.step_index
    }

    /// Root-flow time `t = k / (2n)`.
    pub fn time(&self) -> f64 {
        self.step_index as f64 / self.num_roots() as f64
    }

    /// Leading factor as a plain value; overflows to +-inf once repeated
    /// differentiation has pushed the log magnitude past f64 range.
    pub fn leading_factor(&self) -> f64 {
        self.leading_sign * self.leading_log.exp()
    }

    /// Sign of the leading factor (+1 or -1).
    pub fn leading_sign(&self) -> f64 {
        self.leading_sign
    }

    /// Natural log of the magnitude of the leading factor.
    pub fn leading_log_magnitude(&self) -> f64 {
        self.leading_log
    }

    /// Cyclic gap `m`, i.e. `x_{m+1} - x_m` with the wraparound gap
    /// `x_1 + 2 pi - x_{2n}` at `m = 2n - 1`.
    pub fn gap(&self, m: usize) -> f64 {
        let k = self.roots.len();
        if m + 1 < k {
            self.roots[m + 1] - self.roots[m]
        } else {
            self.roots[0] + TAU - self.roots[k - 1]
        }
    }

    pub fn min_gap(&self) -> f64 {
        (0..self.roots.len())
            .map(|m| self.gap(m))
            .fold(f64::INFINITY, f64::min)
    }

    /// Midpoint of cyclic gap `m`, reduced to `(-pi, pi]`.
    pub fn midpoint(&self, m: usize) -> f64 {
        reduce_angle(self.roots[m] + 0.5 * self.gap(m))
    }
}

/// Sum of cotangents `sum_j cot((y - x_j)/2)` with differences reduced to
/// `(-pi, pi]`, accumulated with compensated summation.
pub fn log_derivative_sum(cfg: &RootConfiguration, y: f64) -> Result<f64> {
    let mut acc = KahanSum::new();
    for (j, &x) in cfg.roots().iter().enumerate() {
        let d = reduce_angle(y - x);
        if d.abs() < POLE_THRESHOLD {
            return Err(Error::PoleAtRoot {
                index: j,
                distance: d.abs(),
            });
        }
        let half = 0.5 * d;
        acc += half.cos() / half.sin();
    }
    Ok(acc.value())
}

/// Cotangent sum and its derivative `-1/2 sum_j 1/sin^2((y - x_j)/2)`.
fn sum_and_slope(cfg: &RootConfiguration, y: f64) -> Result<(f64, f64)> {
    let mut sum = KahanSum::new();
    let mut slope = KahanSum::new();
    for (j, &x) in cfg.roots().iter().enumerate() {
        let d = reduce_angle(y - x);
        if d.abs() < POLE_THRESHOLD {
            return Err(Error::PoleAtRoot {
                index: j,
                distance: d.abs(),
            });
        }
        let half = 0.5 * d;
        let s = half.sin();
        sum += half.cos() / s;
        slope += -0.5 / (s * s);
    }
    Ok((sum.value(), slope.value()))
}

/// `p(x) = c * prod_j sin((x - x_j)/2)`. Uses log-magnitude accumulation with
/// sign tracking once the root count exceeds 64.
///
/// The half-angle differences are deliberately not reduced mod 2 pi: each
/// factor is anti-periodic, so per-factor reduction would flip signs at the
/// root antipodes. The full product of 2n factors is 2 pi periodic as is.
pub fn evaluate_product(cfg: &RootConfiguration, x: f64) -> f64 {
    if cfg.num_roots() <= LOG_PRODUCT_THRESHOLD && cfg.leading_log_magnitude().abs() < 200.0 {
        let mut p = cfg.leading_factor();
        for &r in cfg.roots() {
            p *= (0.5 * (x - r)).sin();
        }
        p
    } else {
        let (sign, log_mag) = product_sign_log(cfg.roots(), x);
        if sign == 0.0 {
            0.0
        } else {
            cfg.leading_sign() * sign * (cfg.leading_log_magnitude() + log_mag).exp()
        }
    }
}

fn product_sign_log(roots: &[f64], x: f64) -> (f64, f64) {
    let mut log_mag = KahanSum::new();
    let mut sign = 1.0;
    for &r in roots {
        let s = (0.5 * (x - r)).sin();
        if s == 0.0 {
            return (0.0, f64::NEG_INFINITY);
        }
        if s < 0.0 {
            sign = -sign;
        }
        log_mag += s.abs().ln();
    }
    (sign, log_mag.value())
}

/// Roots of `p'`, one per cyclic gap, in gap order and *unwrapped*: the entry
/// for gap `m` lies in `(x_m, x_m + gap_m)` and may exceed `pi` for the
/// wraparound gap.
pub fn derivative_roots_in_gaps(cfg: &RootConfiguration) -> Result<Vec<f64>> {
    let min_gap = cfg.min_gap();
    if min_gap < MIN_GAP {
        return Err(Error::InvalidRoots(format!(
            "minimum cyclic gap {min_gap:.3e} below {MIN_GAP:.0e}"
        )));
    }
    let k = cfg.num_roots();
    if k >= LOG_PRODUCT_THRESHOLD {
        (0..k)
            .into_par_iter()
            .map(|m| solve_gap(cfg, m))
            .collect()
    } else {
        (0..k).map(|m| solve_gap(cfg, m)).collect()
    }
}

/// Safeguarded Newton on the strictly decreasing cotangent sum inside gap `m`.
fn solve_gap(cfg: &RootConfiguration, m: usize) -> Result<f64> {
    let a = cfg.roots()[m];
    let gap = cfg.gap(m);
    let b = a + gap;

    // Bracket strictly inside the gap; the sum blows up to +inf/-inf at the
    // endpoints. Shrink the offset if a very skewed configuration puts the
    // root closer to an endpoint than the initial offset.
    let mut offset = (1e-6 * gap).max(1e-14).min(0.25 * gap);
    let (mut lo, mut hi) = (a + offset, b - offset);
    let mut bracketed = false;
    for _ in 0..6 {
        let s_lo = log_derivative_sum(cfg, lo).map_err(|_| no_convergence(m))?;
        let s_hi = log_derivative_sum(cfg, hi).map_err(|_| no_convergence(m))?;
        if s_lo > 0.0 && s_hi < 0.0 {
            bracketed = true;
            break;
        }
        offset = (offset * 1e-3).max(4e-15);
        if s_lo <= 0.0 {
            lo = a + offset;
        }
        if s_hi >= 0.0 {
            hi = b - offset;
        }
        if lo >= hi {
            return Err(no_convergence(m));
        }
    }
    if !bracketed {
        return Err(no_convergence(m));
    }

    let tol = 1e-13 * gap.max(1.0);
    let mut y = 0.5 * (a + b);
    for _ in 0..MAX_NEWTON_ITERATIONS {
        let (s, ds) = sum_and_slope(cfg, y).map_err(|_| no_convergence(m))?;
        if s == 0.0 {
            return Ok(y);
        }
        if s > 0.0 {
            lo = y;
        } else {
            hi = y;
        }
        let newton = y - s / ds;
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let step = (next - y).abs();
        y = next;
        if step < tol {
            return Ok(y);
        }
    }
    Err(no_convergence(m))
}

fn no_convergence(gap: usize) -> Error {
    Error::GapNoConvergence {
        gap,
        iterations: MAX_NEWTON_ITERATIONS,
    }
}

/// One differentiation step of the root flow: the 2n roots of `p'`, sorted,
/// with the step counter advanced and the leading factor matched so that the
/// product form of the output agrees with `p'`.
pub fn differentiate_roots(cfg: &RootConfiguration) -> Result<RootConfiguration> {
    let raw = derivative_roots_in_gaps(cfg)?;
    configuration_from_gap_roots(cfg, &raw)
}

/// Assemble a sorted configuration from unwrapped per-gap derivative roots.
pub(crate) fn configuration_from_gap_roots(
    cfg: &RootConfiguration,
    raw: &[f64],
) -> Result<RootConfiguration> {
    let mut roots: Vec<f64> = raw.iter().map(|&y| reduce_angle(y)).collect();
    roots.sort_by(f64::total_cmp);

    // Match p' inside the first output gap to fix the new leading factor, in
    // log magnitude so the probe is stable for any 2n. An irrational fraction
    // keeps the probe off the input roots (the exact midpoint hits one for a
    // uniform lattice); fall back to other fractions if a pole is struck.
    let span = roots[1] - roots[0];
    let mut matched = None;
    for fraction in [0.618_033_988_749_895, 0.381_966_011_250_105, 0.271, 0.5, 0.729] {
        let probe = roots[0] + fraction * span;
        let cot_sum = match log_derivative_sum(cfg, probe) {
            Ok(s) => s,
            Err(_) => continue,
        };
        let (sign_p, log_p) = product_sign_log(cfg.roots(), probe);
        let (sign_q, log_q) = product_sign_log(&roots, probe);
        if sign_p == 0.0 || sign_q == 0.0 || cot_sum == 0.0 {
            continue;
        }
        let half_sum = 0.5 * cot_sum;
        let sign = sign_p * half_sum.signum() * cfg.leading_sign() * sign_q;
        let log_c = cfg.leading_log_magnitude() + log_p + half_sum.abs().ln() - log_q;
        matched = Some((sign, log_c));
        break;
    }
    let (sign, log_c) = matched.ok_or_else(|| {
        Error::InvalidRoots("no admissible probe point while matching leading factor".into())
    })?;

    RootConfiguration::from_parts(roots, sign, log_c, cfg.step_index() + 1)
}

const ORACLE_MAX_ROOTS: usize = 512;

/// Independent verification path for [`differentiate_roots`]: sample the
/// product form on a fine grid, differentiate coefficient-wise, locate sign
/// changes of `p'` on a dense scan and refine each bracket by bisection.
pub fn derivative_roots_oracle(cfg: &RootConfiguration) -> Result<RootConfiguration> {
    let k = cfg.num_roots();
    if k > ORACLE_MAX_ROOTS {
        return Err(Error::InvalidRoots(format!(
            "oracle is for small instances (2n <= {ORACLE_MAX_ROOTS}), got {k}"
        )));
    }
    let grid = (16 * cfg.degree()).next_power_of_two().max(128);
    let p = GridFunction::from_fn(grid, |x| evaluate_product(cfg, x))
        .expect("product form is finite");
    let dp = p.derivative();
    let interp = dp.interpolant();

    let mut scan = 32 * k;
    let mut found: Option<Vec<(f64, f64)>> = None;
    for _ in 0..3 {
        let brackets = scan_sign_changes(&interp, scan);
        if brackets.len() == k {
            found = Some(brackets);
            break;
        }
        scan *= 2;
    }
    let brackets = found.ok_or(Error::OracleScanMismatch {
        found: scan_sign_changes(&interp, scan / 2).len(),
        expected: k,
    })?;

    let raw: Vec<f64> = brackets
        .into_iter()
        .map(|(lo, hi)| bisect_root(&interp, lo, hi))
        .collect();
    configuration_from_gap_roots(cfg, &raw)
}

fn scan_sign_changes(dp: &crate::spectral::Interpolant, points: usize) -> Vec<(f64, f64)> {
    // Offset the scan lattice so it cannot land exactly on a symmetric root.
    let offset = 0.382 * TAU / points as f64;
    let at = |i: usize| -PI + offset + TAU * i as f64 / points as f64;
    let mut brackets = Vec::new();
    let mut prev = dp.evaluate(at(0));
    for i in 1..=points {
        let x = at(i);
        let cur = dp.evaluate(x);
        if prev == 0.0 {
            brackets.push((at(i - 1), at(i - 1)));
        } else if prev.signum() != cur.signum() && cur != 0.0 {
            brackets.push((at(i - 1), x));
        }
        prev = cur;
    }
    brackets
}

fn bisect_root(dp: &crate::spectral::Interpolant, mut lo: f64, mut hi: f64) -> f64 {
    if lo == hi {
        return lo;
    }
    let f_lo = dp.evaluate(lo);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let f_mid = dp.evaluate(mid);
        if f_mid == 0.0 || hi - lo < 1e-14 {
            return mid;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
