//! Leading-order error-propagation kernel of the root flow.
//!
//! One differentiation step propagates the error vector through a diffusive
//! operator with coefficients
//! `kappa(j, m) = 1 / (16 pi^2 n^2 (u^2 + Hu^2) sin^2((y_m - x_j)/2))`,
//! where `y_m` is the gap-`m` root after one differentiation and `u`, `Hu`
//! are evaluated at `x_m`. Rows are positive, decay like `|m - j|^-2` in the
//! cyclic index distance, and their sums stay strictly below 1; the closed
//! form `F(a) = sin^2(a) (1/3 + 1/a^2)` with `a = arccot(Hu/u)` majorizes the
//! row sum.

use std::f64::consts::PI;

use crate::coupling::ErrorVector;
use crate::error::{Error, Result};
use crate::numeric::{reduce_angle, KahanSum};
use crate::spectral::GridFunction;
use crate::trigpoly::RootConfiguration;

/// One row of the error-propagation kernel centered at gap `m`.
#[derive(Clone, Debug)]
pub struct KernelRow {
    center: usize,
    kappa: Vec<f64>,
    row_sum: f64,
}

impl KernelRow {
    pub fn center(&self) -> usize {
        self.center
    }

    /// Coefficient `kappa(j, m)`; zero at `j = m` by convention.
    pub fn kappa(&self, j: usize) -> f64 {
        self.kappa[j]
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.kappa
    }

    /// `S = sum_{j != m} kappa(j, m)`.
    pub fn row_sum(&self) -> f64 {
        self.row_sum
    }

    /// Cyclic index distance used by the `|m - j|^-2` envelope.
    pub fn cyclic_distance(&self, j: usize) -> usize {
        let k = self.kappa.len();
        let d = self.center.abs_diff(j);
        d.min(k - d)
    }
}

/// Fill row `m` of the kernel from the closed form, with `u` and `Hu`
/// interpolated at `x_m` of the configuration at time `t`.
///
/// `roots_next` must be the differentiation of `roots_t`; the interlacing of
/// the two configurations is what keeps every denominator nonzero.
pub fn kappa_row(
    roots_t: &RootConfiguration,
    roots_next: &RootConfiguration,
    u: &GridFunction,
    m: usize,
) -> Result<KernelRow> {
    let k = roots_t.num_roots();
    if roots_next.num_roots() != k {
        return Err(Error::InvalidRoots(
            "kernel row needs configurations of equal size".into(),
        ));
    }
    if m >= k {
        return Err(Error::InvalidRoots(format!("row index {m} out of range")));
    }
    // The sorted output is the per-gap roots rotated by one slot when the
    // wraparound-gap root crossed pi.
    let wrapped = roots_next.roots()[0] < roots_t.roots()[0];
    let y_m = if wrapped {
        roots_next.roots()[(m + 1) % k]
    } else {
        roots_next.roots()[m]
    };

    let x_m = roots_t.roots()[m];
    let uu = u.interpolate(x_m);
    let hh = u.hilbert().interpolate(x_m);
    let n = roots_t.degree() as f64;
    let prefactor = 16.0 * PI * PI * n * n * (uu * uu + hh * hh);

    let mut kappa = vec![0.0; k];
    let mut sum = KahanSum::new();
    for (j, &x_j) in roots_t.roots().iter().enumerate() {
        if j == m {
            continue;
        }
        let s = (0.5 * reduce_angle(y_m - x_j)).sin();
        if s == 0.0 {
            return Err(Error::InvalidRoots(format!(
                "coincident roots y_{m} and x_{j} in kernel row"
            )));
        }
        let value = 1.0 / (prefactor * s * s);
        kappa[j] = value;
        sum += value;
    }
    Ok(KernelRow {
        center: m,
        kappa,
        row_sum: sum.value(),
    })
}

/// Row-sum majorant `F(a) = sin^2(a) (1/3 + 1/a^2)`, decreasing on `(0, pi)`
/// with `F(0+) = 1` and `F(pi) = 0`.
pub fn f_bound(a: f64) -> Result<f64> {
    if !(a > 0.0 && a < PI) {
        return Err(Error::OutOfDomain(a));
    }
    let s = a.sin();
    Ok(s * s * (1.0 / 3.0 + 1.0 / (a * a)))
}

/// `sum_j E_j u(xbar_j)` with compensated summation; small by mass
/// conservation when the density has total mass 1.
pub fn mean_compatibility(errors: &ErrorVector, u: &GridFunction) -> f64 {
    let interp = u.interpolant();
    let mut acc = KahanSum::new();
    for (&e, &mid) in errors.entries().iter().zip(errors.midpoints()) {
        acc += e * interp.evaluate(mid);
    }
    acc.value()
}
