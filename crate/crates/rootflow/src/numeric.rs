//! Small numeric utilities shared across the engine.

use std::f64::consts::{PI, TAU};
use std::ops::AddAssign;

/// Kahan compensated accumulator for sums with heavy cancellation.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    err: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn value(self) -> f64 {
        self.sum
    }
}

impl AddAssign<f64> for KahanSum {
    fn add_assign(&mut self, rhs: f64) {
        let y = rhs - self.err;
        let t = self.sum + y;
        self.err = (t - self.sum) - y;
        self.sum = t;
    }
}

impl From<KahanSum> for f64 {
    fn from(k: KahanSum) -> f64 {
        k.sum
    }
}

/// Reduce an angle difference to the principal interval (-pi, pi].
pub fn reduce_angle(d: f64) -> f64 {
    let r = d.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}
