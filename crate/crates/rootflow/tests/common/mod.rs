#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use rootflow::coupling::{DensitySpec, ExperimentConfig, Tolerances};
use rootflow::numeric::reduce_angle;
use rootflow::spectral::GridFunction;
use rootflow::trigpoly::RootConfiguration;

pub fn assert_close(a: f64, b: f64, tol: f64) {
    assert!(
        (a - b).abs() <= tol,
        "expected {a} ~ {b} within {tol}, diff {}",
        (a - b).abs()
    );
}

/// Compare root sets up to the +-pi representative of a wraparound root.
pub fn assert_cyclically_close(a: &[f64], b: &[f64], tol: f64) {
    assert_eq!(a.len(), b.len());
    for &x in a {
        let nearest = b
            .iter()
            .map(|&y| reduce_angle(x - y).abs())
            .fold(f64::INFINITY, f64::min);
        assert!(nearest <= tol, "root {x} has no partner within {tol} ({nearest})");
    }
}

/// Sorted distinct roots with a minimum cyclic gap of `1e-3 / n`.
pub fn random_configuration(rng: &mut ChaCha8Rng, n: usize) -> RootConfiguration {
    loop {
        let mut roots: Vec<f64> = (0..2 * n).map(|_| rng.gen_range(-PI..PI)).collect();
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let min_gap = (0..2 * n)
            .map(|m| {
                if m + 1 < 2 * n {
                    roots[m + 1] - roots[m]
                } else {
                    roots[0] + TAU - roots[2 * n - 1]
                }
            })
            .fold(f64::INFINITY, f64::min);
        if min_gap > 1e-3 / n as f64 {
            return RootConfiguration::new(roots, rng.gen_range(0.5..2.0)).unwrap();
        }
    }
}

/// Roots drawn as jittered quantiles of a random smooth positive density
/// whose deviation from uniform scales like 1/n.
///
/// The product form has modulus envelope exp(2n (u - ubar) * ln|sin|), so a
/// fixed density deviation makes |p| swing over e^(O(n)) across the circle
/// and pushes pointwise coefficient-space comparisons below the double
/// precision floor; the 1/n scaling keeps the envelope bounded while the
/// configurations stay genuinely non-uniform and jittered.
pub fn random_smooth_configuration(rng: &mut ChaCha8Rng, n: usize) -> RootConfiguration {
    let cap = (1.5 / n as f64).min(0.45);
    let a = rng.gen_range(-cap..cap);
    let b = 0.5 * rng.gen_range(-cap..cap);
    let phi1 = rng.gen_range(-PI..PI);
    let phi2 = rng.gen_range(-PI..PI);
    let u = GridFunction::from_fn(512, |x| {
        (1.0 + a * (x - phi1).cos() + b * (2.0 * x - phi2).cos()) / TAU
    })
    .unwrap();
    let cdf = rootflow::spectral::CumulativeDensity::new(&u).unwrap();
    let two_n = 2 * n;
    let roots: Vec<f64> = (1..=two_n)
        .map(|j| {
            let jitter = rng.gen_range(-0.35..0.35);
            cdf.invert((j as f64 - 0.5 + jitter) / two_n as f64).unwrap()
        })
        .collect();
    let mut roots = roots;
    roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
    RootConfiguration::new(roots, rng.gen_range(0.5..2.0)).unwrap()
}

/// Mean-zero band-limited function with per-mode amplitude decay `1/k`.
pub fn random_band_limited(rng: &mut ChaCha8Rng, grid: usize, modes: usize) -> GridFunction {
    let coeffs: Vec<(f64, f64)> = (0..modes)
        .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    GridFunction::from_fn(grid, |x| {
        coeffs
            .iter()
            .enumerate()
            .map(|(j, &(a, b))| {
                let k = (j + 1) as f64;
                (a * (k * x).cos() + b * (k * x).sin()) / k
            })
            .sum()
    })
    .unwrap()
}

/// Strictly positive band-limited function.
pub fn random_positive_function(
    rng: &mut ChaCha8Rng,
    grid: usize,
    modes: usize,
) -> GridFunction {
    let f = random_band_limited(rng, grid, modes);
    let lift = f.sup_norm() + rng.gen_range(0.1..1.0);
    GridFunction::new(f.samples().iter().map(|v| v + lift).collect()).unwrap()
}

pub fn cosine_density(grid: usize, amplitude: f64) -> GridFunction {
    GridFunction::from_fn(grid, |x| (1.0 + amplitude * x.cos()) / TAU).unwrap()
}

pub fn cosine_config(n: usize, amplitude: f64, t_final: f64) -> ExperimentConfig {
    ExperimentConfig {
        n,
        grid_size: None,
        density: DensitySpec::Cosine { amplitude },
        perturbation: None,
        t_final,
        checkpoint_stride: 1,
        snapshot_times: vec![],
        sweep_n: None,
        out_dir: None,
        tolerances: Tolerances::default(),
    }
}
