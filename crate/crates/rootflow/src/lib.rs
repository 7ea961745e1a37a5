//! Numerical laboratory for the root-flow PDE on the circle,
//! `du/dt + (1/pi) d/dx arctan(Hu/u) = 0`, and the exact dynamics of roots of
//! trigonometric polynomials under repeated differentiation.
//!
//! The library is organized around the coupling between the two systems:
//!
//! * [`spectral`] — periodic grid functions, Fourier-multiplier transforms
//!   (Hilbert transform, half-Laplacian, derivative), off-grid interpolation
//!   and quantile inversion of positive densities.
//! * [`trigpoly`] — root representation `c * prod sin((x - x_j)/2)`, the
//!   cotangent log-derivative identity, one differentiation step per cyclic
//!   gap, and an independent coefficient-space oracle.
//! * [`pde`] — pseudospectral RK4 integration of the PDE in conservative
//!   flux form, with scalar observables.
//! * [`coupling`] — quantile initialization, the per-gap error vector
//!   against the density, the arccot gap-split prediction, and the full
//!   alternating experiment.
//! * [`kernel`] — the leading-order error-propagation kernel, its row-sum
//!   majorant `F(a)`, and the mean-compatibility sum.
//! * [`cli`] — config ingestion, rate fitting, and the deterministic
//!   CSV/JSON experiment runner behind the `rootflow` binary.

pub mod cli;
pub mod coupling;
pub mod error;
pub mod kernel;
pub mod numeric;
pub mod pde;
pub mod spectral;
pub mod trigpoly;

pub use error::{Error, Result};
