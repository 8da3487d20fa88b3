//! Classical and quantum dynamics on the Bernoulli information manifold.
//!
//! The manifold is the open interval `q ∈ (0, 1)` with Fisher metric
//! `g = 1 / (q(1 - q))`. In the chart `q = sin²(θ/2)` the metric is flat on
//! `θ ∈ (0, π)`, which is what every routine in this crate leans on:
//!
//! * [`numerics`] holds the domain-free kernels (weighted quadrature, an
//!   adaptive Dormand-Prince integrator, Brent root finding, finite differences).
//! * [`manifold`] has the metric, the chart, and the divergences.
//! * [`spectral`] has the Laplace-Beltrami eigenbasis, expansions, heat/wave
//!   evolution and the Green's function.
//! * [`quantum`] has the free particle, the quadratic-KL oscillator (Mathieu
//!   equation) and a generic Dirichlet shooting solver.
//! * [`classical`] integrates Hamilton's equations for the same potentials.
//! * [`cli`] is the command-line front end used by the `bernoulli` binary.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classical;
pub mod cli;
pub mod error;
pub mod manifold;
pub mod numerics;
pub mod quantum;
pub mod spectral;

pub use error::{Error, Result};
