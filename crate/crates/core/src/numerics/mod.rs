//! Numerical kernels with no knowledge of the Bernoulli geometry.
//!
//! All routines are pure functions of their arguments and can be called
//! from several threads at once.

mod ode;
mod quadrature;
mod roots;

pub use ode::{solve_ivp, solve_ivp_with, IvpOptions, IvpSolution, Sampling};
pub use quadrature::{integrate, integrate_weighted, QuadratureOptions};
pub use roots::{find_root, find_root_detailed, Bracket, Root, DEFAULT_ROOT_TOL};

use crate::error::{domain, Error, Result};

/// An ordered set of points strictly inside `(lo, hi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
    lo: f64,
    hi: f64,
}

impl Grid {
    pub fn new(points: Vec<f64>, lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(domain(format!(
                "grid bounds lo = {lo} must be below hi = {hi}"
            )));
        }
        if points.is_empty() {
            return Err(domain("grid must contain at least one point"));
        }
        if points.iter().any(|&x| !(x > lo && x < hi)) {
            return Err(domain(format!(
                "grid points must lie strictly inside ({lo}, {hi})"
            )));
        }
        if points.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(domain("grid points must be strictly increasing"));
        }
        Ok(Self { points, lo, hi })
    }

    /// `count` equally spaced points from `lo + margin` to `hi - margin`.
    ///
    /// With `count == 1` the single point is the midpoint.
    pub fn uniform(lo: f64, hi: f64, count: usize, margin: f64) -> Result<Self> {
        if count == 0 {
            return Err(domain("grid must contain at least one point"));
        }
        if !(margin > 0.0) || 2.0 * margin >= hi - lo {
            return Err(domain(format!(
                "margin {margin} does not fit inside ({lo}, {hi})"
            )));
        }
        let points = if count == 1 {
            vec![0.5 * (lo + hi)]
        } else {
            let start = lo + margin;
            let step = (hi - lo - 2.0 * margin) / (count - 1) as f64;
            (0..count).map(|i| start + i as f64 * step).collect()
        };
        Self::new(points, lo, hi)
    }

    /// Points `i / (count + 1)` scaled into `(lo, hi)` for `i = 1..=count`.
    pub fn interior(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(domain("grid must contain at least one point"));
        }
        let step = (hi - lo) / (count + 1) as f64;
        Self::new((1..=count).map(|i| lo + i as f64 * step).collect(), lo, hi)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }
}

/// Central second difference `(f(x-h) - 2f(x) + f(x+h)) / h²`.
pub fn finite_diff_second<F>(f: F, x: f64, h: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(h > 0.0) || !h.is_finite() {
        return Err(domain(format!(
            "finite-difference step must be positive, got {h}"
        )));
    }
    let eval = |x: f64| {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation { x })
        }
    };
    let (lo, mid, hi) = (eval(x - h)?, eval(x)?, eval(x + h)?);
    Ok((lo - 2.0 * mid + hi) / (h * h))
}
