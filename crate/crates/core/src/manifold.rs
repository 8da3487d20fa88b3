//! Bernoulli information geometry.
//!
//! Points are Bernoulli parameters `q ∈ (0, 1)`. The chart
//! `θ = 2·arcsin(√q) ∈ (0, π)` is an isometry onto a flat interval: pulling
//! the Fisher metric back gives `g(q)·(dq/dθ)² = 1`.

use std::f64::consts::PI;

use crate::error::{domain, Result};

/// Minimum distance kept from the chart singularities at the ends.
pub const DOMAIN_GUARD: f64 = 1e-15;

/// A Bernoulli parameter strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct BernoulliPoint(f64);

impl BernoulliPoint {
    pub fn new(q: f64) -> Result<Self> {
        if q.is_finite() && (DOMAIN_GUARD..=1.0 - DOMAIN_GUARD).contains(&q) {
            Ok(Self(q))
        } else {
            Err(domain(format!(
                "q = {q} is outside the open interval (0, 1)"
            )))
        }
    }

    /// The centre of the space, `q = 1/2`.
    pub fn centre() -> Self {
        Self(0.5)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// An angle strictly inside `(0, π)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ThetaPoint(f64);

impl ThetaPoint {
    pub fn new(theta: f64) -> Result<Self> {
        if theta.is_finite() && (DOMAIN_GUARD..=PI - DOMAIN_GUARD).contains(&theta) {
            Ok(Self(theta))
        } else {
            Err(domain(format!(
                "theta = {theta} is outside the open interval (0, π)"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// `1 / (q(1-q))`; at least 4, attained at the centre.
pub fn fisher_metric(q: BernoulliPoint) -> f64 {
    let q = q.0;
    1.0 / (q * (1.0 - q))
}

/// Raw chart map `q ↦ 2·arcsin(√q)` on the closed interval `[0, 1]`.
///
/// Above `q = 1/2` the complement form is used so that `1 - q` (exact there)
/// drives the result and no precision is lost near `θ = π`.
pub fn chart_theta(q: f64) -> f64 {
    if q <= 0.5 {
        2.0 * q.sqrt().asin()
    } else {
        PI - 2.0 * (1.0 - q).sqrt().asin()
    }
}

/// Raw inverse chart `θ ↦ sin²(θ/2)`.
pub fn chart_q(theta: f64) -> f64 {
    let s = (0.5 * theta).sin();
    s * s
}

pub fn to_theta(q: BernoulliPoint) -> ThetaPoint {
    ThetaPoint(chart_theta(q.0))
}

pub fn from_theta(theta: ThetaPoint) -> BernoulliPoint {
    BernoulliPoint(chart_q(theta.0))
}

/// `D_KL(a ‖ b) = a ln(a/b) + (1-a) ln((1-a)/(1-b))` in nats.
pub fn kl_divergence(a: BernoulliPoint, b: BernoulliPoint) -> f64 {
    let (a, b) = (a.0, b.0);
    a * (a / b).ln() + (1.0 - a) * ((1.0 - a) / (1.0 - b)).ln()
}

/// The quadratic stand-in `(q' - q)²` for the KL potential.
///
/// This is the working potential of the quadratic-KL oscillator; it omits the
/// `1/(2q'(1-q'))` factor of the true second-order expansion of the KL divergence.
pub fn kl_quadratic(qprime: BernoulliPoint, q: BernoulliPoint) -> f64 {
    (qprime.0 - q.0).powi(2)
}

/// Geodesic squared distance `½(θ₁ - θ₂)²` with `θ = 2·arcsin(√q)`.
pub fn geodesic_sqdist(q1: BernoulliPoint, q2: BernoulliPoint) -> f64 {
    0.5 * (chart_theta(q1.0) - chart_theta(q2.0)).powi(2)
}
