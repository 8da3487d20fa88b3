//! Laplace-Beltrami spectral machinery on Bernoulli space.
//!
//! In the chart `θ = 2·arcsin(√q)` the operator is `d²/dθ²` with Dirichlet
//! conditions at `θ = 0, π`, so the orthonormal eigenbasis (weight
//! `1/√(q(1-q))`) is `Ψₙ(q) = √(2/π)·sin(nθ)` with eigenvalue `-n²`.

use std::f64::consts::{FRAC_2_PI, PI};
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::manifold::{chart_q, chart_theta, BernoulliPoint};
use crate::numerics::{finite_diff_second, integrate_weighted};

/// Default finite-difference step (in θ) for [`laplace_beltrami`].
pub const DEFAULT_LB_STEP: f64 = 1e-4;
/// Default truncation of [`greens_series`]; the neglected tail is below `2/(πN)`.
pub const DEFAULT_GREENS_TERMS: u32 = 10_000;

/// A Laplace-Beltrami eigenmode; eigenvalue of `-Δ` is `n²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EigenMode {
    n: u32,
}

impl EigenMode {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(domain("mode index must be at least 1"));
        }
        Ok(Self { n })
    }

    pub fn index(self) -> u32 {
        self.n
    }

    pub fn eigenvalue(self) -> f64 {
        f64::from(self.n).powi(2)
    }

    pub fn eval(self, q: f64) -> f64 {
        FRAC_2_PI.sqrt() * (f64::from(self.n) * chart_theta(q)).sin()
    }
}

/// `Ψₙ(q) = √(2/π)·sin(2n·arcsin(√q))`, extended by zero to `q ∈ {0, 1}`.
pub fn psi(n: u32, q: f64) -> Result<f64> {
    let mode = EigenMode::new(n)?;
    if !(0.0..=1.0).contains(&q) {
        return Err(domain(format!("q = {q} is outside [0, 1]")));
    }
    Ok(mode.eval(q))
}

/// `Δf(q)` evaluated as `d²/dθ² f(sin²(θ/2))` by a central difference.
///
/// The step is shrunk if needed so that both stencil points stay inside the chart.
pub fn laplace_beltrami<F>(f: F, q: BernoulliPoint, h: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let theta = chart_theta(q.value());
    let h = h.min(0.5 * theta).min(0.5 * (PI - theta));
    finite_diff_second(|t| f(chart_q(t)), theta, h).map_err(|e| match e {
        Error::Evaluation { x } => Error::Evaluation { x: chart_q(x) },
        other => other,
    })
}

/// A finite expansion `Σ Aₙ Ψₙ` with strictly increasing mode indices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SpectralExpansion {
    terms: Vec<(u32, f64)>,
    truncation: u32,
}

impl SpectralExpansion {
    pub fn new(terms: Vec<(u32, f64)>) -> Result<Self> {
        let truncation = terms.last().map_or(0, |t| t.0);
        Self::with_truncation(terms, truncation)
    }

    /// Terms plus the truncation order they were computed to.
    pub fn with_truncation(terms: Vec<(u32, f64)>, truncation: u32) -> Result<Self> {
        if terms.iter().any(|t| t.0 == 0) {
            return Err(domain("mode indices start at 1"));
        }
        if terms.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(domain("mode indices must be strictly increasing"));
        }
        if terms.last().is_some_and(|t| t.0 > truncation) {
            return Err(domain("truncation order below the highest stored mode"));
        }
        Ok(Self { terms, truncation })
    }

    /// Coefficients for modes `1, 2, ..., len`.
    pub fn from_coefficients(coefficients: &[f64]) -> Self {
        let terms: Vec<(u32, f64)> = coefficients
            .iter()
            .enumerate()
            .map(|(i, &a)| (i as u32 + 1, a))
            .collect();
        Self {
            truncation: terms.len() as u32,
            terms,
        }
    }

    pub fn terms(&self) -> &[(u32, f64)] {
        &self.terms
    }

    pub fn truncation(&self) -> u32 {
        self.truncation
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of mode `n` (zero if not stored).
    pub fn coefficient(&self, n: u32) -> f64 {
        self.terms
            .binary_search_by_key(&n, |t| t.0)
            .map_or(0.0, |i| self.terms[i].1)
    }

    /// Coefficient 2-norm, equal to the weighted L² norm of the function.
    pub fn norm(&self) -> f64 {
        self.terms.iter().map(|t| t.1 * t.1).sum::<f64>().sqrt()
    }

    /// `Σ Aₙ Ψₙ(q)` for any `q ∈ [0, 1]`.
    pub fn value_at(&self, q: f64) -> f64 {
        let theta = chart_theta(q);
        FRAC_2_PI.sqrt()
            * self
                .terms
                .iter()
                .map(|&(n, a)| a * (f64::from(n) * theta).sin())
                .sum::<f64>()
    }
}

pub fn evaluate(e: &SpectralExpansion, q: BernoulliPoint) -> f64 {
    e.value_at(q.value())
}

/// Generalised Fourier coefficients `Aₙ = ⟨f, Ψₙ⟩_w` for `n = 1..=n_max`.
pub fn expand<F>(f: F, n_max: u32, tol: f64) -> Result<SpectralExpansion>
where
    F: Fn(f64) -> f64,
{
    if n_max == 0 {
        return Err(domain("expansion order must be at least 1"));
    }
    let terms = (1..=n_max)
        .map(|n| {
            let mode = EigenMode { n };
            integrate_weighted(|q| f(q) * mode.eval(q), tol).map(|a| (n, a))
        })
        .collect::<Result<Vec<_>>>()?;
    SpectralExpansion::with_truncation(terms, n_max)
}

/// Time dependence used by [`heat_evolve`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DecayLaw {
    /// `e^{-n²t}`, as required by the eigenvalues `-n²`.
    #[default]
    Consistent,
    /// `e^{-nt}`: rates linear in `n`, kept for comparison with the eigenvalue-consistent law.
    Paper,
}

impl FromStr for DecayLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "consistent" => Ok(Self::Consistent),
            "paper" => Ok(Self::Paper),
            other => Err(domain(format!(
                "unknown decay law '{other}' (expected consistent or paper)"
            ))),
        }
    }
}

pub fn heat_evolve(e0: &SpectralExpansion, t: f64, law: DecayLaw) -> Result<SpectralExpansion> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(domain(format!(
            "heat evolution needs a finite t >= 0, got {t}"
        )));
    }
    let terms = e0
        .terms
        .iter()
        .map(|&(n, a)| {
            let rate = match law {
                DecayLaw::Consistent => f64::from(n).powi(2),
                DecayLaw::Paper => f64::from(n),
            };
            (n, a * (-rate * t).exp())
        })
        .collect();
    Ok(SpectralExpansion {
        terms,
        truncation: e0.truncation,
    })
}

/// Expansion with complex coefficients, produced by [`wave_evolve`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WaveExpansion {
    terms: Vec<(u32, Complex64)>,
}

impl WaveExpansion {
    pub fn terms(&self) -> &[(u32, Complex64)] {
        &self.terms
    }

    pub fn norm(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.1.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn value_at(&self, q: f64) -> Complex64 {
        let theta = chart_theta(q);
        FRAC_2_PI.sqrt()
            * self
                .terms
                .iter()
                .map(|&(n, a)| a * (f64::from(n) * theta).sin())
                .sum::<Complex64>()
    }
}

/// Multiply coefficient `n` by `e^{-int}`.
pub fn wave_evolve(e0: &SpectralExpansion, t: f64) -> WaveExpansion {
    let terms = e0
        .terms
        .iter()
        .map(|&(n, a)| (n, a * Complex64::from_polar(1.0, -f64::from(n) * t)))
        .collect();
    WaveExpansion { terms }
}

/// Partial sum `Σ_{n=1}^{N} Ψₙ(q)Ψₙ(q')/n²`.
pub fn greens_series(q: BernoulliPoint, qprime: BernoulliPoint, terms: u32) -> Result<f64> {
    if terms == 0 {
        return Err(domain("series needs at least one term"));
    }
    let (a, b) = (chart_theta(q.value()), chart_theta(qprime.value()));
    // Sum small terms first.
    let sum: f64 = (1..=terms)
        .rev()
        .map(|n| {
            let n = f64::from(n);
            (n * a).sin() * (n * b).sin() / (n * n)
        })
        .sum();
    Ok(FRAC_2_PI * sum)
}

/// Closed form of the Green's function series,
/// `4·arccos(√q')·arcsin(√q)/π + 2[arcsin(√q') - arcsin(√q)]·H[arcsin(√q) - arcsin(√q')]`,
/// with `H(0) = 0`.
pub fn greens_closed(q: BernoulliPoint, qprime: BernoulliPoint) -> f64 {
    greens_closed_raw(q.value(), qprime.value())
}

pub(crate) fn greens_closed_raw(q: f64, qprime: f64) -> f64 {
    let alpha = 0.5 * chart_theta(q);
    let beta = 0.5 * chart_theta(qprime);
    let first = 4.0 * (0.5 * PI - beta) * alpha / PI;
    let step = if alpha - beta > 0.0 {
        2.0 * (beta - alpha)
    } else {
        0.0
    };
    first + step
}
