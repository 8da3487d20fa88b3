//! Quantised dynamics in Bernoulli space.
//!
//! With `p̂ = -iħ√(q(1-q)) d/dq` the kinetic operator is `-(ħ²/2m)Δ`, which in
//! the chart `θ = 2·arcsin(√q)` is the particle-in-a-box operator on `(0, π)`.
//! The quadratic-KL oscillator centred at `q' = 1/2` has potential
//! `(k/8)cos²θ` there and its Schrödinger equation is a Mathieu equation.

mod mathieu;
mod shooting;

pub use mathieu::{
    approx_condition, mathieu_c, mathieu_params, mathieu_s, oscillator_energy_condition,
    oscillator_level, oscillator_levels, oscillator_levels_approx, oscillator_wavefunction,
    MathieuParams,
};
pub use shooting::{Level, Wavefunction, LEVEL_TOL, SHOOTING_TOL};

use std::f64::consts::PI;

use crate::error::{domain, Result};
use crate::manifold::{chart_q, BernoulliPoint};
use crate::spectral::{psi, EigenMode};

/// Mass `m` (nerts), spring constant `k` (nerts/s²), action scale `ħ` and
/// anchor `q'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    m: f64,
    k: f64,
    hbar: f64,
    qprime: BernoulliPoint,
}

impl PhysicalParams {
    pub fn new(m: f64, k: f64, hbar: f64, qprime: f64) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(domain(format!("mass must be positive, got {m}")));
        }
        if !(k >= 0.0 && k.is_finite()) {
            return Err(domain(format!(
                "spring constant must be non-negative, got {k}"
            )));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(domain(format!("hbar must be positive, got {hbar}")));
        }
        Ok(Self {
            m,
            k,
            hbar,
            qprime: BernoulliPoint::new(qprime)?,
        })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn qprime(&self) -> BernoulliPoint {
        self.qprime
    }

    pub fn with_k(self, k: f64) -> Result<Self> {
        Self::new(self.m, k, self.hbar, self.qprime.value())
    }

    /// `2m/ħ²`, the factor in front of `E - V` in `ψ'' = -(2m/ħ²)(E - V)ψ`.
    pub(crate) fn stiffness(&self) -> f64 {
        2.0 * self.m / (self.hbar * self.hbar)
    }
}

impl Default for PhysicalParams {
    /// `m = k = 8`, `ħ = 1`, `q' = 1/2`.
    fn default() -> Self {
        Self {
            m: 8.0,
            k: 8.0,
            hbar: 1.0,
            qprime: BernoulliPoint::centre(),
        }
    }
}

/// How an energy was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelMethod {
    RootFound,
    Formula,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyLevel {
    pub n: u32,
    pub exact: f64,
    /// Closed-form approximation paired with this level, when one exists.
    pub approx: Option<f64>,
    pub method: LevelMethod,
    /// Certified bracket for root-found levels.
    pub bracket: Option<(f64, f64)>,
}

/// Levels ordered by `n` with strictly increasing, positive energies.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergySpectrum {
    levels: Vec<EnergyLevel>,
}

impl EnergySpectrum {
    pub fn new(levels: Vec<EnergyLevel>) -> Result<Self> {
        if levels
            .windows(2)
            .any(|w| w[0].n >= w[1].n || w[0].exact >= w[1].exact)
        {
            return Err(domain("energy levels must be strictly increasing in n"));
        }
        if let Some(l) = levels.iter().find(|l| !(l.exact > 0.0)) {
            return Err(domain(format!(
                "level n = {} has non-positive energy {}",
                l.n, l.exact
            )));
        }
        Ok(Self { levels })
    }

    pub fn levels(&self) -> &[EnergyLevel] {
        &self.levels
    }

    pub fn energies(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.exact).collect()
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
}

/// `Eₙ = ħ²n²/(2m)`.
pub fn free_particle_energy(p: &PhysicalParams, n: u32) -> Result<f64> {
    let mode = EigenMode::new(n)?;
    Ok(p.hbar * p.hbar * mode.eigenvalue() / (2.0 * p.m))
}

/// The free-particle eigenfunction, identical to the Laplace-Beltrami mode `Ψₙ`.
pub fn free_particle_wavefunction(n: u32) -> Result<impl Fn(f64) -> f64> {
    EigenMode::new(n)?;
    Ok(move |q: f64| psi(n, q).unwrap_or(f64::NAN))
}

/// Dirichlet spectrum of `-(ħ²/2m)ψ'' + V(θ)ψ = Eψ` on `(0, π)` for `n = 1..=n_max`.
///
/// `V` must be bounded on `[0, π]`.
pub fn shooting_solve<V>(p: &PhysicalParams, potential: V, n_max: u32) -> Result<EnergySpectrum>
where
    V: Fn(f64) -> f64,
{
    if n_max == 0 {
        return Err(domain("n_max must be at least 1"));
    }
    let (v_min, v_mean) = potential_bounds(&potential)?;
    let s = p.stiffness();
    let at = |e: f64| shooting::profile(&|t: f64| s * (e - potential(t)), SHOOTING_TOL);
    let levels = (1..=n_max)
        .map(|n| {
            let seed = free_particle_energy(p, n)? + v_mean;
            let level = shooting::find_level(at, n, seed, v_min)?;
            Ok(EnergyLevel {
                n,
                exact: level.energy,
                approx: None,
                method: LevelMethod::RootFound,
                bracket: Some(level.bracket),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    EnergySpectrum::new(levels)
}

/// Normalised eigenfunction of the shooting problem at a known eigenvalue.
pub fn shooting_wavefunction<V>(
    p: &PhysicalParams,
    potential: V,
    n: u32,
    energy: f64,
) -> Result<Wavefunction<impl Fn(f64) -> f64>>
where
    V: Fn(f64) -> f64,
{
    let s = p.stiffness();
    Wavefunction::new(move |t: f64| s * (energy - potential(t)), n, energy)
}

fn potential_bounds<V: Fn(f64) -> f64>(potential: &V) -> Result<(f64, f64)> {
    const SAMPLES: usize = 2048;
    let mut min = f64::INFINITY;
    let mut sum = 0.0;
    for i in 0..=SAMPLES {
        let theta = PI * i as f64 / SAMPLES as f64;
        let v = potential(theta);
        if !v.is_finite() {
            return Err(domain(format!(
                "potential is not finite at theta = {theta}"
            )));
        }
        min = min.min(v);
        sum += v;
    }
    // Margin below the sampled minimum; the ground level sits at least ħ²/2m higher.
    Ok((min - 1e-9 * (1.0 + min.abs()), sum / (SAMPLES + 1) as f64))
}

/// Potentials in the θ chart for [`shooting_solve`].
pub mod potentials {
    use super::*;
    use crate::manifold::chart_theta;

    /// `(k/2)(sin²(θ/2) - q')²`, the quadratic-KL potential at any anchor.
    pub fn kl_quadratic(p: &PhysicalParams) -> impl Fn(f64) -> f64 {
        let (k, qp) = (p.k, p.qprime.value());
        move |t| 0.5 * k * (chart_q(t) - qp).powi(2)
    }

    /// `(k/8)cos²θ`, the quadratic-KL potential at `q' = 1/2`.
    pub fn mathieu(p: &PhysicalParams) -> impl Fn(f64) -> f64 {
        let k = p.k;
        move |t| 0.125 * k * t.cos().powi(2)
    }

    /// `(k/2)·½(θ - θ')²`, the geodesic oscillator.
    pub fn geodesic(p: &PhysicalParams) -> impl Fn(f64) -> f64 {
        let (k, tp) = (p.k, chart_theta(p.qprime.value()));
        move |t| 0.25 * k * (t - tp).powi(2)
    }

    /// `½k(θ - π/2)²`, an ordinary harmonic well centred in the chart.
    pub fn harmonic(p: &PhysicalParams) -> impl Fn(f64) -> f64 {
        let k = p.k;
        move |t| 0.5 * k * (t - 0.5 * PI).powi(2)
    }
}

/// Coefficient mismatches between the Bernoulli Mathieu equation and the
/// quantum pendulum after `η = 2θ`, with `k := 64mgl³`.
///
/// Returns `(km/(8ħ²) - 8m²gl³/ħ², (16mE - km)/(8ħ²) - (8mEl² - 8m²gl³)/ħ²)`.
/// Both vanish for every `E` exactly when `l = 1/2`.
pub fn pendulum_map_residuals(m: f64, g: f64, l: f64, energy: f64, hbar: f64) -> (f64, f64) {
    let h2 = hbar * hbar;
    let k = 64.0 * m * g * l.powi(3);
    let pendulum_q = 8.0 * m * m * g * l.powi(3) / h2;
    let cos_term = k * m / (8.0 * h2) - pendulum_q;
    let constant_term = (16.0 * m * energy - k * m) / (8.0 * h2)
        - (8.0 * m * energy * l * l - 8.0 * m * m * g * l.powi(3)) / h2;
    (cos_term, constant_term)
}
