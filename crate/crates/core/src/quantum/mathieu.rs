//! The quadratic-KL oscillator at `q' = 1/2` as a Mathieu problem.
//!
//! In canonical form `y'' + (a - 2q_M cos 2θ)y = 0` with
//! `a = (16mE - km)/(8ħ²)` and `q_M = km/(16ħ²)`. The odd solution `S`
//! (`S(0) = 0, S'(0) = 1`) satisfies the Dirichlet condition at `θ = 0`, and
//! the energy levels are the zeros of `E ↦ S(π)`.

use std::f64::consts::PI;

use super::shooting::{self, propagate, Wavefunction, SHOOTING_TOL};
use super::{EnergyLevel, EnergySpectrum, LevelMethod, PhysicalParams};
use crate::error::{domain, Result};

/// Characteristic pair `(a, q_M)` of `y'' + (a - 2q_M cos 2θ)y = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MathieuParams {
    pub a: f64,
    pub q: f64,
}

impl MathieuParams {
    pub fn new(a: f64, q: f64) -> Result<Self> {
        if !(a.is_finite() && q.is_finite()) {
            return Err(domain("Mathieu parameters must be finite"));
        }
        Ok(Self { a, q })
    }

    fn coefficient(self) -> impl Fn(f64) -> f64 {
        move |t: f64| self.a - 2.0 * self.q * (2.0 * t).cos()
    }
}

pub fn mathieu_params(p: &PhysicalParams, energy: f64) -> MathieuParams {
    let (m, k, h2) = (p.m(), p.k(), p.hbar() * p.hbar());
    MathieuParams {
        a: (16.0 * m * energy - k * m) / (8.0 * h2),
        q: k * m / (16.0 * h2),
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if (0.0..=PI).contains(&theta) {
        Ok(())
    } else {
        Err(domain(format!("theta = {theta} is outside [0, π]")))
    }
}

/// Odd solution: `S(0) = 0`, `S'(0) = 1`.
pub fn mathieu_s(mp: MathieuParams, theta: f64) -> Result<f64> {
    check_theta(theta)?;
    Ok(propagate(&mp.coefficient(), [0.0, 1.0], theta, SHOOTING_TOL)?[0])
}

/// Even solution: `C(0) = 1`, `C'(0) = 0`.
pub fn mathieu_c(mp: MathieuParams, theta: f64) -> Result<f64> {
    check_theta(theta)?;
    Ok(propagate(&mp.coefficient(), [1.0, 0.0], theta, SHOOTING_TOL)?[0])
}

fn require_centred(p: &PhysicalParams) -> Result<()> {
    if p.qprime().value() == 0.5 {
        Ok(())
    } else {
        Err(domain(format!(
            "the Mathieu reduction needs q' = 1/2 (got {}); use shooting_solve for other anchors",
            p.qprime().value()
        )))
    }
}

/// `S(π)` at the Mathieu parameters of energy `E`; zeros are energy levels.
pub fn oscillator_energy_condition(p: &PhysicalParams, energy: f64) -> Result<f64> {
    require_centred(p)?;
    mathieu_s(mathieu_params(p, energy), PI)
}

/// `Eₙ ≈ (km + 8n²ħ² + 16nħ² + 8ħ²)/(16m)`.
pub fn oscillator_levels_approx(p: &PhysicalParams, n: u32) -> f64 {
    let (m, k, h2) = (p.m(), p.k(), p.hbar() * p.hbar());
    let n = f64::from(n);
    (k * m + 8.0 * n * n * h2 + 16.0 * n * h2 + 8.0 * h2) / (16.0 * m)
}

/// `cos(¼π(√((32Em - 2km)/ħ²) - 2))`, the small-`q_M` form of `S(π)`.
pub fn approx_condition(p: &PhysicalParams, energy: f64) -> Result<f64> {
    let (m, k, h2) = (p.m(), p.k(), p.hbar() * p.hbar());
    let radicand = (32.0 * energy * m - 2.0 * k * m) / h2;
    if !(radicand >= 0.0) {
        return Err(domain(format!(
            "negative radicand {radicand} at E = {energy}"
        )));
    }
    Ok((0.25 * PI * (radicand.sqrt() - 2.0)).cos())
}

fn profile_at(p: &PhysicalParams) -> impl Fn(f64) -> Result<shooting::Profile> + '_ {
    move |e| shooting::profile(&mathieu_params(p, e).coefficient(), SHOOTING_TOL)
}

// The potential (k/8)cos²θ is non-negative, so E = 0 (a = -2q_M) is below
// every level.
const ENERGY_FLOOR: f64 = 0.0;

/// The `n`-th exact level, seeded by the approximate formula.
pub fn oscillator_level(p: &PhysicalParams, n: u32) -> Result<shooting::Level> {
    require_centred(p)?;
    shooting::find_level(
        profile_at(p),
        n,
        oscillator_levels_approx(p, n),
        ENERGY_FLOOR,
    )
}

/// Root-found levels `n = 1..=n_max`, each paired with the approximate formula at the same `n`.
pub fn oscillator_levels(p: &PhysicalParams, n_max: u32) -> Result<EnergySpectrum> {
    if n_max == 0 {
        return Err(domain("n_max must be at least 1"));
    }
    let levels = (1..=n_max)
        .map(|n| {
            let level = oscillator_level(p, n)?;
            Ok(EnergyLevel {
                n,
                exact: level.energy,
                approx: Some(oscillator_levels_approx(p, n)),
                method: LevelMethod::RootFound,
                bracket: Some(level.bracket),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    EnergySpectrum::new(levels)
}

/// `ψₙ(q) = S(a(Eₙ), q_M, 2·arcsin(√q))`, normalised in the weighted inner product.
pub fn oscillator_wavefunction(
    p: &PhysicalParams,
    n: u32,
) -> Result<Wavefunction<impl Fn(f64) -> f64>> {
    let level = oscillator_level(p, n)?;
    Wavefunction::new(
        mathieu_params(p, level.energy).coefficient(),
        n,
        level.energy,
    )
}
