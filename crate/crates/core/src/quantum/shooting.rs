//! Dirichlet eigenproblems on `θ ∈ (0, π)` by shooting.
//!
//! Every problem here has the form `y'' = -c(θ; λ)·y` with `c` increasing in
//! the spectral parameter `λ`. Starting from `y(0) = 0, y'(0) = 1`, Sturm
//! comparison makes the number of zeros of `y` in `(0, π]` a non-decreasing
//! step function of `λ` that jumps by one at each eigenvalue. Brackets are
//! therefore certified by counting zeros, and refined with Brent's method on
//! `y(π; λ)`.

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};
use crate::manifold::chart_theta;
use crate::numerics::{
    find_root_detailed, integrate_weighted, solve_ivp_with, Bracket, IvpOptions, Sampling,
};

/// IVP tolerance for all eigenfunction integrations.
pub const SHOOTING_TOL: f64 = 1e-12;
/// Abscissa tolerance for eigenvalue roots.
pub const LEVEL_TOL: f64 = 1e-12;

const MAX_STEP: f64 = 0.1;
const MAX_WIDENINGS: usize = 64;
const MAX_NARROWINGS: usize = 200;

/// End state of the odd solution and its zero count on `(0, π]`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Profile {
    pub end_value: f64,
    pub zeros: usize,
}

fn rhs<C: Fn(f64) -> f64>(coef: &C) -> impl FnMut(f64, &[f64], &mut [f64]) + '_ {
    move |t, y, dy| {
        dy[0] = y[1];
        dy[1] = -coef(t) * y[0];
    }
}

/// Integrate `y'' = -coef(θ)·y` from `θ = 0` with the given initial state.
pub(crate) fn propagate<C: Fn(f64) -> f64>(
    coef: &C,
    y0: [f64; 2],
    theta: f64,
    tol: f64,
) -> Result<[f64; 2]> {
    let opts = IvpOptions::new(tol).max_step(MAX_STEP);
    let sol = solve_ivp_with(rhs(coef), &y0, (0.0, theta), &opts, |_, _| false)?;
    Ok([sol.y[0], sol.y[1]])
}

pub(crate) fn profile<C: Fn(f64) -> f64>(coef: &C, tol: f64) -> Result<Profile> {
    let opts = IvpOptions::new(tol)
        .max_step(MAX_STEP)
        .sampling(Sampling::Steps);
    let sol = solve_ivp_with(rhs(coef), &[0.0, 1.0], (0.0, PI), &opts, |_, _| false)?;
    Ok(Profile {
        end_value: sol.y[0],
        zeros: count_sign_changes(sol.samples.iter().map(|s| s.1[0])),
    })
}

fn count_sign_changes(values: impl Iterator<Item = f64>) -> usize {
    let mut last = 0.0f64;
    let mut changes = 0;
    for v in values.filter(|v| *v != 0.0) {
        if last != 0.0 && v.signum() != last.signum() {
            changes += 1;
        }
        last = v;
    }
    changes
}

/// A located eigenvalue with the bracket that certifies it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    pub n: u32,
    pub energy: f64,
    /// Zero count is `n - 1` at `bracket.0` and `n` at `bracket.1`.
    pub bracket: (f64, f64),
}

/// Find the `n`-th eigenvalue (`n ≥ 1`) of the family `coef_at(λ)`.
///
/// `seed` is a guess for the level and `floor` a value of `λ` known to lie
/// below the whole spectrum (no zeros on `(0, π]`).
pub(crate) fn find_level<P>(profile_at: P, n: u32, seed: f64, floor: f64) -> Result<Level>
where
    P: Fn(f64) -> Result<Profile>,
{
    if n == 0 {
        return Err(domain("level index must be at least 1"));
    }
    let target = n as usize;
    let search = || Error::Search { n, seed };
    let count = |e: f64| profile_at(e).map(|p| p.zeros);

    let mut width = (0.5 * seed.abs()).max(1e-3);
    let mut lo = (seed - width).max(floor);
    let mut widenings = 0;
    while count(lo)? >= target {
        if lo <= floor || widenings == MAX_WIDENINGS {
            return Err(search());
        }
        width *= 2.0;
        lo = (seed - width).max(floor);
        widenings += 1;
    }
    let mut width = (0.5 * seed.abs()).max(1e-3);
    let mut hi = (seed + width).max(lo + width);
    let mut widenings = 0;
    while count(hi)? < target {
        if widenings == MAX_WIDENINGS {
            return Err(search());
        }
        width *= 2.0;
        hi = (seed + width).max(lo + width);
        widenings += 1;
    }

    // Narrow until the bracket contains exactly this level.
    let mut narrowings = 0;
    loop {
        let (c_lo, c_hi) = (count(lo)?, count(hi)?);
        if c_lo == target - 1 && c_hi == target {
            break;
        }
        if narrowings == MAX_NARROWINGS {
            return Err(search());
        }
        let mid = 0.5 * (lo + hi);
        if count(mid)? >= target {
            hi = mid;
        } else {
            lo = mid;
        }
        narrowings += 1;
    }

    let end = |e: f64| profile_at(e).map(|p| p.end_value);
    let bracket = Bracket::new(lo, hi, end(lo)?, end(hi)?)?;
    let mut failure = None;
    let root = find_root_detailed(
        |e| match end(e) {
            Ok(v) => v,
            Err(err) => {
                failure.get_or_insert(err);
                f64::NAN
            }
        },
        &bracket,
        LEVEL_TOL,
    );
    if let Some(err) = failure {
        return Err(err);
    }
    Ok(Level {
        n,
        energy: root?.x,
        bracket: (lo, hi),
    })
}

/// A normalised Dirichlet eigenfunction `ψ(θ)` of `y'' = -coef(θ)·y`.
///
/// Values are produced by integrating from the nearest stored checkpoint, so
/// every evaluation carries the IVP accuracy rather than interpolation error.
pub struct Wavefunction<C> {
    coef: C,
    checkpoints: Vec<(f64, [f64; 2])>,
    scale: f64,
    n: u32,
    energy: f64,
}

const CHECKPOINTS: usize = 64;

impl<C: Fn(f64) -> f64> Wavefunction<C> {
    /// Build from the coefficient at the eigenvalue; normalises
    /// `⟨ψ, ψ⟩_w = ∫₀^π ψ² dθ = 1` with the weighted quadrature.
    pub(crate) fn new(coef: C, n: u32, energy: f64) -> Result<Self> {
        let times: Vec<f64> = (0..=CHECKPOINTS)
            .map(|i| PI * i as f64 / CHECKPOINTS as f64)
            .collect();
        let opts = IvpOptions::new(SHOOTING_TOL)
            .max_step(MAX_STEP)
            .sampling(Sampling::At(times));
        let sol = solve_ivp_with(rhs(&coef), &[0.0, 1.0], (0.0, PI), &opts, |_, _| false)?;
        let checkpoints = sol
            .samples
            .into_iter()
            .map(|(t, y)| (t, [y[0], y[1]]))
            .collect();
        let mut wf = Self {
            coef,
            checkpoints,
            scale: 1.0,
            n,
            energy,
        };
        let norm2 = integrate_weighted(
            |q| wf.raw(chart_theta(q)).unwrap_or(f64::NAN).powi(2),
            1e-12,
        )?;
        wf.scale = 1.0 / norm2.sqrt();
        Ok(wf)
    }

    fn raw(&self, theta: f64) -> Result<f64> {
        if !(0.0..=PI).contains(&theta) {
            return Err(domain(format!("theta = {theta} is outside [0, π]")));
        }
        let idx = ((theta / PI * CHECKPOINTS as f64).floor() as usize).min(CHECKPOINTS);
        let (start, state) = self.checkpoints[idx];
        if theta == start {
            return Ok(state[0]);
        }
        let shifted = |t: f64| (self.coef)(t + start);
        Ok(propagate(&shifted, state, theta - start, SHOOTING_TOL)?[0])
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn eval_theta(&self, theta: f64) -> Result<f64> {
        Ok(self.scale * self.raw(theta)?)
    }

    /// `ψ(q)` for `q ∈ [0, 1]`.
    pub fn eval(&self, q: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&q) {
            return Err(domain(format!("q = {q} is outside [0, 1]")));
        }
        self.eval_theta(chart_theta(q))
    }

    /// Sign changes of `ψ` over `resolution` equally spaced interior angles.
    pub fn interior_zeros(&self, resolution: usize) -> Result<usize> {
        let values = (1..resolution)
            .map(|i| self.raw(PI * i as f64 / resolution as f64))
            .collect::<Result<Vec<_>>>()?;
        Ok(count_sign_changes(values.into_iter()))
    }
}

impl<C> std::fmt::Debug for Wavefunction<C> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Wavefunction")
            .field("n", &self.n)
            .field("energy", &self.energy)
            .finish()
    }
}
