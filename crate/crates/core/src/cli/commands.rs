use std::f64::consts::PI;

use super::{
    Cell, Check, CliError, Command, CommonArgs, EvolveKind, Output, ShootPotential, Table, Target,
    GRID_EPSILON,
};
use crate::classical::{
    hamiltonian, integrate_trajectory_partial, reversal_error, PhaseState, PotentialKind,
    TrajectoryOptions,
};
use crate::manifold::BernoulliPoint;
use crate::numerics::Grid;
use crate::quantum::{
    approx_condition, free_particle_energy, mathieu_params, mathieu_s, oscillator_level,
    oscillator_levels_approx, potentials, shooting_solve, PhysicalParams,
};
use crate::spectral::{
    expand, greens_closed, greens_series, heat_evolve, psi, wave_evolve, DecayLaw,
    SpectralExpansion,
};

const EXPAND_TOL: f64 = 1e-12;
const FREE_PARTICLE_REL_TOL: f64 = 1e-8;
const ENERGY_DRIFT_TOL: f64 = 1e-8;
const REVERSAL_TOL: f64 = 1e-6;
const WAVE_NORM_TOL: f64 = 1e-14;

/// Run one subcommand. Never panics on bad input; failures land in [`Output::error`].
pub fn execute(command: &Command, common: &CommonArgs) -> Output {
    let result = match command {
        Command::Eigenfunctions { modes } => eigenfunctions(common, modes),
        Command::Greens { qprimes, terms } => greens(common, qprimes, *terms),
        Command::Evolve {
            kind,
            coeffs,
            initial,
            times,
            decay,
        } => evolve(
            common,
            *kind,
            coeffs,
            initial.as_deref(),
            times,
            (*decay).into(),
        ),
        Command::FreeParticle => free_particle(common),
        Command::Oscillator { condition_out } => oscillator(common, condition_out.clone()),
        Command::Shoot { potential } => shoot(common, *potential),
        Command::Trajectory {
            potential,
            q0,
            p0,
            t_end,
            dt,
            tol,
            check_reversal,
        } => {
            return trajectory(
                common,
                *potential,
                *q0,
                *p0,
                *t_end,
                *dt,
                *tol,
                *check_reversal,
            );
        }
    };
    result.unwrap_or_else(|e| Output {
        error: Some(e),
        ..Output::default()
    })
}

fn q_grid(common: &CommonArgs) -> Result<Grid, CliError> {
    if common.resolution < 2 {
        return Err(CliError::Argument("--resolution must be at least 2".into()));
    }
    Ok(Grid::uniform(0.0, 1.0, common.resolution, GRID_EPSILON)?)
}

fn single(table: Table) -> Output {
    Output {
        tables: vec![(Target::Main, table)],
        ..Output::default()
    }
}

fn eigenfunctions(common: &CommonArgs, modes: &[u32]) -> Result<Output, CliError> {
    let modes: Vec<u32> = if modes.is_empty() {
        (1..=common.nmax_or(4)?).collect()
    } else {
        modes.to_vec()
    };
    if let Some(bad) = modes.iter().find(|&&n| n == 0) {
        return Err(CliError::Argument(format!(
            "mode index must be at least 1, got {bad}"
        )));
    }
    let grid = q_grid(common)?;
    let mut table = Table::new(
        std::iter::once("q".to_string()).chain(modes.iter().map(|n| format!("psi_{n}"))),
    );
    for &q in grid.points() {
        let mut row = vec![Cell::from(q)];
        for &n in &modes {
            row.push(psi(n, q)?.into());
        }
        table.push(row);
    }
    Ok(single(table))
}

/// `"1/3"` or `"0.25"`.
pub(super) fn parse_fraction(s: &str) -> Result<f64, CliError> {
    let bad = || CliError::Argument(format!("cannot parse '{s}' as a number or fraction"));
    let value = match s.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.trim().parse().map_err(|_| bad())?;
            let den: f64 = den.trim().parse().map_err(|_| bad())?;
            num / den
        }
        None => s.trim().parse().map_err(|_| bad())?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}

fn greens(common: &CommonArgs, qprimes: &[String], terms: Option<u32>) -> Result<Output, CliError> {
    let anchors = qprimes
        .iter()
        .map(|s| Ok(BernoulliPoint::new(parse_fraction(s)?)?))
        .collect::<Result<Vec<_>, CliError>>()?;
    let grid = q_grid(common)?;
    let mut table = Table::new(
        std::iter::once("q".to_string()).chain(qprimes.iter().map(|s| format!("G_{}", s.trim()))),
    );
    for &q in grid.points() {
        let qp = BernoulliPoint::new(q)?;
        let mut row = vec![Cell::from(q)];
        for &a in &anchors {
            let g = match terms {
                Some(n) => greens_series(qp, a, n)?,
                None => greens_closed(qp, a),
            };
            row.push(g.into());
        }
        table.push(row);
    }
    Ok(single(table))
}

fn initial_expansion(
    common: &CommonArgs,
    coeffs: &[f64],
    initial: Option<&str>,
) -> Result<SpectralExpansion, CliError> {
    if !coeffs.is_empty() {
        return Ok(SpectralExpansion::from_coefficients(coeffs));
    }
    let profile = initial.unwrap_or("mode:1");
    if let Some(n) = profile.strip_prefix("mode:") {
        let n: u32 = n
            .parse()
            .map_err(|_| CliError::Argument(format!("bad mode in '{profile}'")))?;
        return Ok(SpectralExpansion::new(vec![(n, 1.0)])?);
    }
    let n_max = common.nmax_or(32)?;
    let anchor = common.params()?.qprime();
    let expansion = match profile {
        "parabola" => expand(|q| 4.0 * q * (1.0 - q), n_max, EXPAND_TOL)?,
        "tent" => expand(
            |q| greens_closed(BernoulliPoint::new(q).unwrap_or(anchor), anchor),
            n_max,
            EXPAND_TOL,
        )?,
        other => {
            return Err(CliError::Argument(format!(
                "unknown initial profile '{other}'"
            )))
        }
    };
    Ok(expansion)
}

fn evolve(
    common: &CommonArgs,
    kind: EvolveKind,
    coeffs: &[f64],
    initial: Option<&str>,
    times: &[f64],
    law: DecayLaw,
) -> Result<Output, CliError> {
    if times.is_empty() {
        return Err(CliError::Argument(
            "--times needs at least one value".into(),
        ));
    }
    let e0 = initial_expansion(common, coeffs, initial)?;
    let grid = q_grid(common)?;
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(times.len());
    let mut norms = Vec::with_capacity(times.len());
    for &t in times {
        match kind {
            EvolveKind::Heat => {
                let e = heat_evolve(&e0, t, law)?;
                norms.push(e.norm());
                columns.push(grid.points().iter().map(|&q| e.value_at(q)).collect());
            }
            EvolveKind::Wave => {
                let e = wave_evolve(&e0, t);
                norms.push(e.norm());
                columns.push(grid.points().iter().map(|&q| e.value_at(q).re).collect());
            }
        }
    }

    let mut table =
        Table::new(std::iter::once("q".to_string()).chain(times.iter().map(|t| format!("t={t}"))));
    for (i, &q) in grid.points().iter().enumerate() {
        let mut row = vec![Cell::from(q)];
        row.extend(columns.iter().map(|c| Cell::from(c[i])));
        table.push(row);
    }

    let n0 = e0.norm();
    let check = match kind {
        EvolveKind::Wave => {
            let worst = norms.iter().map(|n| (n - n0).abs()).fold(0.0, f64::max);
            Check::new(
                "wave norm",
                worst <= WAVE_NORM_TOL * n0.max(1.0),
                format!("max |Δ‖A‖| = {worst:e}"),
            )
        }
        EvolveKind::Heat => {
            // Norms must fall with t; strictly unless the profile is zero.
            let mut ok = true;
            for i in 0..times.len() {
                for j in 0..times.len() {
                    if times[i] < times[j]
                        && !(norms[j] < norms[i] || (n0 == 0.0 && norms[j] == 0.0))
                    {
                        ok = false;
                    }
                }
            }
            Check::new("heat contraction", ok, format!("norms {norms:?}"))
        }
    };
    Ok(Output {
        tables: vec![(Target::Main, table)],
        checks: vec![check],
        error: None,
    })
}

fn free_particle(common: &CommonArgs) -> Result<Output, CliError> {
    let p = common.params()?;
    let n_max = common.nmax_or(10)?;
    let spectrum = shooting_solve(&p, |_| 0.0, n_max)?;
    let mut table = Table::new(["n", "E_shooting", "E_exact", "rel_error"]);
    let mut worst = 0.0f64;
    for level in spectrum.levels() {
        let exact = free_particle_energy(&p, level.n)?;
        let rel = (level.exact - exact).abs() / exact;
        worst = worst.max(rel);
        table.push(vec![
            level.n.into(),
            level.exact.into(),
            exact.into(),
            rel.into(),
        ]);
    }
    let check = Check::new(
        "free-particle levels",
        worst <= FREE_PARTICLE_REL_TOL,
        format!("max relative error {worst:e}"),
    );
    Ok(Output {
        tables: vec![(Target::Main, table)],
        checks: vec![check],
        error: None,
    })
}

fn oscillator(
    common: &CommonArgs,
    condition_out: Option<std::path::PathBuf>,
) -> Result<Output, CliError> {
    let p = common.params()?;
    let n_max = common.nmax_or(20)?;
    let mut levels = Table::new(["n", "E_exact", "E_approx", "E_asymptotic"]);
    let asymptotic = |n: u32| f64::from(n * n) * p.hbar() * p.hbar() / (2.0 * p.m());
    let mut error = None;
    let mut top = 0.0f64;
    for n in 1..=n_max {
        match oscillator_level(&p, n) {
            Ok(level) => {
                let approx = oscillator_levels_approx(&p, n);
                top = top.max(level.energy).max(approx);
                levels.push(vec![
                    n.into(),
                    level.energy.into(),
                    approx.into(),
                    asymptotic(n).into(),
                ]);
            }
            Err(source) => {
                error = Some(CliError::Level { n, source });
                break;
            }
        }
    }

    let condition = condition_sample(
        &p,
        top.max(oscillator_levels_approx(&p, n_max)),
        common.resolution,
    )?;
    Ok(Output {
        tables: vec![
            (Target::Main, levels),
            (
                Target::Sibling {
                    suffix: "condition",
                    path: condition_out,
                },
                condition,
            ),
        ],
        checks: Vec::new(),
        error,
    })
}

/// `S(π)` and its small-`q_M` approximation over `E ∈ [k/16, E_top + ħ²/m]`.
///
/// `S(π)·√a` is included because `S ≈ sin(√a θ)/√a` when `q_M → 0`, which puts
/// it on the same scale as the cosine approximation.
fn condition_sample(p: &PhysicalParams, e_top: f64, resolution: usize) -> Result<Table, CliError> {
    if resolution < 2 {
        return Err(CliError::Argument("--resolution must be at least 2".into()));
    }
    let lo = p.k() / 16.0;
    let hi = e_top + p.hbar() * p.hbar() / p.m();
    let mut table = Table::new(["E", "S_pi", "S_pi_scaled", "approx"]);
    for i in 0..resolution {
        let e = lo + (hi - lo) * i as f64 / (resolution - 1) as f64;
        let mp = mathieu_params(p, e);
        let s = mathieu_s(mp, PI)?;
        let approx = approx_condition(p, e)?;
        table.push(vec![
            e.into(),
            s.into(),
            (s * mp.a.max(0.0).sqrt()).into(),
            approx.into(),
        ]);
    }
    Ok(table)
}

fn shoot(common: &CommonArgs, potential: ShootPotential) -> Result<Output, CliError> {
    let p = common.params()?;
    let n_max = common.nmax_or(10)?;
    let spectrum = match potential {
        ShootPotential::Free => shooting_solve(&p, |_| 0.0, n_max)?,
        ShootPotential::KlQuadratic => shooting_solve(&p, potentials::kl_quadratic(&p), n_max)?,
        ShootPotential::Mathieu => shooting_solve(&p, potentials::mathieu(&p), n_max)?,
        ShootPotential::Geodesic => shooting_solve(&p, potentials::geodesic(&p), n_max)?,
        ShootPotential::Harmonic => shooting_solve(&p, potentials::harmonic(&p), n_max)?,
    };
    let mut table = Table::new(["n", "E", "bracket_lo", "bracket_hi"]);
    for level in spectrum.levels() {
        let (lo, hi) = level.bracket.unwrap_or((f64::NAN, f64::NAN));
        table.push(vec![
            level.n.into(),
            level.exact.into(),
            lo.into(),
            hi.into(),
        ]);
    }
    Ok(single(table))
}

#[allow(clippy::too_many_arguments)]
fn trajectory(
    common: &CommonArgs,
    kind: PotentialKind,
    q0: f64,
    p0: f64,
    t_end: f64,
    dt: Option<f64>,
    tol: f64,
    check_reversal: bool,
) -> Output {
    let setup = || -> Result<(PhysicalParams, PhaseState), CliError> {
        Ok((common.params()?, PhaseState::new(q0, p0, 0.0)?))
    };
    let (params, s0) = match setup() {
        Ok(v) => v,
        Err(e) => {
            return Output {
                error: Some(e),
                ..Output::default()
            }
        }
    };
    let opts = TrajectoryOptions {
        tol,
        sample_every: dt,
    };
    let (traj, error) = integrate_trajectory_partial(s0, &params, kind, t_end, &opts);

    let mut table = Table::new(["t", "q", "p", "H"]);
    for s in &traj.samples {
        table.push(vec![
            s.t.into(),
            s.q.value().into(),
            s.p.into(),
            hamiltonian(s, &params, kind).into(),
        ]);
    }
    // A run cut short at the wall is already an error; its drift is not meaningful.
    let mut checks = Vec::new();
    if error.is_none() {
        let drift = traj.relative_energy_drift();
        checks.push(Check::new(
            "energy drift",
            drift <= ENERGY_DRIFT_TOL,
            format!("relative drift {drift:e}"),
        ));
    }
    if check_reversal && error.is_none() {
        match reversal_error(s0, &params, kind, t_end, tol) {
            Ok((dq, dp)) => checks.push(Check::new(
                "time reversal",
                dq <= REVERSAL_TOL && dp <= REVERSAL_TOL,
                format!("|Δq| = {dq:e}, |Δp| = {dp:e}"),
            )),
            Err(e) => checks.push(Check::new("time reversal", false, e.to_string())),
        }
    }
    Output {
        tables: vec![(Target::Main, table)],
        checks,
        error: error.map(CliError::from),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fractions() {
        assert_eq!(parse_fraction("1/3").unwrap(), 1.0 / 3.0);
        assert_eq!(parse_fraction(" 0.25 ").unwrap(), 0.25);
        assert!(parse_fraction("1/0").is_err());
        assert!(parse_fraction("half").is_err());
    }
}
