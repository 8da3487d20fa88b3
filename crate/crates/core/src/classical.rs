//! Classical Hamiltonian motion in Bernoulli space.
//!
//! `ℋ(q, p) = q(1-q)p²/(2m) + V(q)` with conjugate momentum
//! `p = m q̇/(q(1-q))`. Hamilton's equations are integrated directly in
//! `(q, p)` with analytic forces.

use std::str::FromStr;

use crate::error::{domain, Error, Result};
use crate::manifold::{chart_theta, geodesic_sqdist, kl_divergence, kl_quadratic, BernoulliPoint};
use crate::numerics::{solve_ivp_with, IvpOptions, Sampling};
use crate::quantum::PhysicalParams;

/// Integration halts once `q` is this close to 0 or 1.
pub const BOUNDARY_GUARD: f64 = 1e-12;
pub const DEFAULT_TRAJECTORY_TOL: f64 = 1e-12;
/// The KL potential is `(k/2)·D_KL(q' ‖ q)`: anchor first, particle second.
pub const KL_ANCHOR_FIRST: bool = true;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialKind {
    Free,
    /// `(k/2)·D_KL(q' ‖ q)`.
    Kl,
    /// `(k/2)(q' - q)²`.
    KlQuadratic,
    /// `(k/2)·½(θ - θ')²`.
    Geodesic,
}

impl PotentialKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Free => "free",
            Self::Kl => "kl",
            Self::KlQuadratic => "kl_quadratic",
            Self::Geodesic => "geodesic",
        }
    }
}

impl FromStr for PotentialKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "free" => Ok(Self::Free),
            "kl" => Ok(Self::Kl),
            "kl_quadratic" => Ok(Self::KlQuadratic),
            "geodesic" => Ok(Self::Geodesic),
            other => Err(domain(format!("unknown potential '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseState {
    pub q: BernoulliPoint,
    pub p: f64,
    pub t: f64,
}

impl PhaseState {
    pub fn new(q: f64, p: f64, t: f64) -> Result<Self> {
        if !(p.is_finite() && t.is_finite()) {
            return Err(domain("phase state must be finite"));
        }
        Ok(Self {
            q: BernoulliPoint::new(q)?,
            p,
            t,
        })
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<PhaseState>,
    pub kind: PotentialKind,
    pub params: PhysicalParams,
}

impl Trajectory {
    pub fn energies(&self) -> Vec<f64> {
        self.samples
            .iter()
            .map(|s| hamiltonian(s, &self.params, self.kind))
            .collect()
    }

    /// `max |ℋ(t) - ℋ(0)| / |ℋ(0)|`, or the absolute drift when `ℋ(0) = 0`.
    pub fn relative_energy_drift(&self) -> f64 {
        let e = self.energies();
        let Some(&e0) = e.first() else { return 0.0 };
        let scale = if e0 == 0.0 { 1.0 } else { e0.abs() };
        e.iter().map(|x| (x - e0).abs() / scale).fold(0.0, f64::max)
    }

    pub fn last(&self) -> Option<&PhaseState> {
        self.samples.last()
    }
}

pub fn potential(q: BernoulliPoint, params: &PhysicalParams, kind: PotentialKind) -> f64 {
    let (k, qp) = (params.k(), params.qprime());
    match kind {
        PotentialKind::Free => 0.0,
        PotentialKind::Kl => 0.5 * k * kl_divergence(qp, q),
        PotentialKind::KlQuadratic => 0.5 * k * kl_quadratic(qp, q),
        PotentialKind::Geodesic => 0.5 * k * geodesic_sqdist(q, qp),
    }
}

/// `dV/dq`, valid for any `q` in `(0, 1)`.
fn potential_slope(q: f64, params: &PhysicalParams, kind: PotentialKind) -> f64 {
    let (k, qp) = (params.k(), params.qprime().value());
    match kind {
        PotentialKind::Free => 0.0,
        PotentialKind::Kl => 0.5 * k * ((1.0 - qp) / (1.0 - q) - qp / q),
        PotentialKind::KlQuadratic => k * (q - qp),
        PotentialKind::Geodesic => {
            0.5 * k * (chart_theta(q) - chart_theta(qp)) / (q * (1.0 - q)).sqrt()
        }
    }
}

pub fn hamiltonian(s: &PhaseState, params: &PhysicalParams, kind: PotentialKind) -> f64 {
    let q = s.q.value();
    q * (1.0 - q) * s.p * s.p / (2.0 * params.m()) + potential(s.q, params, kind)
}

#[derive(Debug, Clone, Copy)]
pub struct TrajectoryOptions {
    pub tol: f64,
    /// Record states every `dt` seconds instead of at every step.
    pub sample_every: Option<f64>,
}

impl Default for TrajectoryOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TRAJECTORY_TOL,
            sample_every: None,
        }
    }
}

/// Integrate Hamilton's equations from `s0` for `t_end` seconds.
pub fn integrate_trajectory(
    s0: PhaseState,
    params: &PhysicalParams,
    kind: PotentialKind,
    t_end: f64,
    tol: f64,
) -> Result<Trajectory> {
    let opts = TrajectoryOptions {
        tol,
        sample_every: None,
    };
    match integrate_trajectory_partial(s0, params, kind, t_end, &opts) {
        (traj, None) => Ok(traj),
        (_, Some(err)) => Err(err),
    }
}

/// Like [`integrate_trajectory`], but keeps whatever was computed before a failure.
pub fn integrate_trajectory_partial(
    s0: PhaseState,
    params: &PhysicalParams,
    kind: PotentialKind,
    t_end: f64,
    opts: &TrajectoryOptions,
) -> (Trajectory, Option<Error>) {
    let mut traj = Trajectory {
        samples: vec![s0],
        kind,
        params: *params,
    };
    if !(t_end > 0.0) || !t_end.is_finite() {
        return (
            traj,
            Some(domain(format!("t_end must be positive, got {t_end}"))),
        );
    }

    let t0 = s0.t;
    let times: Option<Vec<f64>> = match opts.sample_every {
        Some(dt) if dt > 0.0 => {
            let count = (t_end / dt).floor() as usize;
            Some(
                (1..=count)
                    .map(|i| t0 + i as f64 * dt)
                    .filter(|&t| t < t0 + t_end)
                    .collect(),
            )
        }
        Some(dt) => {
            return (
                traj,
                Some(domain(format!(
                    "sample interval must be positive, got {dt}"
                ))),
            )
        }
        None => None,
    };
    let mut ivp = IvpOptions::new(opts.tol);
    if let Some(ts) = &times {
        ivp = ivp.sampling(Sampling::At(ts.clone()));
    }

    let m = params.m();
    let rhs = |_: f64, y: &[f64], dy: &mut [f64]| {
        let (q, p) = (y[0], y[1]);
        dy[0] = q * (1.0 - q) * p / m;
        dy[1] = -(1.0 - 2.0 * q) * p * p / (2.0 * m) - potential_slope(q, params, kind);
    };

    let mut escaped = None;
    let mut next_time = 0;
    let result = {
        let samples = &mut traj.samples;
        let escaped = &mut escaped;
        let observer = |t: f64, y: &[f64]| {
            let (q, p) = (y[0], y[1]);
            if !(q > BOUNDARY_GUARD && q < 1.0 - BOUNDARY_GUARD) {
                let last = samples.last().copied().unwrap_or(s0);
                *escaped = Some(Error::BoundaryEscape {
                    t: last.t,
                    q: last.q.value(),
                    p: last.p,
                });
                return true;
            }
            let record = match &times {
                None => true,
                Some(ts) => {
                    let hit = ts.get(next_time).is_some_and(|&s| s == t);
                    if hit {
                        next_time += 1;
                    }
                    hit
                }
            };
            if record {
                if let Ok(state) = PhaseState::new(q, p, t) {
                    samples.push(state);
                }
            }
            false
        };
        solve_ivp_with(rhs, &[s0.q.value(), s0.p], (t0, t0 + t_end), &ivp, observer)
    };

    match result {
        Err(err) => {
            let err = match err {
                // Failures next to the wall are the metric blowing up.
                Error::Stiffness { .. } | Error::Divergence { .. } => {
                    let last = traj.samples.last().copied().unwrap_or(s0);
                    let q = last.q.value();
                    if q.min(1.0 - q) < 1e-6 {
                        Error::BoundaryEscape {
                            t: last.t,
                            q,
                            p: last.p,
                        }
                    } else {
                        err
                    }
                }
                other => other,
            };
            (traj, Some(err))
        }
        Ok(_) if escaped.is_some() => (traj, escaped),
        Ok(sol) => match PhaseState::new(sol.y[0], sol.y[1], sol.t) {
            Ok(state) => {
                traj.samples.push(state);
                (traj, None)
            }
            Err(_) => {
                let last = traj.samples.last().copied().unwrap_or(s0);
                (
                    traj,
                    Some(Error::BoundaryEscape {
                        t: last.t,
                        q: last.q.value(),
                        p: last.p,
                    }),
                )
            }
        },
    }
}

/// Integrate for `t_end`, flip the momentum, integrate `t_end` again, and
/// return `(|Δq|, |Δp|)` against the time-reversed start.
pub fn reversal_error(
    s0: PhaseState,
    params: &PhysicalParams,
    kind: PotentialKind,
    t_end: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    let forward = integrate_trajectory(s0, params, kind, t_end, tol)?;
    let end = *forward.last().expect("trajectory has samples");
    let flipped = PhaseState {
        p: -end.p,
        t: 0.0,
        ..end
    };
    let back = integrate_trajectory(flipped, params, kind, t_end, tol)?;
    let fin = back.last().expect("trajectory has samples");
    Ok(((fin.q.value() - s0.q.value()).abs(), (fin.p + s0.p).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(m: f64, k: f64) -> PhysicalParams {
        PhysicalParams::new(m, k, 1.0, 0.5).unwrap()
    }

    const ALL: [PotentialKind; 4] = [
        PotentialKind::Free,
        PotentialKind::Kl,
        PotentialKind::KlQuadratic,
        PotentialKind::Geodesic,
    ];

    #[test]
    fn hamiltonian_examples() {
        let s = PhaseState::new(0.5, 2.0, 0.0).unwrap();
        assert_eq!(hamiltonian(&s, &params(1.0, 0.0), PotentialKind::Free), 0.5);
        let rest = PhaseState::new(0.5, 0.0, 0.0).unwrap();
        for kind in ALL {
            assert_eq!(hamiltonian(&rest, &params(3.0, 5.0), kind), 0.0);
        }
        let s = PhaseState::new(0.25, 0.0, 0.0).unwrap();
        assert_eq!(
            hamiltonian(&s, &params(1.0, 8.0), PotentialKind::KlQuadratic),
            0.25
        );
    }

    #[test]
    fn slopes_match_finite_differences() {
        let p = PhysicalParams::new(2.0, 3.0, 1.0, 0.35).unwrap();
        for kind in ALL {
            for q in [0.1, 0.35, 0.6, 0.9] {
                let h = 1e-6;
                let v = |x: f64| potential(BernoulliPoint::new(x).unwrap(), &p, kind);
                let fd = (v(q + h) - v(q - h)) / (2.0 * h);
                assert!(
                    (potential_slope(q, &p, kind) - fd).abs() < 1e-7,
                    "{kind:?} at {q}"
                );
            }
        }
    }

    #[test]
    fn parse_kinds() {
        for kind in ALL {
            assert_eq!(kind.name().parse::<PotentialKind>().unwrap(), kind);
        }
        assert_eq!(
            "kl-quadratic".parse::<PotentialKind>().unwrap(),
            PotentialKind::KlQuadratic
        );
        assert!("spring".parse::<PotentialKind>().is_err());
    }

    #[test]
    fn free_motion_is_uniform_in_theta() {
        let p = params(1.0, 0.0);
        let s0 = PhaseState::new(0.5, 0.2, 0.0).unwrap();
        let traj =
            integrate_trajectory(s0, &p, PotentialKind::Free, 5.0, DEFAULT_TRAJECTORY_TOL).unwrap();
        // θ̇ = √(q(1-q))·p/m is conserved and θ advances linearly.
        let rate0 = 0.5 * 0.2;
        for s in &traj.samples {
            let q = s.q.value();
            let rate = (q * (1.0 - q)).sqrt() * s.p;
            assert!((rate - rate0).abs() < 1e-10);
            let theta = chart_theta(q);
            assert!((theta - (std::f64::consts::FRAC_PI_2 + rate0 * s.t)).abs() < 1e-9);
        }
    }

    #[test]
    fn quadratic_oscillation_is_symmetric() {
        let p = params(8.0, 8.0);
        let s0 = PhaseState::new(0.6, 0.0, 0.0).unwrap();
        let opts = TrajectoryOptions {
            tol: DEFAULT_TRAJECTORY_TOL,
            sample_every: Some(1e-3),
        };
        let (traj, err) =
            integrate_trajectory_partial(s0, &p, PotentialKind::KlQuadratic, 20.0, &opts);
        assert!(err.is_none());
        let qs: Vec<f64> = traj.samples.iter().map(|s| s.q.value()).collect();
        let lo = qs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = qs[1000..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!((lo - 0.4).abs() < 1e-6, "{lo}");
        assert!((hi - 0.6).abs() < 1e-6, "{hi}");
    }

    #[test]
    fn equilibrium_is_stationary() {
        let p = params(8.0, 8.0);
        for kind in ALL {
            let s0 = PhaseState::new(0.5, 0.0, 0.0).unwrap();
            let traj = integrate_trajectory(s0, &p, kind, 10.0, DEFAULT_TRAJECTORY_TOL).unwrap();
            for s in &traj.samples {
                assert_eq!((s.q.value(), s.p), (0.5, 0.0));
            }
        }
    }

    #[test]
    fn energy_and_reversibility() {
        let p = params(8.0, 8.0);
        let cases = [
            (PotentialKind::Free, 0.5, 0.01),
            (PotentialKind::Kl, 0.6, 0.0),
            (PotentialKind::KlQuadratic, 0.6, 0.0),
            (PotentialKind::Geodesic, 0.7, 0.5),
        ];
        for (kind, q0, p0) in cases {
            let s0 = PhaseState::new(q0, p0, 0.0).unwrap();
            let traj = integrate_trajectory(s0, &p, kind, 100.0, DEFAULT_TRAJECTORY_TOL).unwrap();
            assert!(
                traj.relative_energy_drift() <= 1e-8,
                "{kind:?}: {}",
                traj.relative_energy_drift()
            );
            let (dq, dp) = reversal_error(s0, &p, kind, 100.0, DEFAULT_TRAJECTORY_TOL).unwrap();
            assert!(dq <= 1e-6 && dp <= 1e-6, "{kind:?}: {dq} {dp}");
        }
    }

    #[test]
    fn kl_matches_fisher_scaled_quadratic_at_small_amplitude() {
        // Near q' = 1/2, D_KL(q' ‖ q) = 2(q - q')² + O(Δ⁴): the KL spring is the
        // quadratic one with k scaled by g(q')/2 = 2.
        let t_end = 20.0;
        let p = params(8.0, 8.0);
        let stiff = params(8.0, 16.0);
        let opts = TrajectoryOptions {
            tol: DEFAULT_TRAJECTORY_TOL,
            sample_every: Some(0.5),
        };
        let gap = |amp: f64| {
            let s0 = PhaseState::new(0.5 + amp, 0.0, 0.0).unwrap();
            let (kl, _) = integrate_trajectory_partial(s0, &p, PotentialKind::Kl, t_end, &opts);
            let (quad, _) =
                integrate_trajectory_partial(s0, &stiff, PotentialKind::KlQuadratic, t_end, &opts);
            assert_eq!(kl.samples.len(), quad.samples.len());
            let mut worst = 0.0f64;
            for (a, b) in kl.samples.iter().zip(&quad.samples) {
                let d = (a.q.value() - b.q.value()).abs();
                // The quartic term shifts the frequency by O(amp²): phase error O(amp³ t).
                assert!(
                    d <= 2.0 * amp.powi(3) * a.t.max(1.0),
                    "amp {amp} t {}: {d:e}",
                    a.t
                );
                worst = worst.max(d);
            }
            worst
        };
        let ratio = gap(0.01) / gap(0.005);
        assert!((6.0..10.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn boundary_escape_keeps_partial_trajectory() {
        let p = params(1.0, 0.0);
        let s0 = PhaseState::new(0.5, 2.0, 0.0).unwrap();
        let opts = TrajectoryOptions::default();
        let (traj, err) = integrate_trajectory_partial(s0, &p, PotentialKind::Free, 100.0, &opts);
        match err {
            Some(Error::BoundaryEscape { t, q, .. }) => {
                assert!(t > 0.0 && t < 100.0);
                assert!(q > 0.5);
            }
            other => panic!("expected boundary escape, got {other:?}"),
        }
        assert!(traj.samples.len() > 2);
        assert!(integrate_trajectory(s0, &p, PotentialKind::Free, 100.0, 1e-12).is_err());
    }

    #[test]
    fn rejects_bad_span() {
        let s0 = PhaseState::new(0.5, 0.0, 0.0).unwrap();
        assert!(
            integrate_trajectory(s0, &params(1.0, 1.0), PotentialKind::Kl, 0.0, 1e-10).is_err()
        );
        assert!(PhaseState::new(0.0, 1.0, 0.0).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn bounded_orbits_conserve_and_reverse(
                q0 in 0.2f64..0.8,
                p0 in -0.5f64..0.5,
                kind in prop::sample::select(vec![PotentialKind::Kl, PotentialKind::KlQuadratic, PotentialKind::Geodesic]),
            ) {
                let p = params(8.0, 8.0);
                let s0 = PhaseState::new(q0, p0, 0.0).unwrap();
                let traj = integrate_trajectory(s0, &p, kind, 100.0, DEFAULT_TRAJECTORY_TOL).unwrap();
                prop_assert!(traj.relative_energy_drift() <= 1e-8);
                let (dq, dp) = reversal_error(s0, &p, kind, 100.0, DEFAULT_TRAJECTORY_TOL).unwrap();
                prop_assert!(dq <= 1e-6 && dp <= 1e-6);
            }
        }
    }
}
