//! Dormand-Prince 5(4) with local error control.
//!
//! The error test uses `atol = rtol = tol` in the max norm, and the fifth
//! order solution is propagated (local extrapolation).

use crate::error::{domain, Error, Result};

const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A21: f64 = 1.0 / 5.0;
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
// Fifth order weights; also the last stage row (FSAL).
const B: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
// Fifth minus fourth order weights, stages 1..=7.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

/// Which intermediate states to keep.
#[derive(Debug, Clone, Default, PartialEq)]
pub enum Sampling {
    #[default]
    None,
    /// The initial state and every accepted step.
    Steps,
    /// Exactly these (ascending) times; steps are shortened to land on them.
    At(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct IvpOptions {
    pub tol: f64,
    pub max_step: f64,
    pub max_steps: usize,
    pub sampling: Sampling,
}

impl IvpOptions {
    pub fn new(tol: f64) -> Self {
        Self {
            tol,
            max_step: f64::INFINITY,
            max_steps: 1_000_000,
            sampling: Sampling::None,
        }
    }

    pub fn max_step(mut self, h: f64) -> Self {
        self.max_step = h;
        self
    }

    pub fn sampling(mut self, sampling: Sampling) -> Self {
        self.sampling = sampling;
        self
    }
}

#[derive(Debug, Clone)]
pub struct IvpSolution {
    /// Time reached; equals the end of the span unless the run was stopped.
    pub t: f64,
    pub y: Vec<f64>,
    pub samples: Vec<(f64, Vec<f64>)>,
    pub accepted: usize,
    pub rejected: usize,
    pub stopped: bool,
}

/// Integrate `y' = rhs(t, y)` over `t_span` and return the final state.
pub fn solve_ivp<F>(rhs: F, y0: &[f64], t_span: (f64, f64), tol: f64) -> Result<IvpSolution>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    solve_ivp_with(rhs, y0, t_span, &IvpOptions::new(tol), |_, _| false)
}

/// Like [`solve_ivp`], with options and an observer.
///
/// `stop` is called after every accepted step; returning `true` ends the
/// integration early with `stopped` set on the solution.
pub fn solve_ivp_with<F, S>(
    mut rhs: F,
    y0: &[f64],
    (t0, t1): (f64, f64),
    opts: &IvpOptions,
    mut stop: S,
) -> Result<IvpSolution>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    S: FnMut(f64, &[f64]) -> bool,
{
    let tol = opts.tol;
    if !(tol > 0.0) {
        return Err(domain(format!(
            "integration tolerance must be positive, got {tol}"
        )));
    }
    if !(t0.is_finite() && t1.is_finite()) || t1 < t0 {
        return Err(domain(format!("invalid time span ({t0}, {t1})")));
    }
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(Error::Divergence { t: t0 });
    }

    let mut targets: &[f64] = match &opts.sampling {
        Sampling::At(ts) => {
            if ts.windows(2).any(|w| w[0] > w[1]) || ts.iter().any(|&s| s < t0 || s > t1) {
                return Err(domain("sample times must be ascending and inside the span"));
            }
            ts
        }
        _ => &[],
    };

    let dim = y0.len();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut samples = Vec::new();
    if opts.sampling == Sampling::Steps {
        samples.push((t, y.clone()));
    }
    while let Some((&s, rest)) = targets.split_first() {
        if s > t0 {
            break;
        }
        samples.push((t0, y.clone()));
        targets = rest;
    }
    let solution = |t, y: Vec<f64>, samples, accepted, rejected, stopped| {
        Ok(IvpSolution {
            t,
            y,
            samples,
            accepted,
            rejected,
            stopped,
        })
    };
    if t0 == t1 {
        return solution(t, y, samples, 0, 0, false);
    }

    let mut k: Vec<Vec<f64>> = vec![vec![0.0; dim]; 7];
    let mut stage = vec![0.0; dim];
    let mut y_new = vec![0.0; dim];
    rhs(t, &y, &mut k[0]);
    if k[0].iter().any(|v| !v.is_finite()) {
        return Err(Error::Divergence { t });
    }

    let span = t1 - t0;
    let mut h = initial_step(&mut rhs, t, &y, &k[0], tol)
        .min(span)
        .min(opts.max_step);
    let h_min = |t: f64| 16.0 * f64::EPSILON * t.abs().max(span).max(1e-300);
    let (mut accepted, mut rejected) = (0usize, 0usize);

    loop {
        if accepted + rejected >= opts.max_steps {
            return Err(Error::Convergence(format!(
                "integrator exceeded {} steps at t = {t}",
                opts.max_steps
            )));
        }
        // Land exactly on the next sample time or the end of the span.
        let next_stop = targets.first().copied().unwrap_or(t1).min(t1);
        let mut landing = false;
        if t + h >= next_stop || (next_stop - t - h) < h_min(t) {
            h = next_stop - t;
            landing = true;
        }
        if h < h_min(t) && !landing {
            return Err(Error::Stiffness { t, h });
        }

        // Stages 2..=6.
        let rows: [&[f64]; 5] = [&[A21], &A3, &A4, &A5, &A6];
        for (s, row) in rows.iter().enumerate() {
            let (done, todo) = k.split_at_mut(s + 1);
            for i in 0..dim {
                let incr: f64 = row.iter().zip(done.iter()).map(|(a, ks)| a * ks[i]).sum();
                stage[i] = y[i] + h * incr;
            }
            rhs(t + C[s] * h, &stage, &mut todo[0]);
        }
        for i in 0..dim {
            let incr: f64 = B.iter().enumerate().map(|(j, b)| b * k[j][i]).sum();
            y_new[i] = y[i] + h * incr;
        }
        rhs(t + h, &y_new, &mut k[6]);

        let mut err = 0.0f64;
        let mut finite = true;
        for i in 0..dim {
            let e: f64 = h * E.iter().enumerate().map(|(j, c)| c * k[j][i]).sum::<f64>();
            let scale = tol + tol * y[i].abs().max(y_new[i].abs());
            let r = (e / scale).abs();
            if !r.is_finite() || !y_new[i].is_finite() || !k[6][i].is_finite() {
                finite = false;
            }
            err = err.max(r);
        }

        if finite && err <= 1.0 {
            t = if landing { next_stop } else { t + h };
            std::mem::swap(&mut y, &mut y_new);
            k.swap(0, 6);
            accepted += 1;
            match &opts.sampling {
                Sampling::Steps => samples.push((t, y.clone())),
                Sampling::At(_) => {
                    while let Some((&s, rest)) = targets.split_first() {
                        if s > t {
                            break;
                        }
                        samples.push((s, y.clone()));
                        targets = rest;
                    }
                }
                Sampling::None => {}
            }
            if t >= t1 {
                return solution(t, y, samples, accepted, rejected, false);
            }
            if stop(t, &y) {
                return solution(t, y, samples, accepted, rejected, true);
            }
            let factor = if err == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
            };
            h = (h * factor).min(opts.max_step);
        } else {
            rejected += 1;
            let factor = if finite {
                (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, 1.0)
            } else {
                0.25
            };
            h *= factor;
            if h < h_min(t) {
                return Err(if finite {
                    Error::Stiffness { t, h }
                } else {
                    Error::Divergence { t }
                });
            }
        }
    }
}

fn initial_step<F>(rhs: &mut F, t: f64, y: &[f64], f0: &[f64], tol: f64) -> f64
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let norm = |v: &[f64]| {
        v.iter()
            .zip(y)
            .map(|(vi, yi)| (vi / (tol + tol * yi.abs())).abs())
            .fold(0.0, f64::max)
    };
    let d0 = norm(y);
    let d1 = norm(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let y1: Vec<f64> = y.iter().zip(f0).map(|(yi, fi)| yi + h0 * fi).collect();
    let mut f1 = vec![0.0; y.len()];
    rhs(t + h0, &y1, &mut f1);
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 || !d2.is_finite() {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn oscillator(omega: f64) -> impl FnMut(f64, &[f64], &mut [f64]) {
        move |_, y, dy| {
            dy[0] = y[1];
            dy[1] = -omega * omega * y[0];
        }
    }

    #[test]
    fn constant_field() {
        let sol = solve_ivp(|_, _, dy| dy[0] = 0.0, &[3.0], (0.0, 1.0), 1e-10).unwrap();
        assert_eq!(sol.y, vec![3.0]);
        assert_eq!(sol.t, 1.0);
    }

    #[test]
    fn sine_quarter_period() {
        let tol = 1e-10;
        let sol = solve_ivp(oscillator(1.0), &[0.0, 1.0], (0.0, PI / 2.0), tol).unwrap();
        assert!((sol.y[0] - 1.0).abs() < tol, "{}", sol.y[0]);
    }

    #[test]
    fn double_frequency_zero() {
        // Oracle: y = sin(2t)/2 vanishes at t = π.
        let tol = 1e-10;
        let sol = solve_ivp(oscillator(2.0), &[0.0, 1.0], (0.0, PI), tol).unwrap();
        assert!(sol.y[0].abs() < 10.0 * tol, "{}", sol.y[0]);
        assert!((sol.y[1] - 1.0).abs() < 10.0 * tol);
    }

    #[test]
    fn harmonic_invariant_is_conserved() {
        let tol = 1e-10;
        for omega in [0.5, 1.0, 3.0] {
            let opts = IvpOptions::new(tol).sampling(Sampling::Steps);
            let sol = solve_ivp_with(
                oscillator(omega),
                &[0.3, -0.7],
                (0.0, 10.0),
                &opts,
                |_, _| false,
            )
            .unwrap();
            let e0 = 0.3f64.powi(2) + (0.7 / omega).powi(2);
            for (_, y) in &sol.samples {
                let e = y[0].powi(2) + (y[1] / omega).powi(2);
                assert!(
                    (e - e0).abs() < 100.0 * tol,
                    "omega {omega}: drift {}",
                    e - e0
                );
            }
        }
    }

    #[test]
    fn samples_land_on_requested_times() {
        let times = vec![0.0, 0.25, 1.0, 2.0];
        let opts = IvpOptions::new(1e-12).sampling(Sampling::At(times.clone()));
        let sol = solve_ivp_with(oscillator(1.0), &[0.0, 1.0], (0.0, 2.0), &opts, |_, _| {
            false
        })
        .unwrap();
        let got: Vec<f64> = sol.samples.iter().map(|s| s.0).collect();
        assert_eq!(got, times);
        for (t, y) in &sol.samples {
            assert!((y[0] - t.sin()).abs() < 1e-11);
        }
    }

    #[test]
    fn observer_can_stop() {
        let opts = IvpOptions::new(1e-9);
        let sol = solve_ivp_with(
            |_, _, dy| dy[0] = 1.0,
            &[0.0],
            (0.0, 10.0),
            &opts,
            |_, y| y[0] > 2.0,
        )
        .unwrap();
        assert!(sol.stopped);
        assert!(sol.t < 10.0 && sol.y[0] > 2.0);
    }

    #[test]
    fn blow_up_is_reported() {
        // y' = y², y(0) = 1 explodes at t = 1.
        let err = solve_ivp(|_, y, dy| dy[0] = y[0] * y[0], &[1.0], (0.0, 2.0), 1e-8).unwrap_err();
        assert!(
            matches!(err, Error::Stiffness { .. } | Error::Divergence { .. }),
            "{err:?}"
        );
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(solve_ivp(|_, _, dy| dy[0] = 0.0, &[1.0], (0.0, 1.0), 0.0).is_err());
        assert!(solve_ivp(|_, _, dy| dy[0] = 0.0, &[1.0], (1.0, 0.0), 1e-6).is_err());
        assert!(matches!(
            solve_ivp(|_, _, dy| dy[0] = 0.0, &[f64::NAN], (0.0, 1.0), 1e-6),
            Err(Error::Divergence { .. })
        ));
    }
}
