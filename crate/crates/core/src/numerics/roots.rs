//! Bracketed scalar root finding (Brent's method).
//!
//! Every iterate stays inside the current bracket; interpolation steps that
//! would leave it, or that shrink it too slowly, fall back to bisection.

use crate::error::{domain, Error, Result};

pub const DEFAULT_ROOT_TOL: f64 = 1e-12;
const MAX_ITER: usize = 500;

/// An interval whose end values have opposite signs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    lo: f64,
    hi: f64,
    f_lo: f64,
    f_hi: f64,
}

impl Bracket {
    /// Build from precomputed end values.
    pub fn new(lo: f64, hi: f64, f_lo: f64, f_hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(domain(format!("bracket needs lo < hi, got [{lo}, {hi}]")));
        }
        if !(f_lo.is_finite() && f_hi.is_finite()) || f_lo * f_hi >= 0.0 {
            return Err(Error::InvalidBracket { lo, hi, f_lo, f_hi });
        }
        Ok(Self { lo, hi, f_lo, f_hi })
    }

    /// Evaluate `f` at both ends and check for a sign change.
    pub fn evaluate<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64) -> Result<Self> {
        let (f_lo, f_hi) = (f(lo), f(hi));
        Self::new(lo, hi, f_lo, f_hi)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn values(&self) -> (f64, f64) {
        (self.f_lo, self.f_hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Result of [`find_root_detailed`]: the estimate and the final bracket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub lo: f64,
    pub hi: f64,
    pub evaluations: usize,
}

/// Root of `f` inside `bracket`, with final bracket width at most `tol`
/// (or a few ulp of the root when `tol` is below that).
pub fn find_root<F: FnMut(f64) -> f64>(f: F, bracket: &Bracket, tol: f64) -> Result<f64> {
    find_root_detailed(f, bracket, tol).map(|r| r.x)
}

pub fn find_root_detailed<F: FnMut(f64) -> f64>(
    mut f: F,
    bracket: &Bracket,
    tol: f64,
) -> Result<Root> {
    if !(tol > 0.0) {
        return Err(domain(format!(
            "root tolerance must be positive, got {tol}"
        )));
    }
    // b is the best estimate, c the opposite end of the bracket, a the previous b.
    let (mut a, mut fa) = (bracket.lo, bracket.f_lo);
    let (mut b, mut fb) = (bracket.hi, bracket.f_hi);
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for evaluations in 0..MAX_ITER {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 0.5 * tol.max(4.0 * f64::EPSILON * b.abs());
        let m = 0.5 * (c - b);
        if m.abs() <= tol1 || fb == 0.0 {
            let (lo, hi) = if fb == 0.0 {
                (b, b)
            } else {
                (b.min(c), b.max(c))
            };
            return Ok(Root {
                x: b,
                lo,
                hi,
                evaluations,
            });
        }

        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                // Secant.
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                // Inverse quadratic interpolation.
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol1 * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }

        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(m) };
        fb = f(b);
        if !fb.is_finite() {
            return Err(Error::Evaluation { x: b });
        }
    }
    Err(Error::Convergence(format!(
        "root finder exceeded {MAX_ITER} iterations"
    )))
}
