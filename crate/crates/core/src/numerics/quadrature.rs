//! Globally adaptive Gauss-Kronrod (7, 15) quadrature.
//!
//! The Bernoulli weight `1/√(q(1-q))` is absorbed by the substitution
//! `q = sin²(θ/2)`, under which `w(q) dq = dθ` and the integral over `(0, 1)`
//! becomes a smooth integral over `(0, π)`. Nodes are always interior, so the
//! integrand is never sampled at `q = 0` or `q = 1` by the rule itself.

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};

// Kronrod abscissae on [-1, 1], positive half, descending. Entries 1, 3, 5 are
// also the 7-point Gauss nodes (together with the centre).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions {
    /// Absolute error target.
    pub tol: f64,
    /// Maximum number of subintervals before giving up.
    pub max_intervals: usize,
}

impl QuadratureOptions {
    pub fn new(tol: f64) -> Self {
        Self {
            tol,
            max_intervals: 4096,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    magnitude: f64,
}

fn kronrod<F>(f: &F, a: f64, b: f64) -> Result<Segment>
where
    F: Fn(f64) -> f64,
{
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |x: f64| {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation { x })
        }
    };

    let fc = eval(centre)?;
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut magnitude = WGK[7] * fc.abs();
    for (j, (&x, &w)) in XGK[..7].iter().zip(&WGK[..7]).enumerate() {
        let dx = half * x;
        let (f1, f2) = (eval(centre - dx)?, eval(centre + dx)?);
        kronrod += w * (f1 + f2);
        magnitude += w * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    Ok(Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
        magnitude: magnitude * half.abs(),
    })
}

/// Adaptive integral of `g` over `[a, b]` to an absolute tolerance.
pub fn integrate<F>(g: F, a: f64, b: f64, opts: QuadratureOptions) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(opts.tol > 0.0) {
        return Err(domain(format!(
            "quadrature tolerance must be positive, got {}",
            opts.tol
        )));
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(domain("quadrature limits must be finite"));
    }
    if a == b {
        return Ok(0.0);
    }

    let mut segments = vec![kronrod(&g, a, b)?];
    loop {
        let total_error: f64 = segments.iter().map(|s| s.error).sum();
        let magnitude: f64 = segments.iter().map(|s| s.magnitude).sum();
        // Below ~50 ulp of the integrand's L1 mass the estimate is roundoff.
        let floor = 50.0 * f64::EPSILON * magnitude;
        if total_error <= opts.tol.max(floor) {
            return Ok(segments.iter().map(|s| s.value).sum());
        }
        if segments.len() >= opts.max_intervals {
            return Err(Error::Convergence(format!(
                "quadrature error estimate {total_error:e} above tolerance {:e} after {} subintervals",
                opts.tol,
                segments.len()
            )));
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("segment list is never empty");
        let s = segments.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        segments.push(kronrod(&g, s.a, mid)?);
        segments.push(kronrod(&g, mid, s.b)?);
    }
}

/// `∫₀¹ f(q) / √(q(1-q)) dq`, computed as `∫₀^π f(sin²(θ/2)) dθ`.
pub fn integrate_weighted<F>(f: F, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    integrate(
        |theta: f64| {
            let s = (0.5 * theta).sin();
            f(s * s)
        },
        0.0,
        PI,
        QuadratureOptions::new(tol),
    )
    .map_err(|e| match e {
        // Report the offending point in q, which is what the caller passed in.
        Error::Evaluation { x } => {
            let s = (0.5 * x).sin();
            Error::Evaluation { x: s * s }
        }
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn weighted_examples() {
        let one = integrate_weighted(|_| 1.0, 1e-12).unwrap();
        assert!((one - PI).abs() < 1e-12);
        let q = integrate_weighted(|q| q, 1e-12).unwrap();
        assert!((q - PI / 2.0).abs() < 1e-12);
        let psi1 = |q: f64| (2.0 / PI).sqrt() * (2.0 * q.sqrt().asin()).sin();
        let norm = integrate_weighted(|q| psi1(q).powi(2), 1e-12).unwrap();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weighted_reports_bad_sample() {
        let err = integrate_weighted(|q| if q > 0.5 { f64::NAN } else { 1.0 }, 1e-10).unwrap_err();
        match err {
            Error::Evaluation { x } => assert!(x > 0.5 && x < 1.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn reports_non_convergence() {
        let opts = QuadratureOptions {
            tol: 1e-14,
            max_intervals: 4,
        };
        let err = integrate(|x: f64| (40.0 * x).sin().abs(), 0.0, 3.0, opts).unwrap_err();
        assert!(matches!(err, Error::Convergence(_)));
    }

    #[test]
    fn plain_integral_of_polynomial() {
        let v = integrate(|x| x.powi(5), -1.0, 2.0, QuadratureOptions::new(1e-13)).unwrap();
        assert!((v - (64.0 - 1.0) / 6.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn weighted_is_linear(alpha in -3.0f64..3.0, beta in -3.0f64..3.0,
                              c in 0.5f64..4.0, d in 0.1f64..2.0) {
            let f = |q: f64| (c * q).sin();
            let g = |q: f64| (d * q * q).exp();
            let tol = 1e-12;
            let lhs = integrate_weighted(|q| alpha * f(q) + beta * g(q), tol).unwrap();
            let rhs = alpha * integrate_weighted(f, tol).unwrap()
                + beta * integrate_weighted(g, tol).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-10);
        }
    }
}
