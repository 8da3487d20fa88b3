//! Python bindings for the Bernoulli-manifold library.

use std::cell::RefCell;

use bernoulli::classical::{self, PhaseState, PotentialKind, TrajectoryOptions};
use bernoulli::manifold::{self, BernoulliPoint, ThetaPoint};
use bernoulli::quantum::{self, potentials, LevelMethod};
use bernoulli::spectral::{self, DecayLaw};
use bernoulli::{numerics, Error};
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

pyo3::create_exception!(bernoulli_dynamics, NumericalError, PyRuntimeError);
pyo3::create_exception!(bernoulli_dynamics, BoundaryEscapeError, NumericalError);

fn to_py_err(err: Error) -> PyErr {
    match err {
        Error::Domain(_) | Error::InvalidBracket { .. } => PyValueError::new_err(err.to_string()),
        Error::BoundaryEscape { .. } => BoundaryEscapeError::new_err(err.to_string()),
        _ => NumericalError::new_err(err.to_string()),
    }
}

fn point(q: f64) -> PyResult<BernoulliPoint> {
    BernoulliPoint::new(q).map_err(to_py_err)
}

/// Adapts a Python callable to `Fn(f64) -> f64`. The first exception raised
/// by the callable is kept and re-raised once the Rust side returns.
struct Callback<'py> {
    f: Bound<'py, PyAny>,
    err: RefCell<Option<PyErr>>,
}

impl<'py> Callback<'py> {
    fn new(f: Bound<'py, PyAny>) -> Self {
        Self {
            f,
            err: RefCell::new(None),
        }
    }

    fn eval(&self, x: f64) -> f64 {
        if self.err.borrow().is_some() {
            return f64::NAN;
        }
        match self.f.call1((x,)).and_then(|v| v.extract::<f64>()) {
            Ok(v) => v,
            Err(e) => {
                *self.err.borrow_mut() = Some(e);
                f64::NAN
            }
        }
    }

    fn finish<T>(self, result: bernoulli::Result<T>) -> PyResult<T> {
        match self.err.into_inner() {
            Some(e) => Err(e),
            None => result.map_err(to_py_err),
        }
    }
}

#[pyclass(name = "PhysicalParams", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyParams(quantum::PhysicalParams);

#[pymethods]
impl PyParams {
    #[new]
    #[pyo3(signature = (m = 8.0, k = 8.0, hbar = 1.0, qprime = 0.5))]
    fn new(m: f64, k: f64, hbar: f64, qprime: f64) -> PyResult<Self> {
        quantum::PhysicalParams::new(m, k, hbar, qprime)
            .map(Self)
            .map_err(to_py_err)
    }

    #[getter]
    fn m(&self) -> f64 {
        self.0.m()
    }

    #[getter]
    fn k(&self) -> f64 {
        self.0.k()
    }

    #[getter]
    fn hbar(&self) -> f64 {
        self.0.hbar()
    }

    #[getter]
    fn qprime(&self) -> f64 {
        self.0.qprime().value()
    }

    fn __repr__(&self) -> String {
        format!(
            "PhysicalParams(m={}, k={}, hbar={}, qprime={})",
            self.m(),
            self.k(),
            self.hbar(),
            self.qprime()
        )
    }
}

#[pyclass(name = "SpectralExpansion", frozen, from_py_object)]
#[derive(Clone)]
struct PyExpansion(spectral::SpectralExpansion);

#[pymethods]
impl PyExpansion {
    /// Coefficients `A₁, A₂, ...` of `Σ Aₙ Ψₙ`.
    #[new]
    fn new(coefficients: Vec<f64>) -> Self {
        Self(spectral::SpectralExpansion::from_coefficients(
            &coefficients,
        ))
    }

    /// Project `f` on `Ψ₁..Ψ_{n_max}`.
    #[staticmethod]
    #[pyo3(signature = (f, n_max, tol = 1e-10))]
    fn expand(f: Bound<'_, PyAny>, n_max: u32, tol: f64) -> PyResult<Self> {
        let cb = Callback::new(f);
        let result = spectral::expand(|q| cb.eval(q), n_max, tol);
        cb.finish(result).map(Self)
    }

    fn terms(&self) -> Vec<(u32, f64)> {
        self.0.terms().to_vec()
    }

    fn coefficient(&self, n: u32) -> f64 {
        self.0.coefficient(n)
    }

    fn norm(&self) -> f64 {
        self.0.norm()
    }

    fn __call__(&self, q: f64) -> PyResult<f64> {
        Ok(spectral::evaluate(&self.0, point(q)?))
    }

    /// Heat flow; `law` is `"consistent"` (e^{-n²t}) or `"paper"` (e^{-nt}).
    #[pyo3(signature = (t, law = "consistent"))]
    fn heat(&self, t: f64, law: &str) -> PyResult<Self> {
        let law: DecayLaw = law.parse().map_err(to_py_err)?;
        spectral::heat_evolve(&self.0, t, law)
            .map(Self)
            .map_err(to_py_err)
    }

    fn wave(&self, t: f64) -> PyWave {
        PyWave(spectral::wave_evolve(&self.0, t))
    }

    fn __len__(&self) -> usize {
        self.0.terms().len()
    }

    fn __repr__(&self) -> String {
        format!(
            "SpectralExpansion(terms={}, norm={})",
            self.0.terms().len(),
            self.0.norm()
        )
    }
}

#[pyclass(name = "WaveExpansion", frozen)]
struct PyWave(spectral::WaveExpansion);

#[pymethods]
impl PyWave {
    fn terms(&self) -> Vec<(u32, Complex64)> {
        self.0.terms().to_vec()
    }

    fn norm(&self) -> f64 {
        self.0.norm()
    }

    fn __call__(&self, q: f64) -> PyResult<Complex64> {
        Ok(self.0.value_at(point(q)?.value()))
    }
}

#[pyclass(name = "EnergyLevel", frozen, get_all)]
struct PyLevel {
    n: u32,
    exact: f64,
    approx: Option<f64>,
    method: &'static str,
    bracket: Option<(f64, f64)>,
}

#[pymethods]
impl PyLevel {
    fn __repr__(&self) -> String {
        format!(
            "EnergyLevel(n={}, exact={}, approx={:?}, method='{}')",
            self.n, self.exact, self.approx, self.method
        )
    }
}

fn levels(spectrum: quantum::EnergySpectrum) -> Vec<PyLevel> {
    spectrum
        .levels()
        .iter()
        .map(|l| PyLevel {
            n: l.n,
            exact: l.exact,
            approx: l.approx,
            method: match l.method {
                LevelMethod::RootFound => "root_found",
                LevelMethod::Formula => "formula",
            },
            bracket: l.bracket,
        })
        .collect()
}

#[pyclass(name = "Trajectory", frozen, get_all)]
struct PyTrajectory {
    t: Vec<f64>,
    q: Vec<f64>,
    p: Vec<f64>,
    energy: Vec<f64>,
    relative_energy_drift: f64,
    /// Message of the failure that cut the run short, if any.
    error: Option<String>,
}

#[pymethods]
impl PyTrajectory {
    fn __len__(&self) -> usize {
        self.t.len()
    }
}

#[pyfunction]
fn fisher_metric(q: f64) -> PyResult<f64> {
    Ok(manifold::fisher_metric(point(q)?))
}

#[pyfunction]
fn to_theta(q: f64) -> PyResult<f64> {
    Ok(manifold::to_theta(point(q)?).value())
}

#[pyfunction]
fn from_theta(theta: f64) -> PyResult<f64> {
    let theta = ThetaPoint::new(theta).map_err(to_py_err)?;
    Ok(manifold::from_theta(theta).value())
}

#[pyfunction]
fn kl_divergence(a: f64, b: f64) -> PyResult<f64> {
    Ok(manifold::kl_divergence(point(a)?, point(b)?))
}

#[pyfunction]
fn kl_quadratic(qprime: f64, q: f64) -> PyResult<f64> {
    Ok(manifold::kl_quadratic(point(qprime)?, point(q)?))
}

#[pyfunction]
fn geodesic_sqdist(q1: f64, q2: f64) -> PyResult<f64> {
    Ok(manifold::geodesic_sqdist(point(q1)?, point(q2)?))
}

#[pyfunction]
#[pyo3(signature = (f, tol = 1e-10))]
fn integrate_weighted(f: Bound<'_, PyAny>, tol: f64) -> PyResult<f64> {
    let cb = Callback::new(f);
    let result = numerics::integrate_weighted(|q| cb.eval(q), tol);
    cb.finish(result)
}

#[pyfunction]
fn psi(n: u32, q: f64) -> PyResult<f64> {
    spectral::psi(n, q).map_err(to_py_err)
}

#[pyfunction]
#[pyo3(signature = (f, q, h = spectral::DEFAULT_LB_STEP))]
fn laplace_beltrami(f: Bound<'_, PyAny>, q: f64, h: f64) -> PyResult<f64> {
    let q = point(q)?;
    let cb = Callback::new(f);
    let result = spectral::laplace_beltrami(|x| cb.eval(x), q, h);
    cb.finish(result)
}

#[pyfunction]
#[pyo3(signature = (q, qprime, terms = spectral::DEFAULT_GREENS_TERMS))]
fn greens_series(q: f64, qprime: f64, terms: u32) -> PyResult<f64> {
    spectral::greens_series(point(q)?, point(qprime)?, terms).map_err(to_py_err)
}

#[pyfunction]
fn greens_closed(q: f64, qprime: f64) -> PyResult<f64> {
    Ok(spectral::greens_closed(point(q)?, point(qprime)?))
}

#[pyfunction]
fn free_particle_energy(params: PyParams, n: u32) -> PyResult<f64> {
    quantum::free_particle_energy(&params.0, n).map_err(to_py_err)
}

/// Dirichlet levels on `θ ∈ (0, π)`. `potential` is a callable `V(θ)` or one of
/// `"free"`, `"kl_quadratic"`, `"mathieu"`, `"geodesic"`, `"harmonic"`.
#[pyfunction]
fn shooting_solve(
    py: Python<'_>,
    params: PyParams,
    potential: Bound<'_, PyAny>,
    n_max: u32,
) -> PyResult<Vec<PyLevel>> {
    let p = params.0;
    if let Ok(name) = potential.extract::<String>() {
        let spectrum = py.detach(|| match name.as_str() {
            "free" => Ok(quantum::shooting_solve(&p, |_| 0.0, n_max)),
            "kl_quadratic" => Ok(quantum::shooting_solve(
                &p,
                potentials::kl_quadratic(&p),
                n_max,
            )),
            "mathieu" => Ok(quantum::shooting_solve(&p, potentials::mathieu(&p), n_max)),
            "geodesic" => Ok(quantum::shooting_solve(&p, potentials::geodesic(&p), n_max)),
            "harmonic" => Ok(quantum::shooting_solve(&p, potentials::harmonic(&p), n_max)),
            other => Err(PyValueError::new_err(format!(
                "unknown potential '{other}'"
            ))),
        })?;
        return spectrum.map(levels).map_err(to_py_err);
    }
    let cb = Callback::new(potential);
    let result = quantum::shooting_solve(&p, |t| cb.eval(t), n_max);
    cb.finish(result).map(levels)
}

#[pyfunction]
fn oscillator_levels(py: Python<'_>, params: PyParams, n_max: u32) -> PyResult<Vec<PyLevel>> {
    let p = params.0;
    py.detach(|| quantum::oscillator_levels(&p, n_max))
        .map(levels)
        .map_err(to_py_err)
}

#[pyfunction]
fn oscillator_levels_approx(params: PyParams, n: u32) -> f64 {
    quantum::oscillator_levels_approx(&params.0, n)
}

#[pyfunction]
fn oscillator_energy_condition(params: PyParams, energy: f64) -> PyResult<f64> {
    quantum::oscillator_energy_condition(&params.0, energy).map_err(to_py_err)
}

#[pyfunction]
fn approx_condition(params: PyParams, energy: f64) -> PyResult<f64> {
    quantum::approx_condition(&params.0, energy).map_err(to_py_err)
}

/// `(a, q_M)` for energy `E`.
#[pyfunction]
fn mathieu_params(params: PyParams, energy: f64) -> (f64, f64) {
    let mp = quantum::mathieu_params(&params.0, energy);
    (mp.a, mp.q)
}

#[pyfunction]
fn mathieu_s(a: f64, q: f64, theta: f64) -> PyResult<f64> {
    let mp = quantum::MathieuParams::new(a, q).map_err(to_py_err)?;
    quantum::mathieu_s(mp, theta).map_err(to_py_err)
}

#[pyfunction]
fn mathieu_c(a: f64, q: f64, theta: f64) -> PyResult<f64> {
    let mp = quantum::MathieuParams::new(a, q).map_err(to_py_err)?;
    quantum::mathieu_c(mp, theta).map_err(to_py_err)
}

#[pyfunction]
#[pyo3(signature = (m, g, l, energy, hbar = 1.0))]
fn pendulum_map_residuals(m: f64, g: f64, l: f64, energy: f64, hbar: f64) -> (f64, f64) {
    quantum::pendulum_map_residuals(m, g, l, energy, hbar)
}

fn potential_kind(name: &str) -> PyResult<PotentialKind> {
    name.parse().map_err(to_py_err)
}

#[pyfunction]
fn hamiltonian(params: PyParams, potential: &str, q: f64, p: f64) -> PyResult<f64> {
    let state = PhaseState::new(q, p, 0.0).map_err(to_py_err)?;
    Ok(classical::hamiltonian(
        &state,
        &params.0,
        potential_kind(potential)?,
    ))
}

/// Integrate Hamilton's equations. With `partial=True` a boundary escape is
/// reported in `Trajectory.error` instead of raising.
#[pyfunction]
#[pyo3(signature = (params, potential, q0, p0, t_end, tol = classical::DEFAULT_TRAJECTORY_TOL, dt = None, partial = false))]
#[allow(clippy::too_many_arguments)]
fn integrate_trajectory(
    py: Python<'_>,
    params: PyParams,
    potential: &str,
    q0: f64,
    p0: f64,
    t_end: f64,
    tol: f64,
    dt: Option<f64>,
    partial: bool,
) -> PyResult<PyTrajectory> {
    let kind = potential_kind(potential)?;
    let s0 = PhaseState::new(q0, p0, 0.0).map_err(to_py_err)?;
    let p = params.0;
    let opts = TrajectoryOptions {
        tol,
        sample_every: dt,
    };
    let (traj, err) =
        py.detach(|| classical::integrate_trajectory_partial(s0, &p, kind, t_end, &opts));
    if let Some(e) = &err {
        if !partial {
            return Err(to_py_err(e.clone()));
        }
    }
    Ok(PyTrajectory {
        t: traj.samples.iter().map(|s| s.t).collect(),
        q: traj.samples.iter().map(|s| s.q.value()).collect(),
        p: traj.samples.iter().map(|s| s.p).collect(),
        energy: traj.energies(),
        relative_energy_drift: traj.relative_energy_drift(),
        error: err.map(|e| e.to_string()),
    })
}

#[pymodule]
fn bernoulli_dynamics(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("NumericalError", py.get_type::<NumericalError>())?;
    m.add("BoundaryEscapeError", py.get_type::<BoundaryEscapeError>())?;
    m.add_class::<PyParams>()?;
    m.add_class::<PyExpansion>()?;
    m.add_class::<PyWave>()?;
    m.add_class::<PyLevel>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_function(wrap_pyfunction!(fisher_metric, m)?)?;
    m.add_function(wrap_pyfunction!(to_theta, m)?)?;
    m.add_function(wrap_pyfunction!(from_theta, m)?)?;
    m.add_function(wrap_pyfunction!(kl_divergence, m)?)?;
    m.add_function(wrap_pyfunction!(kl_quadratic, m)?)?;
    m.add_function(wrap_pyfunction!(geodesic_sqdist, m)?)?;
    m.add_function(wrap_pyfunction!(integrate_weighted, m)?)?;
    m.add_function(wrap_pyfunction!(psi, m)?)?;
    m.add_function(wrap_pyfunction!(laplace_beltrami, m)?)?;
    m.add_function(wrap_pyfunction!(greens_series, m)?)?;
    m.add_function(wrap_pyfunction!(greens_closed, m)?)?;
    m.add_function(wrap_pyfunction!(free_particle_energy, m)?)?;
    m.add_function(wrap_pyfunction!(shooting_solve, m)?)?;
    m.add_function(wrap_pyfunction!(oscillator_levels, m)?)?;
    m.add_function(wrap_pyfunction!(oscillator_levels_approx, m)?)?;
    m.add_function(wrap_pyfunction!(oscillator_energy_condition, m)?)?;
    m.add_function(wrap_pyfunction!(approx_condition, m)?)?;
    m.add_function(wrap_pyfunction!(mathieu_params, m)?)?;
    m.add_function(wrap_pyfunction!(mathieu_s, m)?)?;
    m.add_function(wrap_pyfunction!(mathieu_c, m)?)?;
    m.add_function(wrap_pyfunction!(pendulum_map_residuals, m)?)?;
    m.add_function(wrap_pyfunction!(hamiltonian, m)?)?;
    m.add_function(wrap_pyfunction!(integrate_trajectory, m)?)?;
    Ok(())
}
