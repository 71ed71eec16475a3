//! Python bindings: balls, configurations, the saddle solver and the grid
//! harness. Reports are returned as plain dictionaries.

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pythonize::pythonize;
use serde::Serialize;

use subcrit::bubble::{compute_constants, eval_bubble, BubbleParams, QuadSettings};
use subcrit::green::{green_g, robin, robin_h, validate_a3, AxisGreen, BallDomain};
use subcrit::pde::{expansion_gap as gap_report, projection_rate as projection_report, GridSpec};
use subcrit::reduced::{self, bounds_report, find_t0_r0, T0R0Options};
use subcrit::saddle::{self, CoercivityOptions, Method, SaddleOptions};
use subcrit::Error;

create_exception!(subcrit, SubcritError, PyException);
create_exception!(subcrit, ConfigError, SubcritError);
create_exception!(subcrit, QuadratureError, SubcritError);
create_exception!(subcrit, SolverError, SubcritError);
create_exception!(subcrit, ResolutionError, SubcritError);

fn py_err(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::Config(_) | Error::Parameter(_) | Error::Domain(_) => ConfigError::new_err(msg),
        Error::Quadrature(_) => QuadratureError::new_err(msg),
        Error::Resolution(_) => ResolutionError::new_err(msg),
        Error::Singularity(_) | Error::Numerical(_) | Error::Search(_) | Error::Divergence { .. } => {
            SolverError::new_err(msg)
        }
    }
}

fn to_dict<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    Ok(pythonize(py, v)?)
}

/// A ball in `R^N` with its Green's function and axis restrictions.
#[pyclass(module = "subcrit", frozen)]
struct Ball {
    axis: AxisGreen,
}

impl Ball {
    fn domain(&self) -> &BallDomain {
        &self.axis.domain
    }
}

#[pymethods]
impl Ball {
    #[new]
    #[pyo3(signature = (dim = 3, center = None, radius = 1.0))]
    fn new(dim: usize, center: Option<Vec<f64>>, radius: f64) -> PyResult<Self> {
        let d = BallDomain::new(dim, center.unwrap_or_else(|| vec![0.0; dim]), radius).map_err(py_err)?;
        Ok(Self {
            axis: AxisGreen::new(d).map_err(py_err)?,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.domain().dim
    }

    #[getter]
    fn center(&self) -> Vec<f64> {
        self.domain().center.clone()
    }

    #[getter]
    fn radius(&self) -> f64 {
        self.domain().radius
    }

    /// Dirichlet Green's function `G(x, y)`.
    fn green(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
        green_g(self.domain(), &x, &y).map_err(py_err)
    }

    /// Regular part `H(x, y)`.
    fn regular_part(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
        robin_h(self.domain(), &x, &y).map_err(py_err)
    }

    /// Robin function `H(x, x)`.
    fn robin(&self, x: Vec<f64>) -> PyResult<f64> {
        robin(self.domain(), &x).map_err(py_err)
    }

    /// Robin function on the axis, `h(t)`.
    fn axis_robin(&self, t: f64) -> PyResult<f64> {
        self.axis.h(t).map_err(py_err)
    }

    /// Green's function between two axis points, `g(t, s)`.
    fn axis_green(&self, t: f64, s: f64) -> PyResult<f64> {
        self.axis.g(t, s).map_err(py_err)
    }

    #[pyo3(signature = (resolution = 256))]
    fn validate_a3<'py>(&self, py: Python<'py>, resolution: usize) -> PyResult<Bound<'py, PyAny>> {
        to_dict(py, &validate_a3(&self.axis, resolution, None).map_err(py_err)?)
    }

    fn find_t0_r0<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_dict(py, &find_t0_r0(&self.axis, &T0R0Options::default()).map_err(py_err)?)
    }

    fn bounds<'py>(&self, py: Python<'py>, t0: f64, r0: f64) -> PyResult<Bound<'py, PyAny>> {
        to_dict(py, &bounds_report(&self.axis, t0, r0).map_err(py_err)?)
    }

    fn __repr__(&self) -> String {
        format!(
            "Ball(dim={}, center={:?}, radius={})",
            self.domain().dim,
            self.domain().center,
            self.domain().radius
        )
    }
}

/// Signs, scalings `Λ` and axis positions `t` of `k` bubbles.
#[pyclass(module = "subcrit", frozen, from_py_object)]
#[derive(Clone)]
struct Configuration {
    inner: reduced::Configuration,
}

#[pymethods]
impl Configuration {
    #[new]
    fn new(signs: Vec<i32>, lambdas: Vec<f64>, t: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: reduced::Configuration::new(signs, lambdas, t).map_err(py_err)?,
        })
    }

    /// Four bubbles with signs `(+, −, +, −)`.
    #[staticmethod]
    fn alternating(lambdas: [f64; 4], t: [f64; 4]) -> PyResult<Self> {
        Ok(Self {
            inner: reduced::Configuration::alternating(lambdas, t).map_err(py_err)?,
        })
    }

    /// Starting point built from `t0`, `r0` with unit scalings.
    #[staticmethod]
    fn k0_start(t0: f64, r0: f64) -> PyResult<Self> {
        Ok(Self {
            inner: saddle::k0_start(t0, r0).map_err(py_err)?,
        })
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k
    }

    #[getter]
    fn signs(&self) -> Vec<i32> {
        self.inner.signs.clone()
    }

    #[getter]
    fn lambdas(&self) -> Vec<f64> {
        self.inner.lambda.clone()
    }

    #[getter]
    fn t(&self) -> Vec<f64> {
        self.inner.t.clone()
    }

    fn psi_k(&self, ball: &Ball) -> PyResult<f64> {
        reduced::psi_k(&self.inner, &ball.axis).map_err(py_err)
    }

    fn psi_tilde(&self, ball: &Ball) -> PyResult<f64> {
        reduced::psi_tilde(&self.inner, &ball.axis).map_err(py_err)
    }

    fn grad_psi_tilde(&self, ball: &Ball) -> PyResult<Vec<f64>> {
        reduced::grad_psi_tilde(&self.inner, &ball.axis).map_err(py_err)
    }

    fn phi(&self, ball: &Ball) -> PyResult<f64> {
        reduced::phi_penalty(&self.inner, &ball.axis).map_err(py_err)
    }

    fn identities(&self, ball: &Ball) -> PyResult<Vec<f64>> {
        reduced::stationarity_identities(&self.inner, &ball.axis).map_err(py_err)
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_dict(py, &self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "Configuration(signs={:?}, lambdas={:?}, t={:?})",
            self.inner.signs, self.inner.lambda, self.inner.t
        )
    }
}

/// Dimension constants of the energy expansion.
#[pyfunction]
#[pyo3(signature = (dim = 3))]
fn constants<'py>(py: Python<'py>, dim: usize) -> PyResult<Bound<'py, PyAny>> {
    to_dict(py, &compute_constants(dim, &QuadSettings::default()).map_err(py_err)?)
}

/// Bubble `U_{ε,λ,ξ}(x)`.
#[pyfunction]
fn bubble(epsilon: f64, lam: f64, center: Vec<f64>, x: Vec<f64>) -> PyResult<f64> {
    let p = BubbleParams::new(center.len(), epsilon, lam, center).map_err(py_err)?;
    eval_bubble(&p, &x).map_err(py_err)
}

/// Critical point of `Ψ̃` from `start` (the K₀ start by default).
///
/// Returns the converged configuration and the full report.
#[pyfunction]
#[pyo3(signature = (ball, start = None, tol = 1e-8, max_iter = 50, damped_newton = false))]
fn solve_saddle<'py>(
    py: Python<'py>,
    ball: &Ball,
    start: Option<Configuration>,
    tol: f64,
    max_iter: usize,
    damped_newton: bool,
) -> PyResult<(Configuration, Bound<'py, PyAny>)> {
    let f = find_t0_r0(&ball.axis, &T0R0Options::default()).map_err(py_err)?;
    let init = match start {
        Some(c) => c.inner,
        None => saddle::k0_start(f.t0, f.r0).map_err(py_err)?,
    };
    let opts = SaddleOptions {
        tol,
        max_iter,
        method: if damped_newton {
            Method::DampedNewton
        } else {
            Method::EigenvectorFollowing
        },
        ..Default::default()
    };
    let mut report = saddle::solve_saddle(&ball.axis, &init, &opts).map_err(py_err)?;
    let b = bounds_report(&ball.axis, f.t0, f.r0).map_err(py_err)?;
    report.bounds_ok = saddle::verify_bounds(&report, &b);
    let cfg = Configuration {
        inner: report.config.clone(),
    };
    Ok((cfg, to_dict(py, &report)?))
}

/// Sampled minima of `Ψ̃` on the levels `Φ = M/2`.
#[pyfunction]
#[pyo3(signature = (ball, start, levels, samples = 100, seed = 7))]
fn coercivity<'py>(
    py: Python<'py>,
    ball: &Ball,
    start: &Configuration,
    levels: Vec<f64>,
    samples: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let opts = CoercivityOptions {
        samples,
        seed,
        ..Default::default()
    };
    to_dict(
        py,
        &saddle::coercivity_scan(&ball.axis, &start.inner, &levels, &opts).map_err(py_err)?,
    )
}

/// Projection error of one axis bubble across a decreasing `ε` list.
#[pyfunction]
#[pyo3(signature = (ball, lam, center, eps, nz = 513, nr = 257))]
fn projection_rate<'py>(
    py: Python<'py>,
    ball: &Ball,
    lam: f64,
    center: f64,
    eps: Vec<f64>,
    nz: usize,
    nr: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let r = projection_report(ball.domain(), lam, center, &eps, GridSpec { nz, nr }).map_err(py_err)?;
    to_dict(py, &r)
}

/// Remainder of the energy expansion of `V` across a decreasing `ε` list.
#[pyfunction]
#[pyo3(signature = (ball, config, eps, nz = 513, nr = 257, refine = false))]
fn expansion_gap<'py>(
    py: Python<'py>,
    ball: &Ball,
    config: &Configuration,
    eps: Vec<f64>,
    nz: usize,
    nr: usize,
    refine: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let table = compute_constants(ball.domain().dim, &QuadSettings::default()).map_err(py_err)?;
    let r = gap_report(&ball.axis, &config.inner, &eps, &table, GridSpec { nz, nr }, refine).map_err(py_err)?;
    to_dict(py, &r)
}

#[pymodule]
#[pyo3(name = "subcrit")]
fn subcrit_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("SubcritError", py.get_type::<SubcritError>())?;
    m.add("ConfigError", py.get_type::<ConfigError>())?;
    m.add("QuadratureError", py.get_type::<QuadratureError>())?;
    m.add("SolverError", py.get_type::<SolverError>())?;
    m.add("ResolutionError", py.get_type::<ResolutionError>())?;
    m.add_class::<Ball>()?;
    m.add_class::<Configuration>()?;
    m.add_function(wrap_pyfunction!(constants, m)?)?;
    m.add_function(wrap_pyfunction!(bubble, m)?)?;
    m.add_function(wrap_pyfunction!(solve_saddle, m)?)?;
    m.add_function(wrap_pyfunction!(coercivity, m)?)?;
    m.add_function(wrap_pyfunction!(projection_rate, m)?)?;
    m.add_function(wrap_pyfunction!(expansion_gap, m)?)?;
    Ok(())
}
