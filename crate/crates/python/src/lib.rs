//! Python bindings. Arrays cross the boundary as lists of floats.

use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use frachs::extension::{default_t_nodes, extend_order, extension_energy};
use frachs::geometry::{curvature_functionals, BoundaryProfile};
use frachs::halfspace::{decay_certificate, green_kernel, halfspace_minimizer, poisson_constant, riesz_potential_constant, KernelKind, KernelPoint};
use frachs::spectral::{random_bumps, riesz_form, spectral_form, SpectralDecomposition};
use frachs::variational::{nonattainment_diagnostic, ElOptions};
use frachs::{make_grid, Domain, FracError, GridFunction};

fn err(e: FracError) -> PyErr {
    match e {
        FracError::ParameterDomain(_) | FracError::InvalidArgument(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Exponents of the inequality and derived constants.
#[pyclass(name = "FracParams", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyParams(frachs::FracParams);

#[pymethods]
impl PyParams {
    /// `n = 1` selects the line, where `s < 1/2` is required.
    #[new]
    fn new(n: usize, s: f64, sigma: f64) -> PyResult<Self> {
        let p = if n == 1 {
            frachs::FracParams::on_line(s, sigma)
        } else {
            frachs::FracParams::new(n, s, sigma)
        };
        p.map(PyParams).map_err(err)
    }
    #[getter]
    fn n(&self) -> usize {
        self.0.n
    }
    #[getter]
    fn s(&self) -> f64 {
        self.0.s
    }
    #[getter]
    fn sigma(&self) -> f64 {
        self.0.sigma
    }
    #[getter]
    fn two_star_sigma(&self) -> f64 {
        self.0.two_star_sigma
    }
    #[getter]
    fn two_star_s(&self) -> f64 {
        self.0.two_star_s
    }
    #[getter]
    fn c_s(&self) -> f64 {
        self.0.c_s
    }
    #[getter]
    fn y_frak(&self) -> f64 {
        self.0.y_frak
    }
    fn weight_exponent(&self) -> f64 {
        self.0.weight_exponent()
    }
    fn __repr__(&self) -> String {
        format!("FracParams(n={}, s={}, sigma={})", self.0.n, self.0.s, self.0.sigma)
    }
}

/// Dirichlet spectral decomposition on an interval with `resolution` interior nodes.
#[pyclass(name = "IntervalSpectrum", frozen)]
struct PySpectrum {
    dec: Arc<SpectralDecomposition>,
}

impl PySpectrum {
    fn function(&self, values: Vec<f64>) -> PyResult<GridFunction> {
        GridFunction::new(self.dec.grid.clone(), values).map_err(err)
    }
}

#[pymethods]
impl PySpectrum {
    #[new]
    fn new(lo: f64, hi: f64, resolution: usize) -> PyResult<Self> {
        let grid = make_grid(&Domain::Interval { lo, hi }, &[resolution]).map_err(err)?;
        let dec = SpectralDecomposition::full(Arc::new(grid)).map_err(err)?;
        Ok(Self { dec: Arc::new(dec) })
    }
    fn nodes(&self) -> Vec<f64> {
        self.dec.grid.points().iter().map(|p| p[0]).collect()
    }
    fn eigenvalues(&self) -> Vec<f64> {
        self.dec.lambdas.clone()
    }
    /// `Σ λ_k^s c_k²`
    fn spectral_form(&self, values: Vec<f64>, s: f64) -> PyResult<f64> {
        spectral_form(&self.dec, &self.function(values)?, s).map_err(err)
    }
    /// Whole-line form of the zero extension, periodized on a torus `torus_factor` times larger.
    #[pyo3(signature = (values, s, torus_factor = 4))]
    fn riesz_form(&self, values: Vec<f64>, s: f64, torus_factor: usize) -> PyResult<f64> {
        riesz_form(&self.function(values)?, s, torus_factor).map_err(err)
    }
    /// Weighted Dirichlet energy of the extension, scaled by the extension constant.
    fn extension_energy(&self, values: Vec<f64>, s: f64) -> PyResult<f64> {
        let u = self.function(values)?;
        let t = default_t_nodes(&self.dec, s).map_err(err)?;
        let w = extend_order(&self.dec, &u, s, &t).map_err(err)?;
        Ok(frachs::special::extension_constant(s) * extension_energy(&w).map_err(err)?)
    }
    fn random_bumps(&self, count: usize, seed: u64) -> PyResult<Vec<Vec<f64>>> {
        let b = random_bumps(&self.dec.grid, count, seed).map_err(err)?;
        Ok(b.into_iter().map(|u| u.values).collect())
    }
}

#[pyfunction]
fn bessel_k(nu: f64, tau: f64) -> PyResult<f64> {
    frachs::bessel_k(nu, tau).map_err(err)
}

#[pyfunction]
fn gamma(x: f64) -> f64 {
    frachs::gamma(x)
}

#[pyfunction]
fn extension_constant(s: f64) -> f64 {
    frachs::special::extension_constant(s)
}

/// Kernel `kind` in {"source", "boundary", "trace"} at `(y, z)` with pole `xi`.
#[pyfunction]
fn green_kernel_value(kind: &str, y: Vec<f64>, z: f64, xi: Vec<f64>, params: &PyParams) -> PyResult<f64> {
    let p = &params.0;
    let (kind, c) = match kind {
        "source" => (KernelKind::SourceData, riesz_potential_constant(p.n, p.s)),
        "boundary" => (KernelKind::BoundaryData, poisson_constant(p.n, p.s)),
        "trace" => (KernelKind::Trace, riesz_potential_constant(p.n, p.s)),
        other => return Err(PyValueError::new_err(format!("unknown kernel {other:?}"))),
    };
    let pt = KernelPoint::new(y, z, xi).map_err(err)?;
    green_kernel(kind, &pt, p, c).map_err(err)
}

/// Reduced half-space minimizer; returns the quotient history and decay constants.
#[pyfunction]
#[pyo3(signature = (params, radius = 20.0, resolution = 64, tol = 1e-8))]
fn halfspace<'py>(py: Python<'py>, params: &PyParams, radius: f64, resolution: usize, tol: f64) -> PyResult<Bound<'py, PyDict>> {
    let m = halfspace_minimizer(&params.0, radius, resolution, tol).map_err(err)?;
    let c = decay_certificate(&m).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("quotient", m.quotient)?;
    d.set_item("history", m.history.clone())?;
    d.set_item("median_mass_radius", m.median_mass_radius)?;
    d.set_item("phi_constant", c.phi_constant)?;
    d.set_item("v_constant", c.v_constant)?;
    d.set_item("values", m.values.values.clone())?;
    Ok(d)
}

/// Refinement study of discrete minimizers on `(lo, hi)`.
#[pyfunction]
#[pyo3(signature = (params, lo = -1.0, hi = 1.0, levels = 3, base_resolution = 64, tol = 1e-8))]
fn nonattainment<'py>(
    py: Python<'py>,
    params: &PyParams,
    lo: f64,
    hi: f64,
    levels: usize,
    base_resolution: usize,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let r = nonattainment_diagnostic(&Domain::Interval { lo, hi }, &params.0, levels, base_resolution, ElOptions::new(tol))
        .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("quotients", r.quotient_per_refinement.clone())?;
    d.set_item("medians", r.median_per_refinement.clone())?;
    d.set_item("median_strictly_decreasing", r.median_strictly_decreasing())?;
    d.set_item("quotient_nonincreasing", r.quotient_nonincreasing())?;
    Ok(d)
}

/// Curvature functionals of `-coeff |x|^alpha` (times `|ln|x||^kappa` when given).
#[pyfunction]
#[pyo3(signature = (params, taus, alpha = 2.0, coeff = 1.0, kappa = None, r0 = 0.9))]
fn curvature<'py>(
    py: Python<'py>,
    params: &PyParams,
    taus: Vec<f64>,
    alpha: f64,
    coeff: f64,
    kappa: Option<f64>,
    r0: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let n = params.0.n;
    let bp = match kappa {
        Some(k) => BoundaryProfile::power_log(n, alpha, k, r0),
        None => BoundaryProfile::power_law(n, alpha, coeff, r0),
    }
    .map_err(err)?;
    let r = curvature_functionals(&bp, &taus, &params.0).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("alpha_hat", r.alpha_hat)?;
    d.set_item("all_pass", r.all_pass())?;
    d.set_item("cauchy_schwarz", r.cauchy_schwarz_holds())?;
    d.set_item("f", r.f.clone())?;
    Ok(d)
}

#[pymodule]
#[pyo3(name = "frachs")]
pub fn frachs_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParams>()?;
    m.add_class::<PySpectrum>()?;
    m.add_function(wrap_pyfunction!(bessel_k, m)?)?;
    m.add_function(wrap_pyfunction!(gamma, m)?)?;
    m.add_function(wrap_pyfunction!(extension_constant, m)?)?;
    m.add_function(wrap_pyfunction!(green_kernel_value, m)?)?;
    m.add_function(wrap_pyfunction!(halfspace, m)?)?;
    m.add_function(wrap_pyfunction!(nonattainment, m)?)?;
    m.add_function(wrap_pyfunction!(curvature, m)?)?;
    Ok(())
}
