//! Python bindings for `twisted_conv`.
//!
//! Vectors are plain lists of floats and matrices are lists of rows.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use twisted_conv::bochner::{sample_points, verify_bochner, KernelReport, Scheme, DEFAULT_KERNEL_TOL};
use twisted_conv::cli::config_file::{ChannelConfig, GeneratorConfig};
use twisted_conv::fock_oracle::{qcf_trace, run_suite, DensityMatrix, OracleReport};
use twisted_conv::phase_space::DEFAULT_PSD_TOL;
use twisted_conv::quadrature::DEFAULT_QUAD_TOL;
use twisted_conv::semigroup::{
    channel_at, evolve_qcf, generator_residual, potential_v, propagate_a, propagate_m, propagate_psi, DEFAULT_FD_STEP,
};
use twisted_conv::{
    ClassicalCF, Error, LevyFunction, PhaseVector, PsdReport, QuantumCF, SemigroupGenerator, SymplecticForm,
    TwistedChannel,
};

create_exception!(twisted_conv, TwistedConvError, PyException);

fn py_err(e: Error) -> PyErr {
    TwistedConvError::new_err(e.to_string())
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<DMatrix<f64>> {
    let n = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(TwistedConvError::new_err("matrix rows have unequal lengths"));
    }
    Ok(DMatrix::from_fn(n, cols, |i, j| rows[i][j]))
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn phase(xi: Vec<f64>) -> PyResult<PhaseVector> {
    PhaseVector::new(xi).map_err(py_err)
}

fn psd_dict<'py>(py: Python<'py>, r: &PsdReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("is_psd", r.is_psd)?;
    d.set_item("min_eigenvalue", r.min_eigenvalue)?;
    d.set_item("eigenvalues", r.eigenvalues.clone())?;
    d.set_item("tolerance", r.tolerance)?;
    Ok(d)
}

fn kernel_dict<'py>(py: Python<'py>, r: &KernelReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("is_positive", r.is_positive)?;
    d.set_item("min_eigenvalue", r.min_eigenvalue)?;
    d.set_item("point_count", r.point_count)?;
    d.set_item("tolerance", r.tolerance)?;
    Ok(d)
}

fn oracle_dict<'py>(py: Python<'py>, r: &OracleReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("identity", &r.identity)?;
    d.set_item("cutoff", r.cutoff)?;
    d.set_item("max_residual", r.max_residual)?;
    d.set_item("threshold", r.threshold)?;
    d.set_item("pass", r.pass)?;
    d.set_item("control_residual", r.control_residual)?;
    d.set_item("note", r.note.clone())?;
    Ok(d)
}

fn parse_scheme(name: &str) -> PyResult<Scheme> {
    match name {
        "random-gaussian" => Ok(Scheme::RandomGaussian),
        "lattice" => Ok(Scheme::Lattice),
        other => Err(TwistedConvError::new_err(format!("unknown scheme {other:?}"))),
    }
}

/// Symplectic form of `modes` modes as a list of rows.
#[pyfunction]
fn symplectic_form(modes: usize) -> PyResult<Vec<Vec<f64>>> {
    let form = SymplecticForm::new(modes).map_err(py_err)?;
    Ok(rows(form.matrix()))
}

/// Quantum characteristic function of a state.
#[pyclass(name = "State", module = "twisted_conv", frozen)]
pub struct PyState {
    inner: QuantumCF,
}

#[pymethods]
impl PyState {
    #[staticmethod]
    fn gaussian(mean: Vec<f64>, covariance: Vec<Vec<f64>>) -> PyResult<Self> {
        let inner = QuantumCF::gaussian_state(DVector::from_vec(mean), matrix(covariance)?).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn vacuum(modes: usize) -> PyResult<Self> {
        Ok(Self {
            inner: QuantumCF::vacuum(modes).map_err(py_err)?,
        })
    }

    #[getter]
    fn modes(&self) -> usize {
        self.inner.modes()
    }

    fn __call__(&self, xi: Vec<f64>) -> PyResult<Complex64> {
        self.inner.eval(&DVector::from_vec(xi)).map_err(py_err)
    }

    /// Gaussian parameters `(mean, covariance)`, or `None` for other states.
    fn gaussian_parameters(&self) -> Option<(Vec<f64>, Vec<Vec<f64>>)> {
        match &self.inner {
            QuantumCF::GaussianState { mean, covariance } => Some((mean.iter().copied().collect(), rows(covariance))),
            _ => None,
        }
    }

    #[pyo3(signature = (points = 50, radius = 2.0, seed = 0, scheme = "random-gaussian", tol = DEFAULT_KERNEL_TOL))]
    fn bochner<'py>(
        &self,
        py: Python<'py>,
        points: usize,
        radius: f64,
        seed: u64,
        scheme: &str,
        tol: f64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let modes = self.inner.modes();
        let set = sample_points(modes, points, radius, seed, parse_scheme(scheme)?).map_err(py_err)?;
        let form = SymplecticForm::new(modes).map_err(py_err)?;
        let report = verify_bochner(&self.inner, &set, &form, tol).map_err(py_err)?;
        kernel_dict(py, &report)
    }

    fn __repr__(&self) -> String {
        format!("State({:?})", self.inner)
    }
}

/// Twisted convolution channel `f ↦ f(Aξ) · exp(-½ ξᵀMξ) · φ(ξ)`.
#[pyclass(name = "Channel", module = "twisted_conv", frozen)]
pub struct PyChannel {
    inner: TwistedChannel,
}

#[pymethods]
impl PyChannel {
    /// `φ` is Gaussian when `covariance` is given, a point mass when only
    /// `mean` is given, and the unit function otherwise.
    #[new]
    #[pyo3(signature = (a, m, mean = None, covariance = None, tol = DEFAULT_PSD_TOL))]
    fn new(
        a: Vec<Vec<f64>>,
        m: Vec<Vec<f64>>,
        mean: Option<Vec<f64>>,
        covariance: Option<Vec<Vec<f64>>>,
        tol: f64,
    ) -> PyResult<Self> {
        let a = matrix(a)?;
        let dim = a.nrows();
        let phi = match (mean, covariance) {
            (mean, Some(cov)) => {
                let mean = mean.map_or_else(|| DVector::zeros(dim), DVector::from_vec);
                ClassicalCF::gaussian(mean, matrix(cov)?).map_err(py_err)?
            }
            (Some(mean), None) => ClassicalCF::point_mass(DVector::from_vec(mean)).map_err(py_err)?,
            (None, None) => ClassicalCF::Unit,
        };
        let inner = TwistedChannel::with_tolerance(phi, matrix(m)?, a, tol).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn identity(modes: usize) -> PyResult<Self> {
        Ok(Self {
            inner: TwistedChannel::identity(modes).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn attenuator(modes: usize, eta: f64) -> PyResult<Self> {
        Ok(Self {
            inner: TwistedChannel::attenuator(modes, eta).map_err(py_err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (text, tol = DEFAULT_PSD_TOL))]
    fn from_json(text: &str, tol: f64) -> PyResult<Self> {
        let config: ChannelConfig = serde_json::from_str(text).map_err(|e| py_err(e.into()))?;
        Ok(Self {
            inner: config.build(tol).map_err(py_err)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        let config = ChannelConfig::from_channel(&self.inner).map_err(py_err)?;
        serde_json::to_string_pretty(&config).map_err(|e| py_err(e.into()))
    }

    #[getter]
    fn modes(&self) -> usize {
        self.inner.modes()
    }

    #[getter]
    fn a(&self) -> Vec<Vec<f64>> {
        rows(self.inner.a())
    }

    #[getter]
    fn m(&self) -> Vec<Vec<f64>> {
        rows(self.inner.m())
    }

    #[getter]
    fn phi_kind(&self) -> &'static str {
        self.inner.phi().kind()
    }

    fn phi(&self, xi: Vec<f64>) -> PyResult<Complex64> {
        self.inner.phi().eval(&DVector::from_vec(xi)).map_err(py_err)
    }

    #[pyo3(signature = (tol = DEFAULT_PSD_TOL))]
    fn admissibility<'py>(&self, py: Python<'py>, tol: f64) -> PyResult<Bound<'py, PyDict>> {
        psd_dict(py, &self.inner.admissibility(tol).map_err(py_err)?)
    }

    /// `self` followed by `next`.
    fn then(&self, next: &PyChannel) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.then(&next.inner).map_err(py_err)?,
        })
    }

    fn apply(&self, state: &PyState) -> PyResult<PyState> {
        Ok(PyState {
            inner: self.inner.apply(&state.inner).map_err(py_err)?,
        })
    }

    /// Closed-form action on a Gaussian state.
    fn apply_gaussian(&self, state: &PyState) -> PyResult<PyState> {
        Ok(PyState {
            inner: self.inner.apply_gaussian(&state.inner).map_err(py_err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!("Channel(modes={}, phi={})", self.inner.modes(), self.inner.phi().kind())
    }
}

/// `second ∘ first`: `first` is applied first.
#[pyfunction]
fn compose(second: &PyChannel, first: &PyChannel) -> PyResult<PyChannel> {
    Ok(PyChannel {
        inner: twisted_conv::compose(&second.inner, &first.inner).map_err(py_err)?,
    })
}

/// Generator `(A, N, γ)` of a twisted convolution semigroup.
#[pyclass(name = "Generator", module = "twisted_conv", frozen)]
pub struct PyGenerator {
    inner: SemigroupGenerator,
}

#[pymethods]
impl PyGenerator {
    /// `atoms` is a list of `(location, weight)` pairs for the jump part.
    #[new]
    #[pyo3(signature = (a, noise, drift = None, atoms = None, tol = DEFAULT_PSD_TOL))]
    fn new(
        a: Vec<Vec<f64>>,
        noise: Vec<Vec<f64>>,
        drift: Option<Vec<f64>>,
        atoms: Option<Vec<(Vec<f64>, f64)>>,
        tol: f64,
    ) -> PyResult<Self> {
        let a = matrix(a)?;
        let mut gamma = LevyFunction::zero(a.nrows()).map_err(py_err)?;
        if let Some(d) = drift {
            gamma = gamma.with_drift(DVector::from_vec(d)).map_err(py_err)?;
        }
        for (loc, w) in atoms.unwrap_or_default() {
            gamma = gamma.with_atom(DVector::from_vec(loc), w).map_err(py_err)?;
        }
        let inner = SemigroupGenerator::with_tolerance(a, matrix(noise)?, gamma, tol).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn attenuator(modes: usize, kappa: f64) -> PyResult<Self> {
        Ok(Self {
            inner: SemigroupGenerator::attenuator(modes, kappa).map_err(py_err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (text, tol = DEFAULT_PSD_TOL))]
    fn from_json(text: &str, tol: f64) -> PyResult<Self> {
        let config: GeneratorConfig = serde_json::from_str(text).map_err(|e| py_err(e.into()))?;
        Ok(Self {
            inner: config.build(tol).map_err(py_err)?,
        })
    }

    #[getter]
    fn modes(&self) -> usize {
        self.inner.modes()
    }

    #[pyo3(signature = (tol = DEFAULT_PSD_TOL))]
    fn check<'py>(&self, py: Python<'py>, tol: f64) -> PyResult<Bound<'py, PyDict>> {
        psd_dict(py, &self.inner.check(tol).map_err(py_err)?)
    }

    fn a_t(&self, t: f64) -> PyResult<Vec<Vec<f64>>> {
        Ok(rows(&propagate_a(&self.inner, t).map_err(py_err)?))
    }

    fn m_t(&self, t: f64) -> PyResult<Vec<Vec<f64>>> {
        Ok(rows(&propagate_m(&self.inner, t).map_err(py_err)?))
    }

    #[pyo3(signature = (t, xi, quad_tol = DEFAULT_QUAD_TOL))]
    fn psi(&self, t: f64, xi: Vec<f64>, quad_tol: f64) -> PyResult<Complex64> {
        propagate_psi(&self.inner, t, &phase(xi)?, quad_tol).map_err(py_err)
    }

    fn potential(&self, xi: Vec<f64>) -> PyResult<Complex64> {
        potential_v(&self.inner, &phase(xi)?).map_err(py_err)
    }

    #[pyo3(signature = (t, quad_tol = DEFAULT_QUAD_TOL))]
    fn channel_at(&self, t: f64, quad_tol: f64) -> PyResult<PyChannel> {
        Ok(PyChannel {
            inner: channel_at(&self.inner, t, quad_tol).map_err(py_err)?,
        })
    }

    /// `f_t(ξ)` for the initial state `state`.
    fn evolve(&self, state: &PyState, t: f64, xi: Vec<f64>) -> PyResult<Complex64> {
        evolve_qcf(&self.inner, &state.inner, t, &phase(xi)?).map_err(py_err)
    }

    #[pyo3(signature = (state, t, xi, h = DEFAULT_FD_STEP))]
    fn residual(&self, state: &PyState, t: f64, xi: Vec<f64>, h: f64) -> PyResult<f64> {
        generator_residual(&self.inner, &state.inner, t, &phase(xi)?, h).map_err(py_err)
    }
}

/// `tr(ρ W(ξ))` for the coherent state `|α⟩` truncated to `cutoff` levels.
#[pyfunction]
fn coherent_qcf(alpha: Complex64, xi: Vec<f64>, cutoff: usize) -> PyResult<Complex64> {
    let rho = DensityMatrix::coherent(alpha, cutoff).map_err(py_err)?;
    qcf_trace(&rho, &phase(xi)?, cutoff).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (cutoffs = vec![20, 30, 40], identities = None))]
fn oracle_suite<'py>(
    py: Python<'py>,
    cutoffs: Vec<usize>,
    identities: Option<Vec<String>>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let reports = run_suite(&cutoffs, identities.as_deref()).map_err(py_err)?;
    reports.iter().map(|r| oracle_dict(py, r)).collect()
}

#[pymodule(name = "twisted_conv")]
pub fn twisted_conv_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("TwistedConvError", m.py().get_type::<TwistedConvError>())?;
    m.add_class::<PyState>()?;
    m.add_class::<PyChannel>()?;
    m.add_class::<PyGenerator>()?;
    m.add_function(wrap_pyfunction!(symplectic_form, m)?)?;
    m.add_function(wrap_pyfunction!(compose, m)?)?;
    m.add_function(wrap_pyfunction!(coherent_qcf, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_suite, m)?)?;
    Ok(())
}
