//! Python module `jrsa`: exact moments, free multiplicative convolution,
//! spectral densities and the product-ensemble Monte Carlo.
//!
//! Exact values cross the boundary as `fractions.Fraction`; structured
//! reports become plain dicts.

use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use jrsa_core::error::Error;
use jrsa_core::freeconv;
use jrsa_core::moments::{self, MomentSequence};
use jrsa_core::numkit::{format_rational, parse_rational, Rational};
use jrsa_core::rmt::{self, EnsembleConfig};
use jrsa_core::spectral::{self, QuadratureOptions};

fn py_err(e: Error) -> PyErr {
    if e.is_numerical() {
        PyArithmeticError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

/// Accepts int, str ("p/q" or decimal) or fractions.Fraction.
fn rational_arg(v: &Bound<'_, PyAny>) -> PyResult<Rational> {
    let text = if let Ok(i) = v.extract::<i64>() { i.to_string() } else { v.str()?.to_string() };
    parse_rational(&text).map_err(py_err)
}

fn fraction<'py>(py: Python<'py>, q: &Rational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?.getattr("Fraction")?.call1((format_rational(q),))
}

fn fractions<'py>(py: Python<'py>, qs: &[Rational]) -> PyResult<Vec<Bound<'py, PyAny>>> {
    qs.iter().map(|q| fraction(py, q)).collect()
}

fn json_to_py<'py>(py: Python<'py>, v: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.getattr("loads")?.call1((v.to_string(),))
}

/// Parameters `(r, s, a)` of the law `J(r,s,a)`.
#[pyclass(frozen, name = "ModelParams", module = "jrsa")]
pub struct PyModelParams {
    inner: moments::ModelParams,
}

#[pymethods]
impl PyModelParams {
    #[new]
    #[pyo3(signature = (r, s, a = None))]
    fn new(r: u32, s: u32, a: Option<&Bound<'_, PyAny>>) -> PyResult<Self> {
        let a = match a {
            Some(v) => rational_arg(v)?,
            None => Rational::from_integer(1.into()),
        };
        Ok(Self { inner: moments::ModelParams::new(r, s, a).map_err(py_err)? })
    }

    #[getter]
    fn r(&self) -> u32 {
        self.inner.r()
    }

    #[getter]
    fn s(&self) -> u32 {
        self.inner.s()
    }

    #[getter]
    fn a<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, self.inner.a())
    }

    /// Exact `J(n)` by the chosen route: "jacobi", "derivative" or "series".
    #[pyo3(signature = (n, method = "jacobi"))]
    fn moment<'py>(&self, py: Python<'py>, n: u32, method: &str) -> PyResult<Bound<'py, PyAny>> {
        let q = match method {
            "jacobi" => moments::moment_jacobi(&self.inner, n),
            "derivative" => moments::moment_derivative(&self.inner, n).map_err(py_err)?,
            "series" => moments::moment_series(&self.inner, n).map_err(py_err)?.values[n as usize].clone(),
            other => return Err(PyValueError::new_err(format!("unknown method '{other}'"))),
        };
        fraction(py, &q)
    }

    /// `[J(0), ..., J(n_max)]` as fractions.
    fn moments<'py>(&self, py: Python<'py>, n_max: u32) -> PyResult<Vec<Bound<'py, PyAny>>> {
        fractions(py, &MomentSequence::jacobi(&self.inner, n_max as usize + 1).values)
    }

    fn __repr__(&self) -> String {
        format!("ModelParams(r={}, s={}, a={})", self.inner.r(), self.inner.s(), format_rational(self.inner.a()))
    }
}

/// Density, support and quadrature for one `J(r,s,a)` with `s < r`.
#[pyclass(frozen, name = "SpectralModel", module = "jrsa")]
pub struct PySpectralModel {
    inner: spectral::SpectralModel,
}

#[pymethods]
impl PySpectralModel {
    #[new]
    fn new(params: &PyModelParams) -> PyResult<Self> {
        Ok(Self { inner: spectral::SpectralModel::new(&params.inner).map_err(py_err)? })
    }

    /// Dict with w_star, x_star, w_tilde, x_tilde (None when not defined).
    fn support<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let sd = self.inner.support();
        let d = PyDict::new(py);
        d.set_item("w_star", sd.w_star)?;
        d.set_item("x_star", sd.x_star)?;
        d.set_item("w_tilde", sd.w_tilde)?;
        d.set_item("x_tilde", sd.x_tilde)?;
        Ok(d)
    }

    #[getter]
    fn x_star(&self) -> f64 {
        self.inner.support().x_star
    }

    fn density(&self, x: f64) -> PyResult<f64> {
        Ok(self.inner.density(x).map_err(py_err)?.rho)
    }

    /// `[(x_i, rho(x_i))]` on `x_i = x* i/(points+1)`.
    fn density_grid(&self, points: usize) -> PyResult<Vec<(f64, f64)>> {
        Ok(self.inner.density_grid(points).map_err(py_err)?.into_iter().map(|d| (d.x, d.rho)).collect())
    }

    /// `[int x^n rho(x) dx for n in 0..=n_max]`.
    fn quadrature_moments(&self, n_max: usize) -> PyResult<Vec<f64>> {
        Ok(self.inner.quadrature_moments(n_max, QuadratureOptions::default()).map_err(py_err)?.values)
    }
}

#[pyfunction]
fn fuss_catalan<'py>(py: Python<'py>, r: u32, len: usize) -> PyResult<Vec<Bound<'py, PyAny>>> {
    fractions(py, &MomentSequence::fuss_catalan(r, len).values)
}

#[pyfunction]
fn raney<'py>(
    py: Python<'py>,
    alpha: &Bound<'py, PyAny>,
    beta: &Bound<'py, PyAny>,
    len: usize,
) -> PyResult<Vec<Bound<'py, PyAny>>> {
    let seq = MomentSequence::raney(&rational_arg(alpha)?, &rational_arg(beta)?, len).map_err(py_err)?;
    fractions(py, &seq.values)
}

/// Moments `m_0..m_{order-1}` of the free multiplicative product of the
/// factors, given as a token string like "fc:1,raney:1:1/2".
#[pyfunction]
fn free_multiply<'py>(py: Python<'py>, factors: &str, order: usize) -> PyResult<Vec<Bound<'py, PyAny>>> {
    let seqs = factors
        .split(',')
        .map(|t| jrsa_core::cli::parse_factor(t, order))
        .collect::<Result<Vec<_>, _>>()
        .map_err(py_err)?;
    let prod =
        if seqs.len() == 1 { seqs[0].clone() } else { freeconv::free_multiply_all(&seqs, order).map_err(py_err)? };
    fractions(py, &prod.values)
}

/// True when `FC_{r-s} ⊠ R_{1,1/2}^{⊠s}` reproduces `J(r,s,1)` up to `order`.
#[pyfunction]
fn verify_factorization(r: u32, s: u32, order: usize) -> PyResult<bool> {
    Ok(freeconv::verify_factorization(r, s, order).map_err(py_err)?.all_pass())
}

/// Monte Carlo comparison report as a dict.
#[pyfunction]
#[pyo3(signature = (n, r, s, trials, seed = 42, nu = None))]
fn simulate<'py>(
    py: Python<'py>,
    n: usize,
    r: u32,
    s: u32,
    trials: usize,
    seed: u64,
    nu: Option<Vec<usize>>,
) -> PyResult<Bound<'py, PyAny>> {
    let mut config = EnsembleConfig::new(n, r, s, trials, seed);
    if let Some(nu) = nu {
        config = config.with_nu(nu);
    }
    let report = rmt::run_experiment(&config).map_err(py_err)?;
    json_to_py(py, &serde_json::to_value(&report).expect("report serializes"))
}

/// Squared singular values of replicate `index`, as a list.
#[pyfunction]
#[pyo3(signature = (n, r, s, index, seed = 42))]
fn sample_spectrum(n: usize, r: u32, s: u32, index: u64, seed: u64) -> PyResult<Vec<f64>> {
    let config = EnsembleConfig::new(n, r, s, 2, seed);
    Ok(rmt::sample_spectrum(&config, index).map_err(py_err)?.eigenvalues)
}

/// Runs the command line with `args` (without the program name); returns the exit code.
#[pyfunction]
fn run_cli(args: Vec<String>) -> i32 {
    jrsa_core::cli::run(std::iter::once("jrsa".to_string()).chain(args))
}

#[pymodule]
fn jrsa(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", jrsa_core::cli::VERSION)?;
    m.add_class::<PyModelParams>()?;
    m.add_class::<PySpectralModel>()?;
    m.add_function(wrap_pyfunction!(fuss_catalan, m)?)?;
    m.add_function(wrap_pyfunction!(raney, m)?)?;
    m.add_function(wrap_pyfunction!(free_multiply, m)?)?;
    m.add_function(wrap_pyfunction!(verify_factorization, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(sample_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
