//! Python bindings: `import nlqw`.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use nlqw_core::coins::{perturbation_exponent_check, CoinFamily};
use nlqw_core::spectral::{self, Band, Branch};
use nlqw_core::wlt::{self, AsymptoticSource, VerifyOptions};
use nlqw_core::{dynamics, scattering, Spinor};

fn to_py(e: nlqw_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "BaseCoin", module = "nlqw", frozen)]
struct PyBaseCoin(nlqw_core::BaseCoin);

#[pymethods]
impl PyBaseCoin {
    #[new]
    fn new(a: Complex64, b: Complex64) -> PyResult<Self> {
        nlqw_core::BaseCoin::new(a, b).map(PyBaseCoin).map_err(to_py)
    }

    #[staticmethod]
    fn hadamard() -> Self {
        PyBaseCoin(nlqw_core::BaseCoin::hadamard())
    }

    #[getter]
    fn a(&self) -> Complex64 {
        self.0.a()
    }

    #[getter]
    fn b(&self) -> Complex64 {
        self.0.b()
    }

    #[getter]
    fn theta_a(&self) -> f64 {
        self.0.theta_a()
    }

    #[getter]
    fn abs_a(&self) -> f64 {
        self.0.abs_a()
    }

    fn matrix(&self) -> [[Complex64; 2]; 2] {
        self.0.matrix().0
    }

    fn __repr__(&self) -> String {
        format!("BaseCoin(a={}, b={})", self.0.a(), self.0.b())
    }
}

#[pyclass(name = "CoinModel", module = "nlqw", frozen)]
struct PyCoinModel(nlqw_core::NonlinearCoinModel);

#[pymethods]
impl PyCoinModel {
    #[new]
    #[pyo3(signature = (base, family="linear", m=1, kappa=1.0, g=0.0))]
    fn new(base: &PyBaseCoin, family: &str, m: u32, kappa: f64, g: f64) -> PyResult<Self> {
        let family: CoinFamily = family.parse().map_err(to_py)?;
        nlqw_core::NonlinearCoinModel::new(base.0, family, m, kappa, g)
            .map(PyCoinModel)
            .map_err(to_py)
    }

    #[getter]
    fn family(&self) -> &'static str {
        self.0.family.name()
    }

    #[getter]
    fn g(&self) -> f64 {
        self.0.coupling_g
    }

    fn is_linear(&self) -> bool {
        self.0.is_linear()
    }

    fn cn_matrix(&self, s1: f64, s2: f64) -> [[Complex64; 2]; 2] {
        self.0.cn_matrix(s1, s2).0
    }

    /// `(c0_value, c0_derivative, regime)` over a grid on `[0, s_max]^2`.
    #[pyo3(signature = (s_max=1.0, points=21))]
    fn perturbation_check(&self, s_max: f64, points: usize) -> (f64, f64, String) {
        let r = perturbation_exponent_check(&self.0, s_max, points);
        (r.c0_value, r.c0_derivative, r.regime.describe().to_string())
    }
}

#[pyclass(name = "LatticeState", module = "nlqw", frozen)]
struct PyLatticeState(nlqw_core::LatticeState);

#[pymethods]
impl PyLatticeState {
    /// `sites` is a list of `(x, up, down)` with complex amplitudes.
    #[new]
    fn new(sites: Vec<(i64, Complex64, Complex64)>) -> Self {
        PyLatticeState(nlqw_core::LatticeState::from_sites(
            sites.into_iter().map(|(x, u, d)| (x, Spinor::new(u, d))),
        ))
    }

    #[staticmethod]
    fn point(x: i64, up: Complex64, down: Complex64) -> Self {
        PyLatticeState(nlqw_core::LatticeState::point(x, Spinor::new(up, down)))
    }

    fn sites(&self) -> Vec<(i64, Complex64, Complex64)> {
        self.0.iter().map(|(x, s)| (x, s.up, s.down)).collect()
    }

    fn norm_l2(&self) -> f64 {
        self.0.norm_l2()
    }

    fn norm_l1(&self) -> f64 {
        self.0.norm_l1()
    }

    fn inner(&self, other: &PyLatticeState) -> Complex64 {
        self.0.inner(&other.0)
    }

    fn fourier_eval(&self, k: f64) -> (Complex64, Complex64) {
        let s = self.0.fourier_eval(k);
        (s.up, s.down)
    }

    /// `[(x, p)]` for sites with `p > 0`.
    fn position_distribution(&self) -> PyResult<Vec<(i64, f64)>> {
        Ok(self.0.position_distribution().map_err(to_py)?.iter().collect())
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

#[pyclass(name = "VelocityDensity", module = "nlqw", frozen)]
struct PyVelocityDensity {
    density: spectral::VelocityDensity,
    cdf: Option<spectral::DensityCdf>,
}

#[pymethods]
impl PyVelocityDensity {
    fn nodes(&self) -> Vec<f64> {
        self.density.nodes().to_vec()
    }

    fn weights(&self) -> Vec<f64> {
        self.density.weights().to_vec()
    }

    fn konno(&self) -> Vec<f64> {
        self.density.konno().to_vec()
    }

    fn density(&self) -> Vec<f64> {
        self.density.density().collect()
    }

    #[getter]
    fn total_mass(&self) -> f64 {
        self.density.total_mass()
    }

    fn moment(&self, n: u32) -> PyResult<f64> {
        self.density.moment(n).map_err(to_py)
    }

    fn char_fn(&self, xi: f64) -> PyResult<Complex64> {
        self.density.char_fn(xi).map_err(to_py)
    }

    fn cdf(&self, v: f64) -> PyResult<f64> {
        self.cdf
            .as_ref()
            .map(|c| c.eval(v))
            .ok_or_else(|| PyValueError::new_err("density has zero total mass"))
    }
}

#[pyfunction]
fn step(u: &PyLatticeState, model: &PyCoinModel) -> PyLatticeState {
    PyLatticeState(dynamics::step(&u.0, &model.0))
}

#[pyfunction]
fn step_linear(u: &PyLatticeState, coin: &PyBaseCoin) -> PyLatticeState {
    PyLatticeState(dynamics::step_linear(&u.0, &coin.0))
}

#[pyfunction]
fn step_linear_inverse(u: &PyLatticeState, coin: &PyBaseCoin) -> PyLatticeState {
    PyLatticeState(dynamics::step_linear_inverse(&u.0, &coin.0))
}

#[pyfunction]
fn evolve(py: Python<'_>, model: &PyCoinModel, initial: &PyLatticeState, horizon: u64) -> PyResult<PyLatticeState> {
    let cfg = dynamics::WalkConfig::new(model.0, initial.0.clone(), horizon).map_err(to_py)?;
    Ok(PyLatticeState(py.detach(|| dynamics::evolve(&cfg))))
}

#[pyfunction]
#[pyo3(signature = (initial, model, tol=1e-6, t_max=4096))]
fn extract_asymptotic<'py>(
    py: Python<'py>,
    initial: &PyLatticeState,
    model: &PyCoinModel,
    tol: f64,
    t_max: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let r = py
        .detach(|| scattering::extract_asymptotic(&initial.0, &model.0, tol, t_max))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("converged", r.converged)?;
    d.set_item("final_T", r.final_t)?;
    d.set_item("tail_mass", r.tail_mass)?;
    d.set_item("trace", r.trace.iter().map(|s| (s.t, s.defect)).collect::<Vec<_>>())?;
    d.set_item("u_plus", PyLatticeState(r.u_plus))?;
    Ok(d)
}

#[pyfunction]
fn eigenpair(coin: &PyBaseCoin, k: f64, j: u8) -> PyResult<(Complex64, (Complex64, Complex64))> {
    let band = Band::try_from(j).map_err(to_py)?;
    let (l, phi) = spectral::eigenpair(&coin.0, k, band);
    Ok((l, (phi.up, phi.down)))
}

#[pyfunction]
fn group_velocity(coin: &PyBaseCoin, k: f64, j: u8) -> PyResult<f64> {
    Ok(spectral::group_velocity(&coin.0, k, Band::try_from(j).map_err(to_py)?))
}

#[pyfunction]
fn konno_density(v: f64, r: f64) -> f64 {
    spectral::konno_density(v, r)
}

#[pyfunction]
fn k_branch(v: f64, j: u8, m: u8, coin: &PyBaseCoin) -> PyResult<f64> {
    let band = Band::try_from(j).map_err(to_py)?;
    let branch = Branch::try_from(m).map_err(to_py)?;
    spectral::k_branch(v, band, branch, &coin.0).map_err(to_py)
}

#[pyfunction]
fn k_transform(u: &PyLatticeState, v: f64, j: u8, m: u8, coin: &PyBaseCoin) -> PyResult<Complex64> {
    let band = Band::try_from(j).map_err(to_py)?;
    let branch = Branch::try_from(m).map_err(to_py)?;
    spectral::k_transform(&u.0, v, band, branch, &coin.0).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (u_plus, coin, n_nodes=513))]
fn limit_density(py: Python<'_>, u_plus: &PyLatticeState, coin: &PyBaseCoin, n_nodes: usize) -> PyResult<PyVelocityDensity> {
    let density = py
        .detach(|| spectral::limit_density(&u_plus.0, &coin.0, n_nodes))
        .map_err(to_py)?;
    let cdf = density.cdf().ok();
    Ok(PyVelocityDensity { density, cdf })
}

/// Returns the convergence report as a dict with a `rows` list.
#[pyfunction]
#[pyo3(signature = (model, initial, checkpoints=None, xi_grid=None, tol=1e-6, t_max=4096, n_nodes=513))]
#[allow(clippy::too_many_arguments)]
fn verify<'py>(
    py: Python<'py>,
    model: &PyCoinModel,
    initial: &PyLatticeState,
    checkpoints: Option<Vec<u64>>,
    xi_grid: Option<Vec<f64>>,
    tol: f64,
    t_max: u64,
    n_nodes: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let defaults = VerifyOptions::default();
    let options = VerifyOptions {
        checkpoints: checkpoints.unwrap_or(defaults.checkpoints),
        xi_grid: xi_grid.unwrap_or(defaults.xi_grid),
        tol,
        t_max,
        n_nodes,
    };
    let horizon = options.checkpoints.iter().copied().max().unwrap_or(0);
    let cfg = dynamics::WalkConfig::new(model.0, initial.0.clone(), horizon).map_err(to_py)?;
    let report = py.detach(|| wlt::verify(&cfg, &options)).map_err(to_py)?;

    let d = PyDict::new(py);
    let rows = report
        .rows
        .iter()
        .map(|r| {
            let row = PyDict::new(py);
            row.set_item("t", r.t)?;
            row.set_item("ks", r.ks)?;
            row.set_item("moment_errors", r.moment_errors.to_vec())?;
            row.set_item("charfn_sup_err", r.charfn_sup_err)?;
            Ok(row)
        })
        .collect::<PyResult<Vec<_>>>()?;
    d.set_item("rows", rows)?;
    d.set_item("theoretical_moments", report.theoretical_moments.to_vec())?;
    d.set_item("total_mass", report.total_mass)?;
    d.set_item("ks_trend_ok", report.ks_trend_ok)?;
    d.set_item("charfn_trend_ok", report.charfn_trend_ok)?;
    d.set_item("annotations", report.annotations.clone())?;
    let converged = match report.source {
        AsymptoticSource::Initial => true,
        AsymptoticSource::Scattering { converged, .. } => converged,
    };
    d.set_item("converged", converged)?;
    d.set_item("csv", report.to_csv())?;
    Ok(d)
}

#[pymodule]
fn nlqw(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBaseCoin>()?;
    m.add_class::<PyCoinModel>()?;
    m.add_class::<PyLatticeState>()?;
    m.add_class::<PyVelocityDensity>()?;
    m.add_function(wrap_pyfunction!(step, m)?)?;
    m.add_function(wrap_pyfunction!(step_linear, m)?)?;
    m.add_function(wrap_pyfunction!(step_linear_inverse, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(extract_asymptotic, m)?)?;
    m.add_function(wrap_pyfunction!(eigenpair, m)?)?;
    m.add_function(wrap_pyfunction!(group_velocity, m)?)?;
    m.add_function(wrap_pyfunction!(konno_density, m)?)?;
    m.add_function(wrap_pyfunction!(k_branch, m)?)?;
    m.add_function(wrap_pyfunction!(k_transform, m)?)?;
    m.add_function(wrap_pyfunction!(limit_density, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
