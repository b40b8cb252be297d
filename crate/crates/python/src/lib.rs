//! Python bindings for the uplink analyzer and simulator.
//!
//! The module mirrors the library's main types and operations: `Config`
//! holds the network parameters, `AreaModel` is the fitted cell-area
//! distribution, `Uplink` bundles the closed-form uplink quantities
//! (pair correlation, interference transform, coverage, spectral
//! efficiency), and the `simulate_*` functions run the Monte Carlo
//! estimators. Thresholds and transform arguments are linear; use
//! `db_to_linear` at the boundary. All simulation entry points release
//! the interpreter lock while they run.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyDict, PyList, PyString};

use jm_uplink_core::area_model::{
    self, fit_area_model, BetaMixtureAreaModel, LoadModel,
};
use jm_uplink_core::monte_carlo::{self, EmpiricalAreaCdf};
use jm_uplink_core::numerics::{QuadratureSpec, RootFindSpec};
use jm_uplink_core::point_process::SimulationWindow;
use jm_uplink_core::uplink::{self, InterfererDensityModel, NetworkConfig};
use jm_uplink_core::{validation, Error};

/// Map library failures onto Python exceptions: numerical breakdowns become
/// `RuntimeError`, everything else is a caller mistake and becomes
/// `ValueError`.
fn pyerr(e: Error) -> PyErr {
    match e {
        Error::NonConvergence(_)
        | Error::NoRoot(_)
        | Error::DivergentMoment(_)
        | Error::InvalidMoments(_)
        | Error::RejectionBudgetExceeded { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn quad() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn root() -> RootFindSpec {
    RootFindSpec::default()
}

/// `10^(db/10)`.
#[pyfunction]
fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Network parameters: station density `lambda0` (per m^2), dimensionless
/// cell range `kappa`, active-user density `lambda_u` (per m^2), path-loss
/// exponent `alpha_pl` (> 2), distance correction `c2`, and bandwidth in Hz.
#[pyclass(skip_from_py_object)]
#[derive(Clone)]
struct Config {
    inner: NetworkConfig,
}

#[pymethods]
impl Config {
    #[new]
    #[pyo3(signature = (lambda0, kappa, lambda_u, alpha_pl, c2=1.25, bandwidth=1.0))]
    fn new(
        lambda0: f64,
        kappa: f64,
        lambda_u: f64,
        alpha_pl: f64,
        c2: f64,
        bandwidth: f64,
    ) -> PyResult<Self> {
        let inner = NetworkConfig::new(lambda0, kappa, lambda_u, alpha_pl)
            .and_then(|c| c.with_c2(c2))
            .and_then(|c| c.with_bandwidth(bandwidth))
            .map_err(pyerr)?;
        Ok(Self { inner })
    }

    #[getter]
    fn lambda0(&self) -> f64 {
        self.inner.lambda0
    }

    #[getter]
    fn kappa(&self) -> f64 {
        self.inner.kappa
    }

    #[getter]
    fn lambda_u(&self) -> f64 {
        self.inner.lambda_u
    }

    #[getter]
    fn alpha_pl(&self) -> f64 {
        self.inner.alpha_pl
    }

    #[getter]
    fn c2(&self) -> f64 {
        self.inner.c2
    }

    #[getter]
    fn bandwidth(&self) -> f64 {
        self.inner.bandwidth
    }

    /// Cell range in meters.
    #[getter]
    fn r_c(&self) -> f64 {
        self.inner.r_c()
    }

    fn __repr__(&self) -> String {
        format!(
            "Config(lambda0={}, kappa={}, lambda_u={}, alpha_pl={}, c2={}, bandwidth={})",
            self.inner.lambda0,
            self.inner.kappa,
            self.inner.lambda_u,
            self.inner.alpha_pl,
            self.inner.c2,
            self.inner.bandwidth
        )
    }
}

/// Fitted distribution of the origin-station cell area: a truncated beta
/// body plus an atom at the full disk area for the event that no neighbor
/// clips the disk.
#[pyclass(skip_from_py_object)]
#[derive(Clone)]
struct AreaModel {
    inner: BetaMixtureAreaModel,
}

#[pymethods]
impl AreaModel {
    /// Fit the model for stations of density `lambda0` and cell range `r_c`.
    #[staticmethod]
    fn fit(py: Python<'_>, lambda0: f64, r_c: f64) -> PyResult<Self> {
        let inner = py
            .detach(|| fit_area_model(lambda0, r_c, &quad(), &root()))
            .map_err(pyerr)?;
        Ok(Self { inner })
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta
    }

    /// Probability that the cell is the full disk.
    #[getter]
    fn p_e1(&self) -> f64 {
        self.inner.full_disk_prob
    }

    #[getter]
    fn kappa(&self) -> f64 {
        self.inner.kappa
    }

    #[getter]
    fn r_c(&self) -> f64 {
        self.inner.r_c
    }

    /// Upper end of the modeled support in square meters.
    #[getter]
    fn truncation_point(&self) -> f64 {
        self.inner.truncation_point()
    }

    /// Distribution function of the cell area at `x` square meters.
    fn cdf(&self, x: f64) -> PyResult<f64> {
        self.inner.cdf(x, &quad()).map_err(pyerr)
    }

    /// `E[1/X]` for the cell area `X`, in 1/m^2.
    fn inverse_moment(&self) -> PyResult<f64> {
        self.inner.inverse_moment(&quad()).map_err(pyerr)
    }

    /// Mean of `1/N` where `N` is the nonempty-cell user count at user
    /// density `lambda_u`.
    fn mean_inverse_load(&self, lambda_u: f64) -> PyResult<f64> {
        area_model::mean_inverse_load(lambda_u, &self.inner, &quad()).map_err(pyerr)
    }

    fn __repr__(&self) -> String {
        format!(
            "AreaModel(kappa={:.4}, alpha={:.4}, beta={:.4}, p_e1={:.4})",
            self.inner.kappa, self.inner.alpha, self.inner.beta, self.inner.full_disk_prob
        )
    }
}

/// Closed-form uplink quantities for one configuration: interferer pair
/// correlation, aggregate-interference transform, serving-distance law,
/// coverage probability, and mean spectral efficiency.
#[pyclass]
struct Uplink {
    cfg: NetworkConfig,
    model: InterfererDensityModel,
    area: BetaMixtureAreaModel,
}

#[pymethods]
impl Uplink {
    #[new]
    fn new(py: Python<'_>, cfg: &Config) -> PyResult<Self> {
        let inner = cfg.inner.clone();
        let (model, area) = py
            .detach(|| {
                let model = InterfererDensityModel::from_config(&inner, &quad(), &root())?;
                let area = fit_area_model(inner.lambda0, inner.r_c(), &quad(), &root())?;
                Ok::<_, Error>((model, area))
            })
            .map_err(pyerr)?;
        Ok(Self {
            cfg: cfg.inner.clone(),
            model,
            area,
        })
    }

    /// Pair correlation of interfering users at radius `r` meters.
    fn pcf(&self, r: f64) -> PyResult<f64> {
        if !(r >= 0.0) {
            return Err(PyValueError::new_err(format!(
                "radius must be nonnegative, got {r}"
            )));
        }
        Ok(uplink::pcf(r, &self.model))
    }

    /// Interfering-user density at radius `r` meters, per m^2.
    fn interferer_density(&self, r: f64) -> PyResult<f64> {
        if !(r >= 0.0) {
            return Err(PyValueError::new_err(format!(
                "radius must be nonnegative, got {r}"
            )));
        }
        Ok(uplink::interferer_density(r, &self.model))
    }

    /// Laplace transform of the aggregate interference at argument `s`.
    fn interference_laplace(&self, s: f64) -> PyResult<f64> {
        uplink::interference_laplace(s, &self.model, self.cfg.alpha_pl, &quad()).map_err(pyerr)
    }

    /// Distribution function of the serving distance at `d` meters.
    fn serving_distance_cdf(&self, d: f64) -> PyResult<f64> {
        uplink::serving_distance_cdf(d, &self.cfg).map_err(pyerr)
    }

    /// Density of the serving distance at `d` meters.
    fn serving_distance_pdf(&self, d: f64) -> PyResult<f64> {
        uplink::serving_distance_pdf(d, &self.cfg).map_err(pyerr)
    }

    /// Coverage probability at linear SIR threshold `t`.
    fn coverage(&self, py: Python<'_>, t: f64) -> PyResult<f64> {
        py.detach(|| uplink::coverage_probability(t, &self.cfg, &self.model, &quad()))
            .map_err(pyerr)
    }

    /// Coverage over a grid of linear thresholds; returns `(t, p_c)` pairs.
    fn coverage_curve(&self, py: Python<'_>, thresholds: Vec<f64>) -> PyResult<Vec<(f64, f64)>> {
        py.detach(|| uplink::coverage_curve(&thresholds, &self.cfg, &self.model, &quad()))
            .map(|c| c.points)
            .map_err(pyerr)
    }

    /// Mean user spectral efficiency in bits/s/Hz times the bandwidth.
    fn average_se(&self, py: Python<'_>) -> PyResult<f64> {
        py.detach(|| uplink::average_user_se(&self.cfg, &self.model, &self.area, &quad()))
            .map_err(pyerr)
    }

    /// Probability that a nonempty cell at user density `lambda_u` holds
    /// exactly `n` users.
    fn load_pmf(&self, n: u32) -> PyResult<f64> {
        let mu = self.cfg.lambda_u * area_model::area_mean(self.cfg.lambda0, self.cfg.r_c());
        LoadModel::new(mu).and_then(|m| m.pmf(n)).map_err(pyerr)
    }
}

/// Empirical origin-cell areas from independent station processes.
#[pyclass]
struct AreaSamples {
    inner: EmpiricalAreaCdf,
}

#[pymethods]
impl AreaSamples {
    /// Sorted sampled areas in square meters.
    fn samples(&self) -> Vec<f64> {
        self.inner.samples().to_vec()
    }

    /// Empirical distribution function at `x` square meters.
    fn cdf(&self, x: f64) -> f64 {
        self.inner.cdf(x)
    }

    /// Fraction of realizations whose cell is the full disk.
    fn full_disk_fraction(&self) -> f64 {
        self.inner.full_disk_fraction()
    }

    /// Empirical `E[X^power]` with its standard error.
    fn moment(&self, power: u32) -> (f64, f64) {
        let m = self.inner.moment(power);
        (m.value, m.stderr)
    }

    /// Distance between this sample and a fitted model: the pair
    /// `(ksd, kld)` of sup-CDF distance and binned relative entropy.
    fn fit_quality(&self, model: &AreaModel) -> PyResult<(f64, f64)> {
        let gof = monte_carlo::goodness_of_fit(&self.inner, &model.inner, &quad()).map_err(pyerr)?;
        Ok((gof.ksd, gof.kld))
    }
}

fn window_for(cfg: &NetworkConfig, factor: f64) -> SimulationWindow {
    SimulationWindow::for_density(cfg.lambda0, factor)
}

/// Monte Carlo coverage at linear thresholds; returns
/// `(threshold, p_c, stderr)` per threshold.
#[pyfunction]
#[pyo3(signature = (cfg, thresholds, n_realizations, seed, window_factor=10.0))]
fn simulate_coverage(
    py: Python<'_>,
    cfg: &Config,
    thresholds: Vec<f64>,
    n_realizations: u64,
    seed: u64,
    window_factor: f64,
) -> PyResult<Vec<(f64, f64, f64)>> {
    let inner = cfg.inner.clone();
    let cov = py
        .detach(|| {
            monte_carlo::estimate_coverage(
                &inner,
                window_for(&inner, window_factor),
                &thresholds,
                n_realizations,
                seed,
            )
        })
        .map_err(pyerr)?;
    Ok(cov.points.iter().map(|p| (p.threshold, p.p_c, p.stderr)).collect())
}

/// Monte Carlo coverage for the unbounded cluster baseline (users uniform
/// in the full disk), paired by seed with `simulate_coverage`.
#[pyfunction]
#[pyo3(signature = (cfg, thresholds, n_realizations, seed, window_factor=10.0))]
fn simulate_coverage_mcp(
    py: Python<'_>,
    cfg: &Config,
    thresholds: Vec<f64>,
    n_realizations: u64,
    seed: u64,
    window_factor: f64,
) -> PyResult<Vec<(f64, f64, f64)>> {
    let inner = cfg.inner.clone();
    let cov = py
        .detach(|| {
            monte_carlo::estimate_coverage_mcp(
                &inner,
                window_for(&inner, window_factor),
                &thresholds,
                n_realizations,
                seed,
            )
        })
        .map_err(pyerr)?;
    Ok(cov.points.iter().map(|p| (p.threshold, p.p_c, p.stderr)).collect())
}

/// Monte Carlo mean spectral efficiency; returns `(value, stderr)`.
#[pyfunction]
#[pyo3(signature = (cfg, n_realizations, seed, window_factor=10.0))]
fn simulate_se(
    py: Python<'_>,
    cfg: &Config,
    n_realizations: u64,
    seed: u64,
    window_factor: f64,
) -> PyResult<(f64, f64)> {
    let inner = cfg.inner.clone();
    let est = py
        .detach(|| {
            monte_carlo::estimate_se(&inner, window_for(&inner, window_factor), n_realizations, seed)
        })
        .map_err(pyerr)?;
    Ok((est.value, est.stderr))
}

/// Empirical origin-cell area distribution from `n_realizations` station
/// processes, each probed with `n_probes` uniform points.
#[pyfunction]
#[pyo3(signature = (cfg, n_realizations, seed, n_probes=4096, window_factor=10.0))]
fn simulate_area_samples(
    py: Python<'_>,
    cfg: &Config,
    n_realizations: u64,
    seed: u64,
    n_probes: u32,
    window_factor: f64,
) -> PyResult<AreaSamples> {
    let inner = cfg.inner.clone();
    let emp = py
        .detach(|| {
            monte_carlo::estimate_area_cdf(
                &inner,
                window_for(&inner, window_factor),
                n_realizations,
                n_probes,
                seed,
            )
        })
        .map_err(pyerr)?;
    Ok(AreaSamples { inner: emp })
}

/// Binned empirical pair correlation of interfering users; returns the
/// pair of lists `(r_normalized, g)` where radii are in units of
/// `1/sqrt(lambda0)`.
#[pyfunction]
#[pyo3(signature = (cfg, n_realizations, seed, n_bins=50, window_factor=10.0))]
fn simulate_pcf(
    py: Python<'_>,
    cfg: &Config,
    n_realizations: u64,
    seed: u64,
    n_bins: usize,
    window_factor: f64,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let inner = cfg.inner.clone();
    let emp = py
        .detach(|| {
            monte_carlo::estimate_pcf(
                &inner,
                window_for(&inner, window_factor),
                n_bins,
                n_realizations,
                seed,
            )
        })
        .map_err(pyerr)?;
    Ok((emp.normalized_centers(), emp.g))
}

/// One raw record per realization:
/// `(index, sir, serving_distance_m, load, origin_area_m2)`.
#[pyfunction]
#[pyo3(signature = (cfg, n_realizations, seed, window_factor=10.0))]
fn simulate_samples(
    py: Python<'_>,
    cfg: &Config,
    n_realizations: u64,
    seed: u64,
    window_factor: f64,
) -> PyResult<Vec<(u64, f64, f64, u32, f64)>> {
    let inner = cfg.inner.clone();
    let recs = py
        .detach(|| {
            monte_carlo::collect_samples(&inner, window_for(&inner, window_factor), n_realizations, seed)
        })
        .map_err(pyerr)?;
    Ok(recs
        .iter()
        .map(|r| (r.index, r.sir, r.serving_distance, r.load, r.origin_area))
        .collect())
}

fn json_to_py<'py>(py: Python<'py>, v: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    use serde_json::Value;
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => PyBool::new(py, *b).to_owned().into_any(),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_pyobject(py)?.into_any()
            } else if let Some(u) = n.as_u64() {
                u.into_pyobject(py)?.into_any()
            } else {
                n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any()
            }
        }
        Value::String(s) => PyString::new(py, s).into_any(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (key, item) in map {
                dict.set_item(key, json_to_py(py, item)?)?;
            }
            dict.into_any()
        }
    })
}

/// Run the full self-validation suite and return the report as a dict
/// (`seed`, `passed`, and one entry per criterion with its checks).
#[pyfunction]
fn run_validation(py: Python<'_>, seed: u64) -> PyResult<Bound<'_, PyAny>> {
    let report = py.detach(|| validation::run_validation(seed)).map_err(pyerr)?;
    let value = serde_json::to_value(&report)
        .map_err(|e| PyRuntimeError::new_err(format!("cannot encode report: {e}")))?;
    json_to_py(py, &value)
}

/// Closed-form mean origin-cell area in square meters.
#[pyfunction]
fn mean_cell_area(lambda0: f64, r_c: f64) -> PyResult<f64> {
    if !(lambda0 > 0.0) || !(r_c > 0.0) {
        return Err(PyValueError::new_err(format!(
            "density and range must be positive, got lambda0={lambda0}, r_c={r_c}"
        )));
    }
    Ok(area_model::area_mean(lambda0, r_c))
}

/// Closed-form second moment of the origin-cell area.
#[pyfunction]
fn cell_area_second_moment(lambda0: f64, r_c: f64) -> PyResult<f64> {
    area_model::area_second_moment(lambda0, r_c, &quad()).map_err(pyerr)
}

/// Probability that no neighbor clips the origin disk: `exp(-4 pi l r^2)`.
#[pyfunction]
fn disk_in_cell_probability(lambda0: f64, r_c: f64) -> PyResult<f64> {
    if !(lambda0 > 0.0) || !(r_c > 0.0) {
        return Err(PyValueError::new_err(format!(
            "density and range must be positive, got lambda0={lambda0}, r_c={r_c}"
        )));
    }
    Ok(area_model::prob_disk_inside_cell(lambda0, r_c))
}

#[pymodule]
fn jm_uplink(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Config>()?;
    m.add_class::<AreaModel>()?;
    m.add_class::<Uplink>()?;
    m.add_class::<AreaSamples>()?;
    m.add_function(wrap_pyfunction!(db_to_linear, m)?)?;
    m.add_function(wrap_pyfunction!(mean_cell_area, m)?)?;
    m.add_function(wrap_pyfunction!(cell_area_second_moment, m)?)?;
    m.add_function(wrap_pyfunction!(disk_in_cell_probability, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_coverage, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_coverage_mcp, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_se, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_area_samples, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_pcf, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_samples, m)?)?;
    m.add_function(wrap_pyfunction!(run_validation, m)?)?;
    Ok(())
}
