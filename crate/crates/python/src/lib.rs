//! Python bindings: `import e91`.
//!
//! Angles are in degrees, rates in photons (or bits) per second. Invalid
//! inputs raise `ValueError`.

use e91_core as core;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: core::Error) -> PyErr {
    if e.is_validation() {
        PyValueError::new_err(e.to_string())
    } else {
        PyIOError::new_err(e.to_string())
    }
}

fn state(visibility: f64) -> PyResult<core::WernerState> {
    core::WernerState::new(visibility).map_err(py_err)
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("report types serialize")
}

/// Source, splitter and visibility settings of one operating point.
#[pyclass(name = "SetupConfig", module = "e91", frozen, from_py_object)]
#[derive(Clone)]
struct PySetupConfig(core::SetupConfig);

#[pymethods]
impl PySetupConfig {
    #[new]
    #[pyo3(signature = (budget = 1e6, r_a = 0.5, r_b = 0.5, visibility = 0.95, r_b2 = 0.5))]
    fn new(budget: f64, r_a: f64, r_b: f64, visibility: f64, r_b2: f64) -> PyResult<Self> {
        let cfg = core::SetupConfig {
            budget,
            r_a,
            r_b,
            r_b2,
            state: state(visibility)?,
            ..core::SetupConfig::default()
        };
        cfg.validate().map_err(py_err)?;
        Ok(Self(cfg))
    }

    #[getter]
    fn budget(&self) -> f64 {
        self.0.budget
    }

    #[getter]
    fn r_a(&self) -> f64 {
        self.0.r_a
    }

    #[getter]
    fn r_b(&self) -> f64 {
        self.0.r_b
    }

    #[getter]
    fn r_b2(&self) -> f64 {
        self.0.r_b2
    }

    #[getter]
    fn visibility(&self) -> f64 {
        self.0.state.visibility()
    }

    /// `(key, bell, discarded)` fractions of the budget.
    fn allocation(&self) -> PyResult<(f64, f64, f64)> {
        allocation(self.0.r_a, self.0.r_b)
    }

    /// Expected coincidence rates `n[k][l]` for Alice detectors 3–6 and Bob detectors 1–4.
    fn expected_table(&self) -> PyResult<[[f64; 4]; 4]> {
        Ok(*core::expected_table(&self.0).map_err(py_err)?.entries())
    }

    fn __repr__(&self) -> String {
        format!(
            "SetupConfig(budget={}, r_a={}, r_b={}, visibility={}, r_b2={})",
            self.0.budget,
            self.0.r_a,
            self.0.r_b,
            self.0.state.visibility(),
            self.0.r_b2
        )
    }
}

/// Detector dead time (ps), photon detection efficiency and dark counts (1/s).
#[pyclass(name = "DetectorModel", module = "e91", frozen, from_py_object)]
#[derive(Clone)]
struct PyDetectorModel(core::DetectorModel);

#[pymethods]
impl PyDetectorModel {
    #[new]
    #[pyo3(signature = (dead_time_ps = 1.0, pde = 1.0, dark_counts = 0.0))]
    fn new(dead_time_ps: f64, pde: f64, dark_counts: f64) -> PyResult<Self> {
        core::DetectorModel::new(dead_time_ps, pde, dark_counts).map(Self).map_err(py_err)
    }

    #[getter]
    fn dead_time_ps(&self) -> f64 {
        self.0.dead_time_ps()
    }

    #[getter]
    fn pde(&self) -> f64 {
        self.0.pde()
    }

    #[getter]
    fn dark_counts(&self) -> f64 {
        self.0.dark_counts_per_s()
    }

    /// Observed count rate for `n` incident photons per second.
    fn observed(&self, n: f64) -> PyResult<f64> {
        core::observed_rate_full(n, &self.0).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "DetectorModel(dead_time_ps={}, pde={}, dark_counts={})",
            self.0.dead_time_ps(),
            self.0.pde(),
            self.0.dark_counts_per_s()
        )
    }
}

#[pyclass(name = "RateReport", module = "e91", frozen, skip_from_py_object)]
struct PyRateReport(core::RateReport);

#[pymethods]
impl PyRateReport {
    #[getter]
    fn average_key_rate(&self) -> f64 {
        self.0.average_key_rate
    }

    #[getter]
    fn average_key_rate_mbps(&self) -> f64 {
        self.0.average_key_rate_mbps()
    }

    #[getter]
    fn per_symbol_rate(&self) -> f64 {
        self.0.per_symbol_rate
    }

    #[getter]
    fn n_key_observed(&self) -> f64 {
        self.0.n_key_observed
    }

    #[getter]
    fn p_classical(&self) -> f64 {
        self.0.p_classical
    }

    #[getter]
    fn zero_key_fraction(&self) -> bool {
        self.0.zero_key_fraction
    }

    #[getter]
    fn h_q(&self) -> f64 {
        self.0.components.h_q
    }

    #[getter]
    fn eve_info(&self) -> f64 {
        self.0.components.eve_info
    }

    #[getter]
    fn s_value(&self) -> f64 {
        self.0.components.s_value
    }

    #[getter]
    fn delta_s(&self) -> f64 {
        self.0.components.delta_s
    }

    #[getter]
    fn sd_of_violation(&self) -> Option<f64> {
        self.0.components.sd_of_violation
    }

    #[getter]
    fn allocation(&self) -> (f64, f64, f64) {
        let a = self.0.components.allocation;
        (a.key_fraction, a.bell_fraction, a.discarded_fraction)
    }

    /// The report as a flat JSON object.
    fn to_json(&self) -> String {
        to_json(&self.0)
    }

    fn __repr__(&self) -> String {
        format!(
            "RateReport(average_key_rate={}, s_value={}, delta_s={})",
            self.0.average_key_rate, self.0.components.s_value, self.0.components.delta_s
        )
    }
}

#[pyclass(name = "Optimum", module = "e91", frozen, skip_from_py_object)]
struct PyOptimum(core::Optimum);

#[pymethods]
impl PyOptimum {
    #[getter]
    fn r_a_star(&self) -> f64 {
        self.0.r_a_star
    }

    #[getter]
    fn r_b_star(&self) -> f64 {
        self.0.r_b_star
    }

    #[getter]
    fn rate_star_bps(&self) -> f64 {
        self.0.rate_star
    }

    #[getter]
    fn baseline_bps(&self) -> f64 {
        self.0.baseline_rate
    }

    #[getter]
    fn improvement_percent(&self) -> Option<f64> {
        self.0.improvement_percent
    }

    /// Every evaluated point as `(r_a, r_b, rate_bps)`.
    #[getter]
    fn sweep(&self) -> Vec<(f64, f64, f64)> {
        self.0.sweep.iter().map(|r| (r.r_a, r.r_b, r.rate_bps)).collect()
    }

    fn to_json(&self) -> String {
        to_json(&self.0)
    }

    fn __repr__(&self) -> String {
        format!(
            "Optimum(r_a_star={}, r_b_star={}, rate_star_bps={})",
            self.0.r_a_star, self.0.r_b_star, self.0.rate_star
        )
    }
}

#[pyclass(name = "McResult", module = "e91", frozen, skip_from_py_object)]
struct PyMcResult(core::McResult);

#[pymethods]
impl PyMcResult {
    #[getter]
    fn trials(&self) -> usize {
        self.0.trials
    }

    #[getter]
    fn excluded_trials(&self) -> usize {
        self.0.excluded_trials
    }

    #[getter]
    fn s_mean(&self) -> f64 {
        self.0.s_mean
    }

    #[getter]
    fn s_std(&self) -> f64 {
        self.0.s_std
    }

    #[getter]
    fn empirical_p_classical(&self) -> f64 {
        self.0.empirical_p_classical
    }

    #[getter]
    fn empirical_qber(&self) -> Option<f64> {
        self.0.empirical_qber
    }

    fn to_json(&self) -> String {
        to_json(&self.0)
    }

    fn __repr__(&self) -> String {
        format!("McResult(trials={}, s_mean={}, s_std={})", self.0.trials, self.0.s_mean, self.0.s_std)
    }
}

fn mode(name: &str) -> PyResult<core::DeadTimeMode> {
    name.parse().map_err(PyValueError::new_err)
}

/// Joint outcome probabilities `(++, +-, -+, --)` for analyzer angles in degrees.
#[pyfunction]
fn coincidence_probs(visibility: f64, alpha: f64, beta: f64) -> PyResult<(f64, f64, f64, f64)> {
    let o = core::coincidence_probs(state(visibility)?, core::AnalyzerAngle::new(alpha), core::AnalyzerAngle::new(beta));
    Ok((o.pp, o.pm, o.mp, o.mm))
}

#[pyfunction]
fn correlation(visibility: f64, alpha: f64, beta: f64) -> PyResult<f64> {
    Ok(core::correlation(state(visibility)?, core::AnalyzerAngle::new(alpha), core::AnalyzerAngle::new(beta)))
}

/// CHSH value at the standard measurement angles.
#[pyfunction]
fn ideal_chsh(visibility: f64) -> PyResult<f64> {
    Ok(core::ideal_chsh(state(visibility)?, &core::BasisConfig::default()))
}

#[pyfunction]
fn qber(visibility: f64) -> PyResult<f64> {
    Ok(core::qber(state(visibility)?))
}

/// `(key, bell, discarded)` fractions for reflectances `r_a`, `r_b`.
#[pyfunction]
fn allocation(r_a: f64, r_b: f64) -> PyResult<(f64, f64, f64)> {
    let a = core::allocation(r_a, r_b).map_err(py_err)?;
    Ok((a.key_fraction, a.bell_fraction, a.discarded_fraction))
}

#[pyfunction]
fn observed_rate(n: f64, dead_time_ps: f64) -> PyResult<f64> {
    core::observed_rate(n, dead_time_ps).map_err(py_err)
}

#[pyfunction]
fn observed_rate_full(n: f64, detector: PyDetectorModel) -> PyResult<f64> {
    core::observed_rate_full(n, &detector.0).map_err(py_err)
}

#[pyfunction]
fn binary_entropy(p: f64) -> PyResult<f64> {
    core::binary_entropy(p).map_err(py_err)
}

#[pyfunction]
fn eve_information(s: f64, delta_s: f64) -> PyResult<f64> {
    core::eve_information(s, delta_s).map_err(py_err)
}

#[pyfunction]
fn sd_of_violation(s: f64, delta_s: f64) -> PyResult<f64> {
    core::sd_of_violation(s, delta_s).map_err(py_err)
}

#[pyfunction]
fn classical_probability(s: f64, delta_s: f64) -> PyResult<f64> {
    core::classical_probability(s, delta_s).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (config = None, detector = None, mode = "group"))]
fn average_key_rate(config: Option<PySetupConfig>, detector: Option<PyDetectorModel>, mode: &str) -> PyResult<PyRateReport> {
    let cfg = config.map(|c| c.0).unwrap_or_default();
    let det = detector.map(|d| d.0).unwrap_or_default();
    core::average_key_rate_with_mode(&cfg, &det, self::mode(mode)?)
        .map(PyRateReport)
        .map_err(py_err)
}

/// Exhaustive reflectance search; the default grid is r_a 0.1..0.9, r_b 0.001..0.999.
#[pyfunction]
#[pyo3(signature = (config = None, detector = None, r_a_values = None, r_b_values = None, refine = false))]
fn grid_search(
    py: Python<'_>,
    config: Option<PySetupConfig>,
    detector: Option<PyDetectorModel>,
    r_a_values: Option<Vec<f64>>,
    r_b_values: Option<Vec<f64>>,
    refine: bool,
) -> PyResult<PyOptimum> {
    let cfg = config.map(|c| c.0).unwrap_or_default();
    let det = detector.map(|d| d.0).unwrap_or_default();
    let default = core::GridSpec::default();
    let grid = core::GridSpec {
        r_a_values: r_a_values.unwrap_or(default.r_a_values),
        r_b_values: r_b_values.unwrap_or(default.r_b_values),
        refine,
    };
    grid.validate().map_err(py_err)?;
    py.detach(|| core::grid_search(&cfg, &det, &grid))
        .map(PyOptimum)
        .map_err(py_err)
}

/// Monte Carlo sampling of `trials` one-second blocks.
#[pyfunction]
#[pyo3(signature = (config = None, trials = 10_000, seed = 0, detector = None, mode = "group"))]
fn run_mc(
    py: Python<'_>,
    config: Option<PySetupConfig>,
    trials: usize,
    seed: u64,
    detector: Option<PyDetectorModel>,
    mode: &str,
) -> PyResult<PyMcResult> {
    let mc = core::McConfig {
        detector: detector.map(|d| d.0).unwrap_or_default(),
        mode: self::mode(mode)?,
        ..core::McConfig::new(config.map(|c| c.0).unwrap_or_default(), trials, seed)
    };
    py.detach(|| core::run_mc(&mc)).map(PyMcResult).map_err(py_err)
}

#[pymodule]
fn e91(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySetupConfig>()?;
    m.add_class::<PyDetectorModel>()?;
    m.add_class::<PyRateReport>()?;
    m.add_class::<PyOptimum>()?;
    m.add_class::<PyMcResult>()?;
    m.add_function(wrap_pyfunction!(coincidence_probs, m)?)?;
    m.add_function(wrap_pyfunction!(correlation, m)?)?;
    m.add_function(wrap_pyfunction!(ideal_chsh, m)?)?;
    m.add_function(wrap_pyfunction!(qber, m)?)?;
    m.add_function(wrap_pyfunction!(allocation, m)?)?;
    m.add_function(wrap_pyfunction!(observed_rate, m)?)?;
    m.add_function(wrap_pyfunction!(observed_rate_full, m)?)?;
    m.add_function(wrap_pyfunction!(binary_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(eve_information, m)?)?;
    m.add_function(wrap_pyfunction!(sd_of_violation, m)?)?;
    m.add_function(wrap_pyfunction!(classical_probability, m)?)?;
    m.add_function(wrap_pyfunction!(average_key_rate, m)?)?;
    m.add_function(wrap_pyfunction!(grid_search, m)?)?;
    m.add_function(wrap_pyfunction!(run_mc, m)?)?;
    m.add("TSIRELSON", core::TSIRELSON)?;
    Ok(())
}
