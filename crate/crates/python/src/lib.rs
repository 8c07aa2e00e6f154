//! Python bindings: `import fistrans`.

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use fistrans::analytics::{self, BreakEven};
use fistrans::calibration;
use fistrans::costs;
use fistrans::io as scenario_io;
use fistrans::planner::{self, SolverConfig};
use fistrans::types::{AdminRigidity, BreakEvenSpec, DeltaVector, ExpenditureVector, FiscalCostSpec, RigidityParams};

create_exception!(fistrans, FistransError, PyException);

fn err(e: fistrans::Error) -> PyErr {
    FistransError::new_err(e.to_string())
}

fn vector(x: [f64; 4]) -> PyResult<ExpenditureVector> {
    ExpenditureVector::new(x).map_err(err)
}

/// A validated reform scenario.
#[pyclass(name = "Scenario", module = "fistrans", from_py_object)]
#[derive(Clone)]
struct PyScenario {
    inner: fistrans::Scenario,
}

#[pymethods]
impl PyScenario {
    /// Parse a scenario file's contents.
    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        scenario_io::parse_scenario(text)
            .map(|inner| Self { inner })
            .map_err(err)
    }

    /// Default scenario of a preset.
    #[staticmethod]
    #[pyo3(signature = (preset = calibration::DEFAULT_PRESET))]
    fn default(preset: &str) -> PyResult<Self> {
        scenario_io::preset_scenario(preset)
            .map(|inner| Self { inner })
            .map_err(err)
    }

    fn to_toml(&self) -> String {
        scenario_io::serialize_scenario(&self.inner)
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn horizon(&self) -> usize {
        self.inner.horizon
    }

    #[getter]
    fn discount(&self) -> f64 {
        self.inner.discount
    }

    #[getter]
    fn baseline(&self) -> [f64; 4] {
        self.inner.baseline.to_array()
    }

    #[getter]
    fn target(&self) -> [f64; 4] {
        self.inner.cost.target.to_array()
    }

    #[pyo3(signature = (max_iterations = 10_000, terminal_weight = 1e3))]
    fn solve(&self, max_iterations: usize, terminal_weight: f64) -> PyResult<PySolveReport> {
        let cfg = SolverConfig {
            max_iterations,
            terminal_weight,
            ..SolverConfig::default()
        };
        let provenance = scenario_io::Provenance::preset_only("python");
        let report = scenario_io::RunReport::build(&self.inner, &cfg, provenance).map_err(err)?;
        Ok(PySolveReport { inner: report })
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!(
            "Scenario(name={:?}, horizon={}, discount={})",
            self.inner.name, self.inner.horizon, self.inner.discount
        )
    }
}

/// Solver output together with derived series.
#[pyclass(name = "SolveReport", module = "fistrans")]
struct PySolveReport {
    inner: scenario_io::RunReport,
}

#[pymethods]
impl PySolveReport {
    #[getter]
    fn converged(&self) -> bool {
        self.inner.solve.converged
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.solve.iterations
    }

    #[getter]
    fn objective(&self) -> f64 {
        self.inner.solve.objective
    }

    #[getter]
    fn gradient_norm(&self) -> f64 {
        self.inner.solve.gradient_norm
    }

    #[getter]
    fn max_euler_residual(&self) -> f64 {
        self.inner.solve.max_euler_residual
    }

    /// States `x_0 … x_T` as `[T, W, I, F]` lists.
    #[getter]
    fn trajectory(&self) -> Vec<[f64; 4]> {
        self.inner
            .trajectory
            .states()
            .iter()
            .map(|x| x.to_array())
            .collect()
    }

    #[getter]
    fn effective(&self) -> Vec<f64> {
        self.inner.effective.clone()
    }

    #[getter]
    fn adjustment_costs(&self) -> Vec<f64> {
        self.inner.adjustment_costs.clone()
    }

    fn is_j_shaped(&self) -> bool {
        self.inner.jshape.is_some_and(|j| j.is_j_shaped)
    }

    fn csv(&self) -> String {
        scenario_io::emit_trajectory_csv(&self.inner)
    }

    fn json(&self) -> String {
        self.inner.to_json()
    }
}

#[pyfunction]
fn total(x: [f64; 4]) -> PyResult<f64> {
    Ok(vector(x)?.total())
}

#[pyfunction]
fn delta(x_curr: [f64; 4], x_prev: [f64; 4]) -> PyResult<[f64; 4]> {
    Ok(fistrans::delta(&vector(x_curr)?, &vector(x_prev)?).0)
}

/// Symmetric adjustment cost; returns `(value, gradient)`.
#[pyfunction]
fn phi(d: [f64; 4], gamma: [f64; 4], eta: [f64; 4]) -> PyResult<(f64, [f64; 4])> {
    let p = RigidityParams::symmetric(gamma, eta).map_err(err)?;
    let e = costs::phi(&DeltaVector(d), &p).map_err(err)?;
    Ok((e.value, e.gradient))
}

/// Asymmetric adjustment cost; returns `(value, gradient)`.
#[pyfunction]
fn phi_asymmetric(
    d: [f64; 4],
    gamma_up: [f64; 4],
    gamma_down: [f64; 4],
    eta: [f64; 4],
) -> PyResult<(f64, [f64; 4])> {
    let p = RigidityParams::asymmetric(gamma_up, gamma_down, eta).map_err(err)?;
    let e = costs::phi_asymmetric(&DeltaVector(d), &p).map_err(err)?;
    Ok((e.value, e.gradient))
}

/// Quadratic stage cost; returns `(value, gradient)`.
#[pyfunction]
#[pyo3(signature = (x, target, weights = [1.0; 4], total_weight = 0.0, total_reference = 100.0))]
fn stage_cost(
    x: [f64; 4],
    target: [f64; 4],
    weights: [f64; 4],
    total_weight: f64,
    total_reference: f64,
) -> PyResult<(f64, [f64; 4])> {
    let spec = FiscalCostSpec::new(vector(target)?, weights, total_weight, total_reference).map_err(err)?;
    let e = costs::stage_cost(&vector(x)?, &spec);
    Ok((e.value, e.gradient))
}

#[pyfunction]
fn jshape_classify<'py>(py: Python<'py>, series: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
    let v = analytics::jshape_classify(&series).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("is_j_shaped", v.is_j_shaped)?;
    d.set_item("peak_index", v.peak_index)?;
    d.set_item("peak_value", v.peak_value)?;
    d.set_item("terminal_value", v.terminal_value)?;
    Ok(d)
}

#[pyfunction]
fn jshape_condition(phi_at_first_step: f64, c_at_x0: f64, c_at_xstar: f64) -> PyResult<bool> {
    analytics::jshape_condition(phi_at_first_step, c_at_x0, c_at_xstar).map_err(err)
}

#[pyfunction]
fn rigidity_to_params(flexibility_score: f64) -> PyResult<(f64, f64)> {
    calibration::rigidity_to_params(flexibility_score).map_err(err)
}

fn breakeven_spec(
    rho: f64,
    horizon: usize,
    gamma: f64,
    eta: f64,
    adjustable_baseline: f64,
    window: usize,
) -> PyResult<BreakEvenSpec> {
    let spec = BreakEvenSpec {
        adjustable_baseline,
        window,
        ..BreakEvenSpec::new(rho, horizon, AdminRigidity::symmetric(gamma, eta)).map_err(err)?
    };
    spec.validate().map_err(err)?;
    Ok(spec)
}

#[pyfunction]
#[pyo3(signature = (rho, horizon, adjustable_baseline = 100.0, window = 5))]
fn equal_step_path(rho: f64, horizon: usize, adjustable_baseline: f64, window: usize) -> PyResult<Vec<f64>> {
    let spec = breakeven_spec(rho, horizon, 0.0, 0.0, adjustable_baseline, window)?;
    Ok(analytics::equal_step_path(&spec))
}

/// Equal-step savings pipeline. `breakeven` is `None` when the window ends
/// before cumulative net savings turn nonnegative.
#[pyfunction]
#[pyo3(signature = (rho, horizon, gamma, eta, adjustable_baseline = 100.0, window = 5))]
fn savings<'py>(
    py: Python<'py>,
    rho: f64,
    horizon: usize,
    gamma: f64,
    eta: f64,
    adjustable_baseline: f64,
    window: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let spec = breakeven_spec(rho, horizon, gamma, eta, adjustable_baseline, window)?;
    let s = analytics::equal_step_savings(&spec).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("gross", s.gross.clone())?;
    d.set_item("outlay", s.outlay.clone())?;
    d.set_item("net", s.net.clone())?;
    d.set_item("cumulative", s.cumulative.clone())?;
    d.set_item(
        "breakeven",
        match s.breakeven {
            BreakEven::At(t) => Some(t),
            BreakEven::BeyondWindow(_) => None,
        },
    )?;
    Ok(d)
}

/// Rows `(label, breakeven, cumulative)` of the preset's scenario table.
#[pyfunction]
#[pyo3(signature = (preset = calibration::DEFAULT_PRESET))]
fn scenario_table(preset: &str) -> PyResult<Vec<(String, Option<usize>, f64)>> {
    let preset = calibration::builtin_preset(preset)
        .ok_or_else(|| FistransError::new_err(format!("unknown preset {preset:?}")))?;
    preset
        .breakeven_scenarios
        .iter()
        .map(|row| {
            let s = analytics::equal_step_savings(&row.spec).map_err(err)?;
            Ok((row.label.clone(), s.breakeven.year(), s.total_net()))
        })
        .collect()
}

/// Gap-closure fraction of the first step of a solved report.
#[pyfunction]
fn gradualism_metric(report: &PySolveReport) -> PyResult<f64> {
    planner::gradualism_metric(&report.inner.trajectory, &report.inner.scenario.cost.target).map_err(err)
}

#[pymodule]
#[pyo3(name = "fistrans")]
fn fistrans_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("FistransError", m.py().get_type::<FistransError>())?;
    m.add_class::<PyScenario>()?;
    m.add_class::<PySolveReport>()?;
    m.add_function(wrap_pyfunction!(total, m)?)?;
    m.add_function(wrap_pyfunction!(delta, m)?)?;
    m.add_function(wrap_pyfunction!(phi, m)?)?;
    m.add_function(wrap_pyfunction!(phi_asymmetric, m)?)?;
    m.add_function(wrap_pyfunction!(stage_cost, m)?)?;
    m.add_function(wrap_pyfunction!(jshape_classify, m)?)?;
    m.add_function(wrap_pyfunction!(jshape_condition, m)?)?;
    m.add_function(wrap_pyfunction!(rigidity_to_params, m)?)?;
    m.add_function(wrap_pyfunction!(equal_step_path, m)?)?;
    m.add_function(wrap_pyfunction!(savings, m)?)?;
    m.add_function(wrap_pyfunction!(scenario_table, m)?)?;
    m.add_function(wrap_pyfunction!(gradualism_metric, m)?)?;
    Ok(())
}
