//! Derived fiscal quantities: effective expenditure, J-shape diagnostics,
//! baseline gaps and the adjustable-spending break-even pipeline.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::planner::{self, SolverConfig};
use crate::types::{
    BreakEvenSpec, DeltaVector, ExpenditureVector, FiscalCostSpec, RigidityParams, Scenario,
    Trajectory,
};

/// Absolute tolerance used when classifying a series as J-shaped.
pub const JSHAPE_TOLERANCE: f64 = 1e-9;

/// `G_t^eff = total(x_t) + Φ(Δx_t)` with `Δx_0 = 0`.
pub fn effective_expenditure(traj: &Trajectory, p: &RigidityParams) -> Vec<f64> {
    traj.effective(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JShapeVerdict {
    pub is_j_shaped: bool,
    /// Index of the first maximum of the series.
    pub peak_index: usize,
    pub peak_value: f64,
    pub terminal_value: f64,
}

/// A series is J-shaped when it rises strictly above its starting value and
/// ends strictly below its peak.
pub fn jshape_classify(series: &[f64]) -> Result<JShapeVerdict> {
    if series.len() < 3 {
        return Err(Error::invalid("J-shape classification needs at least three values"));
    }
    let (peak_index, peak_value) = series
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best });
    let terminal_value = *series.last().expect("len >= 3");
    let is_j_shaped = peak_index >= 1
        && peak_value > series[0] + JSHAPE_TOLERANCE
        && terminal_value < peak_value - JSHAPE_TOLERANCE;
    Ok(JShapeVerdict {
        is_j_shaped,
        peak_index,
        peak_value,
        terminal_value,
    })
}

/// Sufficient condition for an initial rise in effective expenditure:
/// the first adjustment outlay exceeds the long-run stage-cost gain.
pub fn jshape_condition(phi_at_first_step: f64, c_at_x0: f64, c_at_xstar: f64) -> Result<bool> {
    if c_at_x0 < c_at_xstar {
        return Err(Error::invalid(format!(
            "the reform must lower the stage cost (C(x0) = {c_at_x0} < C(x*) = {c_at_xstar})"
        )));
    }
    Ok(phi_at_first_step > c_at_x0 - c_at_xstar)
}

/// Discretionary deviation `u = x − x̄` from an institutional baseline.
pub fn baseline_gap(x: &ExpenditureVector, baseline: &ExpenditureVector) -> DeltaVector {
    crate::types::delta(x, baseline)
}

/// Adjustable-spending path that removes `ρ F₀` in equal steps over `H`
/// years and stays flat afterwards. Covers `t = 0..=window`.
pub fn equal_step_path(spec: &BreakEvenSpec) -> Vec<f64> {
    let f0 = spec.adjustable_baseline;
    let cut = spec.target_fraction * f0;
    let h = spec.target_horizon;
    (0..=spec.window)
        .map(|t| f0 - cut * t.min(h) as f64 / h as f64)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BreakEven {
    /// Year in which cumulative net savings first become nonnegative.
    At(usize),
    /// Not reached within the reporting window of the given length.
    BeyondWindow(usize),
}

impl BreakEven {
    pub fn year(&self) -> Option<usize> {
        match *self {
            BreakEven::At(t) => Some(t),
            BreakEven::BeyondWindow(_) => None,
        }
    }
}

impl fmt::Display for BreakEven {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BreakEven::At(t) => write!(f, "{t}"),
            BreakEven::BeyondWindow(w) => write!(f, ">{w}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavingsSeries {
    pub gross: Vec<f64>,
    pub outlay: Vec<f64>,
    pub net: Vec<f64>,
    pub cumulative: Vec<f64>,
    pub breakeven: BreakEven,
}

impl SavingsSeries {
    pub fn window(&self) -> usize {
        self.net.len() - 1
    }

    /// Cumulative net savings over the whole window.
    pub fn total_net(&self) -> f64 {
        *self.cumulative.last().expect("non-empty series")
    }
}

/// Gross savings against a constant baseline `F₀`, administrative
/// adjustment outlays, net savings, their running sum and the break-even
/// year.
///
/// The cumulative sum is trivially zero at `t = 0` (nothing has changed
/// yet), so the break-even year is searched from `t = 1`.
pub fn savings_series(path: &[f64], spec: &BreakEvenSpec) -> Result<SavingsSeries> {
    if path.len() < 2 {
        return Err(Error::invalid("savings path needs at least two years"));
    }
    if path.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("savings path must be finite"));
    }
    let f0 = spec.adjustable_baseline;
    let curvature = spec.rigidity.curvature;
    let n = path.len();
    let mut gross = Vec::with_capacity(n);
    let mut outlay = Vec::with_capacity(n);
    let mut net = Vec::with_capacity(n);
    let mut cumulative = Vec::with_capacity(n);
    let mut running = 0.0;
    let mut breakeven = None;
    for t in 0..n {
        let g = f0 - path[t];
        let phi = if t == 0 { 0.0 } else { curvature.eval(path[t] - path[t - 1]).0 };
        let s = g - phi;
        running += s;
        gross.push(g);
        outlay.push(phi);
        net.push(s);
        cumulative.push(running);
        if t >= 1 && breakeven.is_none() && running >= 0.0 {
            breakeven = Some(t);
        }
    }
    Ok(SavingsSeries {
        gross,
        outlay,
        net,
        cumulative,
        breakeven: breakeven.map_or(BreakEven::BeyondWindow(n - 1), BreakEven::At),
    })
}

/// Equal-step path pushed through [`savings_series`].
pub fn equal_step_savings(spec: &BreakEvenSpec) -> Result<SavingsSeries> {
    spec.validate()?;
    savings_series(&equal_step_path(spec), spec)
}

/// Adjustable-spending path from the planner on a one-category problem:
/// operating spending starts at `F₀`, the stage cost pulls it toward
/// `(1 − ρ) F₀` and the administrative curvature prices the changes.
/// The other categories sit at zero with zero gap.
pub fn planner_path(spec: &BreakEvenSpec, discount: f64, cfg: &SolverConfig) -> Result<Vec<f64>> {
    spec.validate()?;
    let f0 = spec.adjustable_baseline;
    let target_level = (1.0 - spec.target_fraction) * f0;
    let baseline = ExpenditureVector::new([0.0, 0.0, 0.0, f0])?;
    let target = ExpenditureVector::new([0.0, 0.0, 0.0, target_level])?;
    let c = spec.rigidity.curvature;
    let rigidity = match spec.rigidity.mode {
        crate::types::CurvatureMode::Symmetric => {
            RigidityParams::symmetric([1.0, 1.0, 1.0, c.gamma_up], [0.0, 0.0, 0.0, c.eta])?
        }
        crate::types::CurvatureMode::Asymmetric => RigidityParams::asymmetric(
            [1.0, 1.0, 1.0, c.gamma_up],
            [1.0, 1.0, 1.0, c.gamma_down],
            [0.0, 0.0, 0.0, c.eta],
        )?,
    };
    let scenario = Scenario {
        name: "adjustable-operating".into(),
        baseline,
        cost: FiscalCostSpec::new(target, [1.0; 4], 0.0, target_level)?,
        rigidity,
        discount,
        horizon: spec.window.max(spec.target_horizon),
        bounds: None,
        breakeven: None,
    };
    let report = planner::solve(&scenario, cfg)?;
    Ok(report
        .trajectory
        .states()
        .iter()
        .take(spec.window + 1)
        .map(|x| x.as_array()[3])
        .collect())
}
