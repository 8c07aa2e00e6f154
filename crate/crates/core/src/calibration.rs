//! Published calibration tables as a named preset, and the mapping from
//! flexibility scores to curvature parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{
    AdminRigidity, BreakEvenSpec, Category, ExpenditureVector, FiscalCostSpec, RigidityParams,
    Scenario,
};

pub const DEFAULT_PRESET: &str = "paper-default";

/// Discount factor used when a scenario does not set one.
pub const DEFAULT_DISCOUNT: f64 = 0.96;

/// Planner horizon used when a scenario does not set one.
pub const DEFAULT_HORIZON: usize = 50;

/// Ratio `γ⁻ / γ` used for asymmetric presets. Not a published value.
pub const DEFAULT_DOWNWARD_RATIO: f64 = 1.5;

/// `(flexibility score, γ, η)` anchors, in increasing score order.
const ANCHORS: [(f64, f64, f64); 4] = [
    (0.3, 1.0, 0.4),
    (0.5, 1.5, 0.6),
    (0.8, 3.5, 1.5),
    (0.9, 4.0, 1.8),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subcomponent {
    pub name: String,
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReformScenario {
    pub name: String,
    pub instrument: String,
    pub category: Category,
}

/// One row of the administrative-savings scenario table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakEvenScenario {
    pub label: String,
    pub regime: String,
    pub spec: BreakEvenSpec,
    /// Published break-even year, `None` for "beyond the window".
    pub reported_breakeven: Option<usize>,
    pub reported_cumulative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPreset {
    pub name: String,
    pub baseline: ExpenditureVector,
    /// Share of GDP per category. Annotation only.
    pub gdp_shares: [f64; 4],
    /// Subcomponent shares within each category (percent of the category).
    pub composition: Vec<(Category, Vec<Subcomponent>)>,
    pub flexibility: [f64; 4],
    pub rigidity: RigidityParams,
    pub targets: ExpenditureVector,
    pub reform_scenarios: Vec<ReformScenario>,
    pub breakeven_scenarios: Vec<BreakEvenScenario>,
}

impl CalibrationPreset {
    pub fn validate(&self) -> Result<()> {
        check_hundred("baseline shares", self.baseline.total())?;
        check_hundred("reform targets", self.targets.total())?;
        for (cat, parts) in &self.composition {
            let sum: f64 = parts.iter().map(|p| p.share).sum();
            check_hundred(&format!("{cat} internal composition"), sum)?;
        }
        for s in &self.breakeven_scenarios {
            s.spec.validate()?;
        }
        Ok(())
    }

    /// Same curvature with `γ⁺ = γ` and `γ⁻ = 1.5 γ`.
    pub fn asymmetric_rigidity(&self) -> RigidityParams {
        let gamma = self.rigidity.gamma();
        RigidityParams::asymmetric(gamma, gamma.map(|g| g * DEFAULT_DOWNWARD_RATIO), self.rigidity.eta())
            .expect("preset curvature is valid")
    }

    /// Baseline-to-target reform with unit stage-cost weights and no
    /// total-spend penalty.
    pub fn default_scenario(&self) -> Scenario {
        Scenario {
            name: self.name.clone(),
            baseline: self.baseline,
            cost: FiscalCostSpec::target_only(self.targets),
            rigidity: self.rigidity,
            discount: DEFAULT_DISCOUNT,
            horizon: DEFAULT_HORIZON,
            bounds: None,
            breakeven: None,
        }
    }

    pub fn breakeven_scenario(&self, label: &str) -> Option<&BreakEvenScenario> {
        self.breakeven_scenarios
            .iter()
            .find(|s| s.label.eq_ignore_ascii_case(label))
    }
}

fn check_hundred(what: &str, sum: f64) -> Result<()> {
    if (sum - 100.0).abs() > 1e-9 {
        return Err(Error::validation(format!("{what} sum to {sum}, expected 100")));
    }
    Ok(())
}

/// Look up a built-in preset by name.
pub fn builtin_preset(name: &str) -> Option<CalibrationPreset> {
    (name == DEFAULT_PRESET).then(load_default_preset)
}

pub fn load_default_preset() -> CalibrationPreset {
    let ev = |a| ExpenditureVector::new(a).expect("published shares are valid");
    let sub = |name: &str, share: f64| Subcomponent {
        name: name.to_string(),
        share,
    };
    let admin = |label: &str, regime: &str, rho, h, gamma, eta, t_star, cum| BreakEvenScenario {
        label: label.to_string(),
        regime: regime.to_string(),
        spec: BreakEvenSpec::new(rho, h, AdminRigidity::symmetric(gamma, eta))
            .expect("published scenario is valid"),
        reported_breakeven: t_star,
        reported_cumulative: cum,
    };
    let reform = |name: &str, instrument: &str, category| ReformScenario {
        name: name.to_string(),
        instrument: instrument.to_string(),
        category,
    };
    CalibrationPreset {
        name: DEFAULT_PRESET.to_string(),
        baseline: ev([46.0, 21.0, 12.0, 21.0]),
        gdp_shares: [13.2, 6.0, 3.4, 6.1],
        composition: vec![
            (
                Category::Transfers,
                vec![sub("pensions", 72.0), sub("social assistance", 18.0), sub("other transfers", 10.0)],
            ),
            (
                Category::Wages,
                vec![sub("education", 38.0), sub("health", 26.0), sub("central administration", 36.0)],
            ),
            (
                Category::Investment,
                vec![sub("infrastructure", 61.0), sub("public housing", 17.0), sub("other capital", 22.0)],
            ),
        ],
        flexibility: [0.9, 0.8, 0.5, 0.3],
        rigidity: RigidityParams::symmetric([4.0, 3.5, 1.5, 1.0], [1.8, 1.5, 0.6, 0.4])
            .expect("published curvature is valid"),
        targets: ev([40.0, 18.0, 18.0, 24.0]),
        reform_scenarios: vec![
            reform("administrative restructuring", "efficiency improvements", Category::Operating),
            reform("pension reform", "institutional reform", Category::Transfers),
            reform("human capital reallocation", "investment expansion", Category::Investment),
        ],
        breakeven_scenarios: vec![
            admin("A", "Low", 0.10, 3, 0.8, 0.05, Some(3), 24.81),
            admin("B", "Medium", 0.10, 3, 2.0, 0.15, Some(5), 1.11),
            admin("C", "High", 0.10, 3, 4.0, 0.30, None, -37.78),
            admin("D", "Low", 0.20, 5, 0.8, 0.05, Some(3), 22.67),
            admin("E", "Medium", 0.20, 5, 2.0, 0.15, None, -36.00),
            admin("F", "High", 0.20, 5, 4.0, 0.30, None, -132.00),
        ],
    }
}

/// Piecewise-linear map from a flexibility score to `(γ, η)` through the
/// four calibrated anchors, clamped outside `[0.3, 0.9]`.
pub fn rigidity_to_params(flexibility_score: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&flexibility_score) {
        return Err(Error::invalid(format!(
            "flexibility score must lie in [0, 1] (got {flexibility_score})"
        )));
    }
    let first = ANCHORS[0];
    let last = ANCHORS[ANCHORS.len() - 1];
    if flexibility_score <= first.0 {
        return Ok((first.1, first.2));
    }
    if flexibility_score >= last.0 {
        return Ok((last.1, last.2));
    }
    for pair in ANCHORS.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        if flexibility_score == lo.0 {
            return Ok((lo.1, lo.2));
        }
        if flexibility_score <= hi.0 {
            let w = (flexibility_score - lo.0) / (hi.0 - lo.0);
            return Ok((lo.1 + w * (hi.1 - lo.1), lo.2 + w * (hi.2 - lo.2)));
        }
    }
    unreachable!("score inside the anchor range")
}
