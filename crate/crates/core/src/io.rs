//! Scenario files, run reports and CSV output.
//!
//! # Scenario file format
//!
//! Scenario files are TOML documents restricted to a flat layout: a handful
//! of top-level keys followed by one section per category and two optional
//! sections. Unknown keys are rejected. Every key is optional; missing
//! values come from the preset (the built-in `paper-default` unless the file
//! names another one).
//!
//! ```text
//! name      = "reform"           # string
//! preset    = "paper-default"    # built-in name, or <name>.toml in $FISTRANS_PRESET_DIR
//! discount  = 0.96               # 0 < beta < 1
//! horizon   = 50                 # planner horizon in years, >= 1
//! rigidity  = "symmetric"        # or "asymmetric"
//!
//! [transfers]                    # also [wages], [investment], [operating]
//! baseline   = 46.0              # x_0
//! target     = 40.0              # x*
//! weight     = 1.0               # stage-cost weight w_k
//! gamma      = 4.0               # symmetric mode only
//! gamma_up   = 4.0               # asymmetric mode only
//! gamma_down = 6.0               # asymmetric mode only
//! eta        = 1.8
//! delta_min  = -2.0              # optional bound on one-period changes
//! delta_max  = 2.0
//!
//! [total]
//! weight    = 0.0                # total-spend penalty w_G
//! reference = 100.0              # G_ref
//!
//! [breakeven]                    # adjustable-spending pipeline
//! row                 = "A"      # start from a preset scenario-table row
//! adjustable_baseline = 100.0
//! core_floor          = 0.0
//! rho                 = 0.10
//! horizon             = 3
//! window              = 5
//! rigidity            = "symmetric"
//! gamma               = 0.8      # or gamma_up / gamma_down
//! eta                 = 0.05
//! ```
//!
//! Switching a preset's symmetric curvature to `rigidity = "asymmetric"`
//! defaults each category to `gamma_up = γ` and `gamma_down = 1.5 γ`.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::analytics::{self, JShapeVerdict, SavingsSeries};
use crate::calibration::{self, builtin_preset, DEFAULT_PRESET, DEFAULT_DOWNWARD_RATIO};
use crate::error::{Error, Result};
use crate::planner::{self, SolverConfig};
use crate::types::{
    AdminRigidity, BreakEvenSpec, Category, CategoryCurvature, CurvatureMode, DeltaBounds,
    ExpenditureVector, FiscalCostSpec, RigidityParams, Scenario, Trajectory,
};

/// Environment variable naming a directory of user preset files.
pub const PRESET_DIR_ENV: &str = "FISTRANS_PRESET_DIR";

const MAX_PRESET_DEPTH: usize = 4;

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    discount: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    horizon: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rigidity: Option<CurvatureMode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    transfers: Option<CategorySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    wages: Option<CategorySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    investment: Option<CategorySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    operating: Option<CategorySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    total: Option<TotalSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    breakeven: Option<BreakEvenSection>,
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CategorySection {
    #[serde(skip_serializing_if = "Option::is_none")]
    baseline: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    target: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    weight: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma_up: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma_down: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta_max: Option<f64>,
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TotalSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    weight: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reference: Option<f64>,
}

#[derive(Debug, Default, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BreakEvenSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    row: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    adjustable_baseline: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    core_floor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    horizon: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    window: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rigidity: Option<CurvatureMode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma_up: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma_down: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eta: Option<f64>,
}

impl ScenarioFile {
    fn section(&self, cat: Category) -> Option<&CategorySection> {
        match cat {
            Category::Transfers => self.transfers.as_ref(),
            Category::Wages => self.wages.as_ref(),
            Category::Investment => self.investment.as_ref(),
            Category::Operating => self.operating.as_ref(),
        }
    }

    fn section_mut(&mut self, cat: Category) -> &mut Option<CategorySection> {
        match cat {
            Category::Transfers => &mut self.transfers,
            Category::Wages => &mut self.wages,
            Category::Investment => &mut self.investment,
            Category::Operating => &mut self.operating,
        }
    }

    /// Dotted names of every key set in the file, in a fixed order.
    fn set_keys(&self) -> Vec<String> {
        let mut keys = Vec::new();
        let mut push = |k: &str, set: bool| {
            if set {
                keys.push(k.to_string());
            }
        };
        push("name", self.name.is_some());
        push("preset", self.preset.is_some());
        push("discount", self.discount.is_some());
        push("horizon", self.horizon.is_some());
        push("rigidity", self.rigidity.is_some());
        for cat in Category::ALL {
            if let Some(s) = self.section(cat) {
                let c = cat.key();
                push(&format!("{c}.baseline"), s.baseline.is_some());
                push(&format!("{c}.target"), s.target.is_some());
                push(&format!("{c}.weight"), s.weight.is_some());
                push(&format!("{c}.gamma"), s.gamma.is_some());
                push(&format!("{c}.gamma_up"), s.gamma_up.is_some());
                push(&format!("{c}.gamma_down"), s.gamma_down.is_some());
                push(&format!("{c}.eta"), s.eta.is_some());
                push(&format!("{c}.delta_min"), s.delta_min.is_some());
                push(&format!("{c}.delta_max"), s.delta_max.is_some());
            }
        }
        if let Some(t) = &self.total {
            push("total.weight", t.weight.is_some());
            push("total.reference", t.reference.is_some());
        }
        if let Some(b) = &self.breakeven {
            push("breakeven.row", b.row.is_some());
            push("breakeven.adjustable_baseline", b.adjustable_baseline.is_some());
            push("breakeven.core_floor", b.core_floor.is_some());
            push("breakeven.rho", b.rho.is_some());
            push("breakeven.horizon", b.horizon.is_some());
            push("breakeven.window", b.window.is_some());
            push("breakeven.rigidity", b.rigidity.is_some());
            push("breakeven.gamma", b.gamma.is_some());
            push("breakeven.gamma_up", b.gamma_up.is_some());
            push("breakeven.gamma_down", b.gamma_down.is_some());
            push("breakeven.eta", b.eta.is_some());
        }
        keys
    }
}

/// Where a parsed scenario came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub preset: String,
    /// Keys set explicitly in the scenario file.
    pub overrides: Vec<String>,
    /// Values filled in by the tool rather than taken from the preset tables.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub assumed: Vec<String>,
    pub tool_version: String,
}

impl Provenance {
    pub fn preset_only(preset: &str) -> Self {
        Self {
            preset: preset.to_string(),
            overrides: Vec::new(),
            assumed: Vec::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// Parse and validate a scenario file with `paper-default` as the fallback
/// preset.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    parse_scenario_with(text, None).map(|(s, _)| s)
}

/// Parse a scenario file. `default_preset` is used when the file does not
/// name a preset itself.
pub fn parse_scenario_with(text: &str, default_preset: Option<&str>) -> Result<(Scenario, Provenance)> {
    parse_at_depth(text, default_preset, 0)
}

fn parse_at_depth(text: &str, default_preset: Option<&str>, depth: usize) -> Result<(Scenario, Provenance)> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let preset = file
        .preset
        .clone()
        .or_else(|| default_preset.map(str::to_string))
        .unwrap_or_else(|| DEFAULT_PRESET.to_string());
    let base = resolve_preset(&preset, depth)?;
    let assumed = assumed_defaults(&file, base.rigidity.mode());
    let scenario = apply(&file, base, &preset)?;
    scenario.validate()?;
    let provenance = Provenance {
        preset,
        overrides: file.set_keys(),
        assumed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
    };
    Ok((scenario, provenance))
}

fn assumed_defaults(file: &ScenarioFile, base_mode: CurvatureMode) -> Vec<String> {
    if base_mode != CurvatureMode::Symmetric || file.rigidity != Some(CurvatureMode::Asymmetric) {
        return Vec::new();
    }
    Category::ALL
        .into_iter()
        .filter(|&cat| file.section(cat).is_none_or(|s| s.gamma_down.is_none()))
        .map(|cat| format!("{}.gamma_down = {DEFAULT_DOWNWARD_RATIO} * gamma_up", cat.key()))
        .collect()
}

/// Default scenario of a preset, built-in or from the preset directory.
pub fn preset_scenario(name: &str) -> Result<Scenario> {
    resolve_preset(name, 0)
}

fn resolve_preset(name: &str, depth: usize) -> Result<Scenario> {
    if let Some(p) = builtin_preset(name) {
        return Ok(p.default_scenario());
    }
    if depth >= MAX_PRESET_DEPTH {
        return Err(Error::validation(format!("preset chain too deep at {name:?}")));
    }
    let Some(dir) = std::env::var_os(PRESET_DIR_ENV) else {
        return Err(Error::validation(format!("unknown preset {name:?}")));
    };
    let path = PathBuf::from(dir).join(format!("{name}.toml"));
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Error::validation(format!("unknown preset {name:?} ({}: {e})", path.display())))?;
    parse_at_depth(&text, None, depth + 1).map(|(s, _)| s)
}

fn int_to_usize(v: i64, what: &str) -> Result<usize> {
    usize::try_from(v).map_err(|_| Error::validation(format!("{what} must be nonnegative (got {v})")))
}

fn apply(file: &ScenarioFile, base: Scenario, preset: &str) -> Result<Scenario> {
    let mode = file.rigidity.unwrap_or(base.rigidity.mode());
    let mut baseline = base.baseline.to_array();
    let mut target = base.cost.target.to_array();
    let mut weights = base.cost.weights;
    let mut curvature = *base.rigidity.categories();
    let mut bounds = base.bounds.unwrap_or_else(DeltaBounds::unbounded);
    let mut bounded = base.bounds.is_some();

    if mode != base.rigidity.mode() {
        for c in curvature.iter_mut() {
            *c = match mode {
                CurvatureMode::Asymmetric => {
                    CategoryCurvature::asymmetric(c.gamma_up, DEFAULT_DOWNWARD_RATIO * c.gamma_up, c.eta)
                }
                CurvatureMode::Symmetric => CategoryCurvature::symmetric(c.gamma_up, c.eta),
            };
        }
    }

    for cat in Category::ALL {
        let Some(s) = file.section(cat) else { continue };
        let k = cat.index();
        if let Some(v) = s.baseline {
            baseline[k] = v;
        }
        if let Some(v) = s.target {
            target[k] = v;
        }
        if let Some(v) = s.weight {
            weights[k] = v;
        }
        curvature[k] = section_curvature(
            mode,
            curvature[k],
            s.gamma,
            s.gamma_up,
            s.gamma_down,
            s.eta,
            cat.key(),
        )?;
        if let Some(v) = s.delta_min {
            bounds.lower[k] = v;
            bounded = true;
        }
        if let Some(v) = s.delta_max {
            bounds.upper[k] = v;
            bounded = true;
        }
    }

    let (total_weight, total_reference) = match &file.total {
        Some(t) => (
            t.weight.unwrap_or(base.cost.total_weight),
            t.reference.unwrap_or(base.cost.total_reference),
        ),
        None => (base.cost.total_weight, base.cost.total_reference),
    };

    let breakeven = match &file.breakeven {
        Some(section) => Some(apply_breakeven(section, base.breakeven, preset)?),
        None => base.breakeven,
    };

    let horizon = match file.horizon {
        Some(h) => int_to_usize(h, "horizon")?,
        None => base.horizon,
    };

    Ok(Scenario {
        name: file.name.clone().unwrap_or(base.name),
        baseline: ExpenditureVector::new(baseline)?,
        cost: FiscalCostSpec::new(ExpenditureVector::new(target)?, weights, total_weight, total_reference)?,
        rigidity: RigidityParams::from_parts(mode, curvature)?,
        discount: file.discount.unwrap_or(base.discount),
        horizon,
        bounds: bounded.then_some(bounds),
        breakeven,
    })
}

fn section_curvature(
    mode: CurvatureMode,
    base: CategoryCurvature,
    gamma: Option<f64>,
    gamma_up: Option<f64>,
    gamma_down: Option<f64>,
    eta: Option<f64>,
    section: &str,
) -> Result<CategoryCurvature> {
    let eta = eta.unwrap_or(base.eta);
    match mode {
        CurvatureMode::Symmetric => {
            if gamma_up.is_some() || gamma_down.is_some() {
                return Err(Error::validation(format!(
                    "{section}: gamma_up/gamma_down require rigidity = \"asymmetric\""
                )));
            }
            Ok(CategoryCurvature::symmetric(gamma.unwrap_or(base.gamma_up), eta))
        }
        CurvatureMode::Asymmetric => {
            if gamma.is_some() {
                return Err(Error::validation(format!(
                    "{section}: gamma is not used with asymmetric rigidity; set gamma_up and gamma_down"
                )));
            }
            Ok(CategoryCurvature::asymmetric(
                gamma_up.unwrap_or(base.gamma_up),
                gamma_down.unwrap_or(base.gamma_down),
                eta,
            ))
        }
    }
}

fn apply_breakeven(
    section: &BreakEvenSection,
    inherited: Option<BreakEvenSpec>,
    preset: &str,
) -> Result<BreakEvenSpec> {
    let base = match &section.row {
        Some(row) => {
            let table = builtin_preset(preset).unwrap_or_else(calibration::load_default_preset);
            let found = table.breakeven_scenario(row).ok_or_else(|| {
                Error::validation(format!("breakeven.row {row:?} is not in preset {:?}", table.name))
            })?;
            Some(found.spec)
        }
        None => inherited,
    };
    let missing = |key: &str| Error::validation(format!("breakeven.{key} is required"));
    let base_curvature = base.map(|b| b.rigidity);
    let mode = section
        .rigidity
        .or(base_curvature.map(|r| r.mode))
        .unwrap_or(CurvatureMode::Symmetric);
    let mut inherited_curvature = base_curvature.map(|r| r.curvature);
    if let (Some(r), Some(c)) = (base_curvature, inherited_curvature.as_mut()) {
        if r.mode != mode {
            *c = match mode {
                CurvatureMode::Asymmetric => {
                    CategoryCurvature::asymmetric(c.gamma_up, DEFAULT_DOWNWARD_RATIO * c.gamma_up, c.eta)
                }
                CurvatureMode::Symmetric => CategoryCurvature::symmetric(c.gamma_up, c.eta),
            };
        }
    }
    let curvature = match inherited_curvature {
        Some(c) => section_curvature(
            mode,
            c,
            section.gamma,
            section.gamma_up,
            section.gamma_down,
            section.eta,
            "breakeven",
        )?,
        None => {
            let eta = section.eta.ok_or_else(|| missing("eta"))?;
            match mode {
                CurvatureMode::Symmetric => {
                    if section.gamma_up.is_some() || section.gamma_down.is_some() {
                        return Err(Error::validation(
                            "breakeven: gamma_up/gamma_down require rigidity = \"asymmetric\"",
                        ));
                    }
                    CategoryCurvature::symmetric(section.gamma.ok_or_else(|| missing("gamma"))?, eta)
                }
                CurvatureMode::Asymmetric => CategoryCurvature::asymmetric(
                    section.gamma_up.ok_or_else(|| missing("gamma_up"))?,
                    section.gamma_down.ok_or_else(|| missing("gamma_down"))?,
                    eta,
                ),
            }
        }
    };
    let spec = BreakEvenSpec {
        adjustable_baseline: section
            .adjustable_baseline
            .or(base.map(|b| b.adjustable_baseline))
            .unwrap_or(100.0),
        core_floor: section.core_floor.or(base.map(|b| b.core_floor)).unwrap_or(0.0),
        target_fraction: section
            .rho
            .or(base.map(|b| b.target_fraction))
            .ok_or_else(|| missing("rho"))?,
        target_horizon: match section.horizon {
            Some(h) => int_to_usize(h, "breakeven.horizon")?,
            None => base.map(|b| b.target_horizon).ok_or_else(|| missing("horizon"))?,
        },
        window: match section.window {
            Some(w) => int_to_usize(w, "breakeven.window")?,
            None => base.map_or(5, |b| b.window),
        },
        rigidity: AdminRigidity { mode, curvature },
    };
    spec.validate()?;
    Ok(spec)
}

/// Write a scenario with every field explicit. Parsing the output yields an
/// equal scenario.
pub fn serialize_scenario(scenario: &Scenario) -> String {
    let mode = scenario.rigidity.mode();
    let mut file = ScenarioFile {
        name: Some(scenario.name.clone()),
        discount: Some(scenario.discount),
        horizon: Some(scenario.horizon as i64),
        rigidity: Some(mode),
        total: Some(TotalSection {
            weight: Some(scenario.cost.total_weight),
            reference: Some(scenario.cost.total_reference),
        }),
        ..ScenarioFile::default()
    };
    let finite = |v: f64| v.is_finite().then_some(v);
    for cat in Category::ALL {
        let k = cat.index();
        let c = scenario.rigidity.category(cat);
        let (gamma, gamma_up, gamma_down) = match mode {
            CurvatureMode::Symmetric => (Some(c.gamma_up), None, None),
            CurvatureMode::Asymmetric => (None, Some(c.gamma_up), Some(c.gamma_down)),
        };
        *file.section_mut(cat) = Some(CategorySection {
            baseline: Some(scenario.baseline.as_array()[k]),
            target: Some(scenario.cost.target.as_array()[k]),
            weight: Some(scenario.cost.weights[k]),
            gamma,
            gamma_up,
            gamma_down,
            eta: Some(c.eta),
            delta_min: scenario.bounds.and_then(|b| finite(b.lower[k])),
            delta_max: scenario.bounds.and_then(|b| finite(b.upper[k])),
        });
    }
    if let Some(b) = &scenario.breakeven {
        let c = b.rigidity.curvature;
        let (gamma, gamma_up, gamma_down) = match b.rigidity.mode {
            CurvatureMode::Symmetric => (Some(c.gamma_up), None, None),
            CurvatureMode::Asymmetric => (None, Some(c.gamma_up), Some(c.gamma_down)),
        };
        file.breakeven = Some(BreakEvenSection {
            row: None,
            adjustable_baseline: Some(b.adjustable_baseline),
            core_floor: Some(b.core_floor),
            rho: Some(b.target_fraction),
            horizon: Some(b.target_horizon as i64),
            window: Some(b.window as i64),
            rigidity: Some(b.rigidity.mode),
            gamma,
            gamma_up,
            gamma_down,
            eta: Some(c.eta),
        });
    }
    toml::to_string(&file).expect("scenario serializes to TOML")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub converged: bool,
    pub iterations: usize,
    pub objective: f64,
    pub gradient_norm: f64,
    pub max_euler_residual: f64,
}

/// Everything a run produces, together with the inputs that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: Scenario,
    pub solver: SolverConfig,
    pub solve: SolveSummary,
    pub trajectory: Trajectory,
    pub adjustment_costs: Vec<f64>,
    pub effective: Vec<f64>,
    /// `None` when the horizon is too short to classify.
    pub jshape: Option<JShapeVerdict>,
    pub savings: Option<SavingsSeries>,
    pub provenance: Provenance,
}

impl RunReport {
    pub fn build(scenario: &Scenario, cfg: &SolverConfig, provenance: Provenance) -> Result<Self> {
        let report = planner::solve(scenario, cfg)?;
        Self::from_trajectory(scenario, cfg, provenance, report.trajectory.clone(), SolveSummary {
            converged: report.converged,
            iterations: report.iterations,
            objective: report.objective,
            gradient_norm: report.gradient_norm,
            max_euler_residual: report.max_euler_residual,
        })
    }

    /// Report for a given path, skipping the solver.
    pub fn from_trajectory(
        scenario: &Scenario,
        cfg: &SolverConfig,
        provenance: Provenance,
        trajectory: Trajectory,
        solve: SolveSummary,
    ) -> Result<Self> {
        let adjustment_costs = trajectory.adjustment_costs(&scenario.rigidity);
        let effective = analytics::effective_expenditure(&trajectory, &scenario.rigidity);
        let jshape = if effective.len() >= 3 {
            Some(analytics::jshape_classify(&effective)?)
        } else {
            None
        };
        let savings = scenario
            .breakeven
            .as_ref()
            .map(analytics::equal_step_savings)
            .transpose()?;
        Ok(Self {
            scenario: scenario.clone(),
            solver: *cfg,
            solve,
            trajectory,
            adjustment_costs,
            effective,
            jshape,
            savings,
            provenance,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes to JSON")
    }
}

pub const CSV_HEADER: &str = "t,T,W,I,F,total,phi,G_eff,S_gross,S_net,cum_net";

fn fixed(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

/// One CSV row per year of the trajectory. Savings columns are filled for
/// the years covered by the break-even window and left empty otherwise.
pub fn emit_trajectory_csv(report: &RunReport) -> String {
    let mut out = String::with_capacity(128 * (report.trajectory.states().len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for (t, x) in report.trajectory.states().iter().enumerate() {
        let mut cells: Vec<String> = vec![t.to_string()];
        cells.extend(x.as_array().iter().map(|&v| fixed(v)));
        cells.push(fixed(x.total()));
        cells.push(fixed(report.adjustment_costs[t]));
        cells.push(fixed(report.effective[t]));
        match &report.savings {
            Some(s) if t < s.net.len() => {
                cells.push(fixed(s.gross[t]));
                cells.push(fixed(s.net[t]));
                cells.push(fixed(s.cumulative[t]));
            }
            _ => cells.extend(std::iter::repeat_n(String::new(), 3)),
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_is_the_default_preset() {
        let s = parse_scenario("preset = \"paper-default\"\n").unwrap();
        assert_eq!(s, calibration::load_default_preset().default_scenario());
        assert_eq!(s.cost.target.to_array(), [40.0, 18.0, 18.0, 24.0]);
        assert_eq!(parse_scenario("").unwrap(), s);
    }

    #[test]
    fn discount_out_of_range() {
        let err = parse_scenario("discount = 1.2\n").unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
        assert!(err.to_string().contains("discount factor out of range"), "{err}");
    }

    #[test]
    fn syntax_errors_report_position() {
        let err = parse_scenario("discount = 0.9\nhorizon = = 3\n").unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, Error::Parse(_)));
        assert!(msg.contains("line 2"), "{msg}");
        assert!(msg.contains("column"), "{msg}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(parse_scenario("beta = 0.9\n"), Err(Error::Parse(_))));
        assert!(matches!(parse_scenario("[wages]\ngama = 1.0\n"), Err(Error::Parse(_))));
    }

    #[test]
    fn overrides_apply_per_category() {
        let s = parse_scenario("horizon = 12\n[investment]\ngamma = 2.0\ndelta_max = 1.5\n").unwrap();
        assert_eq!(s.horizon, 12);
        assert_eq!(s.rigidity.category(Category::Investment).gamma_up, 2.0);
        let b = s.bounds.unwrap();
        assert_eq!(b.upper[2], 1.5);
        assert_eq!(b.lower[2], f64::NEG_INFINITY);
    }

    #[test]
    fn asymmetric_switch_uses_default_ratio() {
        let s = parse_scenario("rigidity = \"asymmetric\"\n[wages]\ngamma_down = 9.0\n").unwrap();
        let t = s.rigidity.category(Category::Transfers);
        assert_eq!((t.gamma_up, t.gamma_down), (4.0, 6.0));
        assert_eq!(s.rigidity.category(Category::Wages).gamma_down, 9.0);
        assert!(parse_scenario("rigidity = \"asymmetric\"\n[wages]\ngamma = 1.0\n").is_err());
        assert!(parse_scenario("[wages]\ngamma_up = 1.0\n").is_err());
    }

    #[test]
    fn breakeven_row_lookup() {
        let s = parse_scenario("[breakeven]\nrow = \"C\"\n").unwrap();
        let b = s.breakeven.unwrap();
        assert_eq!(b.rigidity.curvature.gamma_up, 4.0);
        assert_eq!(b.rigidity.curvature.eta, 0.30);
        assert!(parse_scenario("[breakeven]\nrow = \"Z\"\n").is_err());
        assert!(parse_scenario("[breakeven]\nrho = 0.1\n").is_err());
        assert!(parse_scenario("[breakeven]\nrow = \"A\"\nrho = 1.5\n").is_err());
    }

    #[test]
    fn round_trip_default_and_breakeven() {
        let s = parse_scenario("[breakeven]\nrow = \"E\"\n[operating]\ndelta_min = -1.0\n").unwrap();
        let text = serialize_scenario(&s);
        assert_eq!(parse_scenario(&text).unwrap(), s);
    }

    #[test]
    fn provenance_lists_overrides() {
        let (_, p) = parse_scenario_with("horizon = 10\n[total]\nweight = 2.0\n", None).unwrap();
        assert_eq!(p.preset, "paper-default");
        assert_eq!(p.overrides, vec!["horizon", "total.weight"]);
    }

    #[test]
    fn unknown_preset() {
        let err = parse_scenario("preset = \"nope\"\n").unwrap_err();
        assert!(err.to_string().contains("unknown preset"));
    }

    #[test]
    fn csv_for_constant_path() {
        let s = parse_scenario("horizon = 3\n").unwrap();
        let traj = Trajectory::hold(s.baseline, 3).unwrap();
        let summary = SolveSummary {
            converged: false,
            iterations: 0,
            objective: planner::objective(&traj, &s, 0.0),
            gradient_norm: f64::NAN,
            max_euler_residual: f64::NAN,
        };
        let r = RunReport::from_trajectory(&s, &SolverConfig::default(), Provenance::preset_only("paper-default"), traj, summary)
            .unwrap();
        let csv = emit_trajectory_csv(&r);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        for line in lines {
            let cells: Vec<&str> = line.split(',').collect();
            assert_eq!(cells.len(), 11);
            assert_eq!(cells[6], "0.000000");
            assert_eq!(cells[8], "");
        }
    }
}
