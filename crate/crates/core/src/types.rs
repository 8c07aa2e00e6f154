//! Domain types shared by every module.
//!
//! All expenditure quantities are dimensionless budget-share indices. A run
//! fixes the normalization; the calibration presets use a total of 100 at
//! `t = 0`.

use std::fmt;
use std::ops::{Add, Index, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Expenditure category. Ordering is fixed as (T, W, I, F) everywhere the
/// categories are serialized or stored in arrays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    Transfers,
    Wages,
    Investment,
    Operating,
}

impl Category {
    pub const ALL: [Category; 4] = [
        Category::Transfers,
        Category::Wages,
        Category::Investment,
        Category::Operating,
    ];

    pub const fn index(self) -> usize {
        match self {
            Category::Transfers => 0,
            Category::Wages => 1,
            Category::Investment => 2,
            Category::Operating => 3,
        }
    }

    /// One-letter symbol used in CSV headers.
    pub const fn symbol(self) -> &'static str {
        match self {
            Category::Transfers => "T",
            Category::Wages => "W",
            Category::Investment => "I",
            Category::Operating => "F",
        }
    }

    /// Section name in scenario files.
    pub const fn key(self) -> &'static str {
        match self {
            Category::Transfers => "transfers",
            Category::Wages => "wages",
            Category::Investment => "investment",
            Category::Operating => "operating",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// Allocation `(T, W, I, F)` for one period. Components are finite and
/// nonnegative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct ExpenditureVector([f64; 4]);

impl ExpenditureVector {
    pub fn new(values: [f64; 4]) -> Result<Self> {
        for (cat, v) in Category::ALL.iter().zip(values) {
            if !v.is_finite() {
                return Err(Error::validation(format!("non-finite {cat} expenditure")));
            }
            if v < 0.0 {
                return Err(Error::validation(format!(
                    "negative expenditure component ({cat} = {v})"
                )));
            }
        }
        Ok(Self(values))
    }

    pub const fn zero() -> Self {
        Self([0.0; 4])
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn get(&self, cat: Category) -> f64 {
        self.0[cat.index()]
    }

    pub fn as_array(&self) -> &[f64; 4] {
        &self.0
    }

    pub fn to_array(self) -> [f64; 4] {
        self.0
    }
}

impl TryFrom<[f64; 4]> for ExpenditureVector {
    type Error = Error;

    fn try_from(values: [f64; 4]) -> Result<Self> {
        Self::new(values)
    }
}

impl From<ExpenditureVector> for [f64; 4] {
    fn from(x: ExpenditureVector) -> Self {
        x.0
    }
}

impl Index<Category> for ExpenditureVector {
    type Output = f64;

    fn index(&self, cat: Category) -> &f64 {
        &self.0[cat.index()]
    }
}

impl Sub for ExpenditureVector {
    type Output = DeltaVector;

    fn sub(self, rhs: Self) -> DeltaVector {
        delta(&self, &rhs)
    }
}

/// Signed one-period change per category.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DeltaVector(pub [f64; 4]);

impl DeltaVector {
    pub const fn zero() -> Self {
        Self([0.0; 4])
    }

    pub fn get(&self, cat: Category) -> f64 {
        self.0[cat.index()]
    }

    pub fn as_array(&self) -> &[f64; 4] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }
}

impl Index<Category> for DeltaVector {
    type Output = f64;

    fn index(&self, cat: Category) -> &f64 {
        &self.0[cat.index()]
    }
}

impl Add for DeltaVector {
    type Output = DeltaVector;

    fn add(self, rhs: Self) -> DeltaVector {
        DeltaVector(std::array::from_fn(|k| self.0[k] + rhs.0[k]))
    }
}

impl Neg for DeltaVector {
    type Output = DeltaVector;

    fn neg(self) -> DeltaVector {
        DeltaVector(self.0.map(|v| -v))
    }
}

/// Total expenditure `T + W + I + F`.
pub fn total(x: &ExpenditureVector) -> f64 {
    x.total()
}

/// Componentwise `x_curr - x_prev`.
pub fn delta(x_curr: &ExpenditureVector, x_prev: &ExpenditureVector) -> DeltaVector {
    DeltaVector(std::array::from_fn(|k| x_curr.0[k] - x_prev.0[k]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurvatureMode {
    Symmetric,
    Asymmetric,
}

impl CurvatureMode {
    pub const fn name(self) -> &'static str {
        match self {
            CurvatureMode::Symmetric => "symmetric",
            CurvatureMode::Asymmetric => "asymmetric",
        }
    }
}

/// Curvature of the adjustment cost for a single category.
///
/// `gamma_up` applies to increases and `gamma_down` to reductions. In
/// symmetric mode both hold the same value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CategoryCurvature {
    pub gamma_up: f64,
    pub gamma_down: f64,
    pub eta: f64,
}

impl CategoryCurvature {
    pub const fn symmetric(gamma: f64, eta: f64) -> Self {
        Self {
            gamma_up: gamma,
            gamma_down: gamma,
            eta,
        }
    }

    pub const fn asymmetric(gamma_up: f64, gamma_down: f64, eta: f64) -> Self {
        Self {
            gamma_up,
            gamma_down,
            eta,
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.gamma_up == self.gamma_down
    }

    /// Value and derivative of `g±/2 d² + eta/3 |d|³`.
    pub fn eval(&self, d: f64) -> (f64, f64) {
        let gamma = if d >= 0.0 { self.gamma_up } else { self.gamma_down };
        let a = d.abs();
        let value = 0.5 * gamma * d * d + self.eta / 3.0 * a * a * a;
        let slope = gamma * d + self.eta * d * a;
        (value, slope)
    }

    /// Second derivative. At `d = 0` in asymmetric mode the larger of the two
    /// one-sided curvatures is returned.
    pub fn curvature(&self, d: f64) -> f64 {
        let gamma = if d > 0.0 {
            self.gamma_up
        } else if d < 0.0 {
            self.gamma_down
        } else {
            self.gamma_up.max(self.gamma_down)
        };
        gamma + 2.0 * self.eta * d.abs()
    }

    /// Multiply every curvature parameter by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            gamma_up: self.gamma_up * c,
            gamma_down: self.gamma_down * c,
            eta: self.eta * c,
        }
    }

    fn validate(&self, what: &str) -> Result<()> {
        for (name, v) in [
            ("gamma_up", self.gamma_up),
            ("gamma_down", self.gamma_down),
            ("eta", self.eta),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::validation(format!(
                    "rigidity parameters must be finite and nonnegative ({what} {name} = {v})"
                )));
            }
        }
        Ok(())
    }
}

/// Per-category adjustment-cost curvature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidityParams {
    mode: CurvatureMode,
    categories: [CategoryCurvature; 4],
}

impl RigidityParams {
    pub fn symmetric(gamma: [f64; 4], eta: [f64; 4]) -> Result<Self> {
        let categories = std::array::from_fn(|k| CategoryCurvature::symmetric(gamma[k], eta[k]));
        Self::from_parts(CurvatureMode::Symmetric, categories)
    }

    pub fn asymmetric(gamma_up: [f64; 4], gamma_down: [f64; 4], eta: [f64; 4]) -> Result<Self> {
        let categories = std::array::from_fn(|k| {
            CategoryCurvature::asymmetric(gamma_up[k], gamma_down[k], eta[k])
        });
        Self::from_parts(CurvatureMode::Asymmetric, categories)
    }

    pub fn from_parts(mode: CurvatureMode, categories: [CategoryCurvature; 4]) -> Result<Self> {
        for (cat, c) in Category::ALL.iter().zip(&categories) {
            c.validate(cat.key())?;
            if mode == CurvatureMode::Symmetric && !c.is_symmetric() {
                return Err(Error::validation(format!(
                    "symmetric rigidity with distinct up/down curvature for {cat}"
                )));
            }
        }
        Ok(Self { mode, categories })
    }

    /// All-zero curvature.
    pub fn frictionless() -> Self {
        Self {
            mode: CurvatureMode::Symmetric,
            categories: [CategoryCurvature::symmetric(0.0, 0.0); 4],
        }
    }

    pub fn mode(&self) -> CurvatureMode {
        self.mode
    }

    pub fn category(&self, cat: Category) -> &CategoryCurvature {
        &self.categories[cat.index()]
    }

    pub fn categories(&self) -> &[CategoryCurvature; 4] {
        &self.categories
    }

    /// Multiply every curvature parameter by `c >= 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::from_parts(self.mode, self.categories.map(|k| k.scaled(c)))
    }

    /// Symmetric `gamma` per category (the `gamma_up` entry in asymmetric mode).
    pub fn gamma(&self) -> [f64; 4] {
        self.categories.map(|c| c.gamma_up)
    }

    pub fn eta(&self) -> [f64; 4] {
        self.categories.map(|c| c.eta)
    }
}

/// Stage cost `C(x) = 1/2 sum_k w_k (x_k - x*_k)^2 + 1/2 w_G (total(x) - G_ref)^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiscalCostSpec {
    pub target: ExpenditureVector,
    pub weights: [f64; 4],
    pub total_weight: f64,
    pub total_reference: f64,
}

impl FiscalCostSpec {
    pub fn new(
        target: ExpenditureVector,
        weights: [f64; 4],
        total_weight: f64,
        total_reference: f64,
    ) -> Result<Self> {
        let spec = Self {
            target,
            weights,
            total_weight,
            total_reference,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Unit weights on every category, no total-spend penalty.
    pub fn target_only(target: ExpenditureVector) -> Self {
        Self {
            target,
            weights: [1.0; 4],
            total_weight: 0.0,
            total_reference: target.total(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        ExpenditureVector::new(self.target.0)?;
        for (cat, w) in Category::ALL.iter().zip(self.weights) {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::validation(format!(
                    "stage-cost weight must be finite and nonnegative ({cat} = {w})"
                )));
            }
        }
        if !self.total_weight.is_finite() || self.total_weight < 0.0 {
            return Err(Error::validation("total-spend weight must be finite and nonnegative"));
        }
        if !self.total_reference.is_finite() {
            return Err(Error::validation("total-spend reference must be finite"));
        }
        if self.weights.iter().all(|&w| w == 0.0) && self.total_weight == 0.0 {
            return Err(Error::validation("all stage-cost weights are zero"));
        }
        Ok(())
    }

    /// Minimizer of the stage cost. With no total-spend penalty this is the
    /// target itself. Categories with zero weight share the residual of the
    /// total-spend condition equally.
    pub fn long_run_allocation(&self) -> [f64; 4] {
        let target = self.target.0;
        if self.total_weight == 0.0 {
            return target;
        }
        let free: Vec<usize> = (0..4).filter(|&k| self.weights[k] == 0.0).collect();
        if free.is_empty() {
            // w_k (x_k - x*_k) + w_G (S - G) = 0 for every k.
            let inv_sum: f64 = self.weights.iter().map(|w| 1.0 / w).sum();
            let s_target = self.target.total();
            let s = (s_target + self.total_weight * self.total_reference * inv_sum)
                / (1.0 + self.total_weight * inv_sum);
            let excess = self.total_weight * (s - self.total_reference);
            return std::array::from_fn(|k| target[k] - excess / self.weights[k]);
        }
        let fixed: f64 = (0..4)
            .filter(|k| !free.contains(k))
            .map(|k| target[k])
            .sum();
        let free_total = self.total_reference - fixed;
        let free_target: f64 = free.iter().map(|&k| target[k]).sum();
        let shift = (free_total - free_target) / free.len() as f64;
        std::array::from_fn(|k| {
            if free.contains(&k) {
                target[k] + shift
            } else {
                target[k]
            }
        })
    }
}

/// Box bounds on per-period changes, stand-in for a feasibility
/// correspondence. Bounds must admit a zero change.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaBounds {
    pub lower: [f64; 4],
    pub upper: [f64; 4],
}

impl DeltaBounds {
    pub fn unbounded() -> Self {
        Self {
            lower: [f64::NEG_INFINITY; 4],
            upper: [f64::INFINITY; 4],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (k, cat) in Category::ALL.iter().enumerate() {
            let (lo, hi) = (self.lower[k], self.upper[k]);
            if lo.is_nan() || hi.is_nan() {
                return Err(Error::validation(format!("NaN delta bound for {cat}")));
            }
            if lo > 0.0 || hi < 0.0 {
                return Err(Error::validation(format!(
                    "delta bounds must admit a zero change ({cat}: [{lo}, {hi}])"
                )));
            }
        }
        Ok(())
    }

    pub fn clamp(&self, k: usize, v: f64) -> f64 {
        v.max(self.lower[k]).min(self.upper[k])
    }
}

/// Rigidity of the administrative adjustment-cost block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdminRigidity {
    pub mode: CurvatureMode,
    pub curvature: CategoryCurvature,
}

impl AdminRigidity {
    pub fn symmetric(gamma: f64, eta: f64) -> Self {
        Self {
            mode: CurvatureMode::Symmetric,
            curvature: CategoryCurvature::symmetric(gamma, eta),
        }
    }

    pub fn asymmetric(gamma_up: f64, gamma_down: f64, eta: f64) -> Self {
        Self {
            mode: CurvatureMode::Asymmetric,
            curvature: CategoryCurvature::asymmetric(gamma_up, gamma_down, eta),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            mode: self.mode,
            curvature: self.curvature.scaled(c),
        }
    }
}

/// Inputs of the adjustable-spending break-even pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BreakEvenSpec {
    /// Adjustable spending at `t = 0`; also the constant baseline.
    pub adjustable_baseline: f64,
    /// Non-discretionary operating floor. Carried, not used in the savings
    /// arithmetic.
    pub core_floor: f64,
    /// Targeted proportional reduction, in (0, 1).
    pub target_fraction: f64,
    /// Years to reach the target.
    pub target_horizon: usize,
    /// Reporting window in years.
    pub window: usize,
    pub rigidity: AdminRigidity,
}

impl BreakEvenSpec {
    pub fn new(target_fraction: f64, target_horizon: usize, rigidity: AdminRigidity) -> Result<Self> {
        let spec = Self {
            adjustable_baseline: 100.0,
            core_floor: 0.0,
            target_fraction,
            target_horizon,
            window: 5,
            rigidity,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.target_fraction > 0.0 && self.target_fraction < 1.0) {
            return Err(Error::validation(format!(
                "target fraction out of range (rho = {}, need 0 < rho < 1)",
                self.target_fraction
            )));
        }
        if self.target_horizon < 1 {
            return Err(Error::validation("target horizon must be at least 1 year"));
        }
        if self.window < 1 {
            return Err(Error::validation("reporting window must be at least 1 year"));
        }
        if !(self.adjustable_baseline.is_finite() && self.adjustable_baseline > 0.0) {
            return Err(Error::validation("adjustable baseline must be positive"));
        }
        if !self.core_floor.is_finite() || self.core_floor < 0.0 {
            return Err(Error::validation("core floor must be finite and nonnegative"));
        }
        self.rigidity.curvature.validate("administrative")?;
        if self.rigidity.mode == CurvatureMode::Symmetric && !self.rigidity.curvature.is_symmetric()
        {
            return Err(Error::validation(
                "symmetric administrative rigidity with distinct up/down curvature",
            ));
        }
        Ok(())
    }
}

/// A named, fully specified reform problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub baseline: ExpenditureVector,
    pub cost: FiscalCostSpec,
    pub rigidity: RigidityParams,
    pub discount: f64,
    pub horizon: usize,
    pub bounds: Option<DeltaBounds>,
    pub breakeven: Option<BreakEvenSpec>,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if !(self.discount > 0.0 && self.discount < 1.0) {
            return Err(Error::validation(format!(
                "discount factor out of range (beta = {}, need 0 < beta < 1)",
                self.discount
            )));
        }
        if self.horizon < 1 {
            return Err(Error::validation("horizon must be at least 1 year"));
        }
        ExpenditureVector::new(self.baseline.0)?;
        self.cost.validate()?;
        RigidityParams::from_parts(self.rigidity.mode, self.rigidity.categories)?;
        if let Some(b) = &self.bounds {
            b.validate()?;
        }
        if let Some(be) = &self.breakeven {
            be.validate()?;
        }
        Ok(())
    }
}

/// Allocation path `x_0 .. x_T`. Derived series are recomputed from the
/// states on demand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    states: Vec<ExpenditureVector>,
}

impl Trajectory {
    /// Needs at least two states (horizon >= 1).
    pub fn new(states: Vec<ExpenditureVector>) -> Result<Self> {
        if states.len() < 2 {
            return Err(Error::validation("trajectory needs at least two states"));
        }
        Ok(Self { states })
    }

    /// Constant path at `x0` for `horizon` periods.
    pub fn hold(x0: ExpenditureVector, horizon: usize) -> Result<Self> {
        Self::new(vec![x0; horizon + 1])
    }

    pub fn horizon(&self) -> usize {
        self.states.len() - 1
    }

    pub fn states(&self) -> &[ExpenditureVector] {
        &self.states
    }

    pub fn state(&self, t: usize) -> &ExpenditureVector {
        &self.states[t]
    }

    /// `Δx_t` for `t = 0..=T`, with `Δx_0 = 0`.
    pub fn deltas(&self) -> Vec<DeltaVector> {
        std::iter::once(DeltaVector::zero())
            .chain(self.states.windows(2).map(|w| delta(&w[1], &w[0])))
            .collect()
    }

    /// `G_t` for `t = 0..=T`.
    pub fn totals(&self) -> Vec<f64> {
        self.states.iter().map(ExpenditureVector::total).collect()
    }

    /// Adjustment outlay `Φ(Δx_t)` per period, `Φ_0 = 0`.
    pub fn adjustment_costs(&self, p: &RigidityParams) -> Vec<f64> {
        self.deltas()
            .iter()
            .map(|d| crate::costs::adjustment_cost(d, p).value)
            .collect()
    }

    /// `G_t^eff = G_t + Φ(Δx_t)`.
    pub fn effective(&self, p: &RigidityParams) -> Vec<f64> {
        self.totals()
            .into_iter()
            .zip(self.adjustment_costs(p))
            .map(|(g, phi)| g + phi)
            .collect()
    }
}
