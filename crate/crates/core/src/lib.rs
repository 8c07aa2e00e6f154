//! Fiscal transition model with nonlinear adjustment costs.
//!
//! Public expenditure is split into four categories (transfers, wages,
//! investment, operating). Moving the allocation toward a target composition
//! incurs convex quadratic-cubic adjustment costs; the [`planner`] solves the
//! discounted finite-horizon reallocation problem and certifies the result
//! against the per-date Euler conditions. [`analytics`] derives effective
//! expenditure, J-shape diagnostics and the administrative break-even
//! pipeline; [`calibration`] carries the published calibration tables and
//! [`io`] / [`cli`] provide the scenario file format, CSV output and the
//! command-line surface.

pub mod analytics;
pub mod calibration;
pub mod cli;
pub mod costs;
mod error;
pub mod io;
pub mod planner;
pub mod types;

pub use error::{Error, Result};
pub use types::{
    delta, total, BreakEvenSpec, Category, CategoryCurvature, CurvatureMode, DeltaBounds,
    DeltaVector, ExpenditureVector, FiscalCostSpec, RigidityParams, Scenario, Trajectory,
};
