//! Finite-horizon planner and Euler-condition validation.
//!
//! The infinite-horizon problem `min Σ βᵗ [C(x_t) + Φ(Δx_t)]` is truncated at
//! the scenario horizon `T` and closed with a terminal penalty
//! `w_T ‖x_T − x̂‖²`, where `x̂` is the minimizer of the stage cost (the target
//! allocation whenever there is no total-spend penalty). The decision vector
//! is the stacked sequence of changes `Δx_1 … Δx_T`, so box bounds on changes
//! are plain box constraints. It is minimized with a projected Newton method
//! (Armijo search along the projection arc); the objective is convex and C²,
//! and the Hessian is assembled exactly.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::costs::{adjustment_cost, adjustment_curvature, stage_cost_hessian, stage_cost_raw};
use crate::error::{Error, Result};
use crate::types::{DeltaBounds, DeltaVector, ExpenditureVector, Scenario, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialGuess {
    /// `x_t = x_0` for every `t`.
    Hold,
    /// Equal steps from `x_0` to the target over the horizon.
    LinearRamp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_iterations: usize,
    /// Bound on the infinity norm of the projected gradient.
    pub gradient_tolerance: f64,
    /// Bound on the largest Euler residual at interior dates.
    pub euler_tolerance: f64,
    pub terminal_weight: f64,
    pub initial_guess: InitialGuess,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 10_000,
            gradient_tolerance: 1e-8,
            euler_tolerance: 1e-6,
            terminal_weight: 1e3,
            initial_guess: InitialGuess::LinearRamp,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gradient_tolerance > 0.0) || !(self.euler_tolerance > 0.0) {
            return Err(Error::validation("solver tolerances must be positive"));
        }
        if !self.terminal_weight.is_finite() || self.terminal_weight < 0.0 {
            return Err(Error::validation("terminal weight must be finite and nonnegative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub converged: bool,
    pub iterations: usize,
    pub objective: f64,
    pub gradient_norm: f64,
    /// Largest Euler residual over interior dates, skipping entries whose
    /// adjacent changes sit on a box bound (there the residual carries a
    /// multiplier and need not vanish).
    pub max_euler_residual: f64,
    /// Objective value before the first iteration and after each accepted
    /// step.
    pub objective_history: Vec<f64>,
    pub trajectory: Trajectory,
}

/// Euler residuals at dates `t = 1 … T−1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EulerResiduals {
    values: Vec<[f64; 4]>,
}

impl EulerResiduals {
    /// Residuals at date `t`, `1 <= t <= T−1`.
    pub fn at(&self, t: usize) -> &[f64; 4] {
        &self.values[t - 1]
    }

    pub fn dates(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.values.len()
    }

    pub fn rows(&self) -> &[[f64; 4]] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .fold(0.0_f64, |m, r| m.max(r.abs()))
    }
}

/// Per-date first-order conditions
/// `∂C/∂x_k(x_t) + Φ'_k(Δx_t) − β Φ'_k(Δx_{t+1})` for interior dates.
pub fn euler_residuals(traj: &Trajectory, scenario: &Scenario) -> Result<EulerResiduals> {
    if traj.states().len() < 3 {
        return Err(Error::invalid(
            "Euler residuals need a trajectory with at least three states",
        ));
    }
    let deltas = traj.deltas();
    let beta = scenario.discount;
    let values = (1..traj.horizon())
        .map(|t| {
            let c = stage_cost_raw(traj.state(t).as_array(), &scenario.cost).gradient;
            let now = adjustment_cost(&deltas[t], &scenario.rigidity).gradient;
            let next = adjustment_cost(&deltas[t + 1], &scenario.rigidity).gradient;
            std::array::from_fn(|k| c[k] + now[k] - beta * next[k])
        })
        .collect();
    Ok(EulerResiduals { values })
}

/// Truncated discounted objective of an arbitrary path starting at the
/// scenario baseline, including the terminal penalty.
pub fn objective(traj: &Trajectory, scenario: &Scenario, terminal_weight: f64) -> f64 {
    let anchor = scenario.cost.long_run_allocation();
    let states: Vec<[f64; 4]> = traj.states().iter().map(|x| x.to_array()).collect();
    path_objective(&states, scenario, terminal_weight, &anchor)
}

fn path_objective(
    states: &[[f64; 4]],
    scenario: &Scenario,
    terminal_weight: f64,
    anchor: &[f64; 4],
) -> f64 {
    let beta = scenario.discount;
    let mut value = 0.0;
    let mut weight = 1.0;
    for (t, x) in states.iter().enumerate() {
        let mut period = stage_cost_raw(x, &scenario.cost).value;
        if t > 0 {
            let d = DeltaVector(std::array::from_fn(|k| x[k] - states[t - 1][k]));
            period += adjustment_cost(&d, &scenario.rigidity).value;
        }
        value += weight * period;
        weight *= beta;
    }
    let last = states.last().expect("non-empty path");
    value
        + terminal_weight
            * (0..4)
                .map(|k| (last[k] - anchor[k]).powi(2))
                .sum::<f64>()
}

/// Path that stays at the baseline.
pub fn hold_trajectory(scenario: &Scenario) -> Result<Trajectory> {
    Trajectory::hold(scenario.baseline, scenario.horizon)
}

/// Path that jumps to the target at `t = 1` and stays there.
pub fn immediate_jump_trajectory(scenario: &Scenario) -> Result<Trajectory> {
    let mut states = vec![scenario.cost.target; scenario.horizon + 1];
    states[0] = scenario.baseline;
    Trajectory::new(states)
}

/// Fraction of the gap to `x_star` closed in the first period,
/// `‖x_1 − x_0‖ / ‖x* − x_0‖`.
pub fn gradualism_metric(traj: &Trajectory, x_star: &ExpenditureVector) -> Result<f64> {
    let x0 = traj.state(0);
    let gap = (*x_star - *x0).norm();
    if gap == 0.0 {
        return Err(Error::invalid(
            "gap-closure fraction is undefined when the start equals the target",
        ));
    }
    Ok((*traj.state(1) - *x0).norm() / gap)
}

/// First date at which `‖x_t − x*‖ < fraction · ‖x_0 − x*‖`, if any.
pub fn periods_to_converge(traj: &Trajectory, x_star: &ExpenditureVector, fraction: f64) -> Option<usize> {
    let gap = (*traj.state(0) - *x_star).norm();
    traj.states()
        .iter()
        .position(|x| (*x - *x_star).norm() < fraction * gap)
}

/// Solve the truncated planner problem.
///
/// Non-convergence is reported through [`SolveReport::converged`], not as
/// an error. Errors are reserved for invalid inputs and for optima that
/// leave the nonnegative orthant.
pub fn solve(scenario: &Scenario, cfg: &SolverConfig) -> Result<SolveReport> {
    scenario.validate()?;
    cfg.validate()?;
    let problem = Problem::new(scenario, cfg);
    let mut z = problem.initial_point(cfg.initial_guess);

    let mut f = problem.value(&z);
    let mut history = vec![f];
    let mut grad = problem.gradient(&z);
    let mut gnorm = problem.projected_gradient_norm(&z, &grad);
    let mut iterations = 0;

    while gnorm > cfg.gradient_tolerance && iterations < cfg.max_iterations {
        iterations += 1;
        match problem.newton_step(&z, &grad, f) {
            Some((z_new, f_new)) => {
                z = z_new;
                f = f_new;
                history.push(f);
            }
            None => break,
        }
        grad = problem.gradient(&z);
        gnorm = problem.projected_gradient_norm(&z, &grad);
    }

    let trajectory = problem.trajectory(&z)?;
    let max_euler_residual = if scenario.horizon >= 2 {
        let residuals = euler_residuals(&trajectory, scenario)?;
        problem.free_residual_max(&z, &residuals)
    } else {
        0.0
    };
    let converged = gnorm <= cfg.gradient_tolerance && max_euler_residual <= cfg.euler_tolerance;
    Ok(SolveReport {
        converged,
        iterations,
        objective: f,
        gradient_norm: gnorm,
        max_euler_residual,
        objective_history: history,
        trajectory,
    })
}

const ARMIJO_SIGMA: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;
const ACTIVE_EPS: f64 = 1e-6;

struct Problem<'a> {
    scenario: &'a Scenario,
    horizon: usize,
    x0: [f64; 4],
    anchor: [f64; 4],
    terminal_weight: f64,
    bounds: DeltaBounds,
    /// `β^t` for `t = 0..=T`.
    discount: Vec<f64>,
    /// `Σ_{s=m}^{T} β^s` for `m = 0..=T`.
    discount_tail: Vec<f64>,
    cost_hessian: [[f64; 4]; 4],
}

impl<'a> Problem<'a> {
    fn new(scenario: &'a Scenario, cfg: &SolverConfig) -> Self {
        let horizon = scenario.horizon;
        let discount: Vec<f64> = (0..=horizon)
            .scan(1.0, |w, _| {
                let cur = *w;
                *w *= scenario.discount;
                Some(cur)
            })
            .collect();
        let mut discount_tail = vec![0.0; horizon + 2];
        for t in (0..=horizon).rev() {
            discount_tail[t] = discount_tail[t + 1] + discount[t];
        }
        discount_tail.truncate(horizon + 1);
        Self {
            scenario,
            horizon,
            x0: scenario.baseline.to_array(),
            anchor: scenario.cost.long_run_allocation(),
            terminal_weight: cfg.terminal_weight,
            bounds: scenario.bounds.unwrap_or_else(DeltaBounds::unbounded),
            discount,
            discount_tail,
            cost_hessian: stage_cost_hessian(&scenario.cost),
        }
    }

    fn dim(&self) -> usize {
        4 * self.horizon
    }

    fn change(z: &[f64], t: usize) -> DeltaVector {
        DeltaVector(std::array::from_fn(|k| z[4 * (t - 1) + k]))
    }

    fn project(&self, z: &mut [f64]) {
        for (i, v) in z.iter_mut().enumerate() {
            *v = self.bounds.clamp(i % 4, *v);
        }
    }

    fn initial_point(&self, guess: InitialGuess) -> Vec<f64> {
        let mut z = vec![0.0; self.dim()];
        if guess == InitialGuess::LinearRamp {
            let target = self.scenario.cost.target.as_array();
            let step: [f64; 4] = std::array::from_fn(|k| (target[k] - self.x0[k]) / self.horizon as f64);
            for (i, v) in z.iter_mut().enumerate() {
                *v = step[i % 4];
            }
        }
        self.project(&mut z);
        z
    }

    fn states(&self, z: &[f64]) -> Vec<[f64; 4]> {
        let mut states = Vec::with_capacity(self.horizon + 1);
        let mut x = self.x0;
        states.push(x);
        for chunk in z.chunks_exact(4) {
            for k in 0..4 {
                x[k] += chunk[k];
            }
            states.push(x);
        }
        states
    }

    fn value(&self, z: &[f64]) -> f64 {
        path_objective(&self.states(z), self.scenario, self.terminal_weight, &self.anchor)
    }

    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        let states = self.states(z);
        let mut g = vec![0.0; self.dim()];
        // Suffix sums of discounted stage-cost gradients plus the terminal term.
        let mut tail: [f64; 4] =
            std::array::from_fn(|k| 2.0 * self.terminal_weight * (states[self.horizon][k] - self.anchor[k]));
        for t in (1..=self.horizon).rev() {
            let c = stage_cost_raw(&states[t], &self.scenario.cost).gradient;
            let phi = adjustment_cost(&Self::change(z, t), &self.scenario.rigidity).gradient;
            for k in 0..4 {
                tail[k] += self.discount[t] * c[k];
                g[4 * (t - 1) + k] = tail[k] + self.discount[t] * phi[k];
            }
        }
        g
    }

    fn hessian(&self, z: &[f64]) -> DMatrix<f64> {
        let n = self.dim();
        let mut h = DMatrix::zeros(n, n);
        for t in 1..=self.horizon {
            for r in 1..=self.horizon {
                let tail = self.discount_tail[t.max(r)];
                for k in 0..4 {
                    for j in 0..4 {
                        let mut v = tail * self.cost_hessian[k][j];
                        if k == j {
                            v += 2.0 * self.terminal_weight;
                        }
                        h[(4 * (t - 1) + k, 4 * (r - 1) + j)] = v;
                    }
                }
            }
            let curv = adjustment_curvature(&Self::change(z, t), &self.scenario.rigidity);
            for k in 0..4 {
                let i = 4 * (t - 1) + k;
                h[(i, i)] += self.discount[t] * curv[k];
            }
        }
        h
    }

    fn projected_gradient_norm(&self, z: &[f64], g: &[f64]) -> f64 {
        z.iter()
            .zip(g)
            .enumerate()
            .map(|(i, (&zi, &gi))| (zi - self.bounds.clamp(i % 4, zi - gi)).abs())
            .fold(0.0, f64::max)
    }

    fn at_lower(&self, i: usize, zi: f64, eps: f64) -> bool {
        let lo = self.bounds.lower[i % 4];
        lo.is_finite() && zi <= lo + eps
    }

    fn at_upper(&self, i: usize, zi: f64, eps: f64) -> bool {
        let hi = self.bounds.upper[i % 4];
        hi.is_finite() && zi >= hi - eps
    }

    /// One projected Newton iteration. Returns `None` when no step decreases
    /// the objective.
    fn newton_step(&self, z: &[f64], g: &[f64], f: f64) -> Option<(Vec<f64>, f64)> {
        let n = self.dim();
        let eps = ACTIVE_EPS.min(self.projected_gradient_norm(z, g));
        let active: Vec<bool> = (0..n)
            .map(|i| {
                (self.at_lower(i, z[i], eps) && g[i] > 0.0) || (self.at_upper(i, z[i], eps) && g[i] < 0.0)
            })
            .collect();
        let free: Vec<usize> = (0..n).filter(|&i| !active[i]).collect();

        let h = self.hessian(z);
        let mut d = vec![0.0; n];
        for i in (0..n).filter(|&i| active[i]) {
            d[i] = -g[i] / h[(i, i)].max(f64::MIN_POSITIVE);
        }
        if !free.is_empty() {
            let m = free.len();
            let hff = DMatrix::from_fn(m, m, |a, b| h[(free[a], free[b])]);
            let rhs = DVector::from_fn(m, |a, _| -g[free[a]]);
            let step = regularized_solve(hff, rhs)?;
            for (a, &i) in free.iter().enumerate() {
                d[i] = step[a];
            }
        }

        let free_slope: f64 = free.iter().map(|&i| g[i] * d[i]).sum();
        let mut alpha = 1.0;
        for _ in 0..MAX_BACKTRACKS {
            let mut trial: Vec<f64> = z.iter().zip(&d).map(|(zi, di)| zi + alpha * di).collect();
            self.project(&mut trial);
            let f_trial = self.value(&trial);
            let active_decrease: f64 = (0..n)
                .filter(|&i| active[i])
                .map(|i| g[i] * (z[i] - trial[i]))
                .sum();
            let required = ARMIJO_SIGMA * (-alpha * free_slope + active_decrease);
            if f - f_trial >= required && f_trial <= f {
                return Some((trial, f_trial));
            }
            alpha *= 0.5;
        }
        // Close to the optimum the decrease of a Newton step drops below the
        // resolution of the objective. Take the full step if it is level
        // within evaluation noise and shrinks the projected gradient.
        let mut trial: Vec<f64> = z.iter().zip(&d).map(|(zi, di)| zi + di).collect();
        self.project(&mut trial);
        let f_trial = self.value(&trial);
        let g_trial = self.gradient(&trial);
        if f_trial <= f + objective_noise(f)
            && self.projected_gradient_norm(&trial, &g_trial) < self.projected_gradient_norm(z, g)
        {
            return Some((trial, f_trial));
        }
        None
    }

    fn trajectory(&self, z: &[f64]) -> Result<Trajectory> {
        let scale = 1e-9 * self.x0.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        let states = self
            .states(z)
            .into_iter()
            .map(|x| {
                let cleaned = x.map(|v| if v < 0.0 && v > -scale { 0.0 } else { v });
                ExpenditureVector::new(cleaned).map_err(|e| {
                    Error::invalid(format!("optimal path leaves the nonnegative orthant: {e}"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Trajectory::new(states)
    }

    fn free_residual_max(&self, z: &[f64], residuals: &EulerResiduals) -> f64 {
        let binds = |t: usize, k: usize| {
            let i = 4 * (t - 1) + k;
            self.at_lower(i, z[i], 1e-12) || self.at_upper(i, z[i], 1e-12)
        };
        let mut worst = 0.0_f64;
        for t in residuals.dates() {
            for (k, r) in residuals.at(t).iter().enumerate() {
                if !binds(t, k) && !binds(t + 1, k) {
                    worst = worst.max(r.abs());
                }
            }
        }
        worst
    }
}

/// Slack below which two objective values are indistinguishable.
pub fn objective_noise(f: f64) -> f64 {
    16.0 * f64::EPSILON * f.abs().max(1.0)
}

/// Cholesky solve, shifting the diagonal until the factorization succeeds.
fn regularized_solve(h: DMatrix<f64>, rhs: DVector<f64>) -> Option<DVector<f64>> {
    if let Some(chol) = h.clone().cholesky() {
        return Some(chol.solve(&rhs));
    }
    let scale = h.diagonal().iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let mut shift = 1e-12 * scale;
    for _ in 0..40 {
        let mut shifted = h.clone();
        for i in 0..shifted.nrows() {
            shifted[(i, i)] += shift;
        }
        if let Some(chol) = shifted.cholesky() {
            return Some(chol.solve(&rhs));
        }
        shift *= 10.0;
    }
    None
}
