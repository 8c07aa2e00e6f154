//! Adjustment-cost family `Φ` and stage cost `C`, with analytic gradients.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{CurvatureMode, DeltaVector, ExpenditureVector, FiscalCostSpec, RigidityParams};

/// Value plus gradient. For `Φ` the gradient is with respect to the change
/// `Δx_k`; for `C` it is with respect to the level `x_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostEval {
    pub value: f64,
    pub gradient: [f64; 4],
}

/// Symmetric quadratic-cubic adjustment cost
/// `Σ_k γ_k/2 Δ_k² + η_k/3 |Δ_k|³`.
pub fn phi(d: &DeltaVector, p: &RigidityParams) -> Result<CostEval> {
    require_mode(p, CurvatureMode::Symmetric)?;
    Ok(adjustment_cost(d, p))
}

/// Asymmetric variant `Σ_k γ⁺_k/2 (Δ_k)₊² + γ⁻_k/2 (Δ_k)₋² + η_k/3 |Δ_k|³`.
pub fn phi_asymmetric(d: &DeltaVector, p: &RigidityParams) -> Result<CostEval> {
    require_mode(p, CurvatureMode::Asymmetric)?;
    Ok(adjustment_cost(d, p))
}

/// Adjustment cost under whatever mode `p` carries.
pub fn adjustment_cost(d: &DeltaVector, p: &RigidityParams) -> CostEval {
    let mut value = 0.0;
    let mut gradient = [0.0; 4];
    for (k, c) in p.categories().iter().enumerate() {
        let (v, g) = c.eval(d.0[k]);
        value += v;
        gradient[k] = g;
    }
    CostEval { value, gradient }
}

/// Diagonal of the Hessian of `Φ` at `d`.
pub fn adjustment_curvature(d: &DeltaVector, p: &RigidityParams) -> [f64; 4] {
    std::array::from_fn(|k| p.categories()[k].curvature(d.0[k]))
}

fn require_mode(p: &RigidityParams, expected: CurvatureMode) -> Result<()> {
    if p.mode() == expected {
        Ok(())
    } else {
        Err(Error::ModeMismatch {
            expected: expected.name(),
            found: p.mode().name(),
        })
    }
}

/// `C(x) = ½ Σ_k w_k (x_k − x*_k)² + ½ w_G (total(x) − Ḡ)²`.
pub fn stage_cost(x: &ExpenditureVector, spec: &FiscalCostSpec) -> CostEval {
    stage_cost_raw(x.as_array(), spec)
}

/// [`stage_cost`] on an unchecked point, used by the solver and by
/// finite-difference probes that may step outside the nonnegative orthant.
pub fn stage_cost_raw(x: &[f64; 4], spec: &FiscalCostSpec) -> CostEval {
    let target = spec.target.as_array();
    let gap: f64 = x.iter().sum::<f64>() - spec.total_reference;
    let mut value = 0.5 * spec.total_weight * gap * gap;
    let mut gradient = [0.0; 4];
    for k in 0..4 {
        let dev = x[k] - target[k];
        value += 0.5 * spec.weights[k] * dev * dev;
        gradient[k] = spec.weights[k] * dev + spec.total_weight * gap;
    }
    CostEval { value, gradient }
}

/// Hessian of the stage cost: `diag(w) + w_G 11ᵀ`.
pub fn stage_cost_hessian(spec: &FiscalCostSpec) -> [[f64; 4]; 4] {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let diag = if i == j { spec.weights[i] } else { 0.0 };
            diag + spec.total_weight
        })
    })
}

/// Worst mixed relative error between the analytic gradient of `f` at
/// `point` and a central finite difference with step `h`.
///
/// The error per coordinate is `|fd − g| / max(1, |g|, |fd|)`, so it is
/// relative for large slopes and absolute near stationary points.
pub fn gradient_check<F>(f: F, point: &[f64; 4], h: f64) -> Result<f64>
where
    F: Fn(&[f64; 4]) -> CostEval,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::invalid(format!("finite-difference step must be positive (h = {h})")));
    }
    let analytic = f(point).gradient;
    let mut worst = 0.0_f64;
    for k in 0..4 {
        let mut plus = *point;
        let mut minus = *point;
        plus[k] += h;
        minus[k] -= h;
        let fd = (f(&plus).value - f(&minus).value) / (2.0 * h);
        let scale = 1.0_f64.max(analytic[k].abs()).max(fd.abs());
        worst = worst.max((fd - analytic[k]).abs() / scale);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Category;

    fn table4() -> RigidityParams {
        RigidityParams::symmetric([4.0, 3.5, 1.5, 1.0], [1.8, 1.5, 0.6, 0.4]).unwrap()
    }

    fn single(k: usize, gamma: f64, eta: f64) -> RigidityParams {
        let mut g = [0.0; 4];
        let mut e = [0.0; 4];
        g[k] = gamma;
        e[k] = eta;
        RigidityParams::symmetric(g, e).unwrap()
    }

    fn asym_single(up: f64, down: f64, eta: f64) -> RigidityParams {
        RigidityParams::asymmetric([up, 0.0, 0.0, 0.0], [down, 0.0, 0.0, 0.0], [eta, 0.0, 0.0, 0.0])
            .unwrap()
    }

    #[test]
    fn phi_at_zero_is_zero() {
        let e = phi(&DeltaVector::zero(), &table4()).unwrap();
        assert_eq!(e.value, 0.0);
        assert_eq!(e.gradient, [0.0; 4]);
    }

    #[test]
    fn phi_scenario_a_step() {
        // γ/2 (10/3)² + η/3 (10/3)³ with γ = 0.8, η = 0.05.
        let d = DeltaVector([0.0, 0.0, 0.0, -10.0 / 3.0]);
        let e = phi(&d, &single(3, 0.8, 0.05)).unwrap();
        assert!((e.value - 5.061_728_395_061_728).abs() < 1e-12);
        assert!((e.gradient[3] + 3.222_222_222_222_222).abs() < 1e-12);
    }

    #[test]
    fn phi_transfers_unit_step() {
        let d = DeltaVector([1.0, 0.0, 0.0, 0.0]);
        let e = phi(&d, &table4()).unwrap();
        assert!((e.value - 2.6).abs() < 1e-12);
        assert!((e.gradient[0] - 5.8).abs() < 1e-12);
    }

    #[test]
    fn mode_mismatch_is_an_error() {
        let d = DeltaVector([1.0; 4]);
        assert!(matches!(
            phi(&d, &asym_single(1.0, 3.0, 0.0)),
            Err(Error::ModeMismatch { expected: "symmetric", .. })
        ));
        assert!(matches!(
            phi_asymmetric(&d, &table4()),
            Err(Error::ModeMismatch { expected: "asymmetric", .. })
        ));
    }

    #[test]
    fn asymmetric_values() {
        let p = asym_single(1.0, 3.0, 0.0);
        let up = phi_asymmetric(&DeltaVector([2.0, 0.0, 0.0, 0.0]), &p).unwrap();
        let down = phi_asymmetric(&DeltaVector([-2.0, 0.0, 0.0, 0.0]), &p).unwrap();
        assert!((up.value - 2.0).abs() < 1e-12);
        assert!((down.value - 6.0).abs() < 1e-12);
        assert_eq!(up.gradient[0], 2.0);
        assert_eq!(down.gradient[0], -6.0);
        let zero = phi_asymmetric(&DeltaVector::zero(), &p).unwrap();
        assert_eq!(zero.value, 0.0);
        assert_eq!(zero.gradient[0], 0.0);
    }

    #[test]
    fn asymmetric_degenerates_to_symmetric() {
        let sym = table4();
        let asym = RigidityParams::asymmetric(sym.gamma(), sym.gamma(), sym.eta()).unwrap();
        for d in [[1.0, -2.0, 0.3, -0.7], [-5.0, 4.0, 0.0, 2.5]] {
            let d = DeltaVector(d);
            assert_eq!(phi(&d, &sym).unwrap(), phi_asymmetric(&d, &asym).unwrap());
        }
    }

    #[test]
    fn stage_cost_examples() {
        let target = ExpenditureVector::new([46.0, 21.0, 12.0, 21.0]).unwrap();
        let spec = FiscalCostSpec::new(target, [1.0; 4], 0.0, 100.0).unwrap();
        assert_eq!(stage_cost(&target, &spec).value, 0.0);

        let x = ExpenditureVector::new([47.0, 21.0, 12.0, 21.0]).unwrap();
        let e = stage_cost(&x, &spec);
        assert!((e.value - 0.5).abs() < 1e-12);
        assert_eq!(e.gradient, [1.0, 0.0, 0.0, 0.0]);

        let totals_only = FiscalCostSpec::new(target, [0.0; 4], 1.0, 100.0).unwrap();
        let on_ref = ExpenditureVector::new([40.0, 18.0, 18.0, 24.0]).unwrap();
        assert_eq!(stage_cost(&on_ref, &totals_only).value, 0.0);
    }

    #[test]
    fn stage_cost_hessian_matches_gradient_differences() {
        let target = ExpenditureVector::new([40.0, 18.0, 18.0, 24.0]).unwrap();
        let spec = FiscalCostSpec::new(target, [1.0, 2.0, 0.5, 3.0], 0.7, 97.0).unwrap();
        let h = stage_cost_hessian(&spec);
        let x = [41.0, 19.0, 15.0, 22.0];
        let g0 = stage_cost_raw(&x, &spec).gradient;
        for j in 0..4 {
            let mut xp = x;
            xp[j] += 1.0;
            let g1 = stage_cost_raw(&xp, &spec).gradient;
            for i in 0..4 {
                assert!((g1[i] - g0[i] - h[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gradient_check_examples() {
        let p = table4();
        let f = |d: &[f64; 4]| adjustment_cost(&DeltaVector(*d), &p);
        assert!(gradient_check(f, &[1.0, -1.0, 0.5, -0.5], 1e-6).unwrap() < 1e-6);
        assert!(gradient_check(f, &[0.0; 4], 1e-6).unwrap() < 1e-6);
        assert!(gradient_check(f, &[0.0; 4], 0.0).is_err());
    }

    #[test]
    fn gradient_check_flags_a_wrong_gradient() {
        let wrong = |d: &[f64; 4]| CostEval {
            value: d[0] * d[0],
            gradient: [d[0], 0.0, 0.0, 0.0],
        };
        assert!(gradient_check(wrong, &[3.0, 0.0, 0.0, 0.0], 1e-6).unwrap() > 0.4);
    }

    #[test]
    fn curvature_diagonal() {
        let p = table4();
        let d = DeltaVector([1.0, -2.0, 0.0, 0.5]);
        let c = adjustment_curvature(&d, &p);
        assert!((c[0] - (4.0 + 2.0 * 1.8)).abs() < 1e-12);
        assert!((c[1] - (3.5 + 2.0 * 1.5 * 2.0)).abs() < 1e-12);
        assert_eq!(c[2], 1.5);
        assert_eq!(p.category(Category::Operating).eta, 0.4);
    }
}
