#![allow(dead_code)]

use fistrans::types::{AdminRigidity, DeltaBounds};
use fistrans::{BreakEvenSpec, ExpenditureVector, FiscalCostSpec, RigidityParams, Scenario};
use rand::Rng;

pub fn ev(x: [f64; 4]) -> ExpenditureVector {
    ExpenditureVector::new(x).unwrap()
}

fn arr<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> [f64; 4] {
    std::array::from_fn(|_| rng.random_range(lo..hi))
}

/// Scalar reform embedded in the four-category problem: only transfers move
/// (from 0 toward 1), the other categories start on target.
pub fn scalar(gamma: f64, eta: f64, discount: f64, horizon: usize) -> Scenario {
    Scenario {
        name: "scalar".into(),
        baseline: ev([0.0, 5.0, 5.0, 5.0]),
        cost: FiscalCostSpec::new(ev([1.0, 5.0, 5.0, 5.0]), [1.0; 4], 0.0, 16.0).unwrap(),
        rigidity: RigidityParams::symmetric([gamma, 1.0, 1.0, 1.0], [eta, 0.0, 0.0, 0.0]).unwrap(),
        discount,
        horizon,
        bounds: None,
        breakeven: None,
    }
}

/// Random reform with strictly positive quadratic curvature everywhere and
/// no total-spend penalty.
pub fn random_reform<R: Rng>(rng: &mut R, horizon: usize) -> Scenario {
    let baseline = ev(arr(rng, 5.0, 40.0));
    let target = ev(arr(rng, 5.0, 40.0));
    Scenario {
        name: "random-reform".into(),
        baseline,
        cost: FiscalCostSpec::new(target, arr(rng, 0.2, 2.0), 0.0, 100.0).unwrap(),
        rigidity: RigidityParams::symmetric(arr(rng, 0.2, 5.0), arr(rng, 0.0, 2.0)).unwrap(),
        discount: rng.random_range(0.85..0.99),
        horizon,
        bounds: None,
        breakeven: None,
    }
}

/// Random valid scenario exercising every optional block of the file format.
pub fn random_scenario<R: Rng>(rng: &mut R, id: usize) -> Scenario {
    let total_weight = if rng.random_bool(0.5) { 0.0 } else { rng.random_range(0.0..1.0) };
    let cost = FiscalCostSpec::new(
        ev(arr(rng, 0.0, 60.0)),
        arr(rng, 0.1, 3.0),
        total_weight,
        rng.random_range(80.0..120.0),
    )
    .unwrap();
    let eta = arr(rng, 0.0, 2.0);
    let rigidity = if rng.random_bool(0.5) {
        RigidityParams::symmetric(arr(rng, 0.0, 5.0), eta).unwrap()
    } else {
        RigidityParams::asymmetric(arr(rng, 0.0, 5.0), arr(rng, 0.0, 8.0), eta).unwrap()
    };
    let bounds = rng.random_bool(0.4).then(|| {
        let mut b = DeltaBounds::unbounded();
        for k in 0..4 {
            if rng.random_bool(0.6) {
                b.lower[k] = -rng.random_range(0.1..5.0);
            }
            if rng.random_bool(0.6) {
                b.upper[k] = rng.random_range(0.1..5.0);
            }
        }
        if b.lower.iter().all(|v| v.is_infinite()) && b.upper.iter().all(|v| v.is_infinite()) {
            b.upper[0] = 1.0;
        }
        b
    });
    let breakeven = rng.random_bool(0.5).then(|| {
        let rigidity = if rng.random_bool(0.5) {
            AdminRigidity::symmetric(rng.random_range(0.0..5.0), rng.random_range(0.0..0.5))
        } else {
            AdminRigidity::asymmetric(
                rng.random_range(0.0..5.0),
                rng.random_range(0.0..8.0),
                rng.random_range(0.0..0.5),
            )
        };
        let target_horizon = rng.random_range(1..7);
        BreakEvenSpec {
            adjustable_baseline: rng.random_range(50.0..150.0),
            core_floor: rng.random_range(0.0..20.0),
            window: rng.random_range(1..10),
            ..BreakEvenSpec::new(rng.random_range(0.01..0.6), target_horizon, rigidity).unwrap()
        }
    });
    let s = Scenario {
        name: format!("random \"{id}\" scenario"),
        baseline: ev(arr(rng, 0.0, 60.0)),
        cost,
        rigidity,
        discount: rng.random_range(0.5..0.999),
        horizon: rng.random_range(1..80),
        bounds,
        breakeven,
    };
    s.validate().unwrap();
    s
}
