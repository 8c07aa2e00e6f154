mod common;

use fistrans::analytics::{self, BreakEven};
use fistrans::calibration::rigidity_to_params;
use fistrans::io::{parse_scenario, serialize_scenario};
use fistrans::types::AdminRigidity;
use fistrans::{costs, delta, total, BreakEvenSpec, DeltaVector, ExpenditureVector, RigidityParams};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn share() -> impl Strategy<Value = f64> {
    0.0..1e4_f64
}

fn vector() -> impl Strategy<Value = ExpenditureVector> {
    prop::array::uniform4(share()).prop_map(|a| ExpenditureVector::new(a).unwrap())
}

fn change() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(-50.0..50.0_f64)
}

fn positive4(hi: f64) -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(1e-3..hi)
}

proptest! {
    #[test]
    fn total_is_component_sum(x in vector()) {
        let a = x.as_array();
        prop_assert_eq!(total(&x), a[0] + a[1] + a[2] + a[3]);
    }

    #[test]
    fn self_delta_is_zero(x in vector()) {
        prop_assert!(delta(&x, &x).is_zero());
    }

    #[test]
    fn deltas_chain(a in vector(), b in vector(), c in vector()) {
        let lhs = delta(&a, &b) + delta(&b, &c);
        let rhs = delta(&a, &c);
        for k in 0..4 {
            prop_assert!((lhs.0[k] - rhs.0[k]).abs() <= 1e-12 * 1e4);
        }
    }

    #[test]
    fn negative_components_rejected(mut a in prop::array::uniform4(share()), k in 0usize..4, v in -1e4..-1e-12_f64) {
        a[k] = v;
        prop_assert!(ExpenditureVector::new(a).is_err());
    }

    #[test]
    fn phi_zero_at_rest_and_positive_elsewhere(g in positive4(5.0), e in positive4(2.0), d in change()) {
        let p = RigidityParams::symmetric(g, e).unwrap();
        prop_assert_eq!(costs::phi(&DeltaVector::zero(), &p).unwrap().value, 0.0);
        let v = costs::phi(&DeltaVector(d), &p).unwrap().value;
        prop_assert!(v.is_finite());
        if d.iter().any(|&x| x != 0.0) {
            prop_assert!(v > 0.0);
        }
    }

    #[test]
    fn phi_is_even(g in prop::array::uniform4(0.0..5.0_f64), e in prop::array::uniform4(0.0..2.0_f64), d in change()) {
        let p = RigidityParams::symmetric(g, e).unwrap();
        let plus = costs::phi(&DeltaVector(d), &p).unwrap();
        let minus = costs::phi(&-DeltaVector(d), &p).unwrap();
        prop_assert_eq!(plus.value, minus.value);
        for k in 0..4 {
            prop_assert_eq!(plus.gradient[k], -minus.gradient[k]);
        }
    }

    #[test]
    fn phi_is_strictly_convex_along_rays(
        g in positive4(5.0),
        e in prop::array::uniform4(0.0..2.0_f64),
        d in change(),
        lambda in 0.01..0.99_f64,
    ) {
        prop_assume!(d.iter().any(|x| x.abs() > 1e-3));
        let p = RigidityParams::symmetric(g, e).unwrap();
        let full = costs::phi(&DeltaVector(d), &p).unwrap().value;
        let part = costs::phi(&DeltaVector(d.map(|x| lambda * x)), &p).unwrap().value;
        prop_assert!(part < lambda * full);

        let quad = RigidityParams::symmetric(g, [0.0; 4]).unwrap();
        let full = costs::phi(&DeltaVector(d), &quad).unwrap().value;
        let part = costs::phi(&DeltaVector(d.map(|x| lambda * x)), &quad).unwrap().value;
        prop_assert!(part <= lambda * lambda * full * (1.0 + 1e-12));
    }

    #[test]
    fn cuts_cost_more_when_gamma_down_is_larger(
        up in 0.0..5.0_f64,
        extra in 1e-3..5.0_f64,
        eta in 0.0..2.0_f64,
        k in 0usize..4,
        size in 1e-3..20.0_f64,
    ) {
        let p = RigidityParams::asymmetric([up; 4], [up + extra; 4], [eta; 4]).unwrap();
        let mut d = [0.0; 4];
        d[k] = size;
        let rise = costs::phi_asymmetric(&DeltaVector(d), &p).unwrap().value;
        d[k] = -size;
        let cut = costs::phi_asymmetric(&DeltaVector(d), &p).unwrap().value;
        prop_assert!(cut > rise);
    }

    #[test]
    fn mode_mismatch_is_an_error(g in positive4(5.0), e in positive4(2.0)) {
        let sym = RigidityParams::symmetric(g, e).unwrap();
        let asym = RigidityParams::asymmetric(g, g.map(|x| 2.0 * x), e).unwrap();
        prop_assert!(costs::phi_asymmetric(&DeltaVector::zero(), &sym).is_err());
        prop_assert!(costs::phi(&DeltaVector::zero(), &asym).is_err());
    }

    #[test]
    fn savings_identities(
        rho in 0.01..0.9_f64,
        h in 1usize..8,
        window in 1usize..12,
        gamma in 0.0..6.0_f64,
        eta in 0.0..1.0_f64,
        f0 in 10.0..200.0_f64,
    ) {
        let spec = BreakEvenSpec {
            adjustable_baseline: f0,
            window,
            ..BreakEvenSpec::new(rho, h, AdminRigidity::symmetric(gamma, eta)).unwrap()
        };
        let s = analytics::equal_step_savings(&spec).unwrap();
        prop_assert_eq!(s.gross.len(), window + 1);
        prop_assert_eq!(s.outlay[0], 0.0);
        let mut running = 0.0;
        for t in 0..=window {
            prop_assert_eq!(s.net[t], s.gross[t] - s.outlay[t]);
            running += s.net[t];
            prop_assert!((s.cumulative[t] - running).abs() <= 1e-12 * f0.max(1.0) * (t as f64 + 1.0));
        }
        match s.breakeven {
            BreakEven::At(t) => {
                prop_assert!(t >= 1 && s.cumulative[t] >= 0.0);
                prop_assert!((1..t).all(|u| s.cumulative[u] < 0.0));
            }
            BreakEven::BeyondWindow(_) => prop_assert!((1..=window).all(|u| s.cumulative[u] < 0.0)),
        }
    }

    #[test]
    fn stiffer_administration_lowers_every_moving_year(
        rho in 0.01..0.9_f64,
        h in 1usize..8,
        gamma in 0.0..6.0_f64,
        eta in 0.0..1.0_f64,
        dg in 0.0..3.0_f64,
        de in 0.0..1.0_f64,
    ) {
        prop_assume!(dg > 1e-6 || de > 1e-6);
        let soft = BreakEvenSpec::new(rho, h, AdminRigidity::symmetric(gamma, eta)).unwrap();
        let stiff = BreakEvenSpec::new(rho, h, AdminRigidity::symmetric(gamma + dg, eta + de)).unwrap();
        let a = analytics::equal_step_savings(&soft).unwrap();
        let b = analytics::equal_step_savings(&stiff).unwrap();
        let path = analytics::equal_step_path(&soft);
        for t in 1..path.len() {
            if path[t] != path[t - 1] {
                prop_assert!(b.net[t] < a.net[t]);
            } else {
                prop_assert_eq!(b.net[t], a.net[t]);
            }
        }
        prop_assert!(b.total_net() < a.total_net());
        let key = |x: BreakEven| x.year().unwrap_or(usize::MAX);
        prop_assert!(key(b.breakeven) >= key(a.breakeven));
    }

    #[test]
    fn jshape_verdict_is_consistent(series in prop::collection::vec(0.0..200.0_f64, 3..40)) {
        let v = analytics::jshape_classify(&series).unwrap();
        prop_assert_eq!(v.terminal_value, *series.last().unwrap());
        prop_assert!(series.iter().all(|&x| x <= v.peak_value));
        if v.is_j_shaped {
            prop_assert!(v.peak_index > 0);
            prop_assert!(v.peak_value > series[0]);
            prop_assert!(v.terminal_value < v.peak_value);
        }
    }

    #[test]
    fn rigidity_map_is_monotone(a in 0.0..=1.0_f64, b in 0.0..=1.0_f64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (g0, e0) = rigidity_to_params(lo).unwrap();
        let (g1, e1) = rigidity_to_params(hi).unwrap();
        prop_assert!(g0 <= g1 && e0 <= e1);
    }

    #[test]
    fn random_scenarios_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = common::random_scenario(&mut rng, seed as usize);
        let text = serialize_scenario(&s);
        prop_assert_eq!(parse_scenario(&text).unwrap(), s);
        prop_assert_eq!(serialize_scenario(&parse_scenario(&text).unwrap()), text);
    }
}
