//! Property-based invariants over the catalog and random step weights.

use proptest::prelude::*;

use aptree::admissibility::doubling_ratio;
use aptree::ap_condition::{ap_numerator, ap_value};
use aptree::catalog::entries;
use aptree::measure_engine::{ball_measure, branch_multiplicity, halfball_measure, segment_mu};
use aptree::oracle::DiscreteTree;
use aptree::radial_weight::{integrate, integrate_quadrature, IntegrandSpec, TailRule, Tolerance, WeightFunction, WeightSpec};
use aptree::tree_geometry::TreeSpace;

fn tol() -> Tolerance {
    Tolerance::default()
}

fn catalog_spaces() -> Vec<TreeSpace> {
    entries().iter().map(|e| e.space().unwrap()).collect()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

fn step_weight() -> impl Strategy<Value = WeightFunction> {
    (prop::collection::vec(0.1f64..10.0, 1..8), prop::option::of(0.5f64..2.0)).prop_map(|(values, ratio)| {
        let tail = match ratio {
            Some(ratio) => TailRule::Geometric { ratio },
            None => TailRule::Constant,
        };
        WeightFunction::step(values, tail).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn integrate_is_additive(idx in 0usize..64, a in 0.0f64..5.0, d1 in 0.0f64..5.0, d2 in 0.0f64..5.0) {
        let spaces = catalog_spaces();
        let x = &spaces[idx % spaces.len()];
        let spec = IntegrandSpec::weight(x.mu()).over(x.lambda());
        let (b, c) = (a + d1, a + d1 + d2);
        let whole = integrate(&spec, a, c, &tol()).unwrap();
        let parts = integrate(&spec, a, b, &tol()).unwrap() + integrate(&spec, b, c, &tol()).unwrap();
        prop_assert!(close(whole, parts, 1e-9), "{whole} vs {parts}");
    }

    #[test]
    fn step_weights_exact_matches_quadrature(w in step_weight(), a in 0.0f64..6.0, len in 0.0f64..6.0) {
        let spec = IntegrandSpec::weight(&w);
        let exact = integrate(&spec, a, a + len, &tol()).unwrap();
        let quad = integrate_quadrature(&spec, a, a + len, &tol()).unwrap().value;
        prop_assert!(close(exact, quad, 1e-10), "{exact} vs {quad}");
        prop_assert!(close(exact, w.integral(a, a + len), 1e-12));
    }

    #[test]
    fn balls_are_nested(idx in 0usize..64, t in 0.0f64..8.0, r in 0.01f64..6.0, grow in 1.0f64..3.0) {
        let spaces = catalog_spaces();
        let x = &spaces[idx % spaces.len()];
        let small = ball_measure(x, t, r, &tol()).unwrap();
        let big = ball_measure(x, t, r * grow, &tol()).unwrap();
        let half = halfball_measure(x, t, r, &tol()).unwrap();
        prop_assert!(small <= big * (1.0 + 1e-12));
        prop_assert!(half <= small * (1.0 + 1e-12));
        prop_assert!(doubling_ratio(x, t, r, &tol()).unwrap() >= 1.0 - 1e-12);
    }

    #[test]
    fn holder_floor(idx in 0usize..64, t in 0.001f64..10.0, r in 0.001f64..8.0, p in 1.0f64..6.0) {
        let spaces = catalog_spaces();
        let x = &spaces[idx % spaces.len()];
        prop_assume!(x.relative_resolution(t, r) < 1e-12);
        let v = ap_value(x, p, t, r, &tol()).unwrap();
        let floor = ap_numerator(x, t, r, &tol()).unwrap() * r / halfball_measure(x, t, r, &tol()).unwrap();
        prop_assert!(v >= floor.max(0.5) * (1.0 - 1e-9), "{v} < {floor}");
    }

    #[test]
    fn ap_decreases_in_p(idx in 0usize..64, t in 0.01f64..10.0, r in 0.01f64..8.0, p in 1.0f64..5.0, dp in 0.0f64..3.0) {
        let spaces = catalog_spaces();
        let x = &spaces[idx % spaces.len()];
        prop_assume!(x.relative_resolution(t, r) < 1e-12);
        let lo = ap_value(x, p, t, r, &tol()).unwrap();
        let hi = ap_value(x, p + dp, t, r, &tol()).unwrap();
        prop_assert!(hi <= lo * (1.0 + 1e-9), "A_{} = {hi} > A_{p} = {lo}", p + dp);
    }

    #[test]
    fn ap_is_invariant_under_scaling_mu(k in 1u32..4, values in prop::collection::vec(0.1f64..10.0, 1..6),
                                        c in 0.01f64..100.0, t in 0.0f64..6.0, r in 0.01f64..4.0, p in 1.0f64..4.0) {
        let one = WeightFunction::constant(1.0).unwrap();
        let scaled: Vec<f64> = values.iter().map(|v| c * v).collect();
        let x = TreeSpace::new(k, one.clone(), WeightFunction::step(values, TailRule::Constant).unwrap()).unwrap();
        let y = TreeSpace::new(k, one, WeightFunction::step(scaled, TailRule::Constant).unwrap()).unwrap();
        let a = ap_value(&x, p, t, r, &tol()).unwrap();
        let b = ap_value(&y, p, t, r, &tol()).unwrap();
        prop_assert!(close(a, b, 1e-9), "{a} vs {b}");
        let da = doubling_ratio(&x, t, r, &tol()).unwrap();
        let db = doubling_ratio(&y, t, r, &tol()).unwrap();
        prop_assert!(close(da, db, 1e-9));
    }

    #[test]
    fn representation_does_not_matter(alpha in -0.9f64..2.0, t in 0.01f64..6.0, r in 0.01f64..4.0, p in 1.0f64..4.0) {
        let one = WeightFunction::constant(1.0).unwrap();
        let plain = TreeSpace::new(2, one.clone(), WeightFunction::power(alpha).unwrap()).unwrap();
        let split = WeightFunction::piecewise(
            vec![2.5],
            vec![WeightSpec::Power { alpha }, WeightSpec::Power { alpha }],
        ).unwrap();
        let split = TreeSpace::new(2, one, split).unwrap();
        let a = ap_value(&plain, p, t, r, &tol()).unwrap();
        let b = ap_value(&split, p, t, r, &tol()).unwrap();
        prop_assert!(close(a, b, 1e-8), "{a} vs {b}");
    }

    #[test]
    fn half_line_balls_are_intervals(idx in 0usize..64, t in 0.0f64..20.0, r in 0.001f64..10.0) {
        let spaces: Vec<TreeSpace> = catalog_spaces().into_iter().filter(|x| x.branching() == 1).collect();
        let x = &spaces[idx % spaces.len()];
        prop_assume!(x.relative_resolution(t, r) < 1e-12);
        let lo = x.ancestor_at(t, r).unwrap();
        let hi = x.descendant_at(t, r).unwrap();
        let direct = segment_mu(x, lo, hi, &tol()).unwrap();
        prop_assert!(close(ball_measure(x, t, r, &tol()).unwrap(), direct, 1e-9));
        prop_assert_eq!(branch_multiplicity(x, t, t + 7.5, false).unwrap(), 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn oracle_branches_agree(k in 2u32..4, level in 1u32..40, branch in 0u64..1000, r in 0.1f64..2.0, p in 1.0f64..4.0) {
        let x = TreeSpace::new(k, WeightFunction::constant(1.0).unwrap(), WeightFunction::truncated_reciprocal()).unwrap();
        let tree = DiscreteTree::build(&x, 6, 8).unwrap();
        let a = tree.node_on_branch(level, 0).unwrap();
        let b = tree.node_on_branch(level, branch).unwrap();
        prop_assert_eq!(tree.ball_measure(a, r).value, tree.ball_measure(b, r).value);
        prop_assert_eq!(
            tree.ap_value_along(p, a, r, 0).unwrap().value,
            tree.ap_value_along(p, b, r, branch.wrapping_mul(7)).unwrap().value
        );
    }

    #[test]
    fn weight_specs_round_trip(idx in 0usize..64) {
        let all = entries();
        let e = &all[idx % all.len()];
        for spec in [&e.lambda, &e.mu] {
            let text = serde_json::to_string(spec).unwrap();
            let back: WeightSpec = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(&back, spec);
        }
    }
}
