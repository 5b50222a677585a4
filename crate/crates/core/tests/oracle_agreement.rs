//! The discrete tree against the continuum engine.

use aptree::admissibility::{poincare_certificate, EpsilonRule};
use aptree::ap_condition::ap_value;
use aptree::measure_engine::ball_measure;
use aptree::oracle::DiscreteTree;
use aptree::radial_weight::{Tolerance, WeightFunction};
use aptree::tree_geometry::TreeSpace;

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs())
}

#[test]
fn constant_weight_certificates_agree() {
    let tol = Tolerance::default();
    let one = WeightFunction::constant(1.0).unwrap();
    let x = TreeSpace::new(2, one.clone(), one).unwrap();
    let tree = DiscreteTree::build(&x, 8, 32).unwrap();
    let v = tree.node_at(2.0).unwrap();
    for r in [1.0, 2.0, 4.0] {
        let d = tree.certificate(2.0, v, r, 0.01).unwrap();
        let c = poincare_certificate(&x, 2.0, 2.0, r, EpsilonRule::default(), &tol).unwrap();
        assert!(!d.truncated);
        assert!(close(d.ball_measure, c.ball_measure, 1e-9), "r = {r}");
        assert!(close(d.implied_bound, c.implied_bound, 1e-2), "r = {r}: {} vs {}", d.implied_bound, c.implied_bound);
    }
}

#[test]
fn decaying_weight_converges_under_refinement() {
    let tol = Tolerance::default();
    let x = TreeSpace::new(
        2,
        WeightFunction::constant(1.0).unwrap(),
        WeightFunction::truncated_reciprocal(),
    )
    .unwrap();
    let (t, r, p) = (3.0, 1.5, 2.0);
    let ball = ball_measure(&x, t, r, &tol).unwrap();
    let ap = ap_value(&x, p, t, r, &tol).unwrap();
    let mut last_err = f64::INFINITY;
    for m in [4, 16, 64] {
        let tree = DiscreteTree::build(&x, 6, m).unwrap();
        let v = tree.node_at(t).unwrap();
        let b = tree.ball_measure(v, r);
        assert!(!b.truncated);
        let err = (b.value - ball).abs() / ball;
        assert!(err <= last_err * 1.01, "M = {m}: {err} after {last_err}");
        last_err = err;
        let a = tree.ap_value(p, v, r).unwrap().value;
        assert!(close(a, ap, 0.05), "M = {m}: {a} vs {ap}");
    }
    assert!(last_err < 1e-3, "{last_err}");
}
