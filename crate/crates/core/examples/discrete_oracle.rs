//! Brute-force discrete trees against the continuum formulas.

use aptree::ap_condition::ap_value;
use aptree::catalog::lookup;
use aptree::measure_engine::ball_measure;
use aptree::oracle::DiscreteTree;
use aptree::radial_weight::Tolerance;

fn main() -> aptree::Result<()> {
    let tol = Tolerance::default();
    for (name, t, r) in [("binary-lebesgue", 1.5, 1.0), ("truncated-reciprocal", 8.0, 4.0), ("binary-truncated-reciprocal", 2.0, 1.5)] {
        let space = lookup(name)?.space()?;
        let ball = ball_measure(&space, t, r, &tol)?;
        let ap = ap_value(&space, 2.0, t, r, &tol)?;
        println!("{name}: continuum ball {ball:.6}, A_2 {ap:.6}");
        for m in [8, 16, 32] {
            let tree = DiscreteTree::build(&space, 12, m)?;
            let v = tree.node_at(t)?;
            let b = tree.ball_measure(v, r);
            let a = tree.ap_value(2.0, v, r)?;
            println!(
                "  M = {m:<2} ({:>7} segments): ball {:.6} (err {:.2e}), A_2 {:.6} (err {:.2e}){}",
                tree.segment_count(),
                b.value,
                (b.value - ball).abs(),
                a.value,
                (a.value - ap).abs(),
                if b.truncated { ", truncated" } else { "" }
            );
        }
    }
    Ok(())
}
