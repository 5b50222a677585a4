//! Explicit Poincaré test functions and the lower bounds they give for `C_P`.

use aptree::admissibility::{poincare_certificate, root_poincare_certificate, EpsilonRule};
use aptree::radial_weight::{Tolerance, WeightFunction};
use aptree::tree_geometry::TreeSpace;

fn main() -> aptree::Result<()> {
    let tol = Tolerance::default();
    let one = WeightFunction::constant(1.0)?;
    let line = TreeSpace::new(1, one.clone(), one.clone())?;
    let binary = TreeSpace::new(2, one.clone(), one)?;

    let c = poincare_certificate(&line, 2.0, 100.0, 4.0, EpsilonRule::default(), &tol)?;
    println!("half-line p=2: lhs {:.6} rhs {:.6} bound {:.9} (105/256 = {:.9})", c.lhs, c.rhs, c.implied_bound, 105.0 / 256.0);
    let c = poincare_certificate(&line, 1.0, 100.0, 4.0, EpsilonRule::default(), &tol)?;
    println!("half-line p=1: sublevel set {:?}, bound {:.9}", c.sublevel_set, c.implied_bound);
    let c = root_poincare_certificate(&line, 2.0, 3.0, &tol)?;
    println!("root ball p=2: bound {:.9}", c.implied_bound);
    for r in [1.0, 2.0, 4.0] {
        let c = poincare_certificate(&binary, 2.0, 2.0, r, EpsilonRule::default(), &tol)?;
        println!(
            "binary vertex 2, r = {r}: μ(B) {:.4}, E1 {:.4}, E2 {:.4}, bound {:.6}",
            c.ball_measure, c.e1_measure, c.e2_measure, c.implied_bound
        );
    }
    Ok(())
}
