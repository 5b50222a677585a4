//! Point values of `A_p` and `A_1`.

use aptree::ap_condition::{a1_value, ap_numerator, ap_value};
use aptree::radial_weight::{Tolerance, WeightFunction};
use aptree::tree_geometry::TreeSpace;

fn main() -> aptree::Result<()> {
    let tol = Tolerance::default();
    let one = WeightFunction::constant(1.0)?;
    let reciprocal = TreeSpace::new(1, one.clone(), WeightFunction::truncated_reciprocal())?;
    let quadratic = TreeSpace::new(1, one.clone(), WeightFunction::pure_power(2.0)?)?;
    let binary = TreeSpace::new(2, one.clone(), one)?;

    println!("μ = min{{1,1/t}}:  A_2(10, 5) = {:.6}", ap_value(&reciprocal, 2.0, 10.0, 5.0, &tol)?);
    println!("                  A_1(10, 5) = {:.6}  (1.5 ln 3 = {:.6})", a1_value(&reciprocal, 10.0, 5.0, &tol)?, 1.5 * 3f64.ln());
    for p in [1.0, 1.5, 2.0, 4.0] {
        println!("μ = t²: A_{p}(0.01, 1) = {:.4}", ap_value(&quadratic, p, 0.01, 1.0, &tol)?);
    }
    println!("μ = t²: A_2(0, 1) = {}", ap_value(&quadratic, 2.0, 0.0, 1.0, &tol)?);
    for r in [1.0, 2.0, 4.0, 8.0] {
        println!(
            "binary: numerator μ(F)/2r at (0, {r}) = {:.3}, A_2 = {:.3}",
            ap_numerator(&binary, 0.0, r, &tol)?,
            ap_value(&binary, 2.0, 0.0, r, &tol)?
        );
    }
    Ok(())
}
