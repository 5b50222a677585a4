//! Metric distances and the inversion of `Λ` on a tree with a growing length density.

use aptree::radial_weight::WeightFunction;
use aptree::tree_geometry::TreeSpace;

fn main() -> aptree::Result<()> {
    let lambda = WeightFunction::exponential(std::f64::consts::E, 1.0)?;
    let mu = WeightFunction::constant(1.0)?;
    let space = TreeSpace::new(2, lambda, mu)?;
    println!("diameter probe: {:?}", space.diameter_certificate());

    for t in [0.0, 0.5, 1.0, 2.5] {
        let x = space.point(t)?;
        let down = space.descendant_at(t, 1.0)?;
        let up = space.ancestor_at(t, 1.0)?;
        println!(
            "t = {t:<4} level {} vertex {:<5} Λ(t) = {:<9.5} descendant at metric 1: {down:.6}  ancestor: {up:.6}",
            x.level_index(),
            x.is_vertex(),
            space.metric_distance_to_root(t)
        );
    }

    // a finite-diameter metric is rejected
    let short = WeightFunction::power(-2.0)?;
    let err = TreeSpace::new(2, short, WeightFunction::constant(1.0)?).unwrap_err();
    println!("λ = (1+t)^-2: {err}");
    Ok(())
}
