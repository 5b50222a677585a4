//! Ball and half-ball measures, with the geometric decomposition of a ball.

use aptree::measure_engine::{ball_decomposition, halfball_measure};
use aptree::radial_weight::{Tolerance, WeightFunction};
use aptree::tree_geometry::TreeSpace;

fn main() -> aptree::Result<()> {
    let tol = Tolerance::default();
    let one = WeightFunction::constant(1.0)?;
    let binary = TreeSpace::new(2, one.clone(), one)?;

    for (t, r) in [(1.5, 0.5), (1.5, 1.0), (0.5, 1.0), (3.0, 2.5)] {
        let d = ball_decomposition(&binary, t, r, &tol)?;
        println!("B({t}, {r}) = {:.6}", d.total());
        println!("  ancestor segment {:.4}, half-ball {:.4}, root overflow {:.4}", d.ancestor_segment, d.halfball, d.root_overflow);
        for b in &d.side_branches {
            println!(
                "  side branches at vertex {}: {} × radius {:.3} -> {:.4}",
                b.vertex, b.branches, b.remaining_radius, b.measure
            );
        }
    }
    println!("F(0, 2) = {}", halfball_measure(&binary, 0.0, 2.0, &tol)?);
    Ok(())
}
