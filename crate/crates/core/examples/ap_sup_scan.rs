//! Supremum scans of `A_p`: a bounded far-from-root scan and a diverging full scan.

use aptree::ap_condition::{ap_sup, ApMode, ApParams};
use aptree::radial_weight::{Tolerance, WeightFunction};
use aptree::scan::{ScanDomain, SupEstimate};
use aptree::tree_geometry::TreeSpace;

fn show(label: &str, s: &SupEstimate) {
    println!("{label}: {:?}, estimate {:.6e} at {:?}", s.verdict, s.estimate, s.argmax);
    for e in &s.trace {
        println!(
            "  {:?} {}: {} cells, t ∈ [{:.3e}, {:.3e}], running sup {:.6e}",
            e.phase, e.index, e.cells, e.t_range[0], e.t_range[1], e.running_sup
        );
    }
}

fn main() -> aptree::Result<()> {
    let tol = Tolerance::default();
    let domain = ScanDomain::default();
    let one = WeightFunction::constant(1.0)?;
    let reciprocal = TreeSpace::new(1, one.clone(), WeightFunction::truncated_reciprocal())?;
    let quadratic = TreeSpace::new(1, one, WeightFunction::pure_power(2.0)?)?;

    let far = ap_sup(&reciprocal, &ApParams::new(2.0, ApMode::far(0.5))?, &domain, &tol)?;
    show("min{1,1/t}, r ≤ Λ(t)/2", &far);
    let wide = ap_sup(&reciprocal, &ApParams::new(2.0, ApMode::far(8.0))?, &domain, &tol)?;
    show("min{1,1/t}, r ≤ 8Λ(t)", &wide);
    let full = ap_sup(&quadratic, &ApParams::new(2.0, ApMode::Full)?, &domain, &tol)?;
    show("t², all balls", &full);
    Ok(())
}
