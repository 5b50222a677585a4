//! Doubling ratios and their supremum scan.

use aptree::admissibility::{doubling_ratio, doubling_sup};
use aptree::radial_weight::{Tolerance, WeightFunction};
use aptree::scan::ScanDomain;
use aptree::tree_geometry::TreeSpace;

fn main() -> aptree::Result<()> {
    let tol = Tolerance::default();
    let one = WeightFunction::constant(1.0)?;
    let reciprocal = TreeSpace::new(1, one.clone(), WeightFunction::truncated_reciprocal())?;
    let line = TreeSpace::new(1, one.clone(), one)?;

    for k in [5, 10] {
        let t = (k as f64).exp();
        let ratio = doubling_ratio(&reciprocal, t, t / 2.0, &tol)?;
        println!("t = e^{k}: μ(B(x,t))/μ(B(x,t/2)) = {ratio:.6}, (1 + ln 2t)/ln 3 = {:.6}", (1.0 + (2.0 * t).ln()) / 3f64.ln());
    }
    let d = doubling_sup(&line, &ScanDomain::default(), &tol)?;
    println!("half-line: {:?}, sup {:.9}", d.verdict, d.estimate);
    let d = doubling_sup(&reciprocal, &ScanDomain::default(), &tol)?;
    println!("min{{1,1/t}}: {:?}, running sups {:?}", d.verdict, d.stage_sups());
    Ok(())
}
