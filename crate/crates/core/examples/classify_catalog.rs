//! Classify every catalog entry for a few exponents.

use aptree::admissibility::{classify, ClassifyOptions};
use aptree::catalog::entries;

fn main() -> aptree::Result<()> {
    let ps: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let ps = if ps.is_empty() { vec![1.0, 2.0] } else { ps };
    println!("{:<28} {:>4}  {:<15} {:<15} {:>12}  evidence", "entry", "p", "label", "expected", "C_A");
    for e in entries() {
        let space = e.space()?;
        for &p in &ps {
            let v = classify(&space, p, &ClassifyOptions::default())?;
            println!(
                "{:<28} {:>4}  {:<15} {:<15} {:>12.4e}  {}",
                e.name,
                p,
                format!("{:?}", v.classification),
                format!("{:?}", e.expected),
                v.ap_scan.estimate,
                if v.evidence_agrees { "agrees" } else { "disagrees" }
            );
        }
    }
    Ok(())
}
