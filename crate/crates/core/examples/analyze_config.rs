//! Run the `analyze` pipeline on a JSON config and print the headline of the report.
//!
//! `cargo run --example analyze_config -- crates/core/examples/configs/truncated_reciprocal.json`

use aptree::cli::{analyze, RunConfig};

fn main() -> aptree::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/truncated_reciprocal.json").into());
    let config = RunConfig::load(path.as_ref())?;
    let report = analyze(&config)?;
    println!("classification {:?}", report.classification);
    println!("C_A estimate {:.6e} at {:?}", report.c_a_estimate, report.argmax);
    println!("doubling scan {:?}, max {:.4e}", report.verdict.doubling.verdict, report.verdict.doubling_max);
    for w in &report.verdict.witnesses {
        println!("  witness t = {:.3e}, r = {:.3e}: A_p {:.3e}, doubling {:?}", w.t, w.r, w.ap_value, w.doubling_ratio);
    }
    for n in &report.verdict.notes {
        println!("note: {n}");
    }
    Ok(())
}
