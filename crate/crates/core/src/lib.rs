//! Ap-type weight conditions on radially weighted `K`-regular trees.
//!
//! A tree is given by its branching number `K`, a length density `λ` and a mass
//! density `μ`, both functions of the radial coordinate. The crate evaluates the
//! functionals `A_p(x, r)` and `A_1(x, r)`, scans their suprema, measures doubling
//! ratios, builds explicit Poincaré test functions, and classifies whether the
//! measure is `p`-admissible.
//!
//! Every capability has a runnable program under `examples/`:
//!
//! | example | module |
//! |---|---|
//! | `weights_and_quadrature` | [`radial_weight`] |
//! | `tree_geometry` | [`tree_geometry`] |
//! | `ball_measures` | [`measure_engine`] |
//! | `ap_functionals` | [`ap_condition`] |
//! | `ap_sup_scan` | [`scan`], [`ap_condition`] |
//! | `doubling_scan` | [`admissibility`] |
//! | `poincare_certificates` | [`admissibility`] |
//! | `classify_catalog` | [`admissibility`], [`catalog`] |
//! | `discrete_oracle` | [`oracle`] |
//! | `analyze_config` | [`cli`] |
//!
//! ```
//! use aptree::ap_condition::ap_value;
//! use aptree::radial_weight::{Tolerance, WeightFunction};
//! use aptree::tree_geometry::TreeSpace;
//!
//! let one = WeightFunction::constant(1.0).unwrap();
//! let line = TreeSpace::new(1, one.clone(), one).unwrap();
//! let v = ap_value(&line, 2.0, 5.0, 2.0, &Tolerance::default()).unwrap();
//! assert!((v - 1.0).abs() < 1e-12);
//! ```

pub mod admissibility;
pub mod ap_condition;
pub mod catalog;
pub mod cli;
pub mod error;
pub mod measure_engine;
pub mod oracle;
pub mod radial_weight;
pub mod scan;
pub mod tree_geometry;

pub use error::{Error, Result};
