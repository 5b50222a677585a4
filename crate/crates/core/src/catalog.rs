//! Built-in weighted trees with their expected behaviour under the default mode.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::radial_weight::{Interpolation, TailRule, WeightFunction, WeightSpec};
use crate::tree_geometry::TreeSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expected {
    Admissible,
    NotAdmissible,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatalogEntry {
    pub name: String,
    pub branching: u32,
    pub lambda: WeightSpec,
    pub mu: WeightSpec,
    /// Formula the entry is built from.
    pub provenance: String,
    pub summary: String,
    /// Label expected for every `p ≥ 1` under the default mode.
    pub expected: Expected,
}

impl CatalogEntry {
    pub fn space(&self) -> Result<TreeSpace> {
        TreeSpace::new(
            self.branching,
            WeightFunction::from_spec(&self.lambda)?,
            WeightFunction::from_spec(&self.mu)?,
        )
    }
}

fn one() -> WeightSpec {
    WeightSpec::Constant { value: 1.0 }
}

fn entry(
    name: &str,
    branching: u32,
    lambda: WeightSpec,
    mu: WeightSpec,
    provenance: &str,
    summary: &str,
    expected: Expected,
) -> CatalogEntry {
    CatalogEntry {
        name: name.to_string(),
        branching,
        lambda,
        mu,
        provenance: provenance.to_string(),
        summary: summary.to_string(),
        expected,
    }
}

/// The half-line with `λ ≡ 1` and `μ(t) = t^α`.
pub fn power(alpha: f64) -> Result<CatalogEntry> {
    if !(alpha > -1.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("power({alpha}) needs α > -1")));
    }
    Ok(entry(
        &format!("power({alpha})"),
        1,
        one(),
        WeightSpec::PurePower { alpha },
        "μ(x)=|x|^α, λ≡1, K=1",
        "pure power weight on the half-line",
        Expected::Admissible,
    ))
}

/// Every named entry, in listing order.
pub fn entries() -> Vec<CatalogEntry> {
    use Expected::*;
    let reciprocal = WeightSpec::TruncatedReciprocal;
    let mut out = vec![
        entry(
            "lebesgue-halfline",
            1,
            one(),
            one(),
            "λ≡1, μ≡1, K=1",
            "unweighted half-line",
            Admissible,
        ),
        entry(
            "truncated-reciprocal",
            1,
            one(),
            reciprocal.clone(),
            "μ(x)=min{1, x⁻¹}, λ≡1, K=1",
            "bounded half-balls far from the root, not doubling",
            NotAdmissible,
        ),
    ];
    for alpha in [2.0, 0.5, -0.5] {
        out.push(power(alpha).expect("valid exponent"));
    }
    out.extend([
        entry(
            "shifted-power",
            1,
            one(),
            WeightSpec::Power { alpha: 2.0 },
            "μ(x)=(1+|x|)², λ≡1, K=1",
            "power weight without a zero at the root",
            Admissible,
        ),
        entry(
            "exponential-mass",
            1,
            one(),
            WeightSpec::Exponential {
                base: std::f64::consts::E,
                beta: 1.0,
            },
            "μ(x)=e^|x|, λ≡1, K=1",
            "exponentially growing measure on the half-line",
            NotAdmissible,
        ),
        entry(
            "step-bounded",
            1,
            one(),
            WeightSpec::Step {
                values: vec![1.0, 3.0, 2.0],
                tail: TailRule::Constant,
            },
            "μ = 1, 3, 2, 2, … per unit edge, λ≡1, K=1",
            "step weight bounded above and below",
            Admissible,
        ),
        entry(
            "step-geometric",
            1,
            one(),
            WeightSpec::Step {
                values: vec![1.0],
                tail: TailRule::Geometric { ratio: 2.0 },
            },
            "μ = 2^n on (n, n+1], λ≡1, K=1",
            "geometrically growing step weight",
            NotAdmissible,
        ),
        entry(
            "exponential-metric",
            1,
            WeightSpec::Exponential {
                base: std::f64::consts::E,
                beta: 1.0,
            },
            WeightSpec::Exponential {
                base: std::f64::consts::E,
                beta: 1.0,
            },
            "λ(x)=μ(x)=e^|x|, K=1",
            "isometric to the unweighted half-line after reparametrisation",
            Admissible,
        ),
        entry(
            "tabulated-bump",
            1,
            one(),
            WeightSpec::Tabulated {
                knots: vec![(0.0, 1.0), (1.0, 2.0), (2.0, 0.5), (3.0, 1.0)],
                interpolation: Interpolation::PiecewiseLinear,
                tail: TailRule::Constant,
            },
            "μ linear through (0,1), (1,2), (2,0.5), (3,1), then 1; λ≡1, K=1",
            "tabulated bump, constant tail",
            Admissible,
        ),
        entry(
            "piecewise-mixed",
            1,
            one(),
            WeightSpec::Piecewise {
                breakpoints: vec![1.0],
                pieces: vec![WeightSpec::Constant { value: 2.0 }, WeightSpec::Power { alpha: 1.0 }],
            },
            "μ = 2 on [0,1], 1+|x| beyond; λ≡1, K=1",
            "mixed families joined by a jump",
            Admissible,
        ),
        entry(
            "binary-lebesgue",
            2,
            one(),
            one(),
            "λ≡1, μ≡1, K=2",
            "unweighted binary tree",
            NotAdmissible,
        ),
        entry(
            "binary-truncated-reciprocal",
            2,
            one(),
            reciprocal,
            "μ(x)=min{1, x⁻¹}, λ≡1, K=2",
            "decaying weight on the binary tree",
            NotAdmissible,
        ),
        entry(
            "ternary-power",
            3,
            one(),
            WeightSpec::Power { alpha: -1.0 },
            "μ(x)=(1+|x|)⁻¹, λ≡1, K=3",
            "decaying power weight on the ternary tree",
            NotAdmissible,
        ),
    ]);
    out
}

/// Find an entry by name; `power(α)` accepts any `α > -1`.
pub fn lookup(name: &str) -> Result<CatalogEntry> {
    let name = name.trim();
    if let Some(arg) = name.strip_prefix("power(").and_then(|s| s.strip_suffix(')')) {
        let alpha: f64 = arg
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("cannot parse exponent in {name:?}")))?;
        return power(alpha);
    }
    entries()
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::Config(format!("unknown catalog entry {name:?}")))
}

/// Human-readable listing, one line per entry plus the parametric family.
pub fn listing() -> String {
    let mut rows: Vec<(String, String, String)> = vec![(
        "power(α)".into(),
        "μ(x)=|x|^α, λ≡1, K=1, any α > -1".into(),
        "admissible".into(),
    )];
    for e in entries() {
        let expected = match e.expected {
            Expected::Admissible => "admissible",
            Expected::NotAdmissible => "not-admissible",
        };
        rows.push((e.name, e.provenance, expected.into()));
    }
    let width = rows.iter().map(|r| r.0.chars().count()).max().unwrap_or(0);
    let mut out = String::new();
    for (name, prov, exp) in rows {
        let pad = width - name.chars().count();
        out.push_str(&format!("{name}{}  {exp:<14}  {prov}\n", " ".repeat(pad)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_entry_builds() {
        let all = entries();
        assert!(all.len() >= 10);
        for e in &all {
            e.space().unwrap_or_else(|err| panic!("{}: {err}", e.name));
        }
        let mut names: Vec<_> = all.iter().map(|e| e.name.clone()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), all.len());
    }

    #[test]
    fn lookup_parses_powers() {
        let e = lookup("power(1.5)").unwrap();
        assert_eq!(e.mu, WeightSpec::PurePower { alpha: 1.5 });
        assert!(lookup("power(-2)").is_err());
        assert!(lookup("power(x)").is_err());
        assert!(lookup("nope").is_err());
        assert_eq!(lookup("lebesgue-halfline").unwrap().branching, 1);
    }

    #[test]
    fn listing_mentions_families() {
        let l = listing();
        for needle in ["lebesgue-halfline", "power(α)", "truncated-reciprocal", "min{1, x⁻¹}"] {
            assert!(l.contains(needle), "{needle}");
        }
    }
}
