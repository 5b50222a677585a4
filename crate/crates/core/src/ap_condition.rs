//! The Muckenhoupt-type functionals `A_p(x, r)` and `A_1(x, r)` and their suprema.
//!
//! With `x̄^r` the ancestor of `x` at distance `r` and `x̲_r` its descendant,
//!
//! ```text
//! A_p(x, r) = μ(F(x̄^r, 2r)) / (2r) · [ (1/r) ∫_{[x, x̲_r]} (K^{j(w)-j(x)} μ(w)/λ(w))^{1/(1-p)} ds(w) ]^{p-1}
//! A_1(x, r) = μ(F(x̄^r, 2r)) / (2r) · ess sup_{[x, x̲_r]} λ(w) / (K^{j(w)-j(x)} μ(w))
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure_engine::halfball_measure;
use crate::radial_weight::{ess_extremum, integrate, Extremum, IntegrandSpec, Tolerance};
use crate::scan::{scan_sup, Region, ScanDomain, SupEstimate};
use crate::tree_geometry::{level_index, TreeSpace};

/// Which pairs `(x, r)` enter the supremum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ApMode {
    Full,
    FarFromRoot { c: f64 },
}

impl ApMode {
    pub fn far(c: f64) -> Self {
        ApMode::FarFromRoot { c }
    }

    pub fn region(self) -> Region {
        match self {
            ApMode::Full => Region::All,
            ApMode::FarFromRoot { c } => Region::FarFromRoot { c },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApParams {
    pub p: f64,
    pub mode: ApMode,
}

impl ApParams {
    pub fn new(p: f64, mode: ApMode) -> Result<Self> {
        check_p(p)?;
        if let ApMode::FarFromRoot { c } = mode {
            if !(c > 0.0) || !c.is_finite() {
                return Err(Error::InvalidParameter(format!("far-from-root constant c = {c}")));
            }
        }
        Ok(ApParams { p, mode })
    }
}

fn check_p(p: f64) -> Result<()> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("exponent p = {p} (need 1 ≤ p < ∞)")))
    }
}

fn check_tr(t: f64, r: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() || !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("need t ≥ 0 and r > 0, got t = {t}, r = {r}")));
    }
    Ok(())
}

/// `μ(F(x̄^r, 2r)) / (2r)`.
pub fn ap_numerator(space: &TreeSpace, t: f64, r: f64, tol: &Tolerance) -> Result<f64> {
    check_tr(t, r)?;
    let top = space.ancestor_at(t, r)?;
    Ok(halfball_measure(space, top, 2.0 * r, tol)? / (2.0 * r))
}

/// `(1/r) ∫_{[x, x̲_r]} (K^{j-j(x)} μ/λ)^{1/(1-p)} ds` for `p > 1`; `+∞` when divergent.
pub fn ap_bracket_mean(space: &TreeSpace, p: f64, t: f64, r: f64, tol: &Tolerance) -> Result<f64> {
    check_tr(t, r)?;
    let end = space.descendant_at(t, r)?;
    let kernel = IntegrandSpec::holder_kernel(space.mu(), space.lambda(), space.branching(), level_index(t), p)?;
    match integrate(&kernel, t, end, tol) {
        Ok(v) => Ok(v / r),
        Err(Error::Divergent { .. }) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

/// `A_p(x, r)` for `|x| = t`; `p = 1` is delegated to [`a1_value`].
pub fn ap_value(space: &TreeSpace, p: f64, t: f64, r: f64, tol: &Tolerance) -> Result<f64> {
    check_p(p)?;
    if p == 1.0 {
        return a1_value(space, t, r, tol);
    }
    let num = ap_numerator(space, t, r, tol)?;
    let mean = ap_bracket_mean(space, p, t, r, tol)?;
    Ok(num * mean.powf(p - 1.0))
}

/// `A_1(x, r)` for `|x| = t`.
pub fn a1_value(space: &TreeSpace, t: f64, r: f64, tol: &Tolerance) -> Result<f64> {
    let num = ap_numerator(space, t, r, tol)?;
    let end = space.descendant_at(t, r)?;
    let ratio = IntegrandSpec::new()
        .times(space.mu())
        .over(space.lambda())
        .with_multiplicity(space.branching(), level_index(t))
        .raised_to(-1.0)?;
    let sup = ess_extremum(&ratio, t, end, Extremum::Sup, tol)?;
    Ok(num * sup)
}

/// Supremum scan of `A_p` (or `A_1`) over the mode's region.
pub fn ap_sup(space: &TreeSpace, params: &ApParams, domain: &ScanDomain, tol: &Tolerance) -> Result<SupEstimate> {
    let params = ApParams::new(params.p, params.mode)?;
    let p = params.p;
    let f = move |t: f64, r: f64| ap_value(space, p, t, r, tol);
    scan_sup(space, domain, params.mode.region(), &f)
}
