//! Measures of balls and half-balls, and integrals of radial profiles over half-balls.
//!
//! A branch leaving a vertex at level `n` contributes `K^{⌈s⌉ - n - 1}` copies of the
//! radial slice at `s`; the half-ball below a point at `t` contributes `K^{⌈s⌉ - ⌈t⌉}`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::radial_weight::quadrature;
use crate::radial_weight::{integrate, IntegrandSpec, Tolerance};
use crate::tree_geometry::{level_index, TreeSpace};

/// Level `j0` such that the number of descendants at depth `s` is `K^{⌈s⌉ - j0}`.
///
/// `restricted` applies at a vertex: only one child edge is followed.
pub fn anchor_level(t: f64, restricted: bool) -> i64 {
    if restricted {
        t.floor() as i64 + 1
    } else {
        level_index(t)
    }
}

/// `K^{⌈s⌉ - j0}`: how many radial copies of depth `s ≥ t` lie below the point `t`.
pub fn branch_multiplicity(space: &TreeSpace, anchor_t: f64, s: f64, restricted: bool) -> Result<f64> {
    if !(anchor_t >= 0.0) || !(s >= anchor_t) || !s.is_finite() {
        return Err(Error::Domain(format!("multiplicity at s = {s} below t = {anchor_t}")));
    }
    let e = level_index(s) - anchor_level(anchor_t, restricted);
    Ok((space.branching() as f64).powi(e.max(0) as i32))
}

fn mass_spec(space: &TreeSpace, j0: i64) -> IntegrandSpec<'_> {
    IntegrandSpec::weight(space.mu()).with_multiplicity(space.branching(), j0)
}

/// `μ(F(x, r))` for `|x| = t`: all descendants within metric distance `r`.
pub fn halfball_measure(space: &TreeSpace, t: f64, r: f64, tol: &Tolerance) -> Result<f64> {
    let end = space.descendant_at(t, r)?;
    integrate(&mass_spec(space, level_index(t)), t, end, tol)
}

/// Half-ball at the vertex of level `n`, restricted to one child edge.
pub fn directed_halfball_measure(space: &TreeSpace, n: u64, r: f64, tol: &Tolerance) -> Result<f64> {
    let t = n as f64;
    let end = space.descendant_at(t, r)?;
    integrate(&mass_spec(space, n as i64 + 1), t, end, tol)
}

/// Mass in the radial window `(a, b)`, counting every point with multiplicity
/// `K^{⌈s⌉ - ⌈a⌉}` (the descendants of one point at `a`).
pub fn descendant_mass(space: &TreeSpace, a: f64, b: f64, restricted: bool, tol: &Tolerance) -> Result<f64> {
    integrate(&mass_spec(space, anchor_level(a, restricted)), a, b, tol)
}

/// `μ` of the geodesic segment between radial coordinates `a < b`.
pub fn segment_mu(space: &TreeSpace, a: f64, b: f64, tol: &Tolerance) -> Result<f64> {
    integrate(&IntegrandSpec::weight(space.mu()), a, b, tol)
}

/// Mass of the side branch leaving the path at vertex `vertex`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SideBranch {
    pub vertex: u64,
    pub remaining_radius: f64,
    pub branches: u32,
    pub measure: f64,
}

/// `μ(B(x, r))` split into its geometric pieces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallDecomposition {
    pub t: f64,
    pub r: f64,
    /// Radial coordinate of the topmost ancestor reached.
    pub top: f64,
    pub ancestor_segment: f64,
    pub halfball: f64,
    pub side_branches: Vec<SideBranch>,
    /// Mass in the sibling subtrees of the root when `r > Λ(t)`.
    pub root_overflow: f64,
}

impl BallDecomposition {
    pub fn total(&self) -> f64 {
        self.ancestor_segment
            + self.halfball
            + self.side_branches.iter().map(|b| b.measure).sum::<f64>()
            + self.root_overflow
    }
}

pub fn ball_decomposition(space: &TreeSpace, t: f64, r: f64, tol: &Tolerance) -> Result<BallDecomposition> {
    let halfball = halfball_measure(space, t, r, tol)?;
    let mut out = BallDecomposition {
        t,
        r,
        top: t,
        ancestor_segment: 0.0,
        halfball,
        side_branches: Vec::new(),
        root_overflow: 0.0,
    };
    if t == 0.0 {
        return Ok(out);
    }
    let top = space.ancestor_at(t, r)?;
    out.top = top;
    out.ancestor_segment = segment_mu(space, top, t, tol)?;
    let k = space.branching();
    if k == 1 {
        return Ok(out);
    }
    let lt = space.metric_distance_to_root(t);
    let first = top.floor() as u64 + 1;
    let last = t.ceil() as u64;
    for n in first..last {
        let rho = r - space.metric_length(n as f64, t);
        if rho <= 0.0 {
            continue;
        }
        let m = directed_halfball_measure(space, n, rho, tol)?;
        out.side_branches.push(SideBranch {
            vertex: n,
            remaining_radius: rho,
            branches: k - 1,
            measure: (k - 1) as f64 * m,
        });
    }
    if r > lt {
        out.root_overflow = (k - 1) as f64 * directed_halfball_measure(space, 0, r - lt, tol)?;
    }
    Ok(out)
}

/// `μ(B(x, r))` for `|x| = t`.
pub fn ball_measure(space: &TreeSpace, t: f64, r: f64, tol: &Tolerance) -> Result<f64> {
    Ok(ball_decomposition(space, t, r, tol)?.total())
}

/// A function of the radial coordinate, with its non-smooth abscissae.
pub trait RadialProfile: Sync {
    fn value(&self, s: f64) -> f64;

    fn breakpoints(&self, _a: f64, _b: f64) -> Vec<f64> {
        Vec::new()
    }
}

impl<F: Fn(f64) -> f64 + Sync> RadialProfile for F {
    fn value(&self, s: f64) -> f64 {
        self(s)
    }
}

/// `∫_{F(x, r)} u(|y|) dμ(y)` for `|x| = anchor_t`. With `restricted`, only one
/// child edge of a vertex anchor is followed.
pub fn integrate_profile_on_halfball(
    space: &TreeSpace,
    profile: &dyn RadialProfile,
    anchor_t: f64,
    r: f64,
    restricted: bool,
    tol: &Tolerance,
) -> Result<f64> {
    let end = space.descendant_at(anchor_t, r)?;
    if end == anchor_t {
        return Ok(0.0);
    }
    let spec = mass_spec(space, anchor_level(anchor_t, restricted));
    let mut pts = spec.pieces(anchor_t, end);
    pts.extend(profile.breakpoints(anchor_t, end).into_iter().filter(|&x| anchor_t < x && x < end));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let f = |s: f64| profile.value(s) * spec.value(s);
    Ok(quadrature::integrate_pieces(&f, &pts, spec.exponent_at_zero(), tol)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial_weight::WeightFunction;

    fn lebesgue(k: u32) -> TreeSpace {
        let one = WeightFunction::constant(1.0).unwrap();
        TreeSpace::new(k, one.clone(), one).unwrap()
    }

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn binary_tree_hand_values() {
        let x = lebesgue(2);
        assert!((ball_measure(&x, 1.5, 1.0, &tol()).unwrap() - 3.0).abs() < 1e-12);
        assert!((ball_measure(&x, 1.5, 0.5, &tol()).unwrap() - 1.0).abs() < 1e-12);
        assert!((halfball_measure(&x, 0.0, 2.0, &tol()).unwrap() - 6.0).abs() < 1e-12);
        assert!((halfball_measure(&x, 0.5, 1.0, &tol()).unwrap() - 1.5).abs() < 1e-12);
        assert!((directed_halfball_measure(&x, 1, 1.0, &tol()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn root_overflow_counts_sibling_subtrees() {
        // ball at t = 0.5, r = 1: ancestor 0.5, halfball 1.5, other root child 1·(s ∈ (0, 0.5]) = 0.5
        let x = lebesgue(2);
        let d = ball_decomposition(&x, 0.5, 1.0, &tol()).unwrap();
        assert!((d.root_overflow - 0.5).abs() < 1e-12);
        assert!((d.total() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn half_line_is_an_interval() {
        let x = lebesgue(1);
        assert!((ball_measure(&x, 3.0, 1.0, &tol()).unwrap() - 2.0).abs() < 1e-12);
        assert!((ball_measure(&x, 3.0, 5.0, &tol()).unwrap() - 8.0).abs() < 1e-12);
        assert_eq!(branch_multiplicity(&x, 1.0, 9.0, false).unwrap(), 1.0);
    }

    #[test]
    fn multiplicities() {
        let x = lebesgue(3);
        assert_eq!(branch_multiplicity(&x, 1.0, 2.5, false).unwrap(), 9.0);
        assert_eq!(branch_multiplicity(&x, 1.0, 2.5, true).unwrap(), 3.0);
        assert_eq!(branch_multiplicity(&x, 1.2, 1.7, false).unwrap(), 1.0);
        assert!(branch_multiplicity(&x, 2.0, 1.0, false).is_err());
    }

    #[test]
    fn profile_integral_matches_closed_form() {
        let x = lebesgue(2);
        // ∫_{F(0.5, 1)} s dμ = ∫_{0.5}^{1} s ds + 2 ∫_1^{1.5} s ds
        let v = integrate_profile_on_halfball(&x, &|s: f64| s, 0.5, 1.0, false, &tol()).unwrap();
        assert!((v - (0.375 + 2.0 * 0.625)).abs() < 1e-12);
    }
}
