//! The radially weighted `K`-regular tree `(X, d, μ)` seen through radial coordinates.
//!
//! Every vertex has `K` children, edges have unit Euclidean length and the metric
//! along a geodesic is `ds_λ = λ(s) ds`. Balls and half-balls depend on a point only
//! through its radial coordinate `t = |x|`, so most operations take `t` directly.

use crate::error::{Error, Result};
use crate::radial_weight::WeightFunction;

/// A point of the tree, identified by its radial coordinate. Vertices sit at integers.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct RadialPoint(f64);

impl RadialPoint {
    pub fn new(t: f64) -> Result<Self> {
        if t >= 0.0 && t.is_finite() {
            Ok(RadialPoint(t))
        } else {
            Err(Error::Domain(format!("radial coordinate {t}")))
        }
    }

    pub fn t(self) -> f64 {
        self.0
    }

    /// `j(x) = ⌈|x|⌉`; vertices carry the index of their parent edge.
    pub fn level_index(self) -> i64 {
        level_index(self.0)
    }

    pub fn is_vertex(self) -> bool {
        self.0.fract() == 0.0
    }
}

pub fn level_index(t: f64) -> i64 {
    t.ceil() as i64
}

/// Evidence that `Λ(t) → ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiameterCertificate {
    pub probe_t: f64,
    pub probe_length: f64,
}

/// Accuracy of the `Λ⁻¹` solver (relative, in metric units).
pub const INVERSION_TOL: f64 = 1e-12;

const PROBE_T: f64 = 1e6;
const PROBE_LENGTH: f64 = 1e3;

#[derive(Debug, Clone)]
pub struct TreeSpace {
    branching: u32,
    lambda: WeightFunction,
    mu: WeightFunction,
    diameter: DiameterCertificate,
}

impl TreeSpace {
    /// Build the space, rejecting `K = 0` and trees of finite diameter.
    pub fn new(branching: u32, lambda: WeightFunction, mu: WeightFunction) -> Result<Self> {
        if branching == 0 {
            return Err(Error::InvalidParameter("branching number K must be at least 1".into()));
        }
        let probe_length = lambda.integral(0.0, PROBE_T);
        if !lambda.tail_integral_diverges() || !(probe_length > PROBE_LENGTH) {
            return Err(Error::FiniteDiameter(format!(
                "Λ(∞) appears finite (Λ({PROBE_T:e}) = {probe_length:.6e})"
            )));
        }
        Ok(TreeSpace {
            branching,
            lambda,
            mu,
            diameter: DiameterCertificate {
                probe_t: PROBE_T,
                probe_length,
            },
        })
    }

    pub fn branching(&self) -> u32 {
        self.branching
    }

    pub fn lambda(&self) -> &WeightFunction {
        &self.lambda
    }

    pub fn mu(&self) -> &WeightFunction {
        &self.mu
    }

    pub fn diameter_certificate(&self) -> DiameterCertificate {
        self.diameter
    }

    pub fn point(&self, t: f64) -> Result<RadialPoint> {
        RadialPoint::new(t)
    }

    /// Relative precision with which a ball of radius `r` at `t` can be resolved:
    /// the float spacing near `t` against the radial step `r/λ(t)`.
    pub fn relative_resolution(&self, t: f64, r: f64) -> f64 {
        f64::EPSILON * t * self.lambda.value(t.max(f64::MIN_POSITIVE)) / r
    }

    /// `Λ(t) = ∫_0^t λ`, the metric distance from the root.
    pub fn metric_distance_to_root(&self, t: f64) -> f64 {
        self.lambda.integral(0.0, t)
    }

    /// `Λ(b) - Λ(a)` without cancellation.
    pub fn metric_length(&self, a: f64, b: f64) -> f64 {
        self.lambda.integral(a, b)
    }

    /// Radial coordinate `T ≥ t` with `Λ(T) - Λ(t) = r`.
    pub fn descendant_at(&self, t: f64, r: f64) -> Result<f64> {
        check_tr(t, r)?;
        if r == 0.0 {
            return Ok(t);
        }
        self.solve(t, r)
    }

    /// Radial coordinate of the point at metric distance `min(r, Λ(t))` above `t`.
    pub fn ancestor_at(&self, t: f64, r: f64) -> Result<f64> {
        check_tr(t, r)?;
        if r == 0.0 {
            return Ok(t);
        }
        let lt = self.metric_distance_to_root(t);
        if r >= lt {
            return Ok(0.0);
        }
        // Λ(t) - Λ(a) = r  ⇔  ∫_a^t λ = r
        self.solve_down(t, r)
    }

    /// Invert `s ↦ ∫_t^s λ = r` on `[t, ∞)`.
    fn solve(&self, t: f64, r: f64) -> Result<f64> {
        let g = |s: f64| self.lambda.integral(t, s) - r;
        let mut lo = t;
        let mut step = (r / self.lambda.value(t).max(f64::MIN_POSITIVE)).clamp(1e-12, 1.0);
        let mut hi = t + step;
        let mut iters = 0;
        while g(hi) < 0.0 {
            lo = hi;
            step *= 2.0;
            hi = t + step;
            iters += 1;
            if iters > 2100 || !hi.is_finite() {
                return Err(Error::SolverFailure(format!(
                    "no radial coordinate beyond t = {t} at metric distance {r}"
                )));
            }
        }
        self.newton_bisect(&g, lo, hi, r)
    }

    fn solve_down(&self, t: f64, r: f64) -> Result<f64> {
        let g = |a: f64| r - self.lambda.integral(a, t);
        self.newton_bisect(&g, 0.0, t, r)
    }

    /// Root of an increasing `g` on `[lo, hi]` with `g(lo) ≤ 0 ≤ g(hi)` and `g' = λ`.
    fn newton_bisect(&self, g: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, scale: f64) -> Result<f64> {
        let accept = INVERSION_TOL * scale.max(f64::MIN_POSITIVE);
        let tight = 8.0 * f64::EPSILON * scale.max(f64::MIN_POSITIVE);
        let mut best = (f64::INFINITY, 0.5 * (lo + hi));
        for end in [lo, hi] {
            let ge = g(end);
            if ge == 0.0 {
                return Ok(end);
            }
            if ge.abs() < best.0 {
                best = (ge.abs(), end);
            }
        }
        let mut x = 0.5 * (lo + hi);
        let mut collapsed = false;
        for _ in 0..400 {
            let gx = g(x);
            if gx.abs() < best.0 {
                best = (gx.abs(), x);
            }
            if gx.abs() <= tight {
                return Ok(x);
            }
            if gx < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(f64::MIN_POSITIVE) {
                collapsed = true;
                break;
            }
            let d = self.lambda.value(x);
            let newton = x - gx / d;
            x = if newton >= lo && newton <= hi && d.is_finite() && d > 0.0 && newton != x {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        if best.0 <= accept || collapsed {
            Ok(best.1)
        } else {
            Err(Error::SolverFailure(format!(
                "Λ inversion did not converge in [{lo}, {hi}]"
            )))
        }
    }
}

fn check_tr(t: f64, r: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("radial coordinate {t}")));
    }
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("radius {r}")));
    }
    Ok(())
}
