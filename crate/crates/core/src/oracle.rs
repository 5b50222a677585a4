//! Brute-force ground truth on explicitly materialised, discretised trees.
//!
//! Each unit edge is split into `M` segments carrying midpoint samples of `λ` and `μ`.
//! Nodes, parents and children are stored explicitly, so every query walks real
//! branches instead of using radial symmetry.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::tree_geometry::TreeSpace;

/// Default cap on the number of segments.
pub const DEFAULT_BUDGET: u64 = 2_000_000;

/// Node handle.
pub type NodeId = u32;

const ROOT: NodeId = 0;

#[derive(Debug, Clone)]
pub struct DiscreteTree {
    branching: u32,
    depth: u32,
    subdivisions: u32,
    parent: Vec<NodeId>,
    child_start: Vec<NodeId>,
    child_count: Vec<u32>,
    /// Radial index `k`: the node sits at `k / M`.
    radial: Vec<u32>,
    /// Weights of the segment ending at radial index `k` (index 0 unused).
    lam_bar: Vec<f64>,
    mu_bar: Vec<f64>,
}

/// A discrete measurement with a flag raised when the ball reached the depth limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscreteValue {
    pub value: f64,
    pub truncated: bool,
}

/// Number of segments of a tree with `K`, `D`, `M`: `Σ_{n<D} K^{n+1} M`.
pub fn segment_count(branching: u32, depth: u32, subdivisions: u32) -> u128 {
    let mut total: u128 = 0;
    let mut level: u128 = 1;
    for _ in 0..depth {
        level = level.saturating_mul(branching as u128);
        total = total.saturating_add(level.saturating_mul(subdivisions as u128));
    }
    total
}

impl DiscreteTree {
    pub fn build(space: &TreeSpace, depth: u32, subdivisions: u32) -> Result<Self> {
        Self::build_with_budget(space, depth, subdivisions, DEFAULT_BUDGET)
    }

    pub fn build_with_budget(space: &TreeSpace, depth: u32, subdivisions: u32, budget: u64) -> Result<Self> {
        if depth == 0 || subdivisions == 0 {
            return Err(Error::InvalidParameter("depth and subdivisions must be at least 1".into()));
        }
        let k = space.branching();
        let needed = segment_count(k, depth, subdivisions);
        if needed > budget as u128 {
            return Err(Error::BudgetExceeded {
                needed: needed.min(u64::MAX as u128) as u64,
                budget,
            });
        }
        let m = subdivisions;
        let h = 1.0 / m as f64;
        let levels = (depth * m) as usize;
        let mut lam_bar = vec![0.0; levels + 1];
        let mut mu_bar = vec![0.0; levels + 1];
        for i in 1..=levels {
            let mid = (i as f64 - 0.5) * h;
            lam_bar[i] = space.lambda().value(mid);
            mu_bar[i] = space.mu().value(mid);
            if !(lam_bar[i] > 0.0 && mu_bar[i] > 0.0) || !(lam_bar[i].is_finite() && mu_bar[i].is_finite()) {
                return Err(Error::InvalidWeight(format!("segment weight at s = {mid} is not positive and finite")));
            }
        }
        let n = needed as usize + 1;
        let mut parent = Vec::with_capacity(n);
        let mut radial = Vec::with_capacity(n);
        let mut child_start = Vec::with_capacity(n);
        let mut child_count = Vec::with_capacity(n);
        parent.push(NodeId::MAX);
        radial.push(0u32);
        let mut head = 0usize;
        while head < parent.len() {
            let kk = radial[head];
            let count = if kk as usize >= levels {
                0
            } else if kk % m == 0 {
                k
            } else {
                1
            };
            child_start.push(parent.len() as NodeId);
            child_count.push(count);
            for _ in 0..count {
                parent.push(head as NodeId);
                radial.push(kk + 1);
            }
            head += 1;
        }
        Ok(DiscreteTree {
            branching: k,
            depth,
            subdivisions,
            parent,
            child_start,
            child_count,
            radial,
            lam_bar,
            mu_bar,
        })
    }

    pub fn branching(&self) -> u32 {
        self.branching
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn subdivisions(&self) -> u32 {
        self.subdivisions
    }

    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    pub fn segment_count(&self) -> usize {
        self.parent.len() - 1
    }

    pub fn root(&self) -> NodeId {
        ROOT
    }

    pub fn radial_coordinate(&self, v: NodeId) -> f64 {
        self.radial[v as usize] as f64 / self.subdivisions as f64
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        let p = self.parent[v as usize];
        (p != NodeId::MAX).then_some(p)
    }

    pub fn children(&self, v: NodeId) -> impl Iterator<Item = NodeId> {
        let s = self.child_start[v as usize];
        s..s + self.child_count[v as usize]
    }

    fn is_leaf(&self, v: NodeId) -> bool {
        self.child_count[v as usize] == 0
    }

    fn h(&self) -> f64 {
        1.0 / self.subdivisions as f64
    }

    /// Metric length of the segment from `parent(v)` to `v`.
    fn seg_len(&self, v: NodeId) -> f64 {
        self.lam_bar[self.radial[v as usize] as usize] * self.h()
    }

    /// Mass of the segment from `parent(v)` to `v`.
    fn seg_mass(&self, v: NodeId) -> f64 {
        self.mu_bar[self.radial[v as usize] as usize] * self.h()
    }

    /// Level index `⌈s⌉` of the node `v`, which is also that of the segment ending at `v`.
    fn seg_level(&self, v: NodeId) -> i64 {
        (self.radial[v as usize] as i64 + self.subdivisions as i64 - 1) / self.subdivisions as i64
    }

    /// Node at radial index `k` reached from the root choosing, at the `i`-th
    /// vertex passed, the child given by the `i`-th base-`K` digit of `branch`.
    pub fn node_on_branch(&self, k: u32, branch: u64) -> Result<NodeId> {
        if k > self.depth * self.subdivisions {
            return Err(Error::Domain(format!("radial index {k} below the depth limit")));
        }
        let mut v = ROOT;
        let mut digits = branch;
        for _ in 0..k {
            let count = self.child_count[v as usize];
            let choice = if count > 1 {
                let c = (digits % count as u64) as u32;
                digits /= count as u64;
                c
            } else {
                0
            };
            v = self.child_start[v as usize] + choice;
        }
        Ok(v)
    }

    /// Node at radial coordinate `t` on the first branch.
    pub fn node_at(&self, t: f64) -> Result<NodeId> {
        let k = t * self.subdivisions as f64;
        if (k - k.round()).abs() > 1e-9 {
            return Err(Error::Domain(format!("t = {t} is not a multiple of 1/{}", self.subdivisions)));
        }
        self.node_on_branch(k.round() as u32, 0)
    }

    /// Total mass within metric distance `r` of `origin`, never re-entering `from`,
    /// starting with `dist` already used. Returns (mass, truncated).
    fn explore(&self, origin: NodeId, from: Option<NodeId>, dist: f64, r: f64, down_only: bool) -> (f64, bool) {
        let mut mass = 0.0;
        let mut truncated = false;
        let mut stack = vec![(origin, from, dist)];
        while let Some((u, prev, d)) = stack.pop() {
            if self.is_leaf(u) && d < r {
                truncated = true;
            }
            let mut visit = |child_side: NodeId, next: NodeId, stack: &mut Vec<(NodeId, Option<NodeId>, f64)>| {
                let len = self.seg_len(child_side);
                let m = self.seg_mass(child_side);
                if d + len <= r {
                    mass += m;
                    stack.push((next, Some(u), d + len));
                } else if r > d {
                    mass += m * (r - d) / len;
                }
            };
            if !down_only {
                if let Some(p) = self.parent(u) {
                    if Some(p) != prev {
                        visit(u, p, &mut stack);
                    }
                }
            }
            for c in self.children(u) {
                if Some(c) != prev {
                    visit(c, c, &mut stack);
                }
            }
        }
        (mass, truncated)
    }

    /// `μ(B(v, r))` by traversal of explicit branches.
    pub fn ball_measure(&self, v: NodeId, r: f64) -> DiscreteValue {
        let (value, truncated) = self.explore(v, None, 0.0, r, false);
        DiscreteValue { value, truncated }
    }

    /// Mass of the descendants within `radius` of the point lying `offset` above `v`
    /// inside the segment ending at `v`.
    fn downward_mass(&self, v: NodeId, offset: f64, radius: f64) -> (f64, bool) {
        let mut mass = 0.0;
        if offset > 0.0 {
            let density = self.mu_bar[self.radial[v as usize] as usize] / self.lam_bar[self.radial[v as usize] as usize];
            mass += density * offset.min(radius);
        }
        if radius <= offset {
            return (mass, false);
        }
        let (m, tr) = self.explore(v, None, offset, radius, true);
        (mass + m, tr)
    }

    /// The point at metric distance `min(r, d(0, v))` above `v`, as (node, offset above node).
    fn ancestor(&self, v: NodeId, r: f64) -> (NodeId, f64) {
        let mut cur = v;
        let mut remaining = r;
        while let Some(p) = self.parent(cur) {
            let len = self.seg_len(cur);
            if remaining < len {
                return (cur, remaining);
            }
            remaining -= len;
            cur = p;
        }
        (ROOT, 0.0)
    }

    /// `A_p(v, r)` with both factors as explicit segment sums; the bracket follows
    /// the descending branch `branch` (base-`K` child choices below `v`).
    pub fn ap_value_along(&self, p: f64, v: NodeId, r: f64, branch: u64) -> Result<DiscreteValue> {
        if !(p >= 1.0) || !(r > 0.0) {
            return Err(Error::InvalidParameter(format!("p = {p}, r = {r}")));
        }
        let (top, offset) = self.ancestor(v, r);
        let (num_mass, tr1) = self.downward_mass(top, offset, 2.0 * r);
        let num = num_mass / (2.0 * r);
        let jx = self.seg_level(v);
        let k = self.branching as f64;
        let mut cur = v;
        let mut walked = 0.0;
        let mut acc = 0.0;
        let mut sup = 0.0f64;
        let mut digits = branch;
        let mut truncated = tr1;
        while walked < r {
            if self.is_leaf(cur) {
                truncated = true;
                break;
            }
            let count = self.child_count[cur as usize];
            let choice = if count > 1 {
                let c = (digits % count as u64) as u32;
                digits /= count as u64;
                c
            } else {
                0
            };
            let next = self.child_start[cur as usize] + choice;
            let len = self.seg_len(next).min(r - walked);
            let idx = self.radial[next as usize] as usize;
            let f = k.powi((self.seg_level(next) - jx) as i32) * self.mu_bar[idx] / self.lam_bar[idx];
            if p == 1.0 {
                sup = sup.max(1.0 / f);
            } else {
                acc += f.powf(1.0 / (1.0 - p)) * len;
            }
            walked += len;
            cur = next;
        }
        let value = if p == 1.0 { num * sup } else { num * (acc / r).powf(p - 1.0) };
        Ok(DiscreteValue { value, truncated })
    }

    pub fn ap_value(&self, p: f64, v: NodeId, r: f64) -> Result<DiscreteValue> {
        self.ap_value_along(p, v, r, 0)
    }

    /// Poincaré test function of the continuum certificate realised on the discrete tree.
    pub fn certificate(&self, p: f64, v: NodeId, r: f64, eps_fraction: f64) -> Result<DiscreteCertificate> {
        if !(p >= 1.0) || !(r > 0.0) {
            return Err(Error::InvalidParameter(format!("p = {p}, r = {r}")));
        }
        let k = self.branching as f64;
        let jx = self.seg_level(v);
        let vertex = self.radial[v as usize] % self.subdivisions == 0;
        let half = 0.5 * r;
        let f_of = |c: NodeId| {
            let idx = self.radial[c as usize] as usize;
            k.powi((self.seg_level(c) - jx) as i32) * self.mu_bar[idx] / self.lam_bar[idx]
        };
        // radial profile along the first branch: (start distance, length, density)
        let mut path = Vec::new();
        let mut cur = v;
        let mut d = 0.0;
        while d < half && !self.is_leaf(cur) {
            let next = self.child_start[cur as usize];
            let len = self.seg_len(next);
            path.push((d, len, f_of(next)));
            d += len;
            cur = next;
        }
        let (m, threshold) = if p == 1.0 {
            let m = path.iter().map(|s| s.2).fold(f64::INFINITY, f64::min);
            (Some(m), m * (1.0 + eps_fraction))
        } else {
            (None, 0.0)
        };
        let density = |f: f64| {
            if p == 1.0 {
                if f < threshold {
                    1.0
                } else {
                    0.0
                }
            } else {
                f.powf(1.0 / (1.0 - p))
            }
        };
        let profile = |dist: f64| -> f64 {
            let dist = dist.min(half);
            let mut u = 0.0;
            for &(s, len, f) in &path {
                if dist <= s {
                    break;
                }
                u += density(f) * (dist - s).min(len);
            }
            u
        };
        let u_end = profile(half);

        let ball = self.ball_measure(v, r);
        // downward pieces: (distance at segment top, ball-limited length, mass per length, in T₁, f)
        let mut pieces = Vec::new();
        let mut stack: Vec<(NodeId, f64, bool)> = Vec::new();
        for (i, c) in self.children(v).enumerate() {
            stack.push((c, 0.0, !vertex || i == 0));
        }
        let mut truncated = ball.truncated;
        while let Some((c, d0, in_t1)) = stack.pop() {
            let len = self.seg_len(c);
            let idx = self.radial[c as usize] as usize;
            let sigma = self.mu_bar[idx] / self.lam_bar[idx];
            let inside = len.min(r - d0);
            if inside <= 0.0 {
                continue;
            }
            pieces.push((d0, inside, sigma, in_t1, f_of(c)));
            if d0 + len < r {
                if self.is_leaf(c) {
                    truncated = true;
                }
                for g in self.children(c) {
                    stack.push((g, d0 + len, in_t1));
                }
            }
        }
        let e1_extra = ball.value - pieces.iter().filter(|q| q.3).map(|q| q.1 * q.2).sum::<f64>();

        // integrals of u and |u - c| over T₁ pieces, splitting each at r/2
        let split = |d0: f64, len: f64| -> Vec<(f64, f64)> {
            let d1 = d0 + len;
            if d0 < half && half < d1 {
                vec![(d0, half), (half, d1)]
            } else {
                vec![(d0, d1)]
            }
        };
        let mut u_int = 0.0;
        for &(d0, len, sigma, in_t1, _) in &pieces {
            if !in_t1 {
                continue;
            }
            for (a, b) in split(d0, len) {
                u_int += sigma * (b - a) * 0.5 * (profile(a) + profile(b));
            }
        }
        let mean_u = u_int / ball.value;
        let mut dev = e1_extra * mean_u;
        for &(d0, len, sigma, in_t1, _) in &pieces {
            if !in_t1 {
                continue;
            }
            for (a, b) in split(d0, len) {
                dev += sigma * (b - a) * mean_abs_linear(profile(a), profile(b), mean_u);
            }
        }
        let lhs = dev / ball.value;
        let mut grad = 0.0;
        for &(d0, len, sigma, _, f) in &pieces {
            let a = d0.min(half);
            let b = (d0 + len).min(half);
            if b > a {
                grad += sigma * (b - a) * density(f).powf(p);
            }
        }
        let rhs = r * (grad / ball.value).powf(1.0 / p);
        Ok(DiscreteCertificate {
            m,
            profile_end: u_end,
            ball_measure: ball.value,
            e1_measure: e1_extra,
            mean_u,
            lhs,
            rhs,
            implied_bound: lhs / rhs,
            truncated,
        })
    }
}

/// Discrete counterpart of a continuum Poincaré certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscreteCertificate {
    pub m: Option<f64>,
    pub profile_end: f64,
    pub ball_measure: f64,
    pub e1_measure: f64,
    pub mean_u: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub implied_bound: f64,
    pub truncated: bool,
}

/// Mean of `|u - c|` for `u` linear from `u0` to `u1`.
fn mean_abs_linear(u0: f64, u1: f64, c: f64) -> f64 {
    let (lo, hi) = if u0 <= u1 { (u0, u1) } else { (u1, u0) };
    if c <= lo || c >= hi || hi == lo {
        (0.5 * (u0 + u1) - c).abs()
    } else {
        ((lo - c).powi(2) + (hi - c).powi(2)) / (2.0 * (hi - lo))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial_weight::WeightFunction;

    fn lebesgue(k: u32) -> TreeSpace {
        let one = WeightFunction::constant(1.0).unwrap();
        TreeSpace::new(k, one.clone(), one).unwrap()
    }

    #[test]
    fn combinatorics() {
        let t = DiscreteTree::build(&lebesgue(1), 3, 2).unwrap();
        assert_eq!(t.segment_count(), 6);
        let t = DiscreteTree::build(&lebesgue(2), 2, 1).unwrap();
        assert_eq!(t.segment_count(), 6);
        assert_eq!(segment_count(2, 12, 16), 131_040);
        assert!(matches!(
            DiscreteTree::build_with_budget(&lebesgue(2), 12, 16, 1000),
            Err(Error::BudgetExceeded { needed: 131_040, budget: 1000 })
        ));
    }

    #[test]
    fn ball_examples() {
        let t = DiscreteTree::build(&lebesgue(1), 12, 16).unwrap();
        let v = t.node_at(1.0).unwrap();
        assert!((t.ball_measure(v, 0.5).value - 1.0).abs() < 1e-12);
        let t = DiscreteTree::build(&lebesgue(2), 12, 16).unwrap();
        let v = t.node_at(1.5).unwrap();
        let b = t.ball_measure(v, 1.0);
        assert!((b.value - 3.0).abs() < 3.0 / 16.0 && !b.truncated);
    }

    #[test]
    fn truncation_is_flagged() {
        let t = DiscreteTree::build(&lebesgue(1), 3, 4).unwrap();
        let v = t.node_at(2.0).unwrap();
        assert!(t.ball_measure(v, 2.0).truncated);
        assert!(!t.ball_measure(v, 0.5).truncated);
    }

    #[test]
    fn binary_root_ap() {
        let t = DiscreteTree::build(&lebesgue(2), 12, 16).unwrap();
        let v = t.ap_value(2.0, t.root(), 1.0).unwrap();
        assert!((v.value - 1.5).abs() < 1e-9, "{}", v.value);
    }

    #[test]
    fn branches_agree() {
        let t = DiscreteTree::build(&lebesgue(3), 6, 4).unwrap();
        let v = t.node_on_branch(5, 0).unwrap();
        let w = t.node_on_branch(5, 7).unwrap();
        assert_ne!(v, w);
        let a = t.ap_value_along(2.0, v, 1.3, 0).unwrap();
        let b = t.ap_value_along(2.0, w, 1.3, 5).unwrap();
        assert_eq!(a.value, b.value);
    }

    #[test]
    fn lebesgue_certificate() {
        let t = DiscreteTree::build(&lebesgue(1), 12, 16).unwrap();
        let v = t.node_at(6.0).unwrap();
        let c = t.certificate(2.0, v, 2.0, 0.01).unwrap();
        assert!((c.implied_bound - 105.0 / 256.0).abs() < 1e-9);
    }
}
