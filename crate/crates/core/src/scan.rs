//! Multi-stage supremum search over centres `t` and radii `r`.
//!
//! The domain grows in `S` nested boxes; every cell is assigned to the first box
//! that contains it, so the running supremum after each stage is a prefix maximum.
//! After the last expansion a few refinement rounds evaluate a shrinking stencil
//! around the current maximiser. The verdict is read off the growth of the
//! running supremum.

use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::tree_geometry::TreeSpace;

/// Write non-finite floats as strings (`"inf"`, `"-inf"`, `"nan"`) instead of `null`.
pub fn serialize_float<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else if x.is_nan() {
        s.serialize_str("nan")
    } else if *x > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

/// Thresholds of the growth test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerdictRule {
    /// Factor per expansion that counts as geometric growth.
    pub growth_factor: f64,
    /// Number of trailing expansions examined.
    pub window: usize,
    /// Relative change below which the estimate counts as stable.
    pub stall_tolerance: f64,
    /// Minimal relative increment per expansion for sustained growth.
    pub sustained_increment: f64,
    /// Increments may shrink at most by this factor between expansions.
    pub persistence: f64,
}

impl Default for VerdictRule {
    fn default() -> Self {
        VerdictRule {
            growth_factor: 10.0,
            window: 3,
            stall_tolerance: 0.01,
            sustained_increment: 0.02,
            persistence: 0.5,
        }
    }
}

/// Shape and extent of a scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanDomain {
    pub t_min: f64,
    pub t_max: f64,
    pub t_per_decade: usize,
    /// Relative radii `r = 2^k max(Λ(t), r_floor)` for `k` in this range.
    pub beta_min_exp: i32,
    pub beta_max_exp: i32,
    pub r_floor: f64,
    /// Absolute radii, used when the region is not restricted.
    pub r_min: f64,
    pub r_max: f64,
    pub r_per_decade: usize,
    pub include_root: bool,
    pub extra_t: Vec<f64>,
    pub expansions: usize,
    pub refinements: usize,
    /// Largest metric depth `Λ(t) + 2r` a cell may reach.
    pub metric_cap: f64,
    /// Weights outside `[1/magnitude_cap, magnitude_cap]` end the radial range.
    pub magnitude_cap: f64,
    /// For `K ≥ 2` the radial range ends at `level_budget / ln K`.
    pub level_budget: f64,
    pub rule: VerdictRule,
}

impl Default for ScanDomain {
    fn default() -> Self {
        ScanDomain {
            t_min: 1e-3,
            t_max: 1e6,
            t_per_decade: 4,
            beta_min_exp: -20,
            beta_max_exp: 5,
            r_floor: 1e-3,
            r_min: 1e-3,
            r_max: 1e6,
            r_per_decade: 4,
            include_root: true,
            extra_t: Vec::new(),
            expansions: 6,
            refinements: 6,
            metric_cap: 1e12,
            magnitude_cap: 1e200,
            level_budget: 300.0,
            rule: VerdictRule::default(),
        }
    }
}

/// Which balls are scanned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Region {
    /// Every centre and radius.
    All,
    /// Only `r ≤ c Λ(t)`, centres away from the root.
    FarFromRoot { c: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanVerdict {
    Bounded,
    Diverging,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Expansion,
    Refinement,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArgMax {
    pub t: f64,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEntry {
    pub phase: Phase,
    pub index: usize,
    pub t_range: [f64; 2],
    pub r_range: [f64; 2],
    /// Grid points per decade of `t` (refinement rounds halve the spacing).
    pub resolution: f64,
    pub cells: usize,
    #[serde(serialize_with = "serialize_float")]
    pub running_sup: f64,
    pub argmax: Option<ArgMax>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanCell {
    pub t: f64,
    pub r: f64,
    pub stage: usize,
    #[serde(serialize_with = "serialize_float")]
    pub value: f64,
}

/// Outcome of a supremum scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupEstimate {
    #[serde(serialize_with = "serialize_float")]
    pub estimate: f64,
    pub argmax: Option<ArgMax>,
    pub trace: Vec<TraceEntry>,
    pub verdict: ScanVerdict,
    /// Ratio of the running supremum across the last expansion.
    #[serde(serialize_with = "serialize_float")]
    pub growth_factor: f64,
    pub evaluated: usize,
    pub failed: usize,
    pub first_failure: Option<String>,
    /// Every evaluated cell, in evaluation order.
    #[serde(skip)]
    pub cells: Vec<ScanCell>,
}

impl SupEstimate {
    /// Running suprema after each expansion stage.
    pub fn stage_sups(&self) -> Vec<f64> {
        self.trace
            .iter()
            .filter(|e| e.phase == Phase::Expansion)
            .map(|e| e.running_sup)
            .collect()
    }
}

/// Metric reach of admissible cells for a given space and domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanCaps {
    /// Deepest radial coordinate a cell may touch.
    pub radial_cap: f64,
    /// `Λ(radial_cap)`, clipped to the domain's `metric_cap`.
    pub metric_cap: f64,
}

pub fn scan_caps(space: &TreeSpace, domain: &ScanDomain) -> ScanCaps {
    let mut radial = f64::INFINITY;
    let k = space.branching();
    if k >= 2 {
        radial = domain.level_budget / (k as f64).ln();
    }
    let mag = domain.magnitude_cap;
    let ok = |t: f64| {
        [space.mu().value(t), space.lambda().value(t)]
            .iter()
            .all(|&v| v.is_finite() && v > 0.0 && v <= mag && v >= 1.0 / mag)
    };
    let far = 1e7f64.min(radial);
    if !ok(far) {
        let (mut lo, mut hi) = (0.0f64, far.ln());
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if ok(mid.exp()) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        radial = lo.exp();
    }
    let mut metric = domain.metric_cap;
    if radial.is_finite() {
        metric = metric.min(space.metric_distance_to_root(radial));
    }
    ScanCaps {
        radial_cap: radial,
        metric_cap: metric,
    }
}

/// Logarithmic grid from `lo` to `hi` inclusive with `per_decade` points per decade.
pub fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    if !(hi > lo) || lo <= 0.0 {
        return if lo > 0.0 && lo == hi { vec![lo] } else { Vec::new() };
    }
    let decades = (hi / lo).log10();
    let n = (decades * per_decade.max(1) as f64).ceil().max(1.0) as usize;
    (0..=n)
        .map(|i| {
            if i == n {
                hi
            } else {
                lo * 10f64.powf(decades * i as f64 / n as f64)
            }
        })
        .collect()
}

type CellFn<'a> = dyn Fn(f64, f64) -> Result<f64> + Sync + 'a;

/// Cells whose radial step is not resolvable to this relative precision are skipped.
pub const MAX_RELATIVE_RESOLUTION: f64 = 1e-7;

struct Planner<'a> {
    space: &'a TreeSpace,
    domain: &'a ScanDomain,
    region: Region,
    caps: ScanCaps,
    t_hi: f64,
    r_hi: f64,
}

impl Planner<'_> {
    fn base(&self, t: f64) -> f64 {
        self.space.metric_distance_to_root(t).max(self.domain.r_floor)
    }

    fn admissible(&self, t: f64, r: f64) -> bool {
        if !(r > 0.0) || !r.is_finite() || !(t >= 0.0) || !t.is_finite() {
            return false;
        }
        let lt = self.space.metric_distance_to_root(t);
        if lt + 2.0 * r > self.caps.metric_cap {
            return false;
        }
        if self.space.relative_resolution(t, r) > MAX_RELATIVE_RESOLUTION {
            return false;
        }
        match self.region {
            Region::All => true,
            Region::FarFromRoot { c } => t > 0.0 && r <= c * lt * (1.0 + 1e-12),
        }
    }

    fn box_bounds(lo: f64, hi: f64, k: usize, stages: usize) -> (f64, f64) {
        if k + 1 >= stages {
            return (lo, hi);
        }
        let anchor = 1.0f64.clamp(lo, hi);
        let f = (k + 1) as f64 / stages as f64;
        let a = (anchor.ln() + (lo.ln() - anchor.ln()) * f).exp();
        let b = (anchor.ln() + (hi.ln() - anchor.ln()) * f).exp();
        (a, b)
    }

    fn inside(x: f64, bounds: (f64, f64)) -> bool {
        x >= bounds.0 * (1.0 - 1e-12) && x <= bounds.1 * (1.0 + 1e-12)
    }

    fn plan(&self) -> Vec<(f64, f64, bool)> {
        let d = self.domain;
        let mut ts = log_grid(d.t_min, self.t_hi, d.t_per_decade);
        ts.extend(d.extra_t.iter().copied().filter(|&t| t > 0.0 && t <= self.t_hi));
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        let mut betas: Vec<f64> = (d.beta_min_exp..=d.beta_max_exp).map(|k| 2f64.powi(k)).collect();
        if let Region::FarFromRoot { c } = self.region {
            betas.retain(|&b| b <= c);
            if !betas.contains(&c) {
                betas.push(c);
            }
        }
        let mut cells = Vec::new();
        for &t in &ts {
            let base = self.base(t);
            for &b in &betas {
                let r = b * base;
                if self.admissible(t, r) {
                    cells.push((t, r, false));
                }
            }
        }
        if self.region == Region::All {
            let rs = log_grid(d.r_min, self.r_hi, d.r_per_decade);
            let mut centres = ts.clone();
            if d.include_root {
                centres.insert(0, 0.0);
            }
            for &t in &centres {
                for &r in &rs {
                    if self.admissible(t, r) {
                        cells.push((t, r, true));
                    }
                }
            }
        }
        cells
    }

    fn stage_of(&self, t: f64, r: f64, absolute: bool) -> usize {
        let d = self.domain;
        let s = d.expansions.max(1);
        for k in 0..s {
            let tb = Self::box_bounds(d.t_min, self.t_hi, k, s);
            if t != 0.0 && !Self::inside(t, tb) {
                continue;
            }
            if absolute {
                let rb = Self::box_bounds(d.r_min, self.r_hi, k, s);
                if !Self::inside(r, rb) {
                    continue;
                }
            }
            return k;
        }
        s - 1
    }
}

struct Evaluated {
    value: f64,
    error: Option<String>,
}

fn evaluate_all(cells: &[(f64, f64)], f: &CellFn<'_>) -> Vec<Evaluated> {
    cells
        .par_iter()
        .map(|&(t, r)| match f(t, r) {
            Ok(v) => Evaluated { value: v, error: None },
            Err(Error::Divergent { .. }) => Evaluated {
                value: f64::INFINITY,
                error: None,
            },
            Err(e) => Evaluated {
                value: f64::NAN,
                error: Some(format!("t = {t}, r = {r}: {e}")),
            },
        })
        .collect()
}

/// Scan `f(t, r)` over `domain` restricted to `region` and estimate its supremum.
pub fn scan_sup(space: &TreeSpace, domain: &ScanDomain, region: Region, f: &CellFn<'_>) -> Result<SupEstimate> {
    validate_domain(domain, region)?;
    let caps = scan_caps(space, domain);
    // the largest centre with any admissible radius
    let t_hi = if caps.metric_cap.is_finite() {
        let reach = caps.metric_cap / (1.0 + 2.0 * 2f64.powi(domain.beta_min_exp));
        let t_reach = space.descendant_at(0.0, reach.min(space.metric_distance_to_root(domain.t_max)))?;
        domain.t_max.min(t_reach)
    } else {
        domain.t_max
    };
    let t_hi = t_hi.max(domain.t_min);
    let r_hi = domain.r_max.min(0.5 * caps.metric_cap).max(domain.r_min);
    let planner = Planner {
        space,
        domain,
        region,
        caps,
        t_hi,
        r_hi,
    };
    let plan = planner.plan();
    let stages: Vec<usize> = plan.iter().map(|&(t, r, abs)| planner.stage_of(t, r, abs)).collect();
    let points: Vec<(f64, f64)> = plan.iter().map(|&(t, r, _)| (t, r)).collect();
    let results = evaluate_all(&points, f);

    let mut cells = Vec::with_capacity(points.len());
    let mut failed = 0;
    let mut first_failure = None;
    for ((&(t, r), &stage), ev) in points.iter().zip(&stages).zip(results) {
        if let Some(e) = ev.error {
            failed += 1;
            first_failure.get_or_insert(e);
        }
        cells.push(ScanCell {
            t,
            r,
            stage,
            value: ev.value,
        });
    }

    let s = domain.expansions.max(1);
    let mut trace = Vec::with_capacity(s + domain.refinements);
    let mut best: Option<usize> = None;
    for k in 0..s {
        let mut n = 0;
        let (mut tlo, mut thi, mut rlo, mut rhi) = (f64::INFINITY, 0.0f64, f64::INFINITY, 0.0f64);
        for (i, c) in cells.iter().enumerate() {
            if c.stage > k {
                continue;
            }
            n += 1;
            tlo = tlo.min(c.t);
            thi = thi.max(c.t);
            rlo = rlo.min(c.r);
            rhi = rhi.max(c.r);
            if c.stage == k && !c.value.is_nan() && best.map_or(true, |b| c.value > cells[b].value) {
                best = Some(i);
            }
        }
        trace.push(TraceEntry {
            phase: Phase::Expansion,
            index: k,
            t_range: [tlo.min(thi), thi],
            r_range: [rlo.min(rhi), rhi],
            resolution: domain.t_per_decade as f64,
            cells: n,
            running_sup: best.map_or(f64::NAN, |b| cells[b].value),
            argmax: best.map(|b| ArgMax { t: cells[b].t, r: cells[b].r }),
        });
    }

    let mut current = best.map(|b| (cells[b].t, cells[b].r, cells[b].value));
    for j in 1..=domain.refinements {
        let mut new_cells = Vec::new();
        if let Some((t0, r0, v0)) = current {
            if v0.is_finite() {
                new_cells = stencil(&planner, t0, r0, j);
            }
        }
        let results = evaluate_all(&new_cells, f);
        for (&(t, r), ev) in new_cells.iter().zip(results) {
            if let Some(e) = ev.error {
                failed += 1;
                first_failure.get_or_insert(e);
            }
            cells.push(ScanCell {
                t,
                r,
                stage: s + j - 1,
                value: ev.value,
            });
            if !ev.value.is_nan() && current.map_or(true, |c| ev.value > c.2) {
                current = Some((t, r, ev.value));
            }
        }
        let (tlo, thi) = span(new_cells.iter().map(|c| c.0));
        let (rlo, rhi) = span(new_cells.iter().map(|c| c.1));
        trace.push(TraceEntry {
            phase: Phase::Refinement,
            index: j - 1,
            t_range: [tlo, thi],
            r_range: [rlo, rhi],
            resolution: domain.t_per_decade as f64 * 2f64.powi(j as i32),
            cells: new_cells.len(),
            running_sup: current.map_or(f64::NAN, |c| c.2),
            argmax: current.map(|c| ArgMax { t: c.0, r: c.1 }),
        });
    }

    let estimate = current.map_or(f64::NAN, |c| c.2);
    let stage_sups: Vec<f64> = trace.iter().filter(|e| e.phase == Phase::Expansion).map(|e| e.running_sup).collect();
    let refine_sups: Vec<f64> = trace.iter().filter(|e| e.phase == Phase::Refinement).map(|e| e.running_sup).collect();
    let cap_bound = t_hi < domain.t_max * (1.0 - 1e-12)
        || r_hi < domain.r_max * (1.0 - 1e-12)
        || caps.metric_cap < domain.metric_cap;
    let (verdict, growth_factor) = judge(&stage_sups, &refine_sups, estimate, cap_bound, &domain.rule);
    Ok(SupEstimate {
        estimate,
        argmax: current.map(|c| ArgMax { t: c.0, r: c.1 }),
        trace,
        verdict,
        growth_factor,
        evaluated: cells.len(),
        failed,
        first_failure,
        cells,
    })
}

fn span(xs: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for x in xs {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    if lo > hi {
        (f64::NAN, f64::NAN)
    } else {
        (lo, hi)
    }
}

fn stencil(p: &Planner<'_>, t0: f64, r0: f64, round: usize) -> Vec<(f64, f64)> {
    let d = p.domain;
    let scale = 2f64.powi(round as i32);
    let du = std::f64::consts::LN_10 / d.t_per_decade.max(1) as f64 / scale;
    let mut out = Vec::with_capacity(24);
    let t_range = |t: f64| t >= d.t_min * (1.0 - 1e-12) && t <= p.t_hi * (1.0 + 1e-12);
    match p.region {
        Region::FarFromRoot { .. } => {
            let dv = std::f64::consts::LN_2 / scale;
            let v0 = (r0 / p.base(t0)).ln();
            for i in -2i32..=2 {
                for k in -2i32..=2 {
                    if i == 0 && k == 0 {
                        continue;
                    }
                    let t = (t0.ln() + i as f64 * du).exp();
                    let r = (v0 + k as f64 * dv).exp() * p.base(t);
                    if t_range(t) && p.admissible(t, r) {
                        out.push((t, r));
                    }
                }
            }
        }
        Region::All => {
            let dv = std::f64::consts::LN_10 / d.r_per_decade.max(1) as f64 / scale;
            for i in -2i32..=2 {
                if t0 == 0.0 && i != 0 {
                    continue;
                }
                for k in -2i32..=2 {
                    if i == 0 && k == 0 {
                        continue;
                    }
                    let t = if t0 == 0.0 { 0.0 } else { (t0.ln() + i as f64 * du).exp() };
                    let r = (r0.ln() + k as f64 * dv).exp();
                    if (t == 0.0 || t_range(t)) && p.admissible(t, r) {
                        out.push((t, r));
                    }
                }
            }
        }
    }
    out
}

/// Apply the growth test to the stage and refinement suprema.
///
/// `cap_bound` says the caps truncated the domain. Geometric growth over any
/// window of strictly increasing stage suprema then counts, since stages that
/// reach no further under the caps repeat the previous value.
pub fn judge(
    stage_sups: &[f64],
    refine_sups: &[f64],
    estimate: f64,
    cap_bound: bool,
    rule: &VerdictRule,
) -> (ScanVerdict, f64) {
    let s = stage_sups.len();
    let growth = if s >= 2 { stage_sups[s - 1] / stage_sups[s - 2] } else { f64::NAN };
    if estimate == f64::INFINITY || stage_sups.iter().any(|&v| v == f64::INFINITY) {
        return (ScanVerdict::Diverging, growth);
    }
    if estimate.is_nan() || s < 2 {
        return (ScanVerdict::Inconclusive, growth);
    }
    let e = rule.window.max(1);
    if s > e {
        let tail = &stage_sups[s - e - 1..];
        let geometric = tail.windows(2).all(|w| w[1] >= rule.growth_factor * w[0]);
        let incs: Vec<f64> = tail.windows(2).map(|w| w[1] - w[0]).collect();
        let sustained = tail
            .windows(2)
            .all(|w| w[1] - w[0] >= rule.sustained_increment * w[0].abs())
            && incs.windows(2).all(|d| d[1] >= rule.persistence * d[0]);
        if geometric || sustained {
            return (ScanVerdict::Diverging, growth);
        }
        let mut rising: Vec<f64> = Vec::with_capacity(s);
        for &v in stage_sups {
            if rising.last().map_or(true, |&l| v > l) {
                rising.push(v);
            }
        }
        let early = cap_bound
            && rising
                .windows(e + 1)
                .any(|w| w.windows(2).all(|p| p[1] >= rule.growth_factor * p[0]));
        if early {
            return (ScanVerdict::Diverging, growth);
        }
    }
    let rel = |a: f64, b: f64| (b - a).abs() / a.abs().max(f64::MIN_POSITIVE);
    let last_stage_stable = rel(stage_sups[s - 2], stage_sups[s - 1]) < rule.stall_tolerance;
    let mut seq = vec![stage_sups[s - 1]];
    seq.extend_from_slice(refine_sups);
    let refine_stable = seq.windows(2).rev().take(2).all(|w| rel(w[0], w[1]) < rule.stall_tolerance);
    if last_stage_stable && refine_stable {
        (ScanVerdict::Bounded, growth)
    } else {
        (ScanVerdict::Inconclusive, growth)
    }
}

fn validate_domain(d: &ScanDomain, region: Region) -> Result<()> {
    let bad = |m: &str| Err(Error::InvalidParameter(format!("scan domain: {m}")));
    if !(d.t_min > 0.0) || !(d.t_max >= d.t_min) || !d.t_max.is_finite() {
        return bad("need 0 < t_min ≤ t_max < ∞");
    }
    if !(d.r_min > 0.0) || !(d.r_max >= d.r_min) || !d.r_max.is_finite() {
        return bad("need 0 < r_min ≤ r_max < ∞");
    }
    if d.beta_min_exp > d.beta_max_exp {
        return bad("beta_min_exp exceeds beta_max_exp");
    }
    if d.t_per_decade == 0 || d.r_per_decade == 0 || d.expansions < 2 {
        return bad("grid densities must be positive and at least two expansions are needed");
    }
    if !(d.r_floor > 0.0) || !(d.metric_cap > 0.0) || !(d.magnitude_cap > 1.0) || !(d.level_budget > 0.0) {
        return bad("caps and r_floor must be positive");
    }
    if let Region::FarFromRoot { c } = region {
        if !(c > 0.0) || !c.is_finite() {
            return bad("far-from-root constant c must be positive");
        }
    }
    Ok(())
}
