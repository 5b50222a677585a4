use super::quadrature::{self, QuadResult};
use super::{Monotonicity, Side, Tolerance, WeightFunction};
use crate::error::{Error, Result};

/// Branch multiplicity factor `K^{(⌈s⌉ - anchor_level) * exponent}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Multiplicity {
    pub branching: u32,
    pub anchor_level: i64,
    pub exponent: f64,
}

impl Multiplicity {
    fn level(s: f64, side: Option<Side>) -> i64 {
        let c = s.ceil();
        match side {
            Some(Side::Right) if s.fract() == 0.0 => c as i64 + 1,
            _ => c as i64,
        }
    }

    fn factor(&self, s: f64, side: Option<Side>) -> f64 {
        let n = (Self::level(s, side) - self.anchor_level) as f64;
        (self.branching as f64).powf(n * self.exponent)
    }
}

/// A product `K^{(⌈s⌉ - j0) m} · Π w_i(s)^{e_i}` of radial weights.
///
/// Factors referring to the same weight are merged. `raised_to` multiplies every
/// exponent collected so far, so `(K^{⌈s⌉-j0} μ/λ)^q · λ` is written
/// `new().times(μ).over(λ).with_multiplicity(K, j0).raised_to(q)?.times(λ)`.
#[derive(Debug, Clone, Default)]
pub struct IntegrandSpec<'a> {
    factors: Vec<(&'a WeightFunction, f64)>,
    multiplicity: Option<Multiplicity>,
}

impl<'a> IntegrandSpec<'a> {
    /// The constant integrand 1.
    pub fn new() -> Self {
        IntegrandSpec::default()
    }

    /// The single weight `w`.
    pub fn weight(w: &'a WeightFunction) -> Self {
        Self::new().times(w)
    }

    pub fn times(self, w: &'a WeightFunction) -> Self {
        self.factor(w, 1.0)
    }

    pub fn over(self, w: &'a WeightFunction) -> Self {
        self.factor(w, -1.0)
    }

    pub fn factor(mut self, w: &'a WeightFunction, exponent: f64) -> Self {
        if let Some(f) = self.factors.iter_mut().find(|f| std::ptr::eq(f.0, w)) {
            f.1 += exponent;
        } else {
            self.factors.push((w, exponent));
        }
        self
    }

    /// Multiply by `K^{⌈s⌉ - anchor_level}`. No-op for `K = 1`.
    pub fn with_multiplicity(mut self, branching: u32, anchor_level: i64) -> Self {
        if branching > 1 {
            match &mut self.multiplicity {
                Some(m) => {
                    m.exponent += 1.0;
                }
                None => {
                    self.multiplicity = Some(Multiplicity {
                        branching,
                        anchor_level,
                        exponent: 1.0,
                    })
                }
            }
        }
        self
    }

    /// Raise everything collected so far to the power `q`.
    pub fn raised_to(mut self, q: f64) -> Result<Self> {
        if !q.is_finite() {
            return Err(Error::InvalidParameter(format!("integrand power {q}")));
        }
        for f in &mut self.factors {
            f.1 *= q;
        }
        if let Some(m) = &mut self.multiplicity {
            m.exponent *= q;
        }
        Ok(self)
    }

    /// `(K^{⌈s⌉-j0} μ/λ)^{1/(1-p)} λ`, the dual kernel of the Muckenhoupt bracket.
    /// There is no such kernel for `p = 1`.
    pub fn holder_kernel(
        mu: &'a WeightFunction,
        lambda: &'a WeightFunction,
        branching: u32,
        anchor_level: i64,
        p: f64,
    ) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "the dual kernel needs 1 < p < ∞, got p = {p}"
            )));
        }
        Ok(Self::new()
            .times(mu)
            .over(lambda)
            .with_multiplicity(branching, anchor_level)
            .raised_to(1.0 / (1.0 - p))?
            .times(lambda))
    }

    fn active(&self) -> impl Iterator<Item = &(&'a WeightFunction, f64)> {
        self.factors.iter().filter(|f| f.1 != 0.0)
    }

    fn mult_active(&self) -> Option<&Multiplicity> {
        self.multiplicity.as_ref().filter(|m| m.exponent != 0.0)
    }

    pub fn value(&self, s: f64) -> f64 {
        let mut v = self.mult_active().map_or(1.0, |m| m.factor(s, None));
        for &(w, e) in self.active() {
            v *= pow(w.value(s), e);
        }
        v
    }

    pub fn value_side(&self, s: f64, side: Side) -> f64 {
        let mut v = self.mult_active().map_or(1.0, |m| m.factor(s, Some(side)));
        for &(w, e) in self.active() {
            v *= pow(w.value_side(s, side), e);
        }
        v
    }

    /// `[a, interior breakpoints..., b]`.
    pub fn pieces(&self, a: f64, b: f64) -> Vec<f64> {
        let mut pts = vec![a, b];
        for &(w, _) in self.active() {
            pts.extend(w.breakpoints(a, b));
        }
        if self.mult_active().is_some() {
            let mut n = a.floor() + 1.0;
            while n < b {
                pts.push(n);
                n += 1.0;
            }
        }
        pts.retain(|&x| a <= x && x <= b);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    pub fn monotonicity_on(&self, a: f64, b: f64) -> Monotonicity {
        self.active().fold(Monotonicity::Constant, |acc, &(w, e)| {
            acc.combine(w.monotonicity_on(a, b).raised(e))
        })
    }

    pub fn exponent_at_zero(&self) -> f64 {
        self.active().map(|&(w, e)| e * w.exponent_at_zero()).sum()
    }

    pub fn is_piecewise_constant(&self) -> bool {
        self.active().all(|(w, _)| w.is_piecewise_constant())
    }

    fn geometric_from(&self) -> Option<f64> {
        let mut n = 0.0f64;
        for (w, _) in self.active() {
            n = n.max(w.geometric_from()?);
        }
        Some(n)
    }

    /// The single factor carrying total exponent 1 when every other factor is
    /// piecewise constant.
    fn exact_factor(&self) -> Option<&'a WeightFunction> {
        let mut found = None;
        for &(w, e) in self.active() {
            if w.is_piecewise_constant() {
                continue;
            }
            if e != 1.0 || found.is_some() {
                return None;
            }
            found = Some(w);
        }
        found
    }
}

fn pow(x: f64, e: f64) -> f64 {
    if e == 1.0 {
        x
    } else if e == -1.0 {
        1.0 / x
    } else {
        x.powf(e)
    }
}

fn check_interval(a: f64, b: f64) -> Result<()> {
    if !(a >= 0.0) || !b.is_finite() || !(b >= a) {
        return Err(Error::Domain(format!("integration interval [{a}, {b}]")));
    }
    Ok(())
}

/// `∫_a^b spec(s) ds`, exact whenever the structure allows it and adaptive
/// Gauss–Kronrod otherwise. `+∞` integrals are reported as [`Error::Divergent`].
pub fn integrate(spec: &IntegrandSpec<'_>, a: f64, b: f64, tol: &Tolerance) -> Result<f64> {
    check_interval(a, b)?;
    if a == b {
        return Ok(0.0);
    }
    let v = if spec.is_piecewise_constant() {
        exact_piecewise_constant(spec, a, b)
    } else if let Some(w) = spec.exact_factor() {
        let pts = spec.pieces(a, b);
        let mut total = 0.0;
        for p in pts.windows(2) {
            let mid = 0.5 * (p[0] + p[1]);
            let others = spec.value(mid) / w.value(mid);
            total += others * w.integral(p[0], p[1]);
        }
        total
    } else {
        return integrate_quadrature(spec, a, b, tol).map(|r| r.value);
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Divergent { a, b })
    }
}

/// Adaptive quadrature regardless of available closed forms.
pub fn integrate_quadrature(
    spec: &IntegrandSpec<'_>,
    a: f64,
    b: f64,
    tol: &Tolerance,
) -> Result<QuadResult> {
    check_interval(a, b)?;
    let pts = spec.pieces(a, b);
    let f = |s: f64| spec.value(s);
    quadrature::integrate_pieces(&f, &pts, spec.exponent_at_zero(), tol)
}

const GEOMETRIC_BLOCK: f64 = 32.0;

fn exact_piecewise_constant(spec: &IntegrandSpec<'_>, a: f64, b: f64) -> f64 {
    let sum_pieces = |lo: f64, hi: f64| -> f64 {
        if hi <= lo {
            return 0.0;
        }
        spec.pieces(lo, hi)
            .windows(2)
            .map(|p| spec.value(0.5 * (p[0] + p[1])) * (p[1] - p[0]))
            .sum()
    };
    let Some(n0) = spec.geometric_from() else {
        return sum_pieces(a, b);
    };
    let start = n0.max(a.ceil());
    let end = b.floor();
    if end - start < GEOMETRIC_BLOCK {
        return sum_pieces(a, b);
    }
    // levels (n, n+1] for n in start..end form a geometric sequence
    let v0 = spec.value(start + 0.5);
    let q = spec.value(start + 1.5) / v0;
    let len = end - start;
    let block = if q == 1.0 {
        v0 * len
    } else {
        let lq = q.ln();
        v0 * (len * lq).exp_m1() / lq.exp_m1()
    };
    sum_pieces(a, start) + block + sum_pieces(end, b)
}

/// Which essential extremum to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extremum {
    Sup,
    Inf,
}

/// Essential supremum or infimum of `spec` over `(a, b)`.
pub fn ess_extremum(
    spec: &IntegrandSpec<'_>,
    a: f64,
    b: f64,
    which: Extremum,
    tol: &Tolerance,
) -> Result<f64> {
    check_interval(a, b)?;
    if a == b {
        return Err(Error::Domain(format!("empty interval ({a}, {b})")));
    }
    let better = |x: f64, y: f64| match which {
        Extremum::Sup => x > y,
        Extremum::Inf => x < y,
    };
    let mut best = match which {
        Extremum::Sup => f64::NEG_INFINITY,
        Extremum::Inf => f64::INFINITY,
    };
    for p in spec.pieces(a, b).windows(2) {
        let (lo, hi) = (p[0], p[1]);
        let v = piece_extremum(spec, lo, hi, which, tol);
        if better(v, best) {
            best = v;
        }
    }
    Ok(best)
}

fn piece_extremum(spec: &IntegrandSpec<'_>, lo: f64, hi: f64, which: Extremum, tol: &Tolerance) -> f64 {
    let left = || spec.value_side(lo, Side::Right);
    let right = || spec.value_side(hi, Side::Left);
    match (spec.monotonicity_on(lo, hi), which) {
        (Monotonicity::Constant, _) => spec.value(0.5 * (lo + hi)),
        (Monotonicity::Increasing, Extremum::Sup) | (Monotonicity::Decreasing, Extremum::Inf) => right(),
        (Monotonicity::Increasing, Extremum::Inf) | (Monotonicity::Decreasing, Extremum::Sup) => left(),
        (Monotonicity::Unknown, _) => search_extremum(spec, lo, hi, which, tol),
    }
}

fn search_extremum(spec: &IntegrandSpec<'_>, lo: f64, hi: f64, which: Extremum, tol: &Tolerance) -> f64 {
    let sgn = if which == Extremum::Sup { 1.0 } else { -1.0 };
    let g = |s: f64| sgn * spec.value(s);
    let n = tol.grid.max(8);
    let h = (hi - lo) / n as f64;
    let xs: Vec<f64> = (0..n).map(|i| lo + (i as f64 + 0.5) * h).collect();
    let (mut k, mut best) = (0, f64::NEG_INFINITY);
    for (i, &x) in xs.iter().enumerate() {
        let v = g(x);
        if v > best {
            best = v;
            k = i;
        }
    }
    // golden-section refinement in the bracket around the best sample
    let (mut l, mut r) = ((xs[k] - h).max(lo), (xs[k] + h).min(hi));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = r - phi * (r - l);
    let mut x2 = l + phi * (r - l);
    let (mut f1, mut f2) = (g(x1), g(x2));
    for _ in 0..80 {
        if f1 > f2 {
            r = x2;
            x2 = x1;
            f2 = f1;
            x1 = r - phi * (r - l);
            f1 = g(x1);
        } else {
            l = x1;
            x1 = x2;
            f1 = f2;
            x2 = l + phi * (r - l);
            f2 = g(x2);
        }
        if r - l <= 1e-14 * (1.0 + l.abs()) {
            break;
        }
    }
    let ends = [sgn * spec.value_side(lo, Side::Right), sgn * spec.value_side(hi, Side::Left)];
    let m = [best, f1, f2, ends[0], ends[1]].into_iter().fold(f64::NEG_INFINITY, f64::max);
    sgn * m
}

/// Maximal open intervals of `(a, b)` on which `spec < level`, up to null sets.
pub fn sublevel_intervals(
    spec: &IntegrandSpec<'_>,
    a: f64,
    b: f64,
    level: f64,
    tol: &Tolerance,
) -> Result<Vec<(f64, f64)>> {
    check_interval(a, b)?;
    let mut out: Vec<(f64, f64)> = Vec::new();
    let mut push = |lo: f64, hi: f64| {
        if hi <= lo {
            return;
        }
        match out.last_mut() {
            Some(last) if last.1 >= lo => last.1 = last.1.max(hi),
            _ => out.push((lo, hi)),
        }
    };
    let below = |s: f64| spec.value(s) < level;
    for p in spec.pieces(a, b).windows(2) {
        let (lo, hi) = (p[0], p[1]);
        match spec.monotonicity_on(lo, hi) {
            Monotonicity::Constant => {
                if below(0.5 * (lo + hi)) {
                    push(lo, hi);
                }
            }
            Monotonicity::Increasing => {
                if spec.value_side(hi, Side::Left) < level {
                    push(lo, hi);
                } else if spec.value_side(lo, Side::Right) < level {
                    push(lo, crossing(&below, lo, hi));
                }
            }
            Monotonicity::Decreasing => {
                if spec.value_side(lo, Side::Right) < level {
                    push(lo, hi);
                } else if spec.value_side(hi, Side::Left) < level {
                    push(crossing(&|s| !below(s), lo, hi), hi);
                }
            }
            Monotonicity::Unknown => {
                let n = 4 * tol.grid.max(8);
                let xs: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
                let flags: Vec<bool> = xs
                    .iter()
                    .enumerate()
                    .map(|(i, &x)| {
                        let x = if i == 0 {
                            lo + 1e-12 * (hi - lo)
                        } else if i == n {
                            hi - 1e-12 * (hi - lo)
                        } else {
                            x
                        };
                        below(x)
                    })
                    .collect();
                let mut start = if flags[0] { Some(lo) } else { None };
                for i in 1..=n {
                    match (flags[i - 1], flags[i]) {
                        (false, true) => start = Some(crossing(&|s| !below(s), xs[i - 1], xs[i])),
                        (true, false) => {
                            let end = crossing(&below, xs[i - 1], xs[i]);
                            push(start.take().unwrap_or(xs[i - 1]), end);
                        }
                        _ => {}
                    }
                }
                if let Some(s) = start {
                    push(s, hi);
                }
            }
        }
    }
    Ok(out)
}

/// Boundary between `pred = true` (left) and `pred = false` (right) in `(lo, hi)`.
fn crossing(pred: &dyn Fn(f64) -> bool, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            break;
        }
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
