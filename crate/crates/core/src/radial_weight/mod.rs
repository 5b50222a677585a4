//! Radial weight functions `t ↦ w(t) > 0` on `[0, ∞)`.
//!
//! Every supported family carries enough structure to be integrated exactly
//! (closed-form antiderivatives), to report its non-smooth abscissae, and to
//! declare whether it is monotone between consecutive breakpoints. Those three
//! facts are what [`integrate`] and [`ess_extremum`] build on.

mod integrand;
pub mod quadrature;

pub use integrand::{
    ess_extremum, integrate, integrate_quadrature, sublevel_intervals, Extremum, IntegrandSpec,
    Multiplicity,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Accuracy knobs shared by quadrature, extremum search and the geometry solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    /// Samples per smooth piece when an extremum has to be found by search.
    pub grid: usize,
    /// Maximum number of quadrature subintervals per call.
    pub max_subdivisions: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rel: 1e-10,
            abs: 1e-13,
            grid: 64,
            max_subdivisions: 4000,
        }
    }
}

/// One-sided limit selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Monotonicity of a function on an open interval free of breakpoints (non-strict).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotonicity {
    Constant,
    Increasing,
    Decreasing,
    Unknown,
}

impl Monotonicity {
    /// Direction of `w^e` given the direction of `w`.
    pub(crate) fn raised(self, exponent: f64) -> Monotonicity {
        if exponent == 0.0 {
            return Monotonicity::Constant;
        }
        match (self, exponent > 0.0) {
            (Monotonicity::Increasing, false) => Monotonicity::Decreasing,
            (Monotonicity::Decreasing, false) => Monotonicity::Increasing,
            (m, _) => m,
        }
    }

    /// Direction of a product of two positive factors.
    pub(crate) fn combine(self, other: Monotonicity) -> Monotonicity {
        use Monotonicity::*;
        match (self, other) {
            (Constant, m) | (m, Constant) => m,
            (Increasing, Increasing) => Increasing,
            (Decreasing, Decreasing) => Decreasing,
            _ => Unknown,
        }
    }
}

/// Rule extending step or tabulated data beyond its last value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TailRule {
    /// Hold the last value forever.
    Constant,
    /// Multiply by `ratio` per unit of `t`.
    Geometric { ratio: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interpolation {
    PiecewiseConstant,
    PiecewiseLinear,
}

fn default_base() -> f64 {
    std::f64::consts::E
}

/// Serializable descriptor of a weight; this is the config-file schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WeightSpec {
    /// `w(t) = value`.
    Constant { value: f64 },
    /// `w(t) = (1 + t)^alpha`.
    Power { alpha: f64 },
    /// `w(t) = t^alpha`, `alpha > -1`.
    PurePower { alpha: f64 },
    /// `w(t) = base^(beta t)`.
    Exponential {
        #[serde(default = "default_base")]
        base: f64,
        beta: f64,
    },
    /// `w(t) = min{1, 1/t}`.
    TruncatedReciprocal,
    /// `w(t) = values[n]` on `(n, n+1]`, extended by `tail`.
    Step { values: Vec<f64>, tail: TailRule },
    /// Knots `(t, value)` starting at `t = 0`.
    Tabulated {
        knots: Vec<(f64, f64)>,
        interpolation: Interpolation,
        tail: TailRule,
    },
    /// `pieces[i]` is used on `(breakpoints[i-1], breakpoints[i]]`.
    Piecewise {
        breakpoints: Vec<f64>,
        pieces: Vec<WeightSpec>,
    },
}

/// Coarse classification of a weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightKind {
    AnalyticFamily,
    StepPerLevel,
    Tabulated,
}

#[derive(Debug, Clone)]
enum Form {
    Constant(f64),
    Power(f64),
    PurePower(f64),
    Exponential { rate: f64 },
    TruncatedReciprocal,
    Step {
        values: Vec<f64>,
        /// `prefix[n] = ∫_0^n w` for `n <= values.len()`.
        prefix: Vec<f64>,
        tail: TailRule,
    },
    Tabulated {
        ts: Vec<f64>,
        vs: Vec<f64>,
        prefix: Vec<f64>,
        interpolation: Interpolation,
        tail: TailRule,
    },
    Piecewise {
        breaks: Vec<f64>,
        pieces: Vec<WeightFunction>,
    },
}

/// A validated radial weight. Immutable once built.
#[derive(Debug, Clone)]
pub struct WeightFunction {
    spec: WeightSpec,
    form: Form,
}

const PROBE_LIMIT: f64 = 64.0;

impl WeightFunction {
    pub fn constant(value: f64) -> Result<Self> {
        Self::from_spec(&WeightSpec::Constant { value })
    }

    pub fn power(alpha: f64) -> Result<Self> {
        Self::from_spec(&WeightSpec::Power { alpha })
    }

    pub fn pure_power(alpha: f64) -> Result<Self> {
        Self::from_spec(&WeightSpec::PurePower { alpha })
    }

    pub fn exponential(base: f64, beta: f64) -> Result<Self> {
        Self::from_spec(&WeightSpec::Exponential { base, beta })
    }

    pub fn truncated_reciprocal() -> Self {
        Self::from_spec(&WeightSpec::TruncatedReciprocal).expect("valid family")
    }

    pub fn step(values: Vec<f64>, tail: TailRule) -> Result<Self> {
        Self::from_spec(&WeightSpec::Step { values, tail })
    }

    pub fn tabulated(
        knots: Vec<(f64, f64)>,
        interpolation: Interpolation,
        tail: TailRule,
    ) -> Result<Self> {
        Self::from_spec(&WeightSpec::Tabulated {
            knots,
            interpolation,
            tail,
        })
    }

    pub fn piecewise(breakpoints: Vec<f64>, pieces: Vec<WeightSpec>) -> Result<Self> {
        Self::from_spec(&WeightSpec::Piecewise {
            breakpoints,
            pieces,
        })
    }

    /// Validate a descriptor and build the weight.
    pub fn from_spec(spec: &WeightSpec) -> Result<Self> {
        let form = build_form(spec)?;
        let w = WeightFunction {
            spec: spec.clone(),
            form,
        };
        w.check_positive()?;
        Ok(w)
    }

    pub fn spec(&self) -> &WeightSpec {
        &self.spec
    }

    pub fn kind(&self) -> WeightKind {
        match self.form {
            Form::Step { .. } => WeightKind::StepPerLevel,
            Form::Tabulated { .. } => WeightKind::Tabulated,
            _ => WeightKind::AnalyticFamily,
        }
    }

    /// `w(t)` with the convention that step and tabulated data take the value
    /// of the interval `(n, n+1]` they are declared on.
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("weight evaluated at t = {t}")));
        }
        Ok(self.value(t))
    }

    pub(crate) fn value(&self, t: f64) -> f64 {
        match &self.form {
            Form::Constant(k) => *k,
            Form::Power(a) => (1.0 + t).powf(*a),
            Form::PurePower(a) => t.powf(*a),
            Form::Exponential { rate } => (rate * t).exp(),
            Form::TruncatedReciprocal => {
                if t <= 1.0 {
                    1.0
                } else {
                    1.0 / t
                }
            }
            Form::Step { values, tail, .. } => {
                let n = if t <= 0.0 { 0 } else { (t.ceil() as u64).saturating_sub(1) };
                step_value(values, tail, n)
            }
            Form::Tabulated {
                ts,
                vs,
                interpolation,
                tail,
                ..
            } => tab_value(ts, vs, *interpolation, tail, t),
            Form::Piecewise { breaks, pieces } => pieces[piece_index(breaks, t)].value(t),
        }
    }

    /// One-sided limit of `w` at `t`. At `t = 0` the left limit is the value.
    pub fn value_side(&self, t: f64, side: Side) -> f64 {
        match &self.form {
            Form::Step { values, tail, .. } => {
                if t > 0.0 && t.fract() == 0.0 {
                    let n = t as u64;
                    match side {
                        Side::Left => step_value(values, tail, n - 1),
                        Side::Right => step_value(values, tail, n),
                    }
                } else {
                    self.value(t)
                }
            }
            Form::Tabulated {
                ts,
                vs,
                interpolation: Interpolation::PiecewiseConstant,
                tail,
                ..
            } => match ts.binary_search_by(|k| k.total_cmp(&t)) {
                Ok(i) if side == Side::Right => {
                    if i + 1 < ts.len() {
                        vs[i]
                    } else {
                        // right of the last knot: tail starts from the last value
                        tail_value(vs[i], tail, 0.0)
                    }
                }
                _ => self.value(t),
            },
            Form::Piecewise { breaks, pieces } => {
                let i = match breaks.binary_search_by(|b| b.total_cmp(&t)) {
                    Ok(i) if side == Side::Right => i + 1,
                    Ok(i) => i,
                    Err(i) => i,
                };
                pieces[i].value_side(t, side)
            }
            _ => self.value(t),
        }
    }

    /// Every declared non-smooth abscissa in `[a, b]`, sorted.
    pub fn breakpoints(&self, a: f64, b: f64) -> Vec<f64> {
        let mut out = Vec::new();
        self.push_breakpoints(a, b, &mut out);
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    fn push_breakpoints(&self, a: f64, b: f64, out: &mut Vec<f64>) {
        match &self.form {
            Form::TruncatedReciprocal => {
                if a <= 1.0 && 1.0 <= b {
                    out.push(1.0);
                }
            }
            Form::Step { values, tail, .. } => {
                let last_jump = match tail {
                    TailRule::Geometric { ratio } if *ratio != 1.0 => f64::INFINITY,
                    _ => (values.len() as f64 - 1.0).max(0.0),
                };
                let lo = a.ceil().max(1.0);
                let hi = b.floor().min(last_jump);
                let mut n = lo;
                while n <= hi {
                    out.push(n);
                    n += 1.0;
                }
            }
            Form::Tabulated { ts, .. } => {
                out.extend(ts.iter().copied().filter(|&k| k > 0.0 && a <= k && k <= b));
            }
            Form::Piecewise { breaks, pieces } => {
                out.extend(breaks.iter().copied().filter(|&k| a <= k && k <= b));
                let mut lo = 0.0;
                for (i, piece) in pieces.iter().enumerate() {
                    let hi = breaks.get(i).copied().unwrap_or(f64::INFINITY);
                    let (pa, pb) = (a.max(lo), b.min(hi));
                    if pa <= pb {
                        piece.push_breakpoints(pa, pb, out);
                    }
                    lo = hi;
                }
            }
            _ => {}
        }
    }

    /// Exact `∫_a^b w(t) dt`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        match &self.form {
            Form::Constant(k) => k * (b - a),
            Form::Power(alpha) => {
                let e = alpha + 1.0;
                if e == 0.0 {
                    ((1.0 + b) / (1.0 + a)).ln()
                } else {
                    ((1.0 + b).powf(e) - (1.0 + a).powf(e)) / e
                }
            }
            Form::PurePower(alpha) => {
                let e = alpha + 1.0;
                (b.powf(e) - a.powf(e)) / e
            }
            Form::Exponential { rate } => {
                if *rate == 0.0 {
                    b - a
                } else {
                    (rate * a).exp() * (rate * (b - a)).exp_m1() / rate
                }
            }
            Form::TruncatedReciprocal => {
                let f = |t: f64| if t <= 1.0 { t } else { 1.0 + t.ln() };
                if a >= 1.0 {
                    (b / a).ln()
                } else {
                    f(b) - f(a)
                }
            }
            Form::Step {
                values,
                prefix,
                tail,
            } => step_antiderivative(values, prefix, tail, b) - step_antiderivative(values, prefix, tail, a),
            Form::Tabulated {
                ts,
                vs,
                prefix,
                interpolation,
                tail,
            } => {
                tab_antiderivative(ts, vs, prefix, *interpolation, tail, b)
                    - tab_antiderivative(ts, vs, prefix, *interpolation, tail, a)
            }
            Form::Piecewise { breaks, pieces } => {
                let mut total = 0.0;
                let mut lo = 0.0;
                for (i, piece) in pieces.iter().enumerate() {
                    let hi = breaks.get(i).copied().unwrap_or(f64::INFINITY);
                    let (pa, pb) = (a.max(lo), b.min(hi));
                    if pa < pb {
                        total += piece.integral(pa, pb);
                    }
                    lo = hi;
                }
                total
            }
        }
    }

    /// Monotonicity on `(a, b)`; callers pass intervals without interior breakpoints.
    pub fn monotonicity_on(&self, a: f64, b: f64) -> Monotonicity {
        let sign = |x: f64| {
            if x > 0.0 {
                Monotonicity::Increasing
            } else if x < 0.0 {
                Monotonicity::Decreasing
            } else {
                Monotonicity::Constant
            }
        };
        match &self.form {
            Form::Constant(_) => Monotonicity::Constant,
            Form::Power(alpha) | Form::PurePower(alpha) => sign(*alpha),
            Form::Exponential { rate } => sign(*rate),
            Form::TruncatedReciprocal => {
                if b <= 1.0 {
                    Monotonicity::Constant
                } else {
                    Monotonicity::Decreasing
                }
            }
            Form::Step { values, tail, .. } => {
                let first = if a <= 0.0 { 0.0 } else { (a.floor()).max(0.0) };
                if b <= first + 1.0 {
                    return Monotonicity::Constant;
                }
                // crosses an integer: only constant when the values agree
                let n0 = first as u64;
                let n1 = (b.ceil() as u64).saturating_sub(1);
                let v0 = step_value(values, tail, n0);
                if (n0..=n1).all(|n| step_value(values, tail, n) == v0) {
                    Monotonicity::Constant
                } else {
                    Monotonicity::Unknown
                }
            }
            Form::Tabulated {
                ts,
                vs,
                interpolation,
                tail,
                ..
            } => {
                let last = *ts.last().unwrap();
                if a >= last {
                    return match tail {
                        TailRule::Constant => Monotonicity::Constant,
                        TailRule::Geometric { ratio } => sign(ratio - 1.0),
                    };
                }
                let i = ts.partition_point(|&k| k <= a).saturating_sub(1);
                if i + 1 < ts.len() && b > ts[i + 1] {
                    return Monotonicity::Unknown;
                }
                match interpolation {
                    Interpolation::PiecewiseConstant => Monotonicity::Constant,
                    Interpolation::PiecewiseLinear => sign(vs[i + 1] - vs[i]),
                }
            }
            Form::Piecewise { breaks, pieces } => {
                let i = breaks.partition_point(|&k| k <= a);
                if i < breaks.len() && b > breaks[i] {
                    return Monotonicity::Unknown;
                }
                pieces[i].monotonicity_on(a, b)
            }
        }
    }

    /// Exponent `e` with `w(t) ~ t^e` as `t → 0+` (zero for weights bounded away from 0 and ∞).
    pub fn exponent_at_zero(&self) -> f64 {
        match &self.form {
            Form::PurePower(alpha) => *alpha,
            Form::Piecewise { breaks, pieces } if breaks[0] > 0.0 => pieces[0].exponent_at_zero(),
            _ => 0.0,
        }
    }

    /// True when `w` is constant between breakpoints.
    pub fn is_piecewise_constant(&self) -> bool {
        match &self.form {
            Form::Constant(_) | Form::Step { .. } => true,
            Form::Tabulated {
                interpolation: Interpolation::PiecewiseConstant,
                tail: TailRule::Constant,
                ..
            } => true,
            Form::Piecewise { pieces, .. } => pieces.iter().all(|p| p.is_piecewise_constant()),
            _ => false,
        }
    }

    /// For piecewise-constant weights: an integer `N` such that the value on
    /// `(n, n+1]` is geometric in `n` for all `n >= N`.
    pub(crate) fn geometric_from(&self) -> Option<f64> {
        match &self.form {
            Form::Constant(_) => Some(0.0),
            Form::Step { values, .. } => Some(values.len() as f64 - 1.0),
            Form::Tabulated {
                ts,
                interpolation: Interpolation::PiecewiseConstant,
                tail: TailRule::Constant,
                ..
            } => Some(ts.last().unwrap().ceil()),
            Form::Piecewise { breaks, pieces } => {
                let last = pieces.last().unwrap().geometric_from()?;
                Some(last.max(breaks.last().unwrap().ceil()))
            }
            _ => None,
        }
    }

    /// Declared tail behaviour: true when `∫_0^∞ w = ∞` follows from the family.
    pub fn tail_integral_diverges(&self) -> bool {
        match &self.form {
            Form::Constant(_) | Form::TruncatedReciprocal | Form::PurePower(_) => true,
            Form::Power(alpha) => *alpha >= -1.0,
            Form::Exponential { rate } => *rate >= 0.0,
            Form::Step { tail, .. } | Form::Tabulated { tail, .. } => match tail {
                TailRule::Constant => true,
                TailRule::Geometric { ratio } => *ratio >= 1.0,
            },
            Form::Piecewise { pieces, .. } => pieces.last().unwrap().tail_integral_diverges(),
        }
    }

    fn check_positive(&self) -> Result<()> {
        let singular_at_zero = self.exponent_at_zero() != 0.0;
        let mut probes: Vec<f64> = (0..=256).map(|i| PROBE_LIMIT * i as f64 / 256.0).collect();
        probes.extend(self.breakpoints(0.0, PROBE_LIMIT));
        for t in probes {
            if t == 0.0 && singular_at_zero {
                continue;
            }
            for side in [Side::Left, Side::Right] {
                let v = self.value_side(t, side);
                if !(v > 0.0) {
                    return Err(Error::InvalidWeight(format!(
                        "weight is not strictly positive at t = {t} (value {v})"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn positive_finite(x: f64, what: &str) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidWeight(format!("{what} must be positive and finite, got {x}")))
    }
}

fn check_tail(tail: &TailRule) -> Result<()> {
    match tail {
        TailRule::Constant => Ok(()),
        TailRule::Geometric { ratio } => positive_finite(*ratio, "tail ratio"),
    }
}

fn build_form(spec: &WeightSpec) -> Result<Form> {
    Ok(match spec {
        WeightSpec::Constant { value } => {
            positive_finite(*value, "constant weight")?;
            Form::Constant(*value)
        }
        WeightSpec::Power { alpha } => {
            if !alpha.is_finite() {
                return Err(Error::InvalidWeight(format!("power exponent {alpha}")));
            }
            Form::Power(*alpha)
        }
        WeightSpec::PurePower { alpha } => {
            if !alpha.is_finite() || *alpha <= -1.0 {
                return Err(Error::InvalidWeight(format!(
                    "t^{alpha} is not locally integrable at 0 (need alpha > -1)"
                )));
            }
            Form::PurePower(*alpha)
        }
        WeightSpec::Exponential { base, beta } => {
            positive_finite(*base, "exponential base")?;
            if !beta.is_finite() {
                return Err(Error::InvalidWeight(format!("exponential rate {beta}")));
            }
            Form::Exponential {
                rate: beta * base.ln(),
            }
        }
        WeightSpec::TruncatedReciprocal => Form::TruncatedReciprocal,
        WeightSpec::Step { values, tail } => {
            if values.is_empty() {
                return Err(Error::InvalidWeight("step weight needs at least one value".into()));
            }
            for v in values {
                positive_finite(*v, "step value")?;
            }
            check_tail(tail)?;
            let mut prefix = Vec::with_capacity(values.len() + 1);
            prefix.push(0.0);
            for v in values {
                prefix.push(prefix.last().unwrap() + v);
            }
            Form::Step {
                values: values.clone(),
                prefix,
                tail: tail.clone(),
            }
        }
        WeightSpec::Tabulated {
            knots,
            interpolation,
            tail,
        } => {
            if knots.is_empty() || knots[0].0 != 0.0 {
                return Err(Error::InvalidWeight("tabulated weight must start with a knot at t = 0".into()));
            }
            if knots.windows(2).any(|w| !(w[1].0 > w[0].0)) || knots.iter().any(|k| !k.0.is_finite()) {
                return Err(Error::InvalidWeight("tabulated knots must be strictly increasing".into()));
            }
            for k in knots {
                positive_finite(k.1, "tabulated value")?;
            }
            check_tail(tail)?;
            let ts: Vec<f64> = knots.iter().map(|k| k.0).collect();
            let vs: Vec<f64> = knots.iter().map(|k| k.1).collect();
            let mut prefix = vec![0.0];
            for i in 0..ts.len() - 1 {
                let h = ts[i + 1] - ts[i];
                let area = match interpolation {
                    Interpolation::PiecewiseConstant => vs[i] * h,
                    Interpolation::PiecewiseLinear => 0.5 * (vs[i] + vs[i + 1]) * h,
                };
                prefix.push(prefix[i] + area);
            }
            Form::Tabulated {
                ts,
                vs,
                prefix,
                interpolation: *interpolation,
                tail: tail.clone(),
            }
        }
        WeightSpec::Piecewise {
            breakpoints,
            pieces,
        } => {
            if breakpoints.is_empty() || pieces.len() != breakpoints.len() + 1 {
                return Err(Error::InvalidWeight(
                    "piecewise weight needs n breakpoints and n + 1 pieces".into(),
                ));
            }
            if !(breakpoints[0] > 0.0)
                || breakpoints.windows(2).any(|w| !(w[1] > w[0]))
                || breakpoints.iter().any(|b| !b.is_finite())
            {
                return Err(Error::InvalidWeight(
                    "piecewise breakpoints must be positive, finite and strictly increasing".into(),
                ));
            }
            let pieces = pieces
                .iter()
                .map(WeightFunction::from_spec)
                .collect::<Result<Vec<_>>>()?;
            Form::Piecewise {
                breaks: breakpoints.clone(),
                pieces,
            }
        }
    })
}

fn piece_index(breaks: &[f64], t: f64) -> usize {
    // piece i covers (breaks[i-1], breaks[i]]
    breaks.partition_point(|&b| b < t)
}

fn tail_value(last: f64, tail: &TailRule, dist: f64) -> f64 {
    match tail {
        TailRule::Constant => last,
        TailRule::Geometric { ratio } => last * ratio.powf(dist),
    }
}

fn step_value(values: &[f64], tail: &TailRule, n: u64) -> f64 {
    let len = values.len() as u64;
    if n < len {
        values[n as usize]
    } else {
        tail_value(values[values.len() - 1], tail, (n - len + 1) as f64)
    }
}

fn step_antiderivative(values: &[f64], prefix: &[f64], tail: &TailRule, t: f64) -> f64 {
    let len = values.len();
    let n = t.floor();
    if n < len as f64 {
        let n = n as usize;
        return prefix[n] + values[n] * (t - n as f64);
    }
    let last = values[len - 1];
    let base = prefix[len];
    // full tail levels len..n, then a partial level
    let k = n - len as f64;
    match tail {
        TailRule::Constant => base + last * (t - len as f64),
        TailRule::Geometric { ratio } => {
            let r = *ratio;
            let full = if r == 1.0 {
                last * k
            } else {
                // Σ_{i=1}^{k} last r^i
                last * r * ((k * r.ln()).exp_m1() / (r - 1.0))
            };
            base + full + last * r.powf(k + 1.0) * (t - n)
        }
    }
}

fn tab_value(ts: &[f64], vs: &[f64], interp: Interpolation, tail: &TailRule, t: f64) -> f64 {
    let last = ts.len() - 1;
    if t > ts[last] {
        return tail_value(vs[last], tail, t - ts[last]);
    }
    if t <= 0.0 {
        return vs[0];
    }
    // t in (ts[i], ts[i+1]]
    let i = ts.partition_point(|&k| k < t) - 1;
    match interp {
        Interpolation::PiecewiseConstant => vs[i],
        Interpolation::PiecewiseLinear => {
            let s = (t - ts[i]) / (ts[i + 1] - ts[i]);
            vs[i] + s * (vs[i + 1] - vs[i])
        }
    }
}

fn tab_antiderivative(
    ts: &[f64],
    vs: &[f64],
    prefix: &[f64],
    interp: Interpolation,
    tail: &TailRule,
    t: f64,
) -> f64 {
    let last = ts.len() - 1;
    if t >= ts[last] {
        let d = t - ts[last];
        let extra = match tail {
            TailRule::Constant => vs[last] * d,
            TailRule::Geometric { ratio } => {
                let c = ratio.ln();
                if c == 0.0 {
                    vs[last] * d
                } else {
                    vs[last] * (c * d).exp_m1() / c
                }
            }
        };
        return prefix[last] + extra;
    }
    let i = ts.partition_point(|&k| k <= t) - 1;
    let h = t - ts[i];
    let area = match interp {
        Interpolation::PiecewiseConstant => vs[i] * h,
        Interpolation::PiecewiseLinear => {
            let slope = (vs[i + 1] - vs[i]) / (ts[i + 1] - ts[i]);
            vs[i] * h + 0.5 * slope * h * h
        }
    };
    prefix[i] + area
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn evaluate_examples() {
        let w = WeightFunction::truncated_reciprocal();
        assert!(close(w.evaluate(3.0).unwrap(), 1.0 / 3.0, 1e-15));
        let c = WeightFunction::constant(1.0).unwrap();
        assert_eq!(c.evaluate(17.5).unwrap(), 1.0);
        let s = WeightFunction::step(vec![2.0, 4.0, 8.0], TailRule::Geometric { ratio: 2.0 }).unwrap();
        assert_eq!(s.evaluate(2.5).unwrap(), 8.0);
        assert_eq!(s.evaluate(3.5).unwrap(), 16.0);
        assert_eq!(s.evaluate(2.0).unwrap(), 4.0);
    }

    #[test]
    fn evaluate_rejects_negative() {
        let c = WeightFunction::constant(1.0).unwrap();
        assert!(matches!(c.evaluate(-0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn rejects_nonintegrable_and_nonpositive() {
        assert!(WeightFunction::pure_power(-1.0).is_err());
        assert!(WeightFunction::pure_power(-1.5).is_err());
        assert!(WeightFunction::pure_power(-0.5).is_ok());
        assert!(WeightFunction::constant(0.0).is_err());
        assert!(WeightFunction::step(vec![1.0, -1.0], TailRule::Constant).is_err());
        assert!(WeightFunction::step(vec![], TailRule::Constant).is_err());
        assert!(WeightFunction::tabulated(vec![(1.0, 1.0)], Interpolation::PiecewiseLinear, TailRule::Constant).is_err());
    }

    #[test]
    fn side_limits_of_step() {
        let s = WeightFunction::step(vec![2.0, 4.0, 8.0], TailRule::Constant).unwrap();
        assert_eq!(s.value_side(1.0, Side::Left), 2.0);
        assert_eq!(s.value_side(1.0, Side::Right), 4.0);
        assert_eq!(s.value_side(5.0, Side::Right), 8.0);
    }

    #[test]
    fn closed_form_integrals() {
        let w = WeightFunction::truncated_reciprocal();
        assert!(close(w.integral(0.0, 3.0), 1.0 + 3f64.ln(), 1e-14));
        assert!(close(w.integral(5.0, 15.0), 3f64.ln(), 1e-14));
        let e = WeightFunction::exponential(std::f64::consts::E, 1.0).unwrap();
        assert!(close(e.integral(0.0, 1.0), std::f64::consts::E - 1.0, 1e-14));
        let s = WeightFunction::step(vec![2.0, 4.0], TailRule::Constant).unwrap();
        assert!(close(s.integral(0.5, 1.5), 3.0, 1e-15));
        assert!(close(s.integral(0.0, 4.0), 2.0 + 4.0 * 3.0, 1e-15));
        let g = WeightFunction::step(vec![1.0], TailRule::Geometric { ratio: 2.0 }).unwrap();
        // 1 + 2 + 4 + 0.5 * 8
        assert!(close(g.integral(0.0, 3.5), 11.0, 1e-14));
        let p = WeightFunction::pure_power(2.0).unwrap();
        assert!(close(p.integral(0.0, 2.0), 8.0 / 3.0, 1e-15));
    }

    #[test]
    fn tabulated_linear_integral_and_value() {
        let w = WeightFunction::tabulated(
            vec![(0.0, 1.0), (1.0, 3.0), (2.0, 1.0)],
            Interpolation::PiecewiseLinear,
            TailRule::Constant,
        )
        .unwrap();
        assert!(close(w.value(0.5), 2.0, 1e-15));
        assert!(close(w.integral(0.0, 2.0), 4.0, 1e-15));
        assert!(close(w.integral(0.0, 3.0), 5.0, 1e-15));
        assert_eq!(w.breakpoints(0.0, 5.0), vec![1.0, 2.0]);
        assert_eq!(w.monotonicity_on(0.2, 0.8), Monotonicity::Increasing);
        assert_eq!(w.monotonicity_on(1.2, 1.8), Monotonicity::Decreasing);
    }

    #[test]
    fn piecewise_combination() {
        let w = WeightFunction::piecewise(
            vec![1.0],
            vec![WeightSpec::Constant { value: 2.0 }, WeightSpec::Power { alpha: 1.0 }],
        )
        .unwrap();
        assert_eq!(w.value(0.5), 2.0);
        assert_eq!(w.value(1.0), 2.0);
        assert!(close(w.value(2.0), 3.0, 1e-15));
        assert_eq!(w.value_side(1.0, Side::Right), 2.0);
        // ∫_0^1 2 + ∫_1^2 (1+t) = 2 + 2.5
        assert!(close(w.integral(0.0, 2.0), 4.5, 1e-15));
        assert_eq!(w.breakpoints(0.0, 3.0), vec![1.0]);
    }

    #[test]
    fn descriptor_json_roundtrip() {
        let json = r#"{"family":"step","values":[1,2],"tail":{"kind":"geometric","ratio":0.5}}"#;
        let spec: WeightSpec = serde_json::from_str(json).unwrap();
        let w = WeightFunction::from_spec(&spec).unwrap();
        assert_eq!(w.value(1.5), 2.0);
        let tr: WeightSpec = serde_json::from_str(r#"{"family":"truncated-reciprocal"}"#).unwrap();
        assert_eq!(tr, WeightSpec::TruncatedReciprocal);
        let bad = serde_json::from_str::<WeightSpec>(r#"{"family":"constant","value":1,"extra":2}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn tail_certificates() {
        assert!(WeightFunction::constant(1.0).unwrap().tail_integral_diverges());
        assert!(!WeightFunction::exponential(2.0, -1.0).unwrap().tail_integral_diverges());
        assert!(!WeightFunction::power(-2.0).unwrap().tail_integral_diverges());
        assert!(WeightFunction::power(-1.0).unwrap().tail_integral_diverges());
    }
}
