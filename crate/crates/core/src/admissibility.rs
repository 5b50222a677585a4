//! Doubling scans, Poincaré lower-bound certificates and the admissibility classifier.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ap_condition::{ap_sup, ap_value, ApMode, ApParams};
use crate::error::{Error, Result};
use crate::measure_engine::{anchor_level, ball_decomposition, ball_measure, directed_halfball_measure};
use crate::radial_weight::quadrature::integrate_pieces;
use crate::radial_weight::{
    ess_extremum, integrate, sublevel_intervals, Extremum, IntegrandSpec, Tolerance,
};
use crate::scan::{serialize_float, scan_sup, Region, ScanDomain, ScanVerdict, SupEstimate};
use crate::tree_geometry::{level_index, TreeSpace};

/// Doubling scans share the supremum machinery.
pub type DoublingReport = SupEstimate;

/// `μ(B(x, 2r)) / μ(B(x, r))`.
pub fn doubling_ratio(space: &TreeSpace, t: f64, r: f64, tol: &Tolerance) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("radius {r}")));
    }
    Ok(ball_measure(space, t, 2.0 * r, tol)? / ball_measure(space, t, r, tol)?)
}

/// Supremum scan of the doubling ratio over every centre and radius of `domain`.
pub fn doubling_sup(space: &TreeSpace, domain: &ScanDomain, tol: &Tolerance) -> Result<DoublingReport> {
    let f = |t: f64, r: f64| doubling_ratio(space, t, r, tol);
    scan_sup(space, domain, Region::All, &f)
}

/// Which test function a certificate instantiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateCase {
    /// `p = 1`: profile is the arclength of a sublevel set.
    P1Sublevel,
    /// `p > 1`: profile is the integral of the dual kernel.
    PPower,
    /// Ball centred at the root of the half line.
    RootBall,
}

/// Choice of `ε` in the `p = 1` sublevel set `{K^{j-j(x)} μ/λ < m + ε}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsilonRule {
    /// `ε = fraction · m`.
    pub fraction: f64,
}

impl Default for EpsilonRule {
    fn default() -> Self {
        EpsilonRule { fraction: 0.01 }
    }
}

/// Both sides of the Poincaré inequality for one explicit test function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub p: f64,
    pub t: f64,
    pub r: f64,
    pub case: CertificateCase,
    pub vertex_center: bool,
    /// Essential infimum `m` (p = 1).
    pub m: Option<f64>,
    pub epsilon: Option<f64>,
    /// `E_ε` as radial intervals (p = 1).
    pub sublevel_set: Vec<(f64, f64)>,
    /// Arclength of `E_ε` (p = 1).
    pub a: Option<f64>,
    /// Value of the profile beyond `F(x, r/2)` (p > 1).
    pub b: Option<f64>,
    pub ball_measure: f64,
    pub e1_measure: f64,
    pub e2_measure: f64,
    pub mean_u: f64,
    pub lhs: f64,
    pub rhs: f64,
    #[serde(serialize_with = "serialize_float")]
    pub implied_bound: f64,
}

/// Radial test-function profile `U` on `[t, t_half]`: `U(s) = ∫_t^s density`.
enum Profile<'a> {
    Kernel(IntegrandSpec<'a>),
    Sublevel(Vec<(f64, f64)>),
}

struct Construction<'a> {
    space: &'a TreeSpace,
    t: f64,
    t_half: f64,
    profile: Profile<'a>,
    /// Mass density of `T₁`: `K^{⌈s⌉ - j₁} μ`.
    t1_mass: IntegrandSpec<'a>,
    tol: Tolerance,
}

impl Construction<'_> {
    fn density(&self, w: f64) -> f64 {
        match &self.profile {
            Profile::Kernel(k) => k.value(w),
            Profile::Sublevel(iv) => {
                if iv.iter().any(|&(a, b)| a < w && w < b) {
                    self.space.lambda().value(w)
                } else {
                    0.0
                }
            }
        }
    }

    fn u(&self, s: f64) -> Result<f64> {
        match &self.profile {
            Profile::Kernel(k) => integrate(k, self.t, s, &self.tol),
            Profile::Sublevel(iv) => Ok(iv
                .iter()
                .map(|&(a, b)| self.space.metric_length(a, b.min(s)))
                .sum()),
        }
    }

    fn mass(&self, a: f64, b: f64) -> f64 {
        integrate(&self.t1_mass, a, b, &self.tol).unwrap_or(f64::NAN)
    }

    /// `∫_lo^hi density(w) · mass(w, end) dw`.
    fn weighted(&self, lo: f64, hi: f64, end: f64) -> Result<f64> {
        if hi <= lo {
            return Ok(0.0);
        }
        let f = |w: f64| self.density(w) * self.mass(w, end);
        match &self.profile {
            Profile::Kernel(k) => {
                let mut pts = k.pieces(lo, hi);
                pts.extend(self.t1_mass.pieces(lo, hi));
                pts.sort_by(f64::total_cmp);
                pts.dedup();
                let e = if lo == 0.0 { k.exponent_at_zero() } else { 0.0 };
                Ok(integrate_pieces(&f, &pts, e, &self.tol)?.value)
            }
            Profile::Sublevel(iv) => {
                let mut total = 0.0;
                for &(a, b) in iv {
                    let (a, b) = (a.max(lo), b.min(hi));
                    if a < b {
                        let mut pts = self.t1_mass.pieces(a, b);
                        pts.extend(self.space.lambda().breakpoints(a, b));
                        pts.sort_by(f64::total_cmp);
                        pts.dedup();
                        total += integrate_pieces(&f, &pts, 0.0, &self.tol)?.value;
                    }
                }
                Ok(total)
            }
        }
    }

    /// `s*` in `[t, t_half]` with `U(s*) = level`, for `0 < level < U(t_half)`.
    fn crossing(&self, level: f64) -> Result<f64> {
        if let Profile::Sublevel(iv) = &self.profile {
            let mut acc = 0.0;
            for &(a, b) in iv {
                let len = self.space.metric_length(a, b);
                if acc + len >= level {
                    return self.space.descendant_at(a, level - acc).map(|s| s.min(b));
                }
                acc += len;
            }
            return Ok(self.t_half);
        }
        let (mut lo, mut hi) = (self.t, self.t_half);
        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            let g = self.u(x)? - level;
            if g.abs() <= 1e-13 * level {
                return Ok(x);
            }
            if g < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(1e-300) {
                break;
            }
            let d = self.density(x);
            let newton = x - g / d;
            x = if d > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Poincaré certificate on `B(x, r)` for `|x| = t`, using the subtree `T₁` through
/// the nearest vertex strictly below `x`.
///
/// For `K = 1` the centre must be off the root; use [`root_poincare_certificate`] there.
pub fn poincare_certificate(
    space: &TreeSpace,
    p: f64,
    t: f64,
    r: f64,
    eps: EpsilonRule,
    tol: &Tolerance,
) -> Result<Certificate> {
    if !(t >= 0.0) || !t.is_finite() || !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("certificate needs t ≥ 0, r > 0 (t = {t}, r = {r})")));
    }
    if t == 0.0 && space.branching() == 1 {
        return Err(Error::Domain(
            "balls centred at the root of the half line use root_poincare_certificate".into(),
        ));
    }
    let case = if p == 1.0 { CertificateCase::P1Sublevel } else { CertificateCase::PPower };
    build(space, p, t, r, eps, tol, case)
}

/// Certificate for the ball `B(0, R) = [0, x_R)` of the half line (`K = 1`).
pub fn root_poincare_certificate(space: &TreeSpace, p: f64, radius: f64, tol: &Tolerance) -> Result<Certificate> {
    if space.branching() != 1 {
        return Err(Error::Domain("root certificates are defined for K = 1; use poincare_certificate".into()));
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::Domain(format!("radius {radius}")));
    }
    build(space, p, 0.0, radius, EpsilonRule::default(), tol, CertificateCase::RootBall)
}

fn build(
    space: &TreeSpace,
    p: f64,
    t: f64,
    r: f64,
    eps: EpsilonRule,
    tol: &Tolerance,
    case: CertificateCase,
) -> Result<Certificate> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!("exponent p = {p}")));
    }
    let k = space.branching();
    let jx = level_index(t);
    let j1 = anchor_level(t, true);
    let vertex = t.fract() == 0.0;
    let t_half = space.descendant_at(t, 0.5 * r)?;
    let t_full = space.descendant_at(t, r)?;
    let t1_mass = IntegrandSpec::weight(space.mu()).with_multiplicity(k, j1);
    let full_mass = IntegrandSpec::weight(space.mu()).with_multiplicity(k, jx);

    let (profile, m, epsilon, set, a, b) = if p == 1.0 {
        let f = IntegrandSpec::new()
            .times(space.mu())
            .over(space.lambda())
            .with_multiplicity(k, jx);
        let m = ess_extremum(&f, t, t_half, Extremum::Inf, tol)?;
        let epsilon = eps.fraction * m;
        if !(epsilon > 0.0) {
            return Err(Error::DegenerateConstruction(format!("ε = {epsilon} for m = {m}")));
        }
        let set = sublevel_intervals(&f, t, t_half, m + epsilon, tol)?;
        let a: f64 = set.iter().map(|&(lo, hi)| space.metric_length(lo, hi)).sum();
        if !(a > 0.0) {
            return Err(Error::DegenerateConstruction("the sublevel set has zero length".into()));
        }
        (Profile::Sublevel(set.clone()), Some(m), Some(epsilon), set, Some(a), None)
    } else {
        let kernel = IntegrandSpec::holder_kernel(space.mu(), space.lambda(), k, jx, p)?;
        (Profile::Kernel(kernel), None, None, Vec::new(), None, None)
    };
    let c = Construction {
        space,
        t,
        t_half,
        profile,
        t1_mass,
        tol: *tol,
    };
    let u_end = match a {
        Some(a) => a,
        None => c.u(t_half).map_err(|e| match e {
            Error::Divergent { .. } => {
                Error::DegenerateConstruction("the dual kernel is not integrable near the centre".into())
            }
            e => e,
        })?,
    };
    let b = b.or(if p > 1.0 { Some(u_end) } else { None });

    let dec = ball_decomposition(space, t, r, tol)?;
    let ball = dec.total();
    let mut e1 = dec.ancestor_segment + dec.side_branches.iter().map(|s| s.measure).sum::<f64>() + dec.root_overflow;
    if vertex && k >= 2 {
        e1 += (k - 1) as f64 * directed_halfball_measure(space, t as u64, r, tol)?;
    }
    let e2 = c.mass(t_half, t_full);
    if e1 == 0.0 && e2 == 0.0 {
        return Err(Error::DegenerateConstruction("both E₁ and E₂ are null".into()));
    }
    let inner_mass = c.mass(t, t_half);
    let u_integral = c.weighted(t, t_half, t_half)?;
    let mean_u = (u_integral + u_end * e2) / ball;

    // ∫_{T₁ ∩ F(x, r/2)} |U − u_B| dμ
    let deviation = if mean_u >= u_end {
        mean_u * inner_mass - u_integral
    } else {
        let s = c.crossing(mean_u)?;
        let below = mean_u * c.mass(t, s) - c.weighted(t, s, s)?;
        let above = c.weighted(s, t_half, t_half)?;
        below + above
    };
    let lhs = (mean_u * e1 + deviation + (u_end - mean_u).abs() * e2) / ball;

    let gradient_mass = if p == 1.0 {
        let mut g = 0.0;
        for &(lo, hi) in &set {
            g += integrate(&full_mass, lo, hi, tol)?;
        }
        g
    } else {
        u_end
    };
    let rhs = r * (gradient_mass / ball).powf(1.0 / p);
    if !(rhs > 0.0) {
        return Err(Error::DegenerateConstruction(format!("right-hand side {rhs}")));
    }
    Ok(Certificate {
        p,
        t,
        r,
        case,
        vertex_center: vertex,
        m,
        epsilon,
        sublevel_set: set,
        a,
        b,
        ball_measure: ball,
        e1_measure: e1,
        e2_measure: e2,
        mean_u,
        lhs,
        rhs,
        implied_bound: lhs / rhs,
    })
}

/// Doubling and Poincaré constants implied by an `A_p` bound `C_A`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoremConstants {
    pub doubling: f64,
    pub poincare: f64,
}

pub fn theorem_constants(p: f64, c_a: f64) -> Result<TheoremConstants> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!("exponent p = {p}")));
    }
    if !(c_a > 0.0) || !c_a.is_finite() {
        return Err(Error::InvalidParameter(format!("A_p constant {c_a} must be positive and finite")));
    }
    Ok(if p == 1.0 {
        TheoremConstants {
            doubling: 4.0 * c_a,
            poincare: 8.0 * c_a,
        }
    } else {
        TheoremConstants {
            doubling: c_a * 2f64.powf(p + 1.0),
            poincare: c_a.powf(2.0 + 1.0 / p) * 2f64.powf(1.0 / p + 2.0 * p + 4.0),
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    Admissible,
    NotAdmissible,
    Inconclusive,
}

/// One point of a divergence sequence with the direct evidence measured there.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub stage: usize,
    pub t: f64,
    pub r: f64,
    #[serde(serialize_with = "serialize_float")]
    pub ap_value: f64,
    pub doubling_ratio: Option<f64>,
    pub certificate_bound: Option<f64>,
}

/// Knobs of [`classify`].
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifyOptions {
    /// `None` picks full mode for `K ≥ 2` and far-from-root with `c = 8` for `K = 1`.
    pub mode: Option<ApMode>,
    pub domain: ScanDomain,
    pub tol: Tolerance,
    pub seed: u64,
    pub top_certificates: usize,
    pub random_certificates: usize,
    /// Relative slack allowed when comparing evidence with the theorem constants.
    pub consistency_tol: f64,
    pub epsilon: EpsilonRule,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            mode: None,
            domain: ScanDomain::default(),
            tol: Tolerance::default(),
            seed: 0,
            top_certificates: 32,
            random_certificates: 32,
            consistency_tol: 1e-6,
            epsilon: EpsilonRule::default(),
        }
    }
}

pub fn default_mode(branching: u32) -> ApMode {
    if branching >= 2 {
        ApMode::Full
    } else {
        ApMode::FarFromRoot { c: 8.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub classification: Classification,
    pub p: f64,
    pub mode: ApMode,
    pub c_a: Option<f64>,
    pub constants: Option<TheoremConstants>,
    pub ap_scan: SupEstimate,
    pub doubling: DoublingReport,
    #[serde(serialize_with = "serialize_float")]
    pub doubling_max: f64,
    pub doubling_violations: usize,
    pub certificates: Vec<Certificate>,
    pub certificate_failures: usize,
    #[serde(serialize_with = "serialize_float")]
    pub certificate_max: f64,
    pub certificate_violations: usize,
    pub witnesses: Vec<Witness>,
    /// The `A_p` label agrees with the direct doubling and certificate evidence.
    pub evidence_agrees: bool,
    pub notes: Vec<String>,
}

/// Decide `p`-admissibility from the `A_p` scan and cross-check it against
/// doubling ratios and Poincaré certificates.
pub fn classify(space: &TreeSpace, p: f64, options: &ClassifyOptions) -> Result<Verdict> {
    let mode = options.mode.unwrap_or_else(|| default_mode(space.branching()));
    let params = ApParams::new(p, mode)?;
    let tol = &options.tol;
    let ap = ap_sup(space, &params, &options.domain, tol)?;
    let doubling = doubling_sup(space, &options.domain, tol)?;
    let reach = mode_reach(space.branching(), mode);
    let mut notes = Vec::new();
    if ap.failed > 0 {
        notes.push(format!("{} A_p cells failed to evaluate", ap.failed));
    }
    let doubling_max = doubling.estimate;

    let mut verdict = Verdict {
        classification: Classification::Inconclusive,
        p,
        mode,
        c_a: None,
        constants: None,
        ap_scan: ap.clone(),
        doubling_max,
        doubling_violations: 0,
        doubling: doubling.clone(),
        certificates: Vec::new(),
        certificate_failures: 0,
        certificate_max: f64::NAN,
        certificate_violations: 0,
        witnesses: Vec::new(),
        evidence_agrees: true,
        notes,
    };

    match ap.verdict {
        ScanVerdict::Bounded => {
            let c_a = ap.estimate;
            let constants = theorem_constants(p, c_a)?;
            let slack = 1.0 + options.consistency_tol;
            verdict.c_a = Some(c_a);
            verdict.constants = Some(constants);
            verdict.doubling_violations = doubling
                .cells
                .iter()
                .filter(|c| c.value > constants.doubling * slack)
                .count();
            let sample = certificate_sample(space, &ap, options);
            let results: Vec<Result<Certificate>> = sample
                .par_iter()
                .map(|&(t, r)| poincare_certificate(space, p, t, r, options.epsilon, tol))
                .collect();
            for res in results {
                match res {
                    Ok(c) => verdict.certificates.push(c),
                    Err(_) => verdict.certificate_failures += 1,
                }
            }
            verdict.certificate_max = verdict
                .certificates
                .iter()
                .map(|c| c.implied_bound)
                .fold(f64::NAN, f64::max);
            verdict.certificate_violations = verdict
                .certificates
                .iter()
                .filter(|c| c.implied_bound > constants.poincare * slack)
                .count();
            let doubling_diverges = doubling.verdict == ScanVerdict::Diverging;
            verdict.evidence_agrees =
                !doubling_diverges && verdict.doubling_violations == 0 && verdict.certificate_violations == 0;
            if !reach.bounded_decides {
                verdict.notes.push(format!(
                    "a bounded scan in mode {mode:?} does not characterise admissibility for K = {}",
                    space.branching()
                ));
            } else if verdict.evidence_agrees {
                verdict.classification = Classification::Admissible;
            } else {
                verdict.notes.push(format!(
                    "bounded A_p scan contradicted by direct evidence: {} doubling violations (doubling scan {:?}), {} certificate violations",
                    verdict.doubling_violations, doubling.verdict, verdict.certificate_violations
                ));
            }
            if verdict.certificate_failures > 0 {
                verdict
                    .notes
                    .push(format!("{} sampled certificates could not be built", verdict.certificate_failures));
            }
        }
        ScanVerdict::Diverging => {
            verdict.classification = if reach.diverging_decides {
                Classification::NotAdmissible
            } else {
                verdict.notes.push(format!(
                    "a diverging scan in mode {mode:?} does not rule out admissibility for K = {}",
                    space.branching()
                ));
                Classification::Inconclusive
            };
            verdict.witnesses = witnesses(space, p, &ap, options);
            let cert_growth = growing(verdict.witnesses.iter().filter_map(|w| w.certificate_bound));
            let ratio_growth = growing(verdict.witnesses.iter().filter_map(|w| w.doubling_ratio));
            verdict.evidence_agrees = doubling.verdict == ScanVerdict::Diverging || cert_growth || ratio_growth;
            if !verdict.evidence_agrees {
                verdict
                    .notes
                    .push("diverging A_p scan without diverging doubling or certificate evidence".into());
            }
        }
        ScanVerdict::Inconclusive => {
            verdict.notes.push(format!(
                "A_p scan inconclusive (growth factor {:.4} across the last expansion)",
                ap.growth_factor
            ));
        }
    }
    Ok(verdict)
}

/// Which scan outcomes settle admissibility in a given mode.
///
/// For `K = 1` the far-from-root condition characterises admissibility when
/// `c > 1`; a bounded full scan implies it and a diverging one with `c ≤ 1`
/// implies divergence for every larger `c`. For `K ≥ 2` the full condition
/// characterises it and a diverging restricted scan implies the full one diverges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModeReach {
    pub bounded_decides: bool,
    pub diverging_decides: bool,
}

pub fn mode_reach(branching: u32, mode: ApMode) -> ModeReach {
    let (bounded_decides, diverging_decides) = match (branching, mode) {
        (1, ApMode::FarFromRoot { c }) => (c > 1.0, true),
        (1, ApMode::Full) => (true, false),
        (_, ApMode::Full) => (true, true),
        (_, ApMode::FarFromRoot { .. }) => (false, true),
    };
    ModeReach {
        bounded_decides,
        diverging_decides,
    }
}

fn growing(xs: impl Iterator<Item = f64>) -> bool {
    let v: Vec<f64> = xs.filter(|x| x.is_finite()).collect();
    v.len() >= 3 && v.last().unwrap() > &(2.0 * v[0])
}

fn certificate_sample(space: &TreeSpace, ap: &SupEstimate, options: &ClassifyOptions) -> Vec<(f64, f64)> {
    let usable = |t: f64| t > 0.0 || space.branching() >= 2;
    let mut idx: Vec<usize> = (0..ap.cells.len())
        .filter(|&i| ap.cells[i].value.is_finite() && usable(ap.cells[i].t))
        .collect();
    idx.sort_by(|&a, &b| ap.cells[b].value.total_cmp(&ap.cells[a].value).then(a.cmp(&b)));
    let top = options.top_certificates.min(idx.len());
    let mut chosen: Vec<usize> = idx[..top].to_vec();
    let mut rest: Vec<usize> = idx[top..].to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    rest.shuffle(&mut rng);
    chosen.extend(rest.into_iter().take(options.random_certificates));
    chosen.into_iter().map(|i| (ap.cells[i].t, ap.cells[i].r)).collect()
}

fn witnesses(space: &TreeSpace, p: f64, ap: &SupEstimate, options: &ClassifyOptions) -> Vec<Witness> {
    let tol = &options.tol;
    let mut points: Vec<(usize, f64, f64, f64)> = Vec::new();
    for (k, e) in ap.trace.iter().enumerate() {
        if let Some(am) = e.argmax {
            if !points.iter().any(|q| q.1 == am.t && q.2 == am.r) {
                points.push((k, am.t, am.r, e.running_sup));
            }
        }
    }
    points
        .par_iter()
        .map(|&(stage, t, r, v)| {
            let ratio = doubling_ratio(space, t, r, tol).ok();
            let cert = if t > 0.0 || space.branching() >= 2 {
                poincare_certificate(space, p, t, r, options.epsilon, tol)
                    .ok()
                    .map(|c| c.implied_bound)
            } else {
                None
            };
            Witness {
                stage,
                t,
                r,
                ap_value: if v.is_nan() { ap_value(space, p, t, r, tol).unwrap_or(f64::NAN) } else { v },
                doubling_ratio: ratio,
                certificate_bound: cert,
            }
        })
        .collect()
}
