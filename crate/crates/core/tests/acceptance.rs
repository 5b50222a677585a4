//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest harness.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use aptree::admissibility::{
    classify, doubling_ratio, doubling_sup, poincare_certificate, Classification, ClassifyOptions, EpsilonRule,
};
use aptree::ap_condition::{a1_value, ap_numerator, ap_sup, ap_value, ApMode, ApParams};
use aptree::catalog::{entries, lookup, Expected};
use aptree::measure_engine::{ball_measure, halfball_measure};
use aptree::oracle::DiscreteTree;
use aptree::radial_weight::{Tolerance, WeightFunction, WeightSpec};
use aptree::scan::{ScanDomain, ScanVerdict};
use aptree::tree_geometry::TreeSpace;

type Outcome = Result<String, String>;

fn tol() -> Tolerance {
    Tolerance::default()
}

fn lebesgue(k: u32) -> TreeSpace {
    let one = WeightFunction::constant(1.0).unwrap();
    TreeSpace::new(k, one.clone(), one).unwrap()
}

fn reciprocal() -> TreeSpace {
    lookup("truncated-reciprocal").unwrap().space().unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let el = start.elapsed();
    ensure(el <= limit, || format!("runtime {:.2?} exceeds {:.0?}", el, limit))
}

fn c1_constant_weight() -> Outcome {
    let start = Instant::now();
    let x = lebesgue(1);
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        for j in 0..10 {
            let t = 0.5 + 10f64.powf(i as f64 * 0.4);
            let r = t * (0.05 + 0.095 * j as f64);
            let a = ap_value(&x, 2.0, t, r, &tol()).map_err(|e| e.to_string())?;
            let b = a1_value(&x, t, r, &tol()).map_err(|e| e.to_string())?;
            worst = worst.max((a - 1.0).abs()).max((b - 1.0).abs());
        }
    }
    ensure(worst <= 1e-9, || format!("max |A - 1| = {worst:e} > 1e-9"))?;
    let d = doubling_sup(&x, &ScanDomain::default(), &tol()).map_err(|e| e.to_string())?;
    ensure((d.estimate - 2.0).abs() <= 1e-6, || format!("doubling sup {} not 2 ± 1e-6", d.estimate))?;
    within(Duration::from_secs(1), start)?;
    Ok(format!(
        "max |A_2 - 1|, |A_1 - 1| = {worst:.1e} ≤ 1e-9 on 100 cells; doubling sup {:.9} (2 ± 1e-6); {:.2?}",
        d.estimate,
        start.elapsed()
    ))
}

fn c2_halfball_bound() -> Outcome {
    let start = Instant::now();
    let x = reciprocal();
    let bound = 3f64.ln() + 1e-9;
    let mut worst: f64 = 0.0;
    for t in [4.0, 40.0, 400.0, 4000.0] {
        for beta in [0.1, 0.25, 0.5] {
            let r = beta * t;
            let top = x.ancestor_at(t, r).map_err(|e| e.to_string())?;
            let m = halfball_measure(&x, top, 2.0 * r, &tol()).map_err(|e| e.to_string())?;
            worst = worst.max(m);
        }
    }
    ensure(worst <= bound, || format!("max half-ball mass {worst} exceeds ln 3 + 1e-9"))?;
    within(Duration::from_secs(1), start)?;
    Ok(format!("max μ(F(x̄^r, 2r)) = {worst:.12} ≤ ln 3 + 1e-9 over 12 cells; {:.2?}", start.elapsed()))
}

fn c3_dichotomy() -> Outcome {
    let start = Instant::now();
    let x = reciprocal();
    let params = ApParams::new(2.0, ApMode::far(0.5)).unwrap();
    let short = ScanDomain {
        t_min: 1.0,
        t_max: 1e3,
        ..ScanDomain::default()
    };
    let long = ScanDomain {
        t_max: 1e6,
        ..short.clone()
    };
    let a = ap_sup(&x, &params, &short, &tol()).map_err(|e| e.to_string())?;
    let b = ap_sup(&x, &params, &long, &tol()).map_err(|e| e.to_string())?;
    ensure(a.verdict == ScanVerdict::Bounded && b.verdict == ScanVerdict::Bounded, || {
        format!("far scans {:?} / {:?}, expected bounded", a.verdict, b.verdict)
    })?;
    let drift = (b.estimate - a.estimate).abs() / a.estimate;
    ensure(drift < 0.01, || format!("estimate drifts {drift:.3e} between t ≤ 1e3 and t ≤ 1e6"))?;
    let d = doubling_sup(&x, &ScanDomain::default(), &tol()).map_err(|e| e.to_string())?;
    ensure(d.verdict == ScanVerdict::Diverging, || format!("doubling scan {:?}", d.verdict))?;
    let mut rel = Vec::new();
    for k in [5.0f64, 10.0] {
        let t = k.exp();
        let got = doubling_ratio(&x, t, t / 2.0, &tol()).map_err(|e| e.to_string())?;
        let want = (1.0 + (2.0 * t).ln()) / 3f64.ln();
        let e = (got - want).abs() / want;
        ensure(e < 0.005, || format!("doubling ratio at e^{k}: {got} vs {want}"))?;
        ensure(d.estimate >= got * (1.0 - 1e-9), || format!("scan sup {} below ratio at e^{k}", d.estimate))?;
        rel.push(got);
    }
    within(Duration::from_secs(30), start)?;
    Ok(format!(
        "far c=1/2 bounded, C_A {:.6} → {:.6} (drift {drift:.1e} < 1%); doubling diverging, ratios {:.4} / {:.4} at e^5 / e^10 (≤ 0.5%); {:.2?}",
        a.estimate,
        b.estimate,
        rel[0],
        rel[1],
        start.elapsed()
    ))
}

fn c4_spot_values() -> Outcome {
    let x = reciprocal();
    let a = ap_value(&x, 2.0, 10.0, 5.0, &tol()).map_err(|e| e.to_string())?;
    ensure((a - 1.3733).abs() <= 1e-3, || format!("A_2(10, 5) = {a}"))?;
    let q = TreeSpace::new(1, WeightFunction::constant(1.0).unwrap(), WeightFunction::pure_power(2.0).unwrap()).unwrap();
    let b = ap_value(&q, 2.0, 0.01, 1.0, &tol()).map_err(|e| e.to_string())?;
    ensure((b - 132.0).abs() <= 0.5, || format!("A_2 for s² at (0.01, 1) = {b}"))?;
    let s = ap_sup(&q, &ApParams::new(2.0, ApMode::Full).unwrap(), &ScanDomain::default(), &tol())
        .map_err(|e| e.to_string())?;
    ensure(s.verdict == ScanVerdict::Diverging, || format!("full scan for s²: {:?}", s.verdict))?;
    Ok(format!("A_2 = {a:.6} (1.3733 ± 1e-3); s²: {b:.4} (132 ± 0.5); full scan diverging"))
}

fn c5_holder_floor() -> Outcome {
    let start = Instant::now();
    let spaces: Vec<TreeSpace> = entries().iter().map(|e| e.space().unwrap()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut violations = 0;
    let mut failures = 0;
    let mut unresolved = 0;
    let mut min_ratio = f64::INFINITY;
    for _ in 0..10_000 {
        let x = &spaces[rng.gen_range(0..spaces.len())];
        let t = if rng.gen_bool(0.05) { 0.0 } else { 10f64.powf(rng.gen_range(-3.0..1.5)) };
        let r = 10f64.powf(rng.gen_range(-3.0..1.2));
        let p = if rng.gen_bool(0.2) { 1.0 } else { rng.gen_range(1.0..6.0) };
        // Ancestor and descendant coordinates carry an error of about this relative size
        if x.relative_resolution(t, r) > 1e-12 {
            unresolved += 1;
            continue;
        }
        let (Ok(v), Ok(num), Ok(down)) = (
            ap_value(x, p, t, r, &tol()),
            ap_numerator(x, t, r, &tol()),
            halfball_measure(x, t, r, &tol()),
        ) else {
            failures += 1;
            continue;
        };
        let floor = (num * 2.0 * r / (2.0 * down)).max(0.5);
        min_ratio = min_ratio.min(v / floor);
        if v < floor * (1.0 - 1e-9) - 1e-9 {
            violations += 1;
        }
    }
    ensure(violations == 0, || format!("{violations} violations of the Hölder floor"))?;
    ensure(failures == 0, || format!("{failures} draws failed to evaluate"))?;
    Ok(format!(
        "0 violations in {} resolvable draws of 10^4 ({unresolved} below float resolution skipped), min A_p / floor = {min_ratio:.9}; {:.2?}",
        10_000 - unresolved,
        start.elapsed()
    ))
}

fn c6_oracle() -> Outcome {
    let start = Instant::now();
    let cases: [(&str, &[(f64, f64)]); 5] = [
        ("lebesgue-halfline", &[(4.0, 2.5), (6.0, 3.0)]),
        ("truncated-reciprocal", &[(8.0, 4.0), (2.0, 1.5)]),
        ("shifted-power", &[(3.0, 2.0), (5.0, 4.5)]),
        ("binary-lebesgue", &[(0.0, 1.0), (1.5, 1.0), (3.0, 2.5)]),
        ("binary-truncated-reciprocal", &[(2.0, 1.5), (4.0, 2.25)]),
    ];
    let mut worst: f64 = 0.0;
    let mut checks = 0;
    for (name, points) in cases {
        let space = lookup(name).unwrap().space().unwrap();
        let t16 = DiscreteTree::build(&space, 12, 16).map_err(|e| e.to_string())?;
        let t32 = DiscreteTree::build(&space, 12, 32).map_err(|e| e.to_string())?;
        for &(t, r) in points {
            let ball = ball_measure(&space, t, r, &tol()).map_err(|e| e.to_string())?;
            let ap = ap_value(&space, 2.0, t, r, &tol()).map_err(|e| e.to_string())?;
            let mut errs = Vec::new();
            for tree in [&t16, &t32] {
                let v = tree.node_at(t).map_err(|e| e.to_string())?;
                let b = tree.ball_measure(v, r);
                let a = tree.ap_value(2.0, v, r).map_err(|e| e.to_string())?;
                ensure(!b.truncated && !a.truncated, || format!("{name} ({t}, {r}) truncated"))?;
                let eb = (b.value - ball).abs() / ball;
                let ea = (a.value - ap).abs() / ap;
                ensure(eb < 0.01 && ea < 0.01, || format!("{name} ({t}, {r}): errors {eb:e}, {ea:e}"))?;
                worst = worst.max(eb).max(ea);
                errs.push((eb, ea));
            }
            ensure(errs[1].0 <= errs[0].0 + 1e-12 && errs[1].1 <= errs[0].1 + 1e-12, || {
                format!("{name} ({t}, {r}): no improvement from M = 16 to 32: {errs:?}")
            })?;
            checks += 1;
        }
        if space.branching() >= 2 {
            let k = 16 * 3 + 5;
            let a = t16.node_on_branch(k, 0).map_err(|e| e.to_string())?;
            let b = t16.node_on_branch(k, 6).map_err(|e| e.to_string())?;
            let va = t16.ap_value_along(2.0, a, 2.0, 0).map_err(|e| e.to_string())?;
            let vb = t16.ap_value_along(2.0, b, 2.0, 41).map_err(|e| e.to_string())?;
            ensure(a != b && va.value == vb.value, || format!("{name}: branch values {} vs {}", va.value, vb.value))?;
            ensure(t16.ball_measure(a, 2.0).value == t16.ball_measure(b, 2.0).value, || {
                format!("{name}: ball differs between branches")
            })?;
        }
    }
    within(Duration::from_secs(120), start)?;
    Ok(format!(
        "{checks} points, max relative error {worst:.2e} < 1%, non-increasing from M = 16 to 32; branches agree exactly; {:.2?}",
        start.elapsed()
    ))
}

fn classify_all() -> Result<Vec<(String, Expected, f64, aptree::admissibility::Verdict)>, String> {
    let mut out = Vec::new();
    for e in entries() {
        let space = e.space().unwrap();
        for p in [1.0, 1.5, 2.0, 4.0] {
            let v = classify(&space, p, &ClassifyOptions::default()).map_err(|err| format!("{}: {err}", e.name))?;
            out.push((e.name.clone(), e.expected, p, v));
        }
    }
    Ok(out)
}

fn c7_constants(all: &[(String, Expected, f64, aptree::admissibility::Verdict)]) -> Outcome {
    let mut cases = 0;
    let mut certs = 0;
    let mut cells = 0;
    let mut worst_d: f64 = 0.0;
    let mut worst_p: f64 = 0.0;
    for (name, _, p, v) in all {
        if v.classification != Classification::Admissible {
            continue;
        }
        cases += 1;
        let c = v.constants.expect("constants for admissible verdicts");
        ensure(v.doubling_violations == 0, || format!("{name} p={p}: {} doubling violations", v.doubling_violations))?;
        ensure(v.certificate_violations == 0, || {
            format!("{name} p={p}: {} certificate violations", v.certificate_violations)
        })?;
        ensure(!v.certificates.is_empty(), || format!("{name} p={p}: no certificates"))?;
        for cell in &v.doubling.cells {
            if cell.value.is_finite() {
                cells += 1;
                worst_d = worst_d.max(cell.value / c.doubling);
            }
        }
        for cert in &v.certificates {
            certs += 1;
            worst_p = worst_p.max(cert.implied_bound / c.poincare);
        }
    }
    ensure(cases > 0, || "no admissible entries".into())?;
    ensure(worst_d <= 1.0 + 1e-6 && worst_p <= 1.0 + 1e-6, || {
        format!("worst ratios to constants: doubling {worst_d}, certificate {worst_p}")
    })?;
    Ok(format!(
        "{cases} admissible cases, {cells} doubling cells and {certs} certificates, 0 violations (max ratio to constant: doubling {worst_d:.3e}, Poincaré {worst_p:.3e})"
    ))
}

fn c8_certificate() -> Outcome {
    let x = lebesgue(1);
    let mut worst: f64 = 0.0;
    for (t, r) in [(100.0, 4.0), (1e4, 1.0), (50.0, 0.3)] {
        let c = poincare_certificate(&x, 2.0, t, r, EpsilonRule::default(), &tol()).map_err(|e| e.to_string())?;
        worst = worst.max((c.implied_bound - 105.0 / 256.0).abs());
    }
    ensure(worst <= 1e-6, || format!("|bound - 105/256| = {worst:e}"))?;
    Ok(format!("implied bound 105/256 within {worst:.1e} (≤ 1e-6) at 3 centres"))
}

fn c9_binary_divergence() -> Outcome {
    let start = Instant::now();
    let mut mus: Vec<WeightSpec> = Vec::new();
    for e in entries() {
        if !mus.contains(&e.mu) {
            mus.push(e.mu);
        }
    }
    let mut sampled = 0;
    for mu in &mus {
        let space = TreeSpace::new(
            2,
            WeightFunction::constant(1.0).unwrap(),
            WeightFunction::from_spec(mu).unwrap(),
        )
        .map_err(|e| e.to_string())?;
        let s = ap_sup(&space, &ApParams::new(2.0, ApMode::Full).unwrap(), &ScanDomain::default(), &tol())
            .map_err(|e| e.to_string())?;
        ensure(s.verdict == ScanVerdict::Diverging, || format!("μ = {mu:?}: scan {:?}", s.verdict))?;
        for c in s.cells.iter().filter(|c| c.t >= c.r && c.value.is_finite()) {
            let bound = 2f64.powi(c.r.floor() as i32) / 2.0;
            ensure(c.value >= bound * (1.0 - 1e-9), || {
                format!("μ = {mu:?}: A_2({}, {}) = {} below 2^⌊r⌋/2 = {bound}", c.t, c.r, c.value)
            })?;
            sampled += 1;
        }
        let v = classify(&space, 2.0, &ClassifyOptions::default()).map_err(|e| e.to_string())?;
        ensure(v.classification == Classification::NotAdmissible, || {
            format!("μ = {mu:?}: classified {:?}", v.classification)
        })?;
    }
    Ok(format!(
        "{} weights μ: every full scan diverging, {sampled} cells with t ≥ r above 2^⌊r⌋/2, all not-admissible; {:.2?}",
        mus.len(),
        start.elapsed()
    ))
}

fn c10_direction(all: &[(String, Expected, f64, aptree::admissibility::Verdict)]) -> Outcome {
    let names: std::collections::BTreeSet<&str> = all.iter().map(|a| a.0.as_str()).collect();
    ensure(names.len() >= 10, || format!("only {} catalog entries", names.len()))?;
    for (name, expected, p, v) in all {
        ensure(v.evidence_agrees, || format!("{name} p={p}: A_p side contradicts direct evidence: {:?}", v.notes))?;
        let want = match expected {
            Expected::Admissible => Classification::Admissible,
            Expected::NotAdmissible => Classification::NotAdmissible,
        };
        ensure(v.classification == want, || format!("{name} p={p}: {:?}, expected {want:?}", v.classification))?;
    }
    Ok(format!(
        "{} entries × p ∈ {{1, 1.5, 2, 4}}: {} cases, no contradiction, every label as expected",
        names.len(),
        all.len()
    ))
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |n: usize, name: &str, outcome: Outcome| match outcome {
        Ok(detail) => println!("PASS criterion {n:>2} ({name}): {detail}"),
        Err(detail) => {
            failed += 1;
            println!("FAIL criterion {n:>2} ({name}): {detail}");
        }
    };
    report(1, "constant-weight identity", c1_constant_weight());
    report(2, "truncated-reciprocal half-ball bound", c2_halfball_bound());
    report(3, "truncated-reciprocal dichotomy", c3_dichotomy());
    report(4, "spot values", c4_spot_values());
    report(5, "Hölder floor", c5_holder_floor());
    report(6, "oracle equivalence", c6_oracle());
    let start = Instant::now();
    let all = classify_all();
    let elapsed = start.elapsed();
    match &all {
        Ok(all) => {
            report(7, "theorem-constant consistency", c7_constants(all));
            report(8, "certificate closed form", c8_certificate());
            report(9, "K = 2 uniform-metric divergence", c9_binary_divergence());
            report(10, "direction agreement", c10_direction(all).map(|s| format!("{s}; {elapsed:.2?}")));
        }
        Err(e) => {
            report(7, "theorem-constant consistency", Err(e.clone()));
            report(8, "certificate closed form", c8_certificate());
            report(9, "K = 2 uniform-metric divergence", c9_binary_divergence());
            report(10, "direction agreement", Err(e.clone()));
        }
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
