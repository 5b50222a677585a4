//! Globally adaptive Gauss–Kronrod (7/15) quadrature over a list of pieces.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::Tolerance;
use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

/// One Gauss–Kronrod 15-point rule on `[a, b]`: `(estimate, error)`.
pub fn gk15<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_k = kronrod.abs();
    let mut fv = [(0.0, 0.0); 7];
    for j in 0..7 {
        let x = h * XGK[j];
        let f1 = f(c - x);
        let f2 = f(c + x);
        fv[j] = (f1, f2);
        kronrod += WGK[j] * (f1 + f2);
        abs_k += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((fv[j].0 - mean).abs() + (fv[j].1 - mean).abs());
    }
    let result = kronrod * h;
    let resabs = abs_k * h.abs();
    let resasc = asc * h.abs();
    let mut err = ((kronrod - gauss) * h).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * resabs;
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(floor);
    }
    (result, err)
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrate `f` over the union of `intervals`, bisecting the worst piece until
/// the summed error meets `tol`.
pub fn adaptive<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    intervals: &[(f64, f64)],
    tol: &Tolerance,
) -> Result<QuadResult> {
    let mut heap = BinaryHeap::with_capacity(intervals.len() + 16);
    let mut settled_value = 0.0;
    let mut settled_error = 0.0;
    let mut total = 0.0;
    let mut total_err = 0.0;
    let (lo, hi) = span(intervals);
    for &(a, b) in intervals {
        if b <= a {
            continue;
        }
        let (v, e) = gk15(f, a, b);
        if !v.is_finite() {
            return Err(Error::Divergent { a: lo, b: hi });
        }
        total += v;
        total_err += e;
        heap.push(Piece { a, b, value: v, error: e });
    }
    let mut count = heap.len();
    let budget = count + tol.max_subdivisions;
    loop {
        let target = tol.abs.max(tol.rel * total.abs());
        if total_err <= target {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) || (worst.b - worst.a) <= 4.0 * f64::EPSILON * worst.a.abs() {
            settled_value += worst.value;
            settled_error += worst.error;
            continue;
        }
        if count >= budget {
            heap.push(worst);
            return Err(Error::NonConvergence {
                a: lo,
                b: hi,
                estimate: total,
                error: total_err,
            });
        }
        let (v1, e1) = gk15(f, worst.a, mid);
        let (v2, e2) = gk15(f, mid, worst.b);
        if !(v1 + v2).is_finite() {
            return Err(Error::Divergent { a: lo, b: hi });
        }
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Piece { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Piece { a: mid, b: worst.b, value: v2, error: e2 });
        count += 1;
    }
    // re-sum to shed drift from incremental updates
    let value = settled_value + heap.iter().map(|p| p.value).sum::<f64>();
    let error = settled_error + heap.iter().map(|p| p.error).sum::<f64>();
    Ok(QuadResult {
        value,
        error,
        intervals: count,
    })
}

fn span(intervals: &[(f64, f64)]) -> (f64, f64) {
    let lo = intervals.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = intervals.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Integrate over `[boundaries[0], boundaries[last]]` with the given smooth pieces.
/// When the first boundary is 0 and `f(s) ~ s^e` there, the first piece is graded
/// geometrically and the remainder near 0 is taken from the power law.
pub fn integrate_pieces<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    boundaries: &[f64],
    exponent_at_zero: f64,
    tol: &Tolerance,
) -> Result<QuadResult> {
    if boundaries.len() < 2 {
        return Ok(QuadResult { value: 0.0, error: 0.0, intervals: 0 });
    }
    let a = boundaries[0];
    let b = *boundaries.last().unwrap();
    let mut intervals: Vec<(f64, f64)> = Vec::with_capacity(boundaries.len() + 64);
    let mut remainder = 0.0;
    let mut start = 0;
    if a == 0.0 && exponent_at_zero != 0.0 {
        if exponent_at_zero <= -1.0 {
            return Err(Error::Divergent { a, b });
        }
        let x1 = boundaries[1];
        let levels = 60;
        let mut hi = x1;
        for _ in 0..levels {
            let lo = 0.5 * hi;
            intervals.push((lo, hi));
            hi = lo;
        }
        remainder = f(hi) * hi / (exponent_at_zero + 1.0);
        start = 1;
    }
    for w in boundaries[start..].windows(2) {
        intervals.push((w[0], w[1]));
    }
    let mut out = adaptive(f, &intervals, tol)?;
    out.value += remainder;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk15_exact_on_polynomials() {
        let (v, _) = gk15(&|x: f64| x.powi(6), 0.0, 1.0);
        assert!((v - 1.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn adaptive_handles_kinks_across_pieces() {
        let f = |x: f64| (x - 1.0).abs();
        let r = adaptive(&f, &[(0.0, 1.0), (1.0, 3.0)], &Tolerance::default()).unwrap();
        assert!((r.value - 2.5).abs() < 1e-12);
    }

    #[test]
    fn graded_start_for_integrable_singularity() {
        let f = |x: f64| x.powf(-0.5);
        let r = integrate_pieces(&f, &[0.0, 4.0], -0.5, &Tolerance::default()).unwrap();
        assert!((r.value - 4.0).abs() < 1e-10, "{}", r.value);
    }

    #[test]
    fn nonintegrable_start_is_divergent() {
        let f = |x: f64| 1.0 / x;
        assert!(matches!(
            integrate_pieces(&f, &[0.0, 1.0], -1.0, &Tolerance::default()),
            Err(Error::Divergent { .. })
        ));
    }

    #[test]
    fn budget_exhaustion_reports_nonconvergence() {
        let f = |x: f64| (1.0 / x).sin() / x;
        let tol = Tolerance { max_subdivisions: 5, ..Tolerance::default() };
        assert!(matches!(
            adaptive(&f, &[(1e-4, 1.0)], &tol),
            Err(Error::NonConvergence { .. })
        ));
    }
}
