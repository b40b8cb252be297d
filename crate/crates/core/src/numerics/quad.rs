//! Adaptive Gauss-Kronrod quadrature on finite and semi-infinite intervals.

use super::QuadratureSpec;
use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Abscissae of the 15-point Kronrod rule (positive half, descending).
/// Odd-index entries are the embedded 7-point Gauss abscissae.
pub(super) const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

/// Weights of the embedded 7-point Gauss rule (for XGK[1], XGK[3], XGK[5], XGK[7]).
pub(super) const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Weights of the 15-point Kronrod rule, matching XGK.
pub(super) const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Turns the raw Gauss/Kronrod difference into a safe error estimate.
/// Mirrors the classic QUADPACK rescaling: the raw difference is sharpened
/// only when it is already small against the integrand variation `resasc`,
/// and never drops below the roundoff floor of `resabs`.
pub(super) fn rescale_error(err: f64, resabs: f64, resasc: f64) -> f64 {
    let mut err = err.abs();
    if resasc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / resasc).powf(1.5);
        err = if scale < 1.0 { resasc * scale } else { resasc };
    }
    let floor = f64::MIN_POSITIVE / (50.0 * f64::EPSILON);
    if resabs > floor {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    err
}

struct Qk15 {
    result: f64,
    err: f64,
}

/// 15-point Kronrod estimate with embedded 7-point Gauss error estimate.
fn qk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Qk15 {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let abs_half = half.abs();

    let fc = f(center);
    let mut result_gauss = fc * WG[3];
    let mut result_kronrod = fc * WGK[7];
    let mut resabs = result_kronrod.abs();

    let mut fv1 = [0.0f64; 7];
    let mut fv2 = [0.0f64; 7];

    for j in 0..3 {
        let jtw = j * 2 + 1;
        let dx = half * XGK[jtw];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        result_gauss += WG[j] * (f1 + f2);
        result_kronrod += WGK[jtw] * (f1 + f2);
        resabs += WGK[jtw] * (f1.abs() + f2.abs());
    }
    for j in 0..4 {
        let jtwm1 = j * 2;
        let dx = half * XGK[jtwm1];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        if jtwm1 < 7 {
            fv1[jtwm1] = f1;
            fv2[jtwm1] = f2;
        }
        result_kronrod += WGK[jtwm1] * (f1 + f2);
        resabs += WGK[jtwm1] * (f1.abs() + f2.abs());
    }

    let mean = result_kronrod * 0.5;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let err = rescale_error(
        (result_kronrod - result_gauss) * half,
        resabs * abs_half,
        resasc * abs_half,
    );

    Qk15 {
        result: result_kronrod * half,
        err,
    }
}

struct Interval {
    a: f64,
    b: f64,
    result: f64,
    err: f64,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Interval {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Integrates `f` over `[a, b]` by adaptive bisection of the 15-point
/// Kronrod rule. The interval with the largest error estimate is split
/// first. `f` must be finite on the open interval; integrable endpoint
/// singularities are acceptable because no node touches an endpoint.
pub fn integrate_1d<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return integrate_1d(f, b, a, spec).map(|v| -v);
    }

    let first = qk15(&f, a, b);
    if !first.result.is_finite() {
        return Err(Error::NonConvergence(format!(
            "integrand not finite on [{a}, {b}]"
        )));
    }

    let mut heap = BinaryHeap::new();
    let mut total = first.result;
    let mut total_err = first.err;
    heap.push(Interval {
        a,
        b,
        result: first.result,
        err: first.err,
    });

    for _ in 0..spec.max_subdivisions {
        if total_err <= spec.abs_tol.max(spec.rel_tol * total.abs()) {
            return Ok(total);
        }
        let worst = match heap.pop() {
            Some(w) => w,
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Too narrow to split; its contribution stays in the running
            // sums but it leaves the refinement queue.
            continue;
        }
        let left = qk15(&f, worst.a, mid);
        let right = qk15(&f, mid, worst.b);
        if !(left.result.is_finite() && right.result.is_finite()) {
            return Err(Error::NonConvergence(format!(
                "integrand not finite near [{}, {}]",
                worst.a, worst.b
            )));
        }
        total += left.result + right.result - worst.result;
        total_err += left.err + right.err - worst.err;
        heap.push(Interval {
            a: worst.a,
            b: mid,
            result: left.result,
            err: left.err,
        });
        heap.push(Interval {
            a: mid,
            b: worst.b,
            result: right.result,
            err: right.err,
        });
    }

    if total_err <= spec.abs_tol.max(spec.rel_tol * total.abs()) {
        Ok(total)
    } else {
        Err(Error::NonConvergence(format!(
            "error estimate {total_err:.3e} above tolerance within {} subdivisions on [{a}, {b}]",
            spec.max_subdivisions
        )))
    }
}

/// Integrates `f` over `[a, inf)` through the substitution `r = a + t/(1-t)`,
/// which maps the tail onto `t in [0, 1)`. The integrand must decay fast
/// enough to be integrable; a divergent tail either produces non-finite
/// node values or exhausts the subdivision budget, and both surface as
/// [`Error::NonConvergence`]. Deep refinement can evaluate `f` at infinity,
/// so `f` must return its limit (zero for integrable tails) there.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    integrate_1d(
        |t| {
            let om = 1.0 - t;
            let r = a + t / om;
            let fr = f(r);
            if fr == 0.0 {
                0.0
            } else {
                fr / (om * om)
            }
        },
        0.0,
        1.0,
        spec,
    )
}
