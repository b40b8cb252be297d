//! Adaptive tensor-product quadrature over a 3-D box.
//!
//! Each box is evaluated with the 15-point Kronrod rule along every axis.
//! Replacing one axis at a time by the embedded 7-point Gauss rule yields a
//! per-axis error indicator; the box with the largest total indicator is
//! split in half along its worst axis until the global estimate meets the
//! tolerance.

use super::quad::{rescale_error, WG, WGK, XGK};
use super::QuadratureSpec;
use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

const N: usize = 15;

/// 15 Kronrod nodes on [-1, 1] in ascending order.
fn nodes() -> [f64; N] {
    let mut x = [0.0; N];
    for (i, &v) in XGK.iter().enumerate().take(7) {
        x[i] = -v;
        x[14 - i] = v;
    }
    x[7] = 0.0;
    x
}

/// Kronrod weights matching `nodes()`.
fn kronrod_weights() -> [f64; N] {
    let mut w = [0.0; N];
    for (i, &v) in WGK.iter().enumerate().take(7) {
        w[i] = v;
        w[14 - i] = v;
    }
    w[7] = WGK[7];
    w
}

/// Embedded Gauss weights matching `nodes()`; zero on pure Kronrod nodes.
fn gauss_weights() -> [f64; N] {
    let mut w = [0.0; N];
    for j in 0..3 {
        let i = 2 * j + 1;
        w[i] = WG[j];
        w[14 - i] = WG[j];
    }
    w[7] = WG[3];
    w
}

#[derive(Clone, Copy)]
struct Box3 {
    lo: [f64; 3],
    hi: [f64; 3],
    result: f64,
    err: f64,
    split_axis: usize,
}

impl PartialEq for Box3 {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Box3 {}
impl PartialOrd for Box3 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Box3 {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

struct Rule {
    x: [f64; N],
    wk: [f64; N],
    wg: [f64; N],
}

impl Rule {
    fn new() -> Self {
        Self {
            x: nodes(),
            wk: kronrod_weights(),
            wg: gauss_weights(),
        }
    }

    /// Tensor Kronrod estimate plus the three one-axis Gauss deviations.
    fn apply<F: Fn(f64, f64, f64) -> f64>(&self, f: &F, lo: [f64; 3], hi: [f64; 3]) -> Box3 {
        let mut center = [0.0; 3];
        let mut half = [0.0; 3];
        for d in 0..3 {
            center[d] = 0.5 * (lo[d] + hi[d]);
            half[d] = 0.5 * (hi[d] - lo[d]);
        }

        let mut vals = vec![0.0f64; N * N * N];
        for i in 0..N {
            let x = center[0] + half[0] * self.x[i];
            for j in 0..N {
                let y = center[1] + half[1] * self.x[j];
                for k in 0..N {
                    let z = center[2] + half[2] * self.x[k];
                    vals[(i * N + j) * N + k] = f(x, y, z);
                }
            }
        }

        let mut kkk = 0.0;
        let mut gkk = 0.0;
        let mut kgk = 0.0;
        let mut kkg = 0.0;
        let mut resabs = 0.0;
        for i in 0..N {
            for j in 0..N {
                let wkk = self.wk[i] * self.wk[j];
                for k in 0..N {
                    let v = vals[(i * N + j) * N + k];
                    kkk += wkk * self.wk[k] * v;
                    gkk += self.wg[i] * self.wk[j] * self.wk[k] * v;
                    kgk += self.wk[i] * self.wg[j] * self.wk[k] * v;
                    kkg += wkk * self.wg[k] * v;
                    resabs += wkk * self.wk[k] * v.abs();
                }
            }
        }

        let volume_scale = half[0] * half[1] * half[2];
        let deviations = [
            ((kkk - gkk) * volume_scale).abs(),
            ((kkk - kgk) * volume_scale).abs(),
            ((kkk - kkg) * volume_scale).abs(),
        ];
        let mut split_axis = 0;
        for d in 1..3 {
            if deviations[d] > deviations[split_axis] {
                split_axis = d;
            }
        }
        let raw_err = deviations[0] + deviations[1] + deviations[2];
        // Reuse the 1-D rescaling with the integrand magnitude as the
        // variation proxy; conservative for smooth integrands.
        let err = rescale_error(raw_err, resabs * volume_scale.abs(), 0.0);

        Box3 {
            lo,
            hi,
            result: kkk * volume_scale,
            err,
            split_axis,
        }
    }
}

/// Integrates `f` over the box `[lo[0], hi[0]] x [lo[1], hi[1]] x
/// [lo[2], hi[2]]` with the same error contract and budget semantics as
/// [`super::integrate_1d`].
pub fn integrate_3d<F: Fn(f64, f64, f64) -> f64>(
    f: F,
    lo: [f64; 3],
    hi: [f64; 3],
    spec: &QuadratureSpec,
) -> Result<f64> {
    for d in 0..3 {
        if hi[d] < lo[d] {
            return Err(Error::Domain {
                what: "box bound",
                value: hi[d],
                domain: "hi >= lo on every axis",
            });
        }
    }
    let rule = Rule::new();
    let first = rule.apply(&f, lo, hi);
    if !first.result.is_finite() {
        return Err(Error::NonConvergence(
            "integrand not finite on the box".into(),
        ));
    }

    let mut heap = BinaryHeap::new();
    let mut total = first.result;
    let mut total_err = first.err;
    heap.push(first);

    for _ in 0..spec.max_subdivisions {
        if total_err <= spec.abs_tol.max(spec.rel_tol * total.abs()) {
            return Ok(total);
        }
        let worst = match heap.pop() {
            Some(w) => w,
            None => break,
        };
        let d = worst.split_axis;
        let mid = 0.5 * (worst.lo[d] + worst.hi[d]);
        if mid <= worst.lo[d] || mid >= worst.hi[d] {
            continue;
        }
        let mut hi_left = worst.hi;
        hi_left[d] = mid;
        let mut lo_right = worst.lo;
        lo_right[d] = mid;
        let left = rule.apply(&f, worst.lo, hi_left);
        let right = rule.apply(&f, lo_right, worst.hi);
        if !(left.result.is_finite() && right.result.is_finite()) {
            return Err(Error::NonConvergence(
                "integrand not finite inside the box".into(),
            ));
        }
        total += left.result + right.result - worst.result;
        total_err += left.err + right.err - worst.err;
        heap.push(left);
        heap.push(right);
    }

    if total_err <= spec.abs_tol.max(spec.rel_tol * total.abs()) {
        Ok(total)
    } else {
        Err(Error::NonConvergence(format!(
            "3-D error estimate {total_err:.3e} above tolerance within {} box splits",
            spec.max_subdivisions
        )))
    }
}
