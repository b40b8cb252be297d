//! Two-dimensional root finding: damped Newton iteration with a
//! coordinate-wise bisection fallback.

use super::RootFindSpec;
use crate::error::{Error, Result};

fn norm_inf(v: [f64; 2]) -> f64 {
    v[0].abs().max(v[1].abs())
}

/// Finds `x` with `f(x) = [0, 0]`, starting from `guess`.
///
/// The primary path is Newton iteration with a forward-difference Jacobian
/// (relative step `1e-6`) and step halving until the residual norm
/// decreases. If Newton stalls or the Jacobian degenerates, the solver
/// falls back to alternating one-dimensional bisections: the first residual
/// is zeroed in the first coordinate, then the second residual in the
/// second coordinate, sweeping until both residuals are below `spec.tol`.
pub fn solve_2d<F: Fn([f64; 2]) -> [f64; 2]>(
    f: F,
    guess: [f64; 2],
    spec: &RootFindSpec,
) -> Result<[f64; 2]> {
    let mut x = guess;
    let mut fx = f(x);
    if !(fx[0].is_finite() && fx[1].is_finite()) {
        return Err(Error::NoRoot(format!(
            "residual not finite at initial guess ({}, {})",
            x[0], x[1]
        )));
    }

    for _ in 0..spec.max_iter {
        if norm_inf(fx) <= spec.tol {
            return Ok(x);
        }

        let h0 = 1e-6 * x[0].abs().max(1.0);
        let h1 = 1e-6 * x[1].abs().max(1.0);
        let f0 = f([x[0] + h0, x[1]]);
        let f1 = f([x[0], x[1] + h1]);
        let j = [
            [(f0[0] - fx[0]) / h0, (f1[0] - fx[0]) / h1],
            [(f0[1] - fx[1]) / h0, (f1[1] - fx[1]) / h1],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if !det.is_finite() || det.abs() < 1e-300 {
            break;
        }
        let dx = [
            (fx[0] * j[1][1] - fx[1] * j[0][1]) / det,
            (fx[1] * j[0][0] - fx[0] * j[1][0]) / det,
        ];

        let mut t = 1.0;
        let mut improved = false;
        while t >= 1e-6 {
            let candidate = [x[0] - t * dx[0], x[1] - t * dx[1]];
            let fc = f(candidate);
            if fc[0].is_finite() && fc[1].is_finite() && norm_inf(fc) < norm_inf(fx) {
                x = candidate;
                fx = fc;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }

    if norm_inf(fx) <= spec.tol {
        return Ok(x);
    }
    // Newton stalled or exhausted its budget; hand the best point so far to
    // the bisection fallback.
    coordinate_bisection(&f, x, spec)
}

fn coordinate_bisection<F: Fn([f64; 2]) -> [f64; 2]>(
    f: &F,
    start: [f64; 2],
    spec: &RootFindSpec,
) -> Result<[f64; 2]> {
    let mut x = start;
    for _ in 0..spec.max_iter {
        x[0] = bisect_coord(|v| f([v, x[1]])[0], x[0], spec)?;
        x[1] = bisect_coord(|v| f([x[0], v])[1], x[1], spec)?;
        let fx = f(x);
        if norm_inf(fx) <= spec.tol {
            return Ok(x);
        }
    }
    let fx = f(x);
    Err(Error::NoRoot(format!(
        "residual ({:.3e}, {:.3e}) at ({}, {}) after {} sweeps",
        fx[0], fx[1], x[0], x[1], spec.max_iter
    )))
}

/// One-dimensional root of `g` near `v0`: expands a bracket geometrically
/// until the sign changes, then bisects.
fn bisect_coord<G: Fn(f64) -> f64>(g: G, v0: f64, spec: &RootFindSpec) -> Result<f64> {
    let g0 = g(v0);
    if !g0.is_finite() {
        return Err(Error::NoRoot(format!("residual not finite at {v0}")));
    }
    if g0 == 0.0 {
        return Ok(v0);
    }

    let mut delta = 0.5 * v0.abs().max(1e-3);
    let mut bracket = None;
    for _ in 0..64 {
        let up = g(v0 + delta);
        if up.is_finite() && up.signum() != g0.signum() {
            bracket = Some((v0, v0 + delta, g0, up));
            break;
        }
        let down = g(v0 - delta);
        if down.is_finite() && down.signum() != g0.signum() {
            bracket = Some((v0 - delta, v0, down, g0));
            break;
        }
        delta *= spec.bracket_expansion;
    }
    let (mut lo, mut hi, mut glo, _) = match bracket {
        Some(b) => b,
        None => {
            return Err(Error::NoRoot(format!(
                "no sign change around {v0} after 64 bracket expansions"
            )))
        }
    };

    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid);
        if gm == 0.0 {
            return Ok(mid);
        }
        if gm.signum() == glo.signum() {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
        if (hi - lo).abs() <= 1e-14 * mid.abs().max(1e-14) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec() -> RootFindSpec {
        RootFindSpec::default()
    }

    #[test]
    fn linear_system() {
        let root = solve_2d(
            |x| [2.0 * x[0] + x[1] - 3.0, x[0] - x[1]],
            [10.0, -4.0],
            &spec(),
        )
        .unwrap();
        assert_relative_eq!(root[0], 1.0, max_relative = 1e-9);
        assert_relative_eq!(root[1], 1.0, max_relative = 1e-9);
    }

    #[test]
    fn circle_line_intersection() {
        let root = solve_2d(
            |x| [x[0] * x[0] + x[1] * x[1] - 1.0, x[1] - x[0]],
            [1.0, 0.2],
            &spec(),
        )
        .unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_relative_eq!(root[0], s, max_relative = 1e-8);
        assert_relative_eq!(root[1], s, max_relative = 1e-8);
    }

    #[test]
    fn exponential_system() {
        // exp(x) + y = 3, x + y = 1 has root x = ln(2 + ...) solved
        // numerically; verify residual instead of a closed form.
        let f = |x: [f64; 2]| [(x[0] as f64).exp() + x[1] - 3.0, x[0] + x[1] - 1.0];
        let root = solve_2d(f, [0.0, 0.0], &spec()).unwrap();
        let r = f(root);
        assert!(r[0].abs() <= 1e-10 && r[1].abs() <= 1e-10);
    }

    #[test]
    fn singular_jacobian_falls_back_to_bisection() {
        // d(F0)/dx = 0 at the guess; Newton cannot start.
        let f = |x: [f64; 2]| [x[0] * x[0] - 1.0, x[1] - 1.0];
        let root = solve_2d(f, [0.0, 0.0], &spec()).unwrap();
        let r = f(root);
        assert!(r[0].abs() <= 1e-10 && r[1].abs() <= 1e-10);
        assert_relative_eq!(root[0].abs(), 1.0, max_relative = 1e-8);
    }

    #[test]
    fn no_root_reported() {
        let r = solve_2d(
            |x| [x[0] * x[0] + 1.0, x[1]],
            [0.5, 0.5],
            &RootFindSpec {
                max_iter: 40,
                ..spec()
            },
        );
        assert!(matches!(r, Err(Error::NoRoot(_))));
    }

    #[test]
    fn guard_values_trigger_damping_not_failure() {
        // The closure rejects negative coordinates with a large residual,
        // imitating a constrained fit.
        let f = |x: [f64; 2]| {
            if x[0] <= 0.0 || x[1] <= 0.0 {
                [1e10, 1e10]
            } else {
                [x[0].ln(), x[1] - 2.0]
            }
        };
        let root = solve_2d(f, [3.0, 0.5], &spec()).unwrap();
        assert_relative_eq!(root[0], 1.0, max_relative = 1e-8);
        assert_relative_eq!(root[1], 2.0, max_relative = 1e-8);
    }
}
