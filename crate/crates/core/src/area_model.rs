//! Distribution of the bounded cell area.
//!
//! The cell of a station is its Voronoi cell intersected with the disk of
//! radius `r_c` around it. With stations at density `lambda0`, the cell area
//! `X` of the station at the origin has closed-form mean, a second moment
//! given by a triple integral over pairs of covering disks, and an atom at
//! the full disk area `pi r_c^2` (the cell equals the whole disk exactly
//! when no other station falls within `2 r_c`). The continuous part is
//! approximated by a generalized beta density truncated to
//! `[0, pi r_c^2]` with full support `[0, 1.5 pi r_c^2]`, fitted by matching
//! the conditional mean and variance given that the cell is not the full
//! disk.
//!
//! Units: lengths in meters, areas in square meters, densities per square
//! meter.

use crate::error::{Error, Result};
use crate::numerics::{integrate_1d, integrate_3d, solve_2d, QuadratureSpec, RootFindSpec};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Ratio of the fitted density's full support to the truncation point.
const FULL_SUPPORT_FACTOR: f64 = 1.5;

/// Cutoff for the inverse moment integral when the fitted shape makes the
/// integrand singular at zero, as a fraction of the truncation point.
const INVERSE_MOMENT_CUTOFF: f64 = 1e-6;

fn check_density_range(lambda0: f64, r_c: f64) -> Result<()> {
    if !(lambda0 > 0.0) || !lambda0.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "station density must be positive, got {lambda0}"
        )));
    }
    if !(r_c > 0.0) || !r_c.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "cell range must be positive, got {r_c}"
        )));
    }
    Ok(())
}

/// Mean cell area `(1 - exp(-pi lambda0 r_c^2)) / lambda0`.
///
/// Equals the coverage fraction of the plane by range disks divided by the
/// station density; tends to `pi r_c^2` as `lambda0 -> 0` and to
/// `1 / lambda0` (the Voronoi mean) as `r_c -> inf`.
pub fn area_mean(lambda0: f64, r_c: f64) -> f64 {
    -(-PI * lambda0 * r_c * r_c).exp_m1() / lambda0
}

/// Probability that the whole range disk lies inside the Voronoi cell,
/// i.e. that no other station falls within `2 r_c`: `exp(-4 pi lambda0 r_c^2)`.
/// This is the weight of the atom of the area distribution at `pi r_c^2`.
pub fn prob_disk_inside_cell(lambda0: f64, r_c: f64) -> f64 {
    (-4.0 * PI * lambda0 * r_c * r_c).exp()
}

/// Area of the union of two disks that both pass through a common point.
///
/// The disks have radii `r1` and `r2` and their centers sit at distance
/// `r1` and `r2` from the common point, with angle `u` between the two
/// center directions. This is the union of the two "covering" disks whose
/// boundaries meet at that point, the quantity driving the second moment of
/// the cell area.
pub fn union_area(r1: f64, r2: f64, u: f64) -> f64 {
    debug_assert!(r1 >= 0.0 && r2 >= 0.0);
    if r1 == 0.0 {
        return PI * r2 * r2;
    }
    if r2 == 0.0 {
        return PI * r1 * r1;
    }
    let cos_u = u.cos();
    let d_sq = r1 * r1 + r2 * r2 - 2.0 * r1 * r2 * cos_u;
    let d = d_sq.max(0.0).sqrt();
    let r_max = r1.max(r2);
    if d < 1e-12 * r_max {
        // Coincident centers: the disks are nested up to rounding.
        return PI * r_max * r_max;
    }
    // Half-angle cosines of the arc of each disk hidden inside the other.
    let c1 = ((r1 - r2 * cos_u) / d).clamp(-1.0, 1.0);
    let c2 = ((r2 - r1 * cos_u) / d).clamp(-1.0, 1.0);
    let sector = |r: f64, c: f64| r * r * (PI - c.acos() + c * (1.0 - c * c).sqrt());
    sector(r1, c1) + sector(r2, c2)
}

/// Second moment of the cell area,
/// `2 pi * int_0^{r_c} int_0^{r_c} int_0^{2 pi}
///  exp(-lambda0 * union_area(r1, r2, u)) du r2 dr2 r1 dr1`.
///
/// The integrand is the probability that two points at radii `r1`, `r2`
/// and angular separation `u` both belong to the origin cell.
pub fn area_second_moment(lambda0: f64, r_c: f64, quad: &QuadratureSpec) -> Result<f64> {
    check_density_range(lambda0, r_c)?;
    let inner = integrate_3d(
        |r1, r2, u| r1 * r2 * (-lambda0 * union_area(r1, r2, u)).exp(),
        [0.0, 0.0, 0.0],
        [r_c, r_c, 2.0 * PI],
        quad,
    )?;
    Ok(2.0 * PI * inner)
}

/// Moments of the cell area distribution, including the moments of the
/// continuous part (conditional on the cell not being the full disk).
#[derive(Debug, Clone, Copy)]
pub struct AreaMoments {
    pub mean: f64,
    pub second_moment: f64,
    pub variance: f64,
    /// Atom weight: probability the cell is the full range disk.
    pub full_disk_prob: f64,
    pub conditional_mean: f64,
    pub conditional_variance: f64,
}

/// Splits the unconditional moments into the atom at `pi r_c^2` and the
/// moments of the remaining continuous part.
///
/// With `p` the atom weight and `a = pi r_c^2`, the decomposition of the
/// mean and the law of total variance (the conditional variance given the
/// full disk being zero) give
/// `cond_mean = (mean - a p) / (1 - p)` and
/// `cond_var = (variance - p (1 - p) (a - cond_mean)^2) / (1 - p)`.
pub fn conditional_moments(
    lambda0: f64,
    r_c: f64,
    quad: &QuadratureSpec,
) -> Result<AreaMoments> {
    check_density_range(lambda0, r_c)?;
    let mean = area_mean(lambda0, r_c);
    let second_moment = area_second_moment(lambda0, r_c, quad)?;
    let variance = second_moment - mean * mean;
    let p = prob_disk_inside_cell(lambda0, r_c);
    let disk = PI * r_c * r_c;

    let cond_mean = (mean - disk * p) / (1.0 - p);
    let mut cond_var = (variance - p * (1.0 - p) * (disk - cond_mean).powi(2)) / (1.0 - p);
    let tol = -1e-9 * mean * mean;
    if cond_var < tol {
        return Err(Error::InvalidMoments(format!(
            "conditional variance {cond_var} below tolerance {tol}"
        )));
    }
    if cond_var < 0.0 {
        cond_var = 0.0;
    }
    if cond_mean <= 0.0 || cond_var <= 0.0 {
        return Err(Error::InvalidMoments(format!(
            "degenerate conditional moments: mean {cond_mean}, variance {cond_var}"
        )));
    }
    Ok(AreaMoments {
        mean,
        second_moment,
        variance,
        full_disk_prob: p,
        conditional_mean: cond_mean,
        conditional_variance: cond_var,
    })
}

/// Supports of the fitted density, in square meters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Supports {
    /// Interval the density is truncated to: `[0, pi r_c^2]`.
    pub truncated: [f64; 2],
    /// Support of the untruncated shape: `[0, 1.5 pi r_c^2]`.
    pub full: [f64; 2],
}

/// Mixture model of the cell area: a generalized beta density with shape
/// parameters `alpha`, `beta` on full support `[0, z]`, truncated to
/// `[0, w]` with `w = pi r_c^2`, plus an atom of weight `full_disk_prob`
/// at `w`.
///
/// The continuous density is
/// `(1 - full_disk_prob) * x^(alpha-1) (z - x)^(beta-1) / normalizer` for
/// `x` in `[0, w]`; `normalizer` is the integral of the unnormalized shape
/// over the truncated support. It spans many orders of magnitude across
/// parameter ranges, so `log_normalizer` is the working representation and
/// `normalizer = exp(log_normalizer)` is kept for readability of the
/// serialized document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BetaMixtureAreaModel {
    pub lambda0: f64,
    pub r_c: f64,
    /// Dimensionless cell range `r_c * sqrt(pi c2 lambda0)`.
    pub kappa: f64,
    pub alpha: f64,
    pub beta: f64,
    #[serde(rename = "p_e1")]
    pub full_disk_prob: f64,
    pub supports: Supports,
    pub normalizer: f64,
    pub log_normalizer: f64,
}

/// Log of the unnormalized shape in normalized coordinates `s = x / z`.
fn log_shape(alpha: f64, beta: f64, s: f64) -> f64 {
    (alpha - 1.0) * s.ln() + (beta - 1.0) * (1.0 - s).ln()
}

/// Offset subtracted from the log shape before exponentiation so the
/// integrand stays inside f64 range even for large shape parameters.
fn log_offset(alpha: f64, beta: f64, q: f64) -> f64 {
    let mut c = log_shape(alpha, beta, q).max(log_shape(alpha, beta, 0.5 * q));
    if alpha > 1.0 && alpha + beta > 2.0 {
        let mode = (alpha - 1.0) / (alpha + beta - 2.0);
        if mode > 0.0 && mode < q {
            c = c.max(log_shape(alpha, beta, mode));
        }
    }
    c
}

/// Raw moments of the truncated shape in normalized coordinates:
/// `(integral, mean, variance)` of `s` under the shape restricted to `[0, q]`.
fn truncated_shape_moments(
    alpha: f64,
    beta: f64,
    q: f64,
    quad: &QuadratureSpec,
) -> Result<(f64, f64, f64)> {
    let c = log_offset(alpha, beta, q);
    let weight = |s: f64| (log_shape(alpha, beta, s) - c).exp();
    let n0 = integrate_1d(&weight, 0.0, q, quad)?;
    let n1 = integrate_1d(|s| s * weight(s), 0.0, q, quad)?;
    let n2 = integrate_1d(|s| s * s * weight(s), 0.0, q, quad)?;
    if !(n0 > 0.0) || !n0.is_finite() {
        return Err(Error::NonConvergence(format!(
            "degenerate shape integral for alpha = {alpha}, beta = {beta}"
        )));
    }
    let mean = n1 / n0;
    let var = n2 / n0 - mean * mean;
    Ok((n0, mean, var))
}

/// Smallest shape parameter the solver uses; also the boundary value taken
/// when the variance target exceeds what the family can represent.
const BETA_FLOOR: f64 = 1e-3;

/// Solves the two-moment system for the shape parameters.
///
/// The truncated shape is an exponential family in `alpha` with statistic
/// `ln s`, so its mean is strictly increasing in `alpha`; for each `beta`
/// the mean equation has a unique root `alpha(beta)` found by bisection in
/// log space. Along that matched-mean curve the variance decreases as
/// `beta` grows, with its supremum approached as `beta -> 0`.
///
/// That supremum is finite, and for small dimensionless ranges (kappa below
/// roughly 0.3) the variance target genuinely exceeds it: the conditional
/// area law tends to the single-neighbor chord-cut law, whose variance the
/// family cannot reach at the matched mean. In that case the fit completes
/// at the feasible boundary: the mean is matched exactly with `beta` at a
/// small positive floor, leaving a variance deficit of at most a few
/// percent. Everywhere a root exists (in particular for kappa above 0.3)
/// both moments are matched to solver tolerance, via damped Newton in
/// log-shape coordinates first and a nested bisection fallback second.
///
/// The quadrature only resolves shapes it can see: for `alpha` far below 1
/// the integrand is too singular at zero, and for `alpha` in the tens of
/// thousands the edge peak is narrower than the first subdivision level, so
/// the `alpha` bracket is walked outward only while the moment integrals
/// stay computable.
fn solve_shape(
    m_t: f64,
    v_t: f64,
    q: f64,
    inner: &QuadratureSpec,
    root: &RootFindSpec,
) -> Result<[f64; 2]> {
    const ALPHA_FLOOR: f64 = 0.02;
    const ALPHA_CEIL: f64 = 2e4;
    let mean_of = |alpha: f64, beta: f64| -> Result<f64> {
        truncated_shape_moments(alpha, beta, q, inner).map(|(_, m, _)| m)
    };
    let alpha_for = |beta: f64| -> Result<f64> {
        let mut lo = 1.0_f64;
        while mean_of(lo, beta)? >= m_t {
            lo *= 0.25;
            if lo < ALPHA_FLOOR {
                return Err(Error::NoRoot(format!(
                    "mean target {m_t} needs alpha below {ALPHA_FLOOR} at beta = {beta}"
                )));
            }
        }
        let mut hi = 16.0_f64.max(4.0 * lo);
        while mean_of(hi, beta)? <= m_t {
            hi *= 4.0;
            if hi > ALPHA_CEIL {
                return Err(Error::NoRoot(format!(
                    "mean target {m_t} needs alpha above {ALPHA_CEIL} at beta = {beta}"
                )));
            }
        }
        let (mut llo, mut lhi) = (lo.ln(), hi.ln());
        for _ in 0..60 {
            let mid = 0.5 * (llo + lhi);
            if mean_of(mid.exp(), beta)? < m_t {
                llo = mid;
            } else {
                lhi = mid;
            }
        }
        Ok((0.5 * (llo + lhi)).exp())
    };
    let var_residual = |beta: f64| -> Result<(f64, f64)> {
        let alpha = alpha_for(beta)?;
        let (_, _, var) = truncated_shape_moments(alpha, beta, q, inner)?;
        Ok((alpha, var - v_t))
    };

    // Feasibility probe at the beta floor. A nonpositive residual there
    // means the variance target is at or above the family supremum: take
    // the boundary shape. A probe failure is not fatal (it happens for
    // small mean targets whose bracket walk strays into singular shapes);
    // those targets are feasible and the fast path below handles them.
    if let Ok((alpha, r)) = var_residual(BETA_FLOOR) {
        if r <= 0.0 {
            return Ok([alpha, BETA_FLOOR]);
        }
    }

    // Fast path: damped Newton in log-shape coordinates (positivity is
    // automatic), from the untruncated moment-matching guess and an
    // edge-pile guess for targets near the truncation point.
    let nu = (m_t * (1.0 - m_t) / v_t - 1.0).max(0.05);
    let moment_start = [
        (m_t * nu).clamp(0.05, 1e6),
        ((1.0 - m_t) * nu).clamp(0.05, 1e6),
    ];
    let edge_start = [(1.0 + q * (q - m_t) / v_t).min(1e6), 1.0];
    let residual = |y: [f64; 2]| -> [f64; 2] {
        let (alpha, beta) = (y[0].exp(), y[1].exp());
        if !(alpha > 0.0 && beta > 0.0) || alpha > 1e9 || beta > 1e9 {
            return [1e10, 1e10];
        }
        match truncated_shape_moments(alpha, beta, q, inner) {
            Ok((_, mean, var)) => [(mean - m_t) / m_t, (var - v_t) / v_t],
            Err(_) => [1e10, 1e10],
        }
    };
    for start in [moment_start, edge_start] {
        if let Ok(y) = solve_2d(&residual, [start[0].ln(), start[1].ln()], root) {
            return Ok([y[0].exp(), y[1].exp()]);
        }
    }

    // Nested fallback: walk log beta upward from the floor until the
    // variance residual changes sign, then bisect.
    let (mut lo, mut rlo) = {
        let (_, r) = var_residual(BETA_FLOOR)?;
        (BETA_FLOOR.ln(), r)
    };
    let mut hi = None;
    let mut lb = lo;
    while lb < 9.0 {
        lb += 1.0;
        let (_, r) = var_residual(lb.exp())?;
        if r.signum() != rlo.signum() {
            hi = Some(lb);
            break;
        }
        lo = lb;
        rlo = r;
    }
    let mut hi = hi.ok_or_else(|| {
        Error::NonConvergence(format!(
            "no shape parameters reproduce mean {m_t} and variance {v_t} (normalized)"
        ))
    })?;
    for _ in 0..60 {
        if hi - lo <= 1e-12 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let (_, r) = var_residual(mid.exp())?;
        if r.signum() == rlo.signum() {
            lo = mid;
            rlo = r;
        } else {
            hi = mid;
        }
    }
    let beta = (0.5 * (lo + hi)).exp();
    let alpha = alpha_for(beta)?;
    Ok([alpha, beta])
}

/// Fits the mixture model at the given density and range by matching the
/// conditional mean and variance of the cell area.
pub fn fit_area_model(
    lambda0: f64,
    r_c: f64,
    quad: &QuadratureSpec,
    root: &RootFindSpec,
) -> Result<BetaMixtureAreaModel> {
    let moments = conditional_moments(lambda0, r_c, quad)?;
    let w = PI * r_c * r_c;
    let z = FULL_SUPPORT_FACTOR * w;
    let q = w / z;

    let m_t = moments.conditional_mean / z;
    let v_t = moments.conditional_variance / (z * z);
    if m_t <= 0.0 || m_t >= q || v_t <= 0.0 || v_t >= m_t * (q - m_t) {
        return Err(Error::InvalidMoments(format!(
            "targets outside the feasible region: mean {m_t}, variance {v_t} (normalized)"
        )));
    }

    // Inner tolerances are tightened so quadrature noise stays well below
    // the finite-difference Jacobian steps of the solver.
    let inner = QuadratureSpec {
        rel_tol: quad.rel_tol.min(1e-11),
        abs_tol: quad.abs_tol.min(1e-14),
        max_subdivisions: quad.max_subdivisions.max(2000),
    };
    let shape = solve_shape(m_t, v_t, q, &inner, root)?;
    let (alpha, beta) = (shape[0], shape[1]);
    if !(alpha > 0.0 && beta > 0.0) || !alpha.is_finite() || !beta.is_finite() {
        return Err(Error::InvalidShape { alpha, beta });
    }

    let c = log_offset(alpha, beta, q);
    let (n0, _, _) = truncated_shape_moments(alpha, beta, q, &inner)?;
    // normalizer = z^(alpha+beta-1) * int_0^q s^(a-1) (1-s)^(b-1) ds
    let log_normalizer = (alpha + beta - 1.0) * z.ln() + c + n0.ln();

    Ok(BetaMixtureAreaModel {
        lambda0,
        r_c,
        kappa: r_c * (PI * crate::DISTANCE_CORRECTION_C2 * lambda0).sqrt(),
        alpha,
        beta,
        full_disk_prob: moments.full_disk_prob,
        supports: Supports {
            truncated: [0.0, w],
            full: [0.0, z],
        },
        normalizer: log_normalizer.exp(),
        log_normalizer,
    })
}

impl BetaMixtureAreaModel {
    /// Truncation point `pi r_c^2`, the location of the atom.
    pub fn truncation_point(&self) -> f64 {
        self.supports.truncated[1]
    }

    fn full_support_end(&self) -> f64 {
        self.supports.full[1]
    }

    /// Density of the continuous part of the mixture at area `x`, weight
    /// `1 - full_disk_prob` included; per square meter.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        let w = self.truncation_point();
        if !(0.0..=w).contains(&x) {
            return Err(Error::Domain {
                what: "area",
                value: x,
                domain: "[0, pi r_c^2]",
            });
        }
        let weight = 1.0 - self.full_disk_prob;
        if x == 0.0 {
            return Ok(match self.alpha {
                a if a > 1.0 => 0.0,
                a if a == 1.0 => {
                    weight
                        * ((self.beta - 1.0) * self.full_support_end().ln()
                            - self.log_normalizer)
                            .exp()
                }
                _ => f64::INFINITY,
            });
        }
        let z = self.full_support_end();
        let lp =
            (self.alpha - 1.0) * x.ln() + (self.beta - 1.0) * (z - x).ln() - self.log_normalizer;
        Ok(weight * lp.exp())
    }

    /// Distribution function of the mixture at area `x`. Right-continuous:
    /// the atom at the truncation point is included for `x >= pi r_c^2`,
    /// so `cdf(pi r_c^2) = 1`.
    pub fn cdf(&self, x: f64, quad: &QuadratureSpec) -> Result<f64> {
        let w = self.truncation_point();
        if !(0.0..=w).contains(&x) {
            return Err(Error::Domain {
                what: "area",
                value: x,
                domain: "[0, pi r_c^2]",
            });
        }
        let z = self.full_support_end();
        let q = w / z;
        let s = x / z;
        let c = log_offset(self.alpha, self.beta, q);
        let weight = |t: f64| (log_shape(self.alpha, self.beta, t) - c).exp();
        let denom = integrate_1d(&weight, 0.0, q, quad)?;
        let num = if s == 0.0 {
            0.0
        } else {
            integrate_1d(&weight, 0.0, s.min(q), quad)?
        };
        let mut cdf = (1.0 - self.full_disk_prob) * (num / denom).clamp(0.0, 1.0);
        if x >= w {
            cdf += self.full_disk_prob;
        }
        Ok(cdf.clamp(0.0, 1.0))
    }

    /// Mean of the reciprocal area `E[1/X]` under the mixture, per square
    /// meter.
    ///
    /// The continuous part integrates `1/x` against the density; for
    /// `alpha <= 1` that integral is regularized by the cutoff
    /// `1e-6 * pi r_c^2` and rejected as divergent when halving the cutoff
    /// moves the result by more than one percent.
    pub fn inverse_moment(&self, quad: &QuadratureSpec) -> Result<f64> {
        if self.alpha > 1.0 {
            return self.inverse_moment_with_cutoff(0.0, quad);
        }
        let full = self.inverse_moment_with_cutoff(INVERSE_MOMENT_CUTOFF, quad)?;
        let refined = self.inverse_moment_with_cutoff(0.5 * INVERSE_MOMENT_CUTOFF, quad)?;
        if (refined - full).abs() > 0.01 * full.abs() {
            return Err(Error::DivergentMoment(format!(
                "cutoff sensitivity {:.3e} at alpha = {}",
                (refined - full).abs() / full.abs(),
                self.alpha
            )));
        }
        Ok(refined)
    }

    /// [`inverse_moment`](Self::inverse_moment) with the continuous integral
    /// taken over `[cutoff * w, w]`: the regularization handle behind the
    /// divergence check, also exercised directly by the validation suite.
    pub(crate) fn inverse_moment_with_cutoff(
        &self,
        cutoff: f64,
        quad: &QuadratureSpec,
    ) -> Result<f64> {
        let w = self.truncation_point();
        let z = self.full_support_end();
        let q = w / z;
        let c = log_offset(self.alpha, self.beta, q);
        let integrand = |s: f64| (log_shape(self.alpha, self.beta, s) - c).exp() / s;
        let n0 = integrate_1d(
            |s| (log_shape(self.alpha, self.beta, s) - c).exp(),
            0.0,
            q,
            quad,
        )?;
        let raw = integrate_1d(&integrand, cutoff * q, q, quad)?;
        let continuous = (1.0 - self.full_disk_prob) * raw / (n0 * z);
        Ok(continuous + self.full_disk_prob / w)
    }
}

/// Number of users sharing a cell: zero-truncated Poisson.
///
/// `mean_load` is the mean of the underlying (untruncated) Poisson count,
/// i.e. user density times cell area; the truncated mean is
/// `mean_load / (1 - exp(-mean_load))`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LoadModel {
    pub mean_load: f64,
}

impl LoadModel {
    pub fn new(mean_load: f64) -> Result<Self> {
        if !(mean_load > 0.0) || !mean_load.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "mean load must be positive, got {mean_load}"
            )));
        }
        Ok(Self { mean_load })
    }

    /// Probability of exactly `n >= 1` users in the cell:
    /// `exp(-mu) mu^n / (n! (1 - exp(-mu)))`.
    pub fn pmf(&self, n: u32) -> Result<f64> {
        if n == 0 {
            return Err(Error::Domain {
                what: "load",
                value: 0.0,
                domain: "n >= 1",
            });
        }
        let mu = self.mean_load;
        let mut log_fact = 0.0;
        for k in 2..=n {
            log_fact += f64::from(k).ln();
        }
        let log_norm = (-(-mu).exp_m1()).ln();
        Ok((f64::from(n) * mu.ln() - mu - log_fact - log_norm).exp())
    }
}

/// Mean reciprocal of a zero-truncated Poisson count with underlying mean
/// `mu`; equals 1 in the `mu -> 0` limit.
pub(crate) fn mean_inverse_ztp(mu: f64) -> f64 {
    if mu <= 0.0 {
        return 1.0;
    }
    if mu < 50.0 {
        // sum_{n>=1} pmf(n) / n by the pmf recurrence, truncated once terms
        // fall below 1e-12 past the mode.
        let mut pmf = mu * (-mu).exp() / -(-mu).exp_m1();
        let mut sum = pmf;
        let mut n = 1.0;
        loop {
            n += 1.0;
            pmf *= mu / n;
            let term = pmf / n;
            sum += term;
            if n > mu && term < 1e-12 {
                return sum;
            }
        }
    }
    // Asymptotic expansion of sum mu^n/(n n!) = e^mu sum_k k!/mu^(k+1)
    // (relative error < 1e-7 for mu >= 50).
    let inv = 1.0 / mu;
    let series = inv * (1.0 + inv * (1.0 + inv * (2.0 + inv * (6.0 + inv * 24.0))));
    series / -(-mu).exp_m1()
}

/// Mean reciprocal cell load `E[1/N]` when one station's cell area follows
/// `model` and users form an independent Poisson process of density
/// `lambda_u`, conditioned on the cell being non-empty.
pub fn mean_inverse_load(
    lambda_u: f64,
    model: &BetaMixtureAreaModel,
    quad: &QuadratureSpec,
) -> Result<f64> {
    if lambda_u < 0.0 || !lambda_u.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "user density must be nonnegative, got {lambda_u}"
        )));
    }
    if lambda_u == 0.0 {
        return Ok(1.0);
    }
    let w = model.truncation_point();
    let z = model.full_support_end();
    let q = w / z;
    let c = log_offset(model.alpha, model.beta, q);
    let weight = |s: f64| (log_shape(model.alpha, model.beta, s) - c).exp();
    let n0 = integrate_1d(&weight, 0.0, q, quad)?;
    let num = integrate_1d(|s| mean_inverse_ztp(lambda_u * z * s) * weight(s), 0.0, q, quad)?;
    let continuous = (1.0 - model.full_disk_prob) * num / n0;
    Ok(continuous + model.full_disk_prob * mean_inverse_ztp(lambda_u * w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;

    fn quad() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn root() -> RootFindSpec {
        RootFindSpec::default()
    }

    #[test]
    fn mean_area_reference_values() {
        assert_relative_eq!(
            area_mean(4e-6, 500.0),
            239_196.520_434_056_94,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            area_mean(4e-6, 250.0),
            136_015.468_058_500_94,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            area_mean(4e-6, 100.0),
            29_522.155_425_455_927,
            max_relative = 1e-12
        );
    }

    #[test]
    fn mean_area_small_range_limit() {
        // Without an isolated neighbor the cell is the full disk.
        let r = 1e-3;
        assert_relative_eq!(area_mean(4e-6, r), PI * r * r, max_relative = 1e-9);
    }

    #[test]
    fn mean_area_monotone_in_range() {
        let mut prev = 0.0;
        for i in 1..60 {
            let v = area_mean(4e-6, 20.0 * i as f64);
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn full_disk_probability_reference() {
        let p = prob_disk_inside_cell(4e-6, 100.0);
        assert!((p - 0.605).abs() < 5e-4, "p = {p}");
        assert_relative_eq!(p, (-0.502_654_824_574_366_9_f64).exp(), max_relative = 1e-12);
    }

    /// Grid-count oracle for the union of two disks through a common point.
    fn union_area_grid_oracle(r1: f64, r2: f64, u: f64, n: usize) -> f64 {
        let (c1x, c1y) = (r1, 0.0);
        let (c2x, c2y) = (r2 * u.cos(), r2 * u.sin());
        let lo_x = (c1x - r1).min(c2x - r2);
        let hi_x = (c1x + r1).max(c2x + r2);
        let lo_y = (c1y - r1).min(c2y - r2);
        let hi_y = (c1y + r1).max(c2y + r2);
        let (dx, dy) = ((hi_x - lo_x) / n as f64, (hi_y - lo_y) / n as f64);
        let mut hits = 0usize;
        for i in 0..n {
            let x = lo_x + (i as f64 + 0.5) * dx;
            for j in 0..n {
                let y = lo_y + (j as f64 + 0.5) * dy;
                let in1 = (x - c1x).powi(2) + (y - c1y).powi(2) <= r1 * r1;
                let in2 = (x - c2x).powi(2) + (y - c2y).powi(2) <= r2 * r2;
                if in1 || in2 {
                    hits += 1;
                }
            }
        }
        hits as f64 * dx * dy
    }

    #[test]
    fn union_area_tangency_cases() {
        // Internal tangency: the smaller disk is inside the larger one.
        assert_relative_eq!(union_area(2.0, 1.0, 0.0), 4.0 * PI, max_relative = 1e-12);
        // Coincident disks.
        assert_relative_eq!(union_area(1.0, 1.0, 0.0), PI, max_relative = 1e-12);
        // External tangency at the common point.
        assert_relative_eq!(union_area(1.0, 1.0, PI), 2.0 * PI, max_relative = 1e-12);
        // One disk degenerate.
        assert_relative_eq!(union_area(0.0, 3.0, 1.234), 9.0 * PI, max_relative = 1e-12);
    }

    #[test]
    fn union_area_right_angle_closed_form() {
        // Equal disks at 90 degrees: union = 3 pi r^2 / 2 + r^2.
        assert_relative_eq!(
            union_area(1.0, 1.0, PI / 2.0),
            1.5 * PI + 1.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn union_area_matches_grid_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(123);
        for _ in 0..12 {
            let r1 = rng.random_range(0.2..5.0);
            let r2 = rng.random_range(0.2..5.0);
            let u = rng.random_range(0.0..2.0 * PI);
            let v = union_area(r1, r2, u);
            let oracle = union_area_grid_oracle(r1, r2, u, 1500);
            assert_relative_eq!(v, oracle, max_relative = 6e-3);
        }
    }

    #[test]
    fn union_area_symmetry_and_bounds() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let r1 = rng.random_range(0.0..10.0);
            let r2 = rng.random_range(0.0..10.0);
            let u = rng.random_range(0.0..2.0 * PI);
            let v = union_area(r1, r2, u);
            assert_relative_eq!(v, union_area(r2, r1, u), max_relative = 1e-9);
            assert_relative_eq!(v, union_area(r1, r2, 2.0 * PI - u), max_relative = 1e-9);
            let lo = PI * r1.max(r2).powi(2);
            let hi = PI * (r1 * r1 + r2 * r2);
            assert!(v >= lo - 1e-9 * lo.max(1.0) && v <= hi + 1e-9 * hi.max(1.0));
        }
    }

    #[test]
    fn second_moment_small_range_limit() {
        let r: f64 = 0.01;
        let m2 = area_second_moment(1.0, r, &quad()).unwrap();
        let disk = PI * r * r;
        assert_relative_eq!(m2, disk * disk, max_relative = 1e-3);
    }

    #[test]
    fn second_moment_exceeds_squared_mean() {
        for &(l, r) in &[(4e-6, 100.0), (4e-6, 250.0), (4e-6, 500.0), (1.0, 0.5)] {
            let m1 = area_mean(l, r);
            let m2 = area_second_moment(l, r, &quad()).unwrap();
            assert!(m2 > m1 * m1, "l = {l}, r = {r}");
        }
    }

    /// Plain Monte Carlo estimate of the second-moment triple integral,
    /// independent of the adaptive cubature.
    fn second_moment_mc_oracle(lambda0: f64, r_c: f64, n: usize, seed: u64) -> f64 {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut sum = 0.0;
        for _ in 0..n {
            let r1 = rng.random_range(0.0..r_c);
            let r2 = rng.random_range(0.0..r_c);
            let u = rng.random_range(0.0..2.0 * PI);
            sum += r1 * r2 * (-lambda0 * union_area(r1, r2, u)).exp();
        }
        2.0 * PI * (sum / n as f64) * r_c * r_c * 2.0 * PI
    }

    #[test]
    fn second_moment_matches_mc_oracle() {
        let m2 = area_second_moment(4e-6, 250.0, &quad()).unwrap();
        let oracle = second_moment_mc_oracle(4e-6, 250.0, 4_000_000, 99);
        assert_relative_eq!(m2, oracle, max_relative = 5e-3);
    }

    #[test]
    fn conditional_moments_identities() {
        for &(l, r) in &[(4e-6, 100.0), (4e-6, 250.0), (4e-6, 500.0)] {
            let m = conditional_moments(l, r, &quad()).unwrap();
            let disk = PI * r * r;
            let p = m.full_disk_prob;
            // Mean decomposition.
            assert_relative_eq!(
                m.conditional_mean * (1.0 - p) + disk * p,
                m.mean,
                max_relative = 1e-10
            );
            // Law of total variance.
            assert_relative_eq!(
                (1.0 - p) * m.conditional_variance
                    + p * (1.0 - p) * (disk - m.conditional_mean).powi(2),
                m.variance,
                max_relative = 1e-7
            );
            assert!(m.conditional_mean > 0.0 && m.conditional_mean < disk);
            assert!(m.conditional_variance > 0.0);
        }
    }

    #[test]
    fn conditional_mean_approaches_mean_for_large_range() {
        // Atom weight ~ 2.7e-6; conditioning barely moves the mean.
        let m = conditional_moments(4e-6, 500.0, &quad()).unwrap();
        assert_relative_eq!(m.conditional_mean, m.mean, max_relative = 1e-3);
    }

    #[test]
    fn fit_matches_target_moments() {
        for &(l, r) in &[(4e-6, 100.0), (4e-6, 250.0), (4e-6, 500.0)] {
            let moments = conditional_moments(l, r, &quad()).unwrap();
            let model = fit_area_model(l, r, &quad(), &root()).unwrap();
            // Recompute the moments of the continuous part from the fitted
            // pdf in original (area) coordinates.
            let tight = QuadratureSpec {
                rel_tol: 1e-10,
                ..quad()
            };
            let w = model.truncation_point();
            let weight = 1.0 - model.full_disk_prob;
            let mean = integrate_1d(|x| x * model.pdf(x).unwrap(), 0.0, w, &tight).unwrap()
                / weight;
            let second =
                integrate_1d(|x| x * x * model.pdf(x).unwrap(), 0.0, w, &tight).unwrap() / weight;
            assert_relative_eq!(mean, moments.conditional_mean, max_relative = 1e-6);
            assert_relative_eq!(
                second - mean * mean,
                moments.conditional_variance,
                max_relative = 1e-5
            );
        }
    }

    #[test]
    fn fit_completes_at_boundary_for_small_range() {
        // Below kappa ~ 0.3 the variance target exceeds the family
        // supremum at the matched mean; the fit must still return a model
        // with the mean matched exactly and the variance as close as the
        // family allows.
        for kappa in [0.05_f64, 0.2] {
            let r_c = kappa / (PI * crate::DISTANCE_CORRECTION_C2).sqrt();
            let moments = conditional_moments(1.0, r_c, &quad()).unwrap();
            let model = fit_area_model(1.0, r_c, &quad(), &root()).unwrap();
            assert_eq!(model.beta, BETA_FLOOR);
            let tight = QuadratureSpec {
                rel_tol: 1e-10,
                ..quad()
            };
            let w = model.truncation_point();
            let weight = 1.0 - model.full_disk_prob;
            let mean = integrate_1d(|x| x * model.pdf(x).unwrap(), 0.0, w, &tight).unwrap()
                / weight;
            let second =
                integrate_1d(|x| x * x * model.pdf(x).unwrap(), 0.0, w, &tight).unwrap() / weight;
            assert_relative_eq!(mean, moments.conditional_mean, max_relative = 1e-6);
            let var = second - mean * mean;
            assert!(var < moments.conditional_variance, "kappa = {kappa}");
            assert!(
                var > 0.95 * moments.conditional_variance,
                "kappa = {kappa}: deficit {:.3}",
                1.0 - var / moments.conditional_variance
            );
        }
    }

    #[test]
    fn fitted_density_normalizes() {
        let model = fit_area_model(4e-6, 250.0, &quad(), &root()).unwrap();
        let w = model.truncation_point();
        let tight = QuadratureSpec {
            rel_tol: 1e-10,
            ..quad()
        };
        let total = integrate_1d(|x| model.pdf(x).unwrap(), 0.0, w, &tight).unwrap();
        assert_relative_eq!(total, 1.0 - model.full_disk_prob, max_relative = 1e-8);
    }

    #[test]
    fn cdf_endpoints_and_atom() {
        let model = fit_area_model(4e-6, 100.0, &quad(), &root()).unwrap();
        let w = model.truncation_point();
        assert_eq!(model.cdf(0.0, &quad()).unwrap(), 0.0);
        assert_relative_eq!(model.cdf(w, &quad()).unwrap(), 1.0, max_relative = 1e-12);
        let just_below = model.cdf(w * (1.0 - 1e-9), &quad()).unwrap();
        assert_relative_eq!(
            1.0 - just_below,
            model.full_disk_prob,
            max_relative = 1e-4
        );
        // Monotone on a grid.
        let mut prev = -1.0;
        for i in 0..=50 {
            let v = model.cdf(w * i as f64 / 50.0, &quad()).unwrap();
            assert!(v >= prev - 1e-12);
            prev = v;
        }
        assert!(model.cdf(-1.0, &quad()).is_err());
        assert!(model.cdf(w * 1.01, &quad()).is_err());
    }

    #[test]
    fn model_serializes_with_contract_keys() {
        let model = fit_area_model(4e-6, 250.0, &quad(), &root()).unwrap();
        let json = serde_json::to_value(&model).unwrap();
        for key in [
            "lambda0",
            "r_c",
            "kappa",
            "alpha",
            "beta",
            "p_e1",
            "supports",
            "normalizer",
        ] {
            assert!(json.get(key).is_some(), "missing key {key}");
        }
        let back: BetaMixtureAreaModel = serde_json::from_value(json).unwrap();
        assert_eq!(back.alpha, model.alpha);
        assert_eq!(back.log_normalizer, model.log_normalizer);
    }

    #[test]
    fn inverse_moment_small_range_limit() {
        // Nearly every cell is the full disk, so E[1/X] ~ 1/(pi r_c^2).
        let r_c = 0.05 / (PI * crate::DISTANCE_CORRECTION_C2).sqrt();
        let model = fit_area_model(1.0, r_c, &quad(), &root()).unwrap();
        let inv = model.inverse_moment(&quad()).unwrap();
        assert_relative_eq!(inv * PI * r_c * r_c, 1.0, max_relative = 0.02);
    }

    #[test]
    fn inverse_moment_exceeds_reciprocal_mean() {
        let model = fit_area_model(4e-6, 250.0, &quad(), &root()).unwrap();
        let inv = model.inverse_moment(&quad()).unwrap();
        assert!(inv > 1.0 / area_mean(4e-6, 250.0));
    }

    #[test]
    fn inverse_moment_scales_with_density() {
        // Same dimensionless range: areas scale as 1/density, so E[1/X]
        // scales as density.
        let c = 6.25;
        let m1 = fit_area_model(1.0, 0.5, &quad(), &root()).unwrap();
        let m2 = fit_area_model(c, 0.5 / c.sqrt(), &quad(), &root()).unwrap();
        let i1 = m1.inverse_moment(&quad()).unwrap();
        let i2 = m2.inverse_moment(&quad()).unwrap();
        assert_relative_eq!(i2, c * i1, max_relative = 1e-5);
    }

    #[test]
    fn inverse_moment_rejects_divergent_shape() {
        let mut model = fit_area_model(4e-6, 250.0, &quad(), &root()).unwrap();
        model.alpha = 0.5;
        assert!(matches!(
            model.inverse_moment(&quad()),
            Err(Error::DivergentMoment(_))
        ));
    }

    #[test]
    fn load_pmf_reference_values() {
        let m = LoadModel::new(1.0).unwrap();
        assert_relative_eq!(m.pmf(1).unwrap(), 0.581_976_706_869_326_5, max_relative = 1e-12);
        let m = LoadModel::new(2.0).unwrap();
        assert_relative_eq!(m.pmf(2).unwrap(), 0.313_035_285_499_331_3, max_relative = 1e-12);
        assert!(m.pmf(0).is_err());
    }

    #[test]
    fn load_pmf_normalizes_and_means_match() {
        let mu = 3.0;
        let m = LoadModel::new(mu).unwrap();
        let mut total = 0.0;
        let mut mean = 0.0;
        for n in 1..200 {
            let p = m.pmf(n).unwrap();
            total += p;
            mean += f64::from(n) * p;
        }
        assert_relative_eq!(total, 1.0, max_relative = 1e-12);
        assert_relative_eq!(mean, mu / -(-mu).exp_m1(), max_relative = 1e-12);
    }

    #[test]
    fn mean_inverse_ztp_matches_direct_sum() {
        for &mu in &[0.1, 1.0, 2.0, 10.0, 40.0] {
            let m = LoadModel::new(mu).unwrap();
            let direct: f64 = (1..400).map(|n| m.pmf(n).unwrap() / f64::from(n)).sum();
            assert_relative_eq!(mean_inverse_ztp(mu), direct, max_relative = 1e-10);
        }
    }

    #[test]
    fn mean_inverse_ztp_asymptotic_branch_matches_direct_sum() {
        // Above the branch switch at 50 the expansion must agree with the
        // direct log-space pmf sum.
        for &mu in &[55.0, 80.0, 200.0] {
            let m = LoadModel::new(mu).unwrap();
            let hi = (mu + 40.0 * mu.sqrt()) as u32;
            let direct: f64 = (1..hi).map(|n| m.pmf(n).unwrap() / f64::from(n)).sum();
            assert_relative_eq!(mean_inverse_ztp(mu), direct, max_relative = 1e-6);
        }
        assert_relative_eq!(mean_inverse_ztp(1e-12), 1.0, max_relative = 1e-9);
        // Decreasing in the mean.
        let mut prev = 1.0;
        for i in 1..100 {
            let v = mean_inverse_ztp(i as f64);
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn mean_inverse_load_limits() {
        let model = fit_area_model(4e-6, 250.0, &quad(), &root()).unwrap();
        assert_eq!(mean_inverse_load(0.0, &model, &quad()).unwrap(), 1.0);
        let tiny = mean_inverse_load(1e-16, &model, &quad()).unwrap();
        assert_relative_eq!(tiny, 1.0, max_relative = 1e-6);
        let mut prev = 1.0;
        for &lu in &[1e-5, 1e-4, 1e-3] {
            let v = mean_inverse_load(lu, &model, &quad()).unwrap();
            assert!(v > 0.0 && v < prev);
            prev = v;
        }
    }
}
