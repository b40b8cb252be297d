//! Uplink interference and rate analysis for the bounded-cell network: the
//! pair correlation of interfering users around the typical station, an
//! equivalent non-homogeneous Poisson density, the Laplace transform of
//! aggregate interference, SIR coverage probability, and average user
//! spectral efficiency.
//!
//! Everything here is scale-free: coverage and spectral efficiency depend on
//! the station density only through the dimensionless cell range
//! `kappa = r_c * sqrt(pi c2 lambda0)`, so a result computed at one density
//! holds at every density with the same `kappa`.

use std::cell::RefCell;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::area_model::{fit_area_model, mean_inverse_load, BetaMixtureAreaModel};
use crate::error::{Error, Result};
use crate::numerics::{
    integrate_1d, integrate_semi_infinite, MonotoneCubic, QuadratureSpec, RootFindSpec,
};

/// Parameters of an uplink scenario.
///
/// Build through [`NetworkConfig::new`] and the `with_*` adjusters, which
/// enforce the ranges the analysis needs; `alpha_pl > 2` in particular is
/// what makes the interference integral converge. After deserializing, call
/// [`NetworkConfig::validated`] to re-establish the same guarantees.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NetworkConfig {
    /// Station density per square meter.
    pub lambda0: f64,
    /// Dimensionless cell range `r_c * sqrt(pi c2 lambda0)`.
    pub kappa: f64,
    /// Serving-distance correction factor.
    pub c2: f64,
    /// Active-user density per square meter.
    pub lambda_u: f64,
    /// Path-loss exponent.
    pub alpha_pl: f64,
    /// System bandwidth in hertz.
    pub bandwidth: f64,
}

impl NetworkConfig {
    /// Standard configuration: correction factor
    /// [`crate::DISTANCE_CORRECTION_C2`] and unit bandwidth.
    pub fn new(lambda0: f64, kappa: f64, lambda_u: f64, alpha_pl: f64) -> Result<Self> {
        Self {
            lambda0,
            kappa,
            c2: crate::DISTANCE_CORRECTION_C2,
            lambda_u,
            alpha_pl,
            bandwidth: 1.0,
        }
        .validated()
    }

    /// Replaces the serving-distance correction factor.
    pub fn with_c2(mut self, c2: f64) -> Result<Self> {
        self.c2 = c2;
        self.validated()
    }

    /// Replaces the bandwidth.
    pub fn with_bandwidth(mut self, bandwidth: f64) -> Result<Self> {
        self.bandwidth = bandwidth;
        self.validated()
    }

    /// Checks every parameter range and returns the configuration unchanged
    /// when valid.
    pub fn validated(self) -> Result<Self> {
        let positive = [
            (self.lambda0, "station density lambda0"),
            (self.kappa, "normalized cell range kappa"),
            (self.c2, "distance correction c2"),
            (self.bandwidth, "bandwidth"),
        ];
        for (value, name) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        if !(self.lambda_u >= 0.0) || !self.lambda_u.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "user density lambda_u must be nonnegative, got {}",
                self.lambda_u
            )));
        }
        if !(self.alpha_pl > 2.0) || !self.alpha_pl.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "path-loss exponent must exceed 2 for the interference \
                 integral to converge, got {}",
                self.alpha_pl
            )));
        }
        Ok(self)
    }

    /// Cell range in meters implied by `kappa`: `kappa / sqrt(pi c2 lambda0)`.
    pub fn r_c(&self) -> f64 {
        self.kappa / (PI * self.c2 * self.lambda0).sqrt()
    }

    /// Cell range of the unit-density network with the same `kappa`.
    pub(crate) fn unit_r_c(&self) -> f64 {
        self.kappa / (PI * self.c2).sqrt()
    }
}

/// Density model for the interfering users seen from the typical station.
///
/// Interferer positions are approximated by a non-homogeneous Poisson
/// process whose radial density is the station density thinned by the pair
/// correlation function [`pcf`]. The model carries the mean reciprocal cell
/// area of the unit-density network with the same `kappa`
/// (`inv_moment_unit`); scale invariance then fixes the correlation at every
/// density.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct InterfererDensityModel {
    /// Station density per square meter.
    pub lambda0: f64,
    /// Dimensionless cell range.
    pub kappa: f64,
    /// Mean reciprocal cell area at unit station density and equal `kappa`.
    pub inv_moment_unit: f64,
}

impl InterfererDensityModel {
    pub fn new(lambda0: f64, kappa: f64, inv_moment_unit: f64) -> Result<Self> {
        let positive = [
            (lambda0, "station density lambda0"),
            (kappa, "normalized cell range kappa"),
            (inv_moment_unit, "unit-density inverse area moment"),
        ];
        for (value, name) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        Ok(Self {
            lambda0,
            kappa,
            inv_moment_unit,
        })
    }

    /// Builds the model for `cfg` by fitting the cell-area mixture of the
    /// unit-density network with the same `kappa` and taking its mean
    /// reciprocal area.
    pub fn from_config(
        cfg: &NetworkConfig,
        quad: &QuadratureSpec,
        root: &RootFindSpec,
    ) -> Result<Self> {
        let unit = fit_area_model(1.0, cfg.unit_r_c(), quad, root)?;
        Self::new(cfg.lambda0, cfg.kappa, unit.inverse_moment(quad)?)
    }
}

/// Pair correlation of interfering users at distance `r` meters from the
/// typical station: zero at the station (its own cell hosts no interferer)
/// and approaching one a few mean cell spacings out. Depends on `r` only
/// through `r * sqrt(lambda0)`, so curves at different densities coincide in
/// that coordinate.
pub fn pcf(r: f64, model: &InterfererDensityModel) -> f64 {
    let rho_sq = model.lambda0 * r * r;
    -(-2.0 * PI * rho_sq * model.inv_moment_unit).exp_m1()
}

/// Radial density of interfering users at distance `r`: the station density
/// thinned by the pair correlation, hence bounded by `lambda0`.
pub fn interferer_density(r: f64, model: &InterfererDensityModel) -> f64 {
    model.lambda0 * pcf(r, model)
}

/// Laplace transform of the aggregate interference in scale-free
/// coordinates, `s_prime = s * lambda0^(alpha_pl/2)`.
fn normalized_laplace(
    s_prime: f64,
    inv_moment_unit: f64,
    alpha_pl: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    if s_prime == 0.0 {
        return Ok(1.0);
    }
    let exponent = integrate_semi_infinite(
        |u| {
            let den = 1.0 + u.powf(alpha_pl) / s_prime;
            if !den.is_finite() {
                return 0.0;
            }
            let g = -(-2.0 * PI * u * u * inv_moment_unit).exp_m1();
            g * u / den
        },
        0.0,
        quad,
    )?;
    Ok((-2.0 * PI * exponent).exp())
}

/// Laplace transform of the aggregate interference power at the typical
/// station, evaluated at `s` (units of meters^`alpha_pl`, pairing with the
/// `h * d^(-alpha_pl)` power of one interferer). The product over the
/// interferer process collapses to a single radial integral over the
/// correlation-thinned density.
pub fn interference_laplace(
    s: f64,
    model: &InterfererDensityModel,
    alpha_pl: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    if !(alpha_pl > 2.0) || !alpha_pl.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "path-loss exponent must exceed 2, got {alpha_pl}"
        )));
    }
    if s < 0.0 || !s.is_finite() {
        return Err(Error::Domain {
            what: "transform argument",
            value: s,
            domain: "[0, inf)",
        });
    }
    normalized_laplace(
        s * model.lambda0.powf(0.5 * alpha_pl),
        model.inv_moment_unit,
        alpha_pl,
        quad,
    )
}

/// Distribution function of the serving distance: a Rayleigh law with the
/// density boosted by `c2`, truncated to the cell range.
pub fn serving_distance_cdf(d: f64, cfg: &NetworkConfig) -> Result<f64> {
    let r_c = cfg.r_c();
    if !(0.0..=r_c).contains(&d) {
        return Err(Error::Domain {
            what: "serving distance",
            value: d,
            domain: "[0, r_c]",
        });
    }
    let rate = PI * cfg.c2 * cfg.lambda0;
    Ok((-rate * d * d).exp_m1() / (-rate * r_c * r_c).exp_m1())
}

/// Density of the serving distance on `[0, r_c]`.
pub fn serving_distance_pdf(d: f64, cfg: &NetworkConfig) -> Result<f64> {
    let r_c = cfg.r_c();
    if !(0.0..=r_c).contains(&d) {
        return Err(Error::Domain {
            what: "serving distance",
            value: d,
            domain: "[0, r_c]",
        });
    }
    let rate = PI * cfg.c2 * cfg.lambda0;
    Ok(2.0 * rate * d * (-rate * d * d).exp() / -(-rate * r_c * r_c).exp_m1())
}

/// Serving-distance density in scale-free coordinates
/// `rho = d * sqrt(lambda0)`, supported on `[0, kappa/sqrt(pi c2)]`.
fn normalized_serving_pdf(rho: f64, c2: f64, kappa: f64) -> f64 {
    2.0 * PI * c2 * rho * (-PI * c2 * rho * rho).exp() / -(-kappa * kappa).exp_m1()
}

/// Interference transform tabulated on a log grid of its scale-free argument
/// and interpolated monotonically. The transform evaluation dominates the
/// cost of the coverage integral; the table turns the nested quadrature into
/// near-linear work.
struct LaplaceTable {
    interp: MonotoneCubic,
}

impl LaplaceTable {
    fn build(
        inv_moment_unit: f64,
        alpha_pl: f64,
        s_lo: f64,
        s_hi: f64,
        n: usize,
        quad: &QuadratureSpec,
    ) -> Result<Self> {
        let (lo, hi) = (s_lo.ln(), s_hi.ln());
        let mut xs = Vec::with_capacity(n);
        let mut ys = Vec::with_capacity(n);
        for i in 0..n {
            let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            xs.push(x);
            ys.push(normalized_laplace(
                x.exp(),
                inv_moment_unit,
                alpha_pl,
                quad,
            )?);
        }
        Ok(Self {
            interp: MonotoneCubic::new(xs, ys)?,
        })
    }

    /// Transform at scale-free argument `s_prime`. Arguments below the grid
    /// clamp to the first node, which [`laplace_grid_floor`] places where
    /// the transform is within 1e-7 of one.
    fn eval(&self, s_prime: f64) -> f64 {
        if s_prime <= 0.0 {
            return 1.0;
        }
        self.interp.eval(s_prime.ln()).clamp(0.0, 1.0)
    }
}

/// Largest grid floor at which the transform is still within 1e-7 of one,
/// searched downward from eight decades below `s_hi`.
fn laplace_grid_floor(
    inv_moment_unit: f64,
    alpha_pl: f64,
    s_hi: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let mut lo = s_hi * 1e-8;
    for _ in 0..40 {
        if normalized_laplace(lo, inv_moment_unit, alpha_pl, quad)? > 1.0 - 1e-7 {
            break;
        }
        lo *= 1e-2;
    }
    Ok(lo)
}

/// Coverage integral over the serving distance for one linear threshold,
/// with the transform served from `table`.
fn coverage_with(
    threshold: f64,
    cfg: &NetworkConfig,
    table: &LaplaceTable,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let p = cfg.kappa / (PI * cfg.c2).sqrt();
    let pc = integrate_1d(
        |rho| {
            table.eval(rho.powf(cfg.alpha_pl) * threshold)
                * normalized_serving_pdf(rho, cfg.c2, cfg.kappa)
        },
        0.0,
        p,
        quad,
    )?;
    Ok(pc.clamp(0.0, 1.0))
}

/// Coverage with the transform evaluated directly instead of from a table;
/// used for the cheap truncation probes of the rate integral.
fn coverage_direct(
    threshold: f64,
    cfg: &NetworkConfig,
    model: &InterfererDensityModel,
    outer: &QuadratureSpec,
    inner: &QuadratureSpec,
) -> Result<f64> {
    if threshold <= 0.0 {
        return Ok(1.0);
    }
    let p = cfg.kappa / (PI * cfg.c2).sqrt();
    let stash = RefCell::new(None);
    let pc = integrate_1d(
        |rho| {
            let s_prime = rho.powf(cfg.alpha_pl) * threshold;
            match normalized_laplace(s_prime, model.inv_moment_unit, cfg.alpha_pl, inner) {
                Ok(lt) => lt * normalized_serving_pdf(rho, cfg.c2, cfg.kappa),
                Err(e) => {
                    stash.borrow_mut().get_or_insert(e);
                    0.0
                }
            }
        },
        0.0,
        p,
        outer,
    )?;
    if let Some(e) = stash.into_inner() {
        return Err(e);
    }
    Ok(pc.clamp(0.0, 1.0))
}

fn check_pair(cfg: &NetworkConfig, model: &InterfererDensityModel) -> Result<()> {
    let same = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs());
    if !same(cfg.lambda0, model.lambda0) || !same(cfg.kappa, model.kappa) {
        return Err(Error::InvalidParameter(format!(
            "interferer model (lambda0 = {}, kappa = {}) does not match the \
             configuration (lambda0 = {}, kappa = {})",
            model.lambda0, model.kappa, cfg.lambda0, cfg.kappa
        )));
    }
    Ok(())
}

/// Probability that the typical uplink SIR exceeds the linear `threshold`.
///
/// Integrates the interference transform against the serving-distance
/// density in scale-free coordinates, so the station density enters only
/// through `kappa`. The transform grid is refined until the value settles
/// below 1e-4.
pub fn coverage_probability(
    threshold: f64,
    cfg: &NetworkConfig,
    model: &InterfererDensityModel,
    quad: &QuadratureSpec,
) -> Result<f64> {
    check_pair(cfg, model)?;
    if !(threshold > 0.0) || !threshold.is_finite() {
        return Err(Error::Domain {
            what: "SIR threshold",
            value: threshold,
            domain: "(0, inf)",
        });
    }
    let p = cfg.kappa / (PI * cfg.c2).sqrt();
    let s_hi = p.powf(cfg.alpha_pl) * threshold;
    let s_lo = laplace_grid_floor(model.inv_moment_unit, cfg.alpha_pl, s_hi, quad)?;
    let mut prev = f64::NAN;
    for n in [33usize, 65, 129, 257, 513] {
        let table = LaplaceTable::build(model.inv_moment_unit, cfg.alpha_pl, s_lo, s_hi, n, quad)?;
        let pc = coverage_with(threshold, cfg, &table, quad)?;
        if (pc - prev).abs() < 1e-4 {
            return Ok(pc);
        }
        prev = pc;
    }
    Err(Error::NonConvergence(format!(
        "coverage at threshold {threshold} kept moving under transform-grid refinement"
    )))
}

/// Coverage probability sampled over a threshold grid.
///
/// Probabilities lie in `[0, 1]` and are nonincreasing in the threshold up
/// to quadrature tolerance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverageCurve {
    /// `(linear SIR threshold, coverage probability)` pairs in grid order.
    pub points: Vec<(f64, f64)>,
}

/// Coverage over a grid of linear thresholds, sharing one transform table
/// across the grid instead of rebuilding it per threshold.
pub fn coverage_curve(
    thresholds: &[f64],
    cfg: &NetworkConfig,
    model: &InterfererDensityModel,
    quad: &QuadratureSpec,
) -> Result<CoverageCurve> {
    check_pair(cfg, model)?;
    if thresholds.is_empty() {
        return Err(Error::InvalidParameter("threshold grid is empty".into()));
    }
    let mut t_top = 0.0f64;
    for &t in thresholds {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Domain {
                what: "SIR threshold",
                value: t,
                domain: "(0, inf)",
            });
        }
        t_top = t_top.max(t);
    }
    let p = cfg.kappa / (PI * cfg.c2).sqrt();
    let s_hi = p.powf(cfg.alpha_pl) * t_top;
    let s_lo = laplace_grid_floor(model.inv_moment_unit, cfg.alpha_pl, s_hi, quad)?;
    let mut prev: Option<Vec<f64>> = None;
    for n in [65usize, 129, 257, 513, 1025] {
        let table = LaplaceTable::build(model.inv_moment_unit, cfg.alpha_pl, s_lo, s_hi, n, quad)?;
        let pcs = thresholds
            .iter()
            .map(|&t| coverage_with(t, cfg, &table, quad))
            .collect::<Result<Vec<_>>>()?;
        if let Some(last) = &prev {
            let drift = pcs
                .iter()
                .zip(last)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if drift < 1e-4 {
                return Ok(CoverageCurve {
                    points: thresholds.iter().copied().zip(pcs).collect(),
                });
            }
        }
        prev = Some(pcs);
    }
    Err(Error::NonConvergence(
        "coverage curve kept moving under transform-grid refinement".into(),
    ))
}

/// Average spectral efficiency of the typical user, in bits per second per
/// hertz times the configured bandwidth: the mean reciprocal cell load (the
/// user's scheduling share) times the coverage integrated over rate
/// thresholds `2^t - 1`.
///
/// The rate integral is truncated at the first whole exponent `t` where
/// coverage drops below 1e-6 (capped at 64), and the shared transform grid
/// is refined until the integral settles below 1e-4.
pub fn average_user_se(
    cfg: &NetworkConfig,
    model: &InterfererDensityModel,
    area_model: &BetaMixtureAreaModel,
    quad: &QuadratureSpec,
) -> Result<f64> {
    check_pair(cfg, model)?;
    let same = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs());
    if !same(area_model.lambda0, cfg.lambda0) || !same(area_model.r_c, cfg.r_c()) {
        return Err(Error::InvalidParameter(format!(
            "area model (lambda0 = {}, r_c = {}) does not match the \
             configuration (lambda0 = {}, r_c = {})",
            area_model.lambda0,
            area_model.r_c,
            cfg.lambda0,
            cfg.r_c()
        )));
    }
    let share = mean_inverse_load(cfg.lambda_u, area_model, quad)?;

    // The truncation probes and the outer rate integral only need to resolve
    // the 1e-4 refinement scale, so they run looser than the inner
    // transforms; that also keeps inner quadrature noise below the outer
    // error estimate.
    let outer = QuadratureSpec {
        rel_tol: quad.rel_tol.max(1e-6),
        abs_tol: quad.abs_tol.max(1e-9),
        max_subdivisions: quad.max_subdivisions,
    };
    let mut t_max = 1.0f64;
    while t_max < 64.0 && coverage_direct(t_max.exp2() - 1.0, cfg, model, &outer, quad)? >= 1e-6 {
        t_max += 1.0;
    }

    let p = cfg.kappa / (PI * cfg.c2).sqrt();
    let s_hi = p.powf(cfg.alpha_pl) * (t_max.exp2() - 1.0);
    let s_lo = laplace_grid_floor(model.inv_moment_unit, cfg.alpha_pl, s_hi, quad)?;
    let mut prev = f64::NAN;
    for n in [65usize, 129, 257, 513, 1025] {
        let table = LaplaceTable::build(model.inv_moment_unit, cfg.alpha_pl, s_lo, s_hi, n, quad)?;
        let stash = RefCell::new(None);
        let integral = integrate_1d(
            |t| {
                let threshold = (t.exp2() - 1.0).max(0.0);
                match coverage_with(threshold, cfg, &table, quad) {
                    Ok(pc) => pc,
                    Err(e) => {
                        stash.borrow_mut().get_or_insert(e);
                        0.0
                    }
                }
            },
            0.0,
            t_max,
            &outer,
        )?;
        if let Some(e) = stash.into_inner() {
            return Err(e);
        }
        if (integral - prev).abs() < 1e-4 {
            return Ok(cfg.bandwidth * share * integral);
        }
        prev = integral;
    }
    Err(Error::NonConvergence(
        "spectral-efficiency integral kept moving under transform-grid refinement".into(),
    ))
}
