//! Ground-truth simulator for the bounded-cell uplink: full network
//! realizations (stations, one user per cell, fading, load), SIR samples,
//! and parallel estimators for coverage, spectral efficiency, the cell-area
//! distribution, and the interferer pair correlation, plus goodness-of-fit
//! statistics against the fitted area model.
//!
//! Determinism: every random quantity draws from a stream derived from the
//! caller's seed plus purpose and index labels, never from draw order, so
//! estimators return bit-identical results for a given seed regardless of
//! how many threads execute the trials.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::area_model::BetaMixtureAreaModel;
use crate::error::{Error, Result};
use crate::numerics::QuadratureSpec;
use crate::point_process::{
    estimate_cell_area, influencing_neighbors, sample_in_cell_with, sample_ppp, BsProcess, Point2,
    SimulationWindow,
};
use crate::rng::{self, tag};
use crate::uplink::NetworkConfig;

/// Disk probes per cell-area estimate inside a realization; keeps the area
/// noise well below the Poisson load noise it feeds.
const DEFAULT_AREA_PROBES: u32 = 4096;

/// Default window half-width in mean station spacings. Interference from
/// beyond ten spacings is negligible at the path-loss exponents considered;
/// the residual truncation biases coverage slightly upward.
pub const DEFAULT_WINDOW_FACTOR: f64 = 10.0;

/// Bin width of the pair-correlation estimate in units of `1/sqrt(lambda0)`.
const PCF_NORMALIZED_BIN_WIDTH: f64 = 0.05;

/// Resampling budget for realizations without interferers. Hitting it takes
/// a window so small the process has a single station dozens of times in a
/// row.
const MAX_RESAMPLES: u64 = 64;

/// Grid size of the sup-distance comparison between CDFs.
const KSD_GRID_POINTS: usize = 2000;

/// Equal-width histogram bins of the divergence comparison (plus one atom
/// cell).
const KLD_BINS: usize = 200;

/// Window sized by the default factor for the given station density.
pub fn default_window(lambda0: f64) -> SimulationWindow {
    SimulationWindow::for_density(lambda0, DEFAULT_WINDOW_FACTOR)
}

/// How users are placed around their serving station.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Placement {
    /// Uniform in the bounded cell (Voronoi cell clipped to the cell range).
    BoundedCell,
    /// Uniform in the full disk of the cell range, ignoring neighbors; the
    /// cluster-process baseline.
    FullDisk,
}

/// One draw of the full system model.
#[derive(Debug, Clone)]
pub struct NetworkRealization {
    /// Station process; `points[0]` is the origin station.
    pub process: BsProcess,
    /// Active user of the origin station.
    pub typical_user: Point2,
    /// Active user of every other station, in station order.
    pub interferers: Vec<Point2>,
    /// Unit-mean exponential fade of the serving link.
    pub serving_fade: f64,
    /// Unit-mean exponential fade of each interferer link, parallel to
    /// `interferers`.
    pub interferer_fades: Vec<f64>,
    /// Probe estimate of the origin cell area in square meters.
    pub origin_cell_area_estimate: f64,
    /// Number of users sharing the origin cell, at least one.
    pub origin_load: u32,
}

/// One SIR observation of the typical user.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SirSample {
    /// Linear signal-to-interference ratio.
    pub sir: f64,
    /// Distance from the typical user to its serving station, meters.
    pub serving_distance: f64,
    /// Users sharing the serving cell.
    pub load: u32,
}

/// Scalar Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub n_realizations: u64,
    /// Realizations that had to be redrawn for lack of interferers.
    pub resampled: u64,
}

/// One empirical coverage point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CoverageEstimate {
    /// Linear SIR threshold.
    pub threshold: f64,
    /// Fraction of realizations whose SIR exceeded the threshold.
    pub p_c: f64,
    /// Binomial standard error of `p_c`.
    pub stderr: f64,
}

/// Empirical coverage over a threshold grid.
#[derive(Debug, Clone, Serialize)]
pub struct EmpiricalCoverage {
    /// Estimates in the order of the requested thresholds.
    pub points: Vec<CoverageEstimate>,
    pub n_realizations: u64,
    /// Realizations redrawn for lack of interferers.
    pub resampled: u64,
}

/// Empirical distribution of the origin-cell area.
#[derive(Debug, Clone)]
pub struct EmpiricalAreaCdf {
    sorted: Vec<f64>,
    /// Cell range the areas were sampled at, meters.
    pub r_c: f64,
    pub n_realizations: u64,
}

impl EmpiricalAreaCdf {
    /// Area samples in ascending order.
    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    /// Fraction of samples at or below `x`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&a| a <= x) as f64 / self.sorted.len() as f64
    }

    /// Fraction of realizations whose cell filled the whole disk. Those
    /// cells are detected exactly (no station within twice the cell range),
    /// so their area estimate is the disk area with no probe noise.
    pub fn full_disk_fraction(&self) -> f64 {
        let cut = PI * self.r_c * self.r_c * (1.0 - 1e-12);
        let below = self.sorted.partition_point(|&a| a < cut);
        (self.sorted.len() - below) as f64 / self.sorted.len() as f64
    }

    /// Sample moment `E[X^power]` of the cell area with its standard error.
    pub fn moment(&self, power: u32) -> Estimate {
        let n = self.sorted.len() as f64;
        let values = || self.sorted.iter().map(|a| a.powi(power as i32));
        let mean = values().sum::<f64>() / n;
        let var = if self.sorted.len() > 1 {
            values().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Estimate {
            value: mean,
            stderr: (var / n).sqrt(),
            n_realizations: self.sorted.len() as u64,
            resampled: 0,
        }
    }
}

/// Binned estimate of the interferer pair correlation around the origin
/// station.
#[derive(Debug, Clone, Serialize)]
pub struct EmpiricalPcf {
    /// Station density the estimate was taken at.
    pub lambda0: f64,
    /// Radial bin width in meters.
    pub bin_width: f64,
    /// Mean interferer count per annulus divided by `lambda0` times the
    /// annulus area, one entry per bin from the origin outward.
    pub g: Vec<f64>,
    pub n_realizations: u64,
}

impl EmpiricalPcf {
    /// Bin centers in meters.
    pub fn centers(&self) -> Vec<f64> {
        (0..self.g.len())
            .map(|k| (k as f64 + 0.5) * self.bin_width)
            .collect()
    }

    /// Bin centers in units of `1/sqrt(lambda0)`.
    pub fn normalized_centers(&self) -> Vec<f64> {
        let scale = self.lambda0.sqrt();
        self.centers().iter().map(|r| r * scale).collect()
    }
}

/// Agreement between an empirical area distribution and the fitted model.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GoodnessOfFit {
    /// Sup distance between the CDFs on a uniform grid.
    pub ksd: f64,
    /// Divergence of the empirical histogram from the model over equal-width
    /// bins plus the full-disk atom cell, in nats.
    pub kld: f64,
}

/// One realization's raw outputs, for external analysis dumps.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SampleRecord {
    pub index: u64,
    pub sir: f64,
    pub serving_distance: f64,
    pub load: u32,
    pub origin_area: f64,
}

/// Uniform draw in the disk of radius `r_c` around `bs`.
fn uniform_in_disk(rng: &mut ChaCha8Rng, bs: Point2, r_c: f64) -> Point2 {
    let radius = r_c * rng.random::<f64>().sqrt();
    let angle = 2.0 * PI * rng.random::<f64>();
    Point2::new(bs.x + radius * angle.cos(), bs.y + radius * angle.sin())
}

/// Draws one user per station: the typical user for the origin and one
/// interferer per other station. Each station gets its own stream keyed by
/// its index, so the draws are scheduling-independent and the cluster
/// baseline pairs with the bounded-cell model wherever a cell fills its
/// disk.
fn draw_users(
    process: &BsProcess,
    r_c: f64,
    seed: u64,
    placement: Placement,
) -> Result<(Point2, Vec<Point2>)> {
    let mut typical = Point2::ORIGIN;
    let mut interferers = Vec::with_capacity(process.points.len().saturating_sub(1));
    for (j, &bs) in process.points.iter().enumerate() {
        let mut stream = rng::stream(rng::derive(seed, &[tag::USER, j as u64]));
        let user = match placement {
            Placement::BoundedCell => {
                let neighbors = influencing_neighbors(bs, process, r_c);
                sample_in_cell_with(&mut stream, bs, &neighbors, r_c)?
            }
            Placement::FullDisk => uniform_in_disk(&mut stream, bs, r_c),
        };
        if j == 0 {
            typical = user;
        } else {
            interferers.push(user);
        }
    }
    Ok((typical, interferers))
}

/// Unit-mean exponential fades: the serving link first, then one per
/// interferer in station order.
fn draw_fades(n_interferers: usize, seed: u64) -> (f64, Vec<f64>) {
    let mut stream = rng::stream(rng::derive(seed, &[tag::FADE]));
    let serving: f64 = stream.sample(Exp1);
    let fades = (0..n_interferers).map(|_| stream.sample(Exp1)).collect();
    (serving, fades)
}

/// Zero-truncated Poisson draw by CDF inversion on the truncated law.
/// Exact for means up to several hundred; beyond the summation cap the
/// draw degenerates to the cap, which sits many standard deviations above
/// the mean.
fn sample_ztp(mu: f64, rng: &mut ChaCha8Rng) -> u32 {
    if mu <= 0.0 {
        return 1;
    }
    let u: f64 = rng.random();
    let norm = -(-mu).exp_m1();
    let mut pmf = mu * (-mu).exp() / norm;
    let mut cum = pmf;
    let mut n = 1u32;
    let cap = (mu + 10.0 * mu.sqrt() + 20.0) as u32;
    while u > cum && n < cap {
        n += 1;
        pmf *= mu / f64::from(n);
        cum += pmf;
    }
    n
}

fn realize_impl(
    cfg: &NetworkConfig,
    window: SimulationWindow,
    seed: u64,
    placement: Placement,
) -> Result<NetworkRealization> {
    let r_c = cfg.r_c();
    let process = sample_ppp(cfg.lambda0, window, seed)?;
    let (typical_user, interferers) = draw_users(&process, r_c, seed, placement)?;
    let (serving_fade, interferer_fades) = draw_fades(interferers.len(), seed);
    let area = match placement {
        Placement::BoundedCell => {
            estimate_cell_area(Point2::ORIGIN, &process, r_c, DEFAULT_AREA_PROBES, seed)
        }
        Placement::FullDisk => PI * r_c * r_c,
    };
    let mut load_stream = rng::stream(rng::derive(seed, &[tag::LOAD]));
    let origin_load = sample_ztp(cfg.lambda_u * area, &mut load_stream);
    Ok(NetworkRealization {
        process,
        typical_user,
        interferers,
        serving_fade,
        interferer_fades,
        origin_cell_area_estimate: area,
        origin_load,
    })
}

/// Draws one full realization of the system model: the station process, a
/// uniform user in every bounded cell, unit-mean exponential fades, a probe
/// estimate of the origin cell area, and the zero-truncated Poisson load it
/// implies.
pub fn realize(cfg: &NetworkConfig, window: SimulationWindow, seed: u64) -> Result<NetworkRealization> {
    realize_impl(&cfg.validated()?, window, seed, Placement::BoundedCell)
}

/// Like [`realize`], but users are uniform in the full disk around their
/// station with no cell restriction: the cluster-process baseline. Shares
/// the station process and fades with [`realize`] at equal seeds, enabling
/// paired comparisons.
pub fn realize_mcp(
    cfg: &NetworkConfig,
    window: SimulationWindow,
    seed: u64,
) -> Result<NetworkRealization> {
    realize_impl(&cfg.validated()?, window, seed, Placement::FullDisk)
}

fn sir_of(
    typical: Point2,
    interferers: &[Point2],
    serving_fade: f64,
    fades: &[f64],
    alpha_pl: f64,
) -> f64 {
    let num = serving_fade * typical.norm().powf(-alpha_pl);
    let den: f64 = interferers
        .iter()
        .zip(fades)
        .map(|(u, h)| h * u.norm().powf(-alpha_pl))
        .sum();
    num / den
}

/// Signal-to-interference ratio of the typical user: the faded serving power
/// over the sum of faded interferer powers, all distances measured to the
/// origin station.
pub fn sir_sample(real: &NetworkRealization, cfg: &NetworkConfig) -> Result<SirSample> {
    if real.interferers.is_empty() {
        return Err(Error::NoInterferers);
    }
    Ok(SirSample {
        sir: sir_of(
            real.typical_user,
            &real.interferers,
            real.serving_fade,
            &real.interferer_fades,
            cfg.alpha_pl,
        ),
        serving_distance: real.typical_user.norm(),
        load: real.origin_load,
    })
}

struct SirTrial {
    sir: f64,
    #[cfg_attr(not(test), allow(dead_code))]
    serving_distance: f64,
    resamples: u64,
}

/// SIR of one indexed trial, skipping the load and area work that coverage
/// does not need. Realizations without interferers are redrawn under an
/// incremented attempt label.
fn sir_trial(
    cfg: &NetworkConfig,
    window: SimulationWindow,
    master: u64,
    index: u64,
    placement: Placement,
) -> Result<SirTrial> {
    let r_c = cfg.r_c();
    for attempt in 0..MAX_RESAMPLES {
        let seed = rng::derive(master, &[tag::REALIZATION, index, attempt]);
        let process = sample_ppp(cfg.lambda0, window, seed)?;
        if process.points.len() < 2 {
            continue;
        }
        let (typical, interferers) = draw_users(&process, r_c, seed, placement)?;
        let (serving_fade, fades) = draw_fades(interferers.len(), seed);
        return Ok(SirTrial {
            sir: sir_of(typical, &interferers, serving_fade, &fades, cfg.alpha_pl),
            serving_distance: typical.norm(),
            resamples: attempt,
        });
    }
    Err(Error::NoInterferers)
}

fn record_trial(
    cfg: &NetworkConfig,
    window: SimulationWindow,
    master: u64,
    index: u64,
) -> Result<(SampleRecord, u64)> {
    for attempt in 0..MAX_RESAMPLES {
        let seed = rng::derive(master, &[tag::REALIZATION, index, attempt]);
        let real = realize_impl(cfg, window, seed, Placement::BoundedCell)?;
        if real.interferers.is_empty() {
            continue;
        }
        let sample = sir_sample(&real, cfg)?;
        return Ok((
            SampleRecord {
                index,
                sir: sample.sir,
                serving_distance: sample.serving_distance,
                load: sample.load,
                origin_area: real.origin_cell_area_estimate,
            },
            attempt,
        ));
    }
    Err(Error::NoInterferers)
}

fn check_trials(n_real: u64) -> Result<()> {
    if n_real == 0 {
        return Err(Error::InvalidParameter(
            "estimator needs at least one realization".into(),
        ));
    }
    Ok(())
}

fn empirical_coverage(
    cfg: &NetworkConfig,
    window: SimulationWindow,
    thresholds: &[f64],
    n_real: u64,
    seed: u64,
    placement: Placement,
) -> Result<EmpiricalCoverage> {
    let cfg = cfg.validated()?;
    check_trials(n_real)?;
    if thresholds.is_empty() {
        return Err(Error::InvalidParameter("threshold grid is empty".into()));
    }
    for &t in thresholds {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Domain {
                what: "SIR threshold",
                value: t,
                domain: "(0, inf)",
            });
        }
    }
    let trials: Vec<SirTrial> = (0..n_real)
        .into_par_iter()
        .map(|i| sir_trial(&cfg, window, seed, i, placement))
        .collect::<Result<_>>()?;
    let resampled = trials.iter().map(|t| t.resamples).sum();
    let n = n_real as f64;
    let points = thresholds
        .iter()
        .map(|&t| {
            let hits = trials.iter().filter(|s| s.sir > t).count();
            let p_c = hits as f64 / n;
            CoverageEstimate {
                threshold: t,
                p_c,
                stderr: (p_c * (1.0 - p_c) / n).sqrt(),
            }
        })
        .collect();
    Ok(EmpiricalCoverage {
        points,
        n_realizations: n_real,
        resampled,
    })
}

/// Empirical coverage: the fraction of realizations whose SIR exceeds each
/// threshold, with binomial standard errors.
pub fn estimate_coverage(
    cfg: &NetworkConfig,
    window: SimulationWindow,
    thresholds: &[f64],
    n_real: u64,
    seed: u64,
) -> Result<EmpiricalCoverage> {
    empirical_coverage(cfg, window, thresholds, n_real, seed, Placement::BoundedCell)
}

/// Empirical coverage of the cluster-process baseline (users uniform in the
/// full disk), under the same seed discipline as [`estimate_coverage`] so
/// the two can be compared realization by realization.
pub fn estimate_coverage_mcp(
    cfg: &NetworkConfig,
    window: SimulationWindow,
    thresholds: &[f64],
    n_real: u64,
    seed: u64,
) -> Result<EmpiricalCoverage> {
    empirical_coverage(cfg, window, thresholds, n_real, seed, Placement::FullDisk)
}

/// Mean user spectral efficiency under round-robin scheduling: the average
/// of `bandwidth / load * log2(1 + SIR)` over full realizations.
pub fn estimate_se(
    cfg: &NetworkConfig,
    window: SimulationWindow,
    n_real: u64,
    seed: u64,
) -> Result<Estimate> {
    let cfg = cfg.validated()?;
    check_trials(n_real)?;
    let trials: Vec<(SampleRecord, u64)> = (0..n_real)
        .into_par_iter()
        .map(|i| record_trial(&cfg, window, seed, i))
        .collect::<Result<_>>()?;
    let n = n_real as f64;
    let se_of = |r: &SampleRecord| cfg.bandwidth / f64::from(r.load) * (1.0 + r.sir).log2();
    let mean = trials.iter().map(|(r, _)| se_of(r)).sum::<f64>() / n;
    let var = if n_real > 1 {
        trials
            .iter()
            .map(|(r, _)| (se_of(r) - mean) * (se_of(r) - mean))
            .sum::<f64>()
            / (n - 1.0)
    } else {
        0.0
    };
    Ok(Estimate {
        value: mean,
        stderr: (var / n).sqrt(),
        n_realizations: n_real,
        resampled: trials.iter().map(|(_, a)| a).sum(),
    })
}

/// Raw per-realization outputs for external analysis.
pub fn collect_samples(
    cfg: &NetworkConfig,
    window: SimulationWindow,
    n_real: u64,
    seed: u64,
) -> Result<Vec<SampleRecord>> {
    let cfg = cfg.validated()?;
    check_trials(n_real)?;
    (0..n_real)
        .into_par_iter()
        .map(|i| record_trial(&cfg, window, seed, i).map(|(r, _)| r))
        .collect()
}

/// Empirical distribution of the origin-cell area from `n_real` independent
/// station processes, each probed with `n_probe` uniform disk points.
pub fn estimate_area_cdf(
    cfg: &NetworkConfig,
    window: SimulationWindow,
    n_real: u64,
    n_probe: u32,
    seed: u64,
) -> Result<EmpiricalAreaCdf> {
    let cfg = cfg.validated()?;
    check_trials(n_real)?;
    if n_probe == 0 {
        return Err(Error::InvalidParameter(
            "area estimation needs at least one probe".into(),
        ));
    }
    let r_c = cfg.r_c();
    let areas: Vec<f64> = (0..n_real)
        .into_par_iter()
        .map(|i| {
            let s = rng::derive(seed, &[tag::REALIZATION, i, 0]);
            let process = sample_ppp(cfg.lambda0, window, s)?;
            Ok(estimate_cell_area(Point2::ORIGIN, &process, r_c, n_probe, s))
        })
        .collect::<Result<_>>()?;
    let mut sorted = areas;
    sorted.sort_unstable_by(f64::total_cmp);
    Ok(EmpiricalAreaCdf {
        sorted,
        r_c,
        n_realizations: n_real,
    })
}

/// Binned pair correlation of interfering users around the origin station:
/// mean count per annulus of width `0.05 / sqrt(lambda0)` divided by the
/// annulus area times the station density.
pub fn estimate_pcf(
    cfg: &NetworkConfig,
    window: SimulationWindow,
    n_bins: usize,
    n_real: u64,
    seed: u64,
) -> Result<EmpiricalPcf> {
    let cfg = cfg.validated()?;
    check_trials(n_real)?;
    if n_bins == 0 {
        return Err(Error::InvalidParameter(
            "pair correlation needs at least one bin".into(),
        ));
    }
    let bin_width = PCF_NORMALIZED_BIN_WIDTH / cfg.lambda0.sqrt();
    let reach = bin_width * n_bins as f64;
    if reach > window.half_width {
        return Err(Error::InvalidParameter(format!(
            "pair-correlation reach {reach} m exceeds the window half-width {} m",
            window.half_width
        )));
    }
    let r_c = cfg.r_c();
    let counts: Vec<Vec<u32>> = (0..n_real)
        .into_par_iter()
        .map(|i| {
            let s = rng::derive(seed, &[tag::REALIZATION, i, 0]);
            let process = sample_ppp(cfg.lambda0, window, s)?;
            let (_, interferers) = draw_users(&process, r_c, s, Placement::BoundedCell)?;
            let mut bins = vec![0u32; n_bins];
            for u in interferers {
                let k = (u.norm() / bin_width) as usize;
                if k < n_bins {
                    bins[k] += 1;
                }
            }
            Ok(bins)
        })
        .collect::<Result<_>>()?;
    let mut totals = vec![0u64; n_bins];
    for bins in &counts {
        for (total, &c) in totals.iter_mut().zip(bins) {
            *total += u64::from(c);
        }
    }
    let g = totals
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let annulus =
                PI * bin_width * bin_width * ((k as f64 + 1.0).powi(2) - (k as f64).powi(2));
            c as f64 / (n_real as f64 * cfg.lambda0 * annulus)
        })
        .collect();
    Ok(EmpiricalPcf {
        lambda0: cfg.lambda0,
        bin_width,
        g,
        n_realizations: n_real,
    })
}

fn kl_term(p: f64, q: f64) -> f64 {
    let p = p.max(1e-12);
    let q = q.max(1e-12);
    p * (p / q).ln()
}

/// Sup CDF distance on a uniform grid and binned divergence between an
/// empirical area distribution and the fitted model. The divergence uses
/// equal-width bins over the truncated support plus a separate cell for the
/// full-disk atom; empty masses are floored at 1e-12.
pub fn goodness_of_fit(
    empirical: &EmpiricalAreaCdf,
    model: &BetaMixtureAreaModel,
    quad: &QuadratureSpec,
) -> Result<GoodnessOfFit> {
    let same = (empirical.r_c - model.r_c).abs() <= 1e-9 * empirical.r_c.abs().max(model.r_c.abs());
    if !same {
        return Err(Error::InvalidParameter(format!(
            "empirical cell range {} does not match the model range {}",
            empirical.r_c, model.r_c
        )));
    }
    let w = model.truncation_point();

    let mut ksd = 0.0f64;
    for i in 1..=KSD_GRID_POINTS {
        let x = w * i as f64 / KSD_GRID_POINTS as f64;
        let gap = (empirical.cdf(x) - model.cdf(x, quad)?).abs();
        ksd = ksd.max(gap);
    }

    let samples = empirical.samples();
    let n = samples.len() as f64;
    let atom_cut = w * (1.0 - 1e-12);
    let mut kld = 0.0f64;
    let mut prev_idx = 0usize;
    let mut prev_cdf = 0.0f64;
    for k in 0..KLD_BINS {
        let hi_edge = w * (k as f64 + 1.0) / KLD_BINS as f64;
        let cut = if k == KLD_BINS - 1 { atom_cut } else { hi_edge };
        let idx = samples.partition_point(|&a| a < cut);
        let p = (idx - prev_idx) as f64 / n;
        let cdf_hi = model.cdf(hi_edge, quad)?;
        let mut q = cdf_hi - prev_cdf;
        if k == KLD_BINS - 1 {
            // The last edge reaches the truncation point, where the model
            // CDF includes the atom; the atom is scored as its own cell.
            q -= model.full_disk_prob;
        }
        kld += kl_term(p, q);
        prev_idx = idx;
        prev_cdf = cdf_hi;
    }
    kld += kl_term(empirical.full_disk_fraction(), model.full_disk_prob);

    Ok(GoodnessOfFit {
        ksd,
        kld: kld.max(0.0),
    })
}
