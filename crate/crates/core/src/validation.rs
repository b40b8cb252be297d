//! End-to-end validation suite: checks every headline quantitative claim of
//! the library against the simulator under fixed seeds, with pinned
//! tolerances, and reports the outcomes as structured data.
//!
//! The suite is organized as numbered criteria, each a bundle of checks of
//! the uniform form `measured <= tolerance`. Monotonicity claims are encoded
//! the same way by measuring the largest rise where a fall is required.

use std::time::Instant;

use serde::Serialize;

use crate::area_model::{
    area_mean, area_second_moment, fit_area_model, prob_disk_inside_cell, LoadModel,
};
use crate::error::Result;
use crate::monte_carlo::{
    default_window, estimate_area_cdf, estimate_coverage, estimate_coverage_mcp, estimate_pcf,
    estimate_se, goodness_of_fit, EmpiricalAreaCdf, EmpiricalCoverage, DEFAULT_WINDOW_FACTOR,
};
use crate::numerics::{QuadratureSpec, RootFindSpec};
use crate::point_process::SimulationWindow;
use crate::rng;
use crate::uplink::{
    average_user_se, coverage_curve, coverage_probability, interference_laplace, pcf,
    serving_distance_cdf, InterfererDensityModel, NetworkConfig,
};

/// Seed of record for the shipped validation report; the suite accepts any.
pub const DEFAULT_VALIDATION_SEED: u64 = 1729;

/// Reference station density, per square meter.
const LAMBDA0: f64 = 4e-6;
/// Reference user-to-station density ratio.
const USER_RATIO: f64 = 200.0;
/// Reference path-loss exponent.
const ALPHA_PL: f64 = 3.7;

/// One quantitative check: passes when `measured <= tolerance`.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// One numbered criterion: a named bundle of checks.
#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub runtime_s: f64,
    pub checks: Vec<CheckResult>,
}

impl CriterionResult {
    /// Checks that did not pass.
    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Outcome of the full suite.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub seed: u64,
    pub passed: bool,
    pub criteria: Vec<CriterionResult>,
}

fn check(name: impl Into<String>, measured: f64, tolerance: f64) -> CheckResult {
    CheckResult {
        name: name.into(),
        measured,
        tolerance,
        // A NaN measurement must fail, so the comparison is kept in this
        // direction rather than negated.
        passed: measured <= tolerance,
    }
}

fn criterion<F>(id: u32, name: &str, runtime_cap_s: Option<f64>, f: F) -> Result<CriterionResult>
where
    F: FnOnce(&mut Vec<CheckResult>) -> Result<()>,
{
    let start = Instant::now();
    let mut checks = Vec::new();
    f(&mut checks)?;
    let runtime_s = start.elapsed().as_secs_f64();
    if let Some(cap) = runtime_cap_s {
        checks.push(check("wall-clock runtime in seconds", runtime_s, cap));
    }
    Ok(CriterionResult {
        id,
        name: name.into(),
        passed: checks.iter().all(|c| c.passed),
        runtime_s,
        checks,
    })
}

fn cfg_for_kappa(kappa: f64) -> Result<NetworkConfig> {
    NetworkConfig::new(LAMBDA0, kappa, USER_RATIO * LAMBDA0, ALPHA_PL)
}

fn cfg_for_range(r_c: f64) -> Result<NetworkConfig> {
    let kappa = r_c * (std::f64::consts::PI * crate::DISTANCE_CORRECTION_C2 * LAMBDA0).sqrt();
    cfg_for_kappa(kappa)
}

fn max_rise(values: &[f64]) -> f64 {
    values
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Exact invariants of the closed forms and fitted laws (criterion 11),
/// separated out so it can run on its own.
fn exact_invariants(quad: &QuadratureSpec, root: &RootFindSpec) -> Result<Vec<CheckResult>> {
    let mut checks = Vec::new();
    let cfg = cfg_for_kappa(1.0)?;
    let model = InterfererDensityModel::from_config(&cfg, quad, root)?;
    checks.push(check(
        "interference transform at zero argument, deviation from one",
        (interference_laplace(0.0, &model, ALPHA_PL, quad)? - 1.0).abs(),
        1e-8,
    ));
    checks.push(check(
        "pair correlation at zero distance",
        pcf(0.0, &model).abs(),
        1e-8,
    ));
    checks.push(check(
        "serving-distance law at zero",
        serving_distance_cdf(0.0, &cfg)?.abs(),
        1e-8,
    ));
    checks.push(check(
        "serving-distance law at the range cap, deviation from one",
        (serving_distance_cdf(cfg.r_c(), &cfg)? - 1.0).abs(),
        1e-8,
    ));
    let area = fit_area_model(LAMBDA0, cfg.r_c(), quad, root)?;
    checks.push(check(
        "area law at zero",
        area.cdf(0.0, quad)?.abs(),
        1e-8,
    ));
    checks.push(check(
        "area law at the disk area, deviation from one",
        (area.cdf(area.truncation_point(), quad)? - 1.0).abs(),
        1e-8,
    ));
    let load = LoadModel::new(cfg.lambda_u * area_mean(LAMBDA0, cfg.r_c()))?;
    let mut total = 0.0;
    let mut n = 1u32;
    loop {
        let p = load.pmf(n)?;
        total += p;
        if f64::from(n) > load.mean_load && p < 1e-12 {
            break;
        }
        n += 1;
    }
    checks.push(check(
        "load distribution total mass, deviation from one",
        (total - 1.0).abs(),
        1e-8,
    ));
    Ok(checks)
}

/// Runs the complete suite at the given seed. Expensive: dominated by the
/// distribution-table and window-doubling simulations, minutes of wall time.
pub fn run_validation(seed: u64) -> Result<ValidationReport> {
    let quad = QuadratureSpec::default();
    let root = RootFindSpec::default();
    let mut criteria: Vec<CriterionResult> = Vec::with_capacity(11);

    // Criteria 1 and 2: mean and second moment of the origin-cell area
    // against the closed forms, sharing one batch of realizations per range.
    let mut moment_runs: Vec<(NetworkConfig, EmpiricalAreaCdf)> = Vec::new();
    criteria.push(criterion(1, "mean cell area vs closed form", Some(120.0), |checks| {
        for r in [100.0, 250.0, 500.0] {
            let cfg = cfg_for_range(r)?;
            let emp = estimate_area_cdf(
                &cfg,
                default_window(LAMBDA0),
                10_000,
                4096,
                rng::derive(seed, &[1, r as u64]),
            )?;
            let closed = area_mean(LAMBDA0, cfg.r_c());
            checks.push(check(
                format!("relative deviation of the mean area at range {r} m"),
                (emp.moment(1).value - closed).abs() / closed,
                0.01,
            ));
            moment_runs.push((cfg, emp));
        }
        Ok(())
    })?);
    criteria.push(criterion(2, "cell-area second moment vs simulation", None, |checks| {
        for (cfg, emp) in &moment_runs {
            let closed = area_second_moment(LAMBDA0, cfg.r_c(), &quad)?;
            checks.push(check(
                format!(
                    "relative deviation of the second moment at range {:.0} m",
                    cfg.r_c()
                ),
                (emp.moment(2).value - closed).abs() / closed,
                0.02,
            ));
        }
        Ok(())
    })?);
    drop(moment_runs);

    // Criterion 3: fitted area distribution against the empirical one at
    // five ranges, scored by CDF sup distance and histogram divergence.
    let mut range100_run: Option<EmpiricalAreaCdf> = None;
    criteria.push(criterion(3, "area distribution agreement", Some(900.0), |checks| {
        let caps = [
            (100.0, 0.035, 0.02),
            (200.0, 0.035, 0.02),
            (250.0, 0.03, 0.01),
            (300.0, 0.02, 0.01),
            (500.0, 0.01, 0.005),
        ];
        for (r, ksd_cap, kld_cap) in caps {
            let cfg = cfg_for_range(r)?;
            let model = fit_area_model(LAMBDA0, cfg.r_c(), &quad, &root)?;
            let emp = estimate_area_cdf(
                &cfg,
                default_window(LAMBDA0),
                100_000,
                4096,
                rng::derive(seed, &[3, r as u64]),
            )?;
            let gof = goodness_of_fit(&emp, &model, &quad)?;
            checks.push(check(format!("CDF sup distance at range {r} m"), gof.ksd, ksd_cap));
            checks.push(check(
                format!("histogram divergence at range {r} m"),
                gof.kld,
                kld_cap,
            ));
            if r == 100.0 {
                range100_run = Some(emp);
            }
        }
        Ok(())
    })?);

    // Criterion 4: probability that the whole disk survives as the cell.
    criteria.push(criterion(4, "full-disk cell probability", None, |checks| {
        let cfg = cfg_for_range(100.0)?;
        let emp = range100_run.as_ref().expect("range 100 m run recorded");
        checks.push(check(
            "absolute deviation of the full-disk fraction at range 100 m",
            (emp.full_disk_fraction() - prob_disk_inside_cell(LAMBDA0, cfg.r_c())).abs(),
            0.01,
        ));
        Ok(())
    })?);
    drop(range100_run);

    // Criterion 5: closed-form pair correlation against the annulus
    // estimate across the comparison range.
    criteria.push(criterion(5, "pair correlation agreement", None, |checks| {
        for kappa in [0.4, 1.0, 2.0] {
            let cfg = cfg_for_kappa(kappa)?;
            let model = InterfererDensityModel::from_config(&cfg, &quad, &root)?;
            let emp = estimate_pcf(
                &cfg,
                default_window(LAMBDA0),
                60,
                10_000,
                rng::derive(seed, &[5, kappa.to_bits()]),
            )?;
            let centers = emp.centers();
            let worst = emp
                .normalized_centers()
                .iter()
                .enumerate()
                .filter(|(_, rn)| (0.05..=2.0).contains(*rn))
                .map(|(k, _)| (emp.g[k] - pcf(centers[k], &model)).abs())
                .fold(0.0f64, f64::max);
            checks.push(check(
                format!("max pair-correlation deviation at kappa = {kappa}"),
                worst,
                0.05,
            ));
        }
        Ok(())
    })?);

    // Criterion 6: coverage agreement on a threshold grid, plus the
    // monotone trends in threshold and cell range. The runs are kept for
    // the paired criteria below.
    let thresholds: Vec<f64> = [-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0]
        .iter()
        .map(|db| 10f64.powf(db / 10.0))
        .collect();
    let zero_db = 2; // index of 0 dB in the grid
    struct CoverageRun {
        cfg: NetworkConfig,
        seed: u64,
        theory: Vec<f64>,
        sim: EmpiricalCoverage,
    }
    let mut runs: Vec<CoverageRun> = Vec::new();
    criteria.push(criterion(6, "coverage agreement and monotonicity", None, |checks| {
        for kappa in [0.4, 1.0, 2.0] {
            let cfg = cfg_for_kappa(kappa)?;
            let model = InterfererDensityModel::from_config(&cfg, &quad, &root)?;
            let theory: Vec<f64> = coverage_curve(&thresholds, &cfg, &model, &quad)?
                .points
                .iter()
                .map(|&(_, p)| p)
                .collect();
            let run_seed = rng::derive(seed, &[6, kappa.to_bits()]);
            let sim = estimate_coverage(&cfg, default_window(LAMBDA0), &thresholds, 20_000, run_seed)?;
            let worst = sim
                .points
                .iter()
                .zip(&theory)
                .map(|(p, t)| (p.p_c - t).abs())
                .fold(0.0f64, f64::max);
            checks.push(check(
                format!("max coverage deviation across thresholds at kappa = {kappa}"),
                worst,
                0.03,
            ));
            checks.push(check(
                format!("theory coverage rise along increasing thresholds at kappa = {kappa}"),
                max_rise(&theory),
                0.0,
            ));
            let sim_curve: Vec<f64> = sim.points.iter().map(|p| p.p_c).collect();
            checks.push(check(
                format!("simulated coverage rise along increasing thresholds at kappa = {kappa}"),
                max_rise(&sim_curve),
                0.0,
            ));
            runs.push(CoverageRun { cfg, seed: run_seed, theory, sim });
        }
        for t in 0..thresholds.len() {
            let along_kappa: Vec<f64> = runs.iter().map(|r| r.theory[t]).collect();
            checks.push(check(
                format!("theory coverage rise along increasing kappa at threshold index {t}"),
                max_rise(&along_kappa),
                0.0,
            ));
        }
        Ok(())
    })?);

    // Criterion 7: the full-disk placement baseline cannot beat the
    // bounded-cell model, compared realization by realization.
    criteria.push(criterion(7, "cluster baseline ordering", None, |checks| {
        for run in runs.iter().filter(|r| r.cfg.kappa >= 1.0) {
            let mcp = estimate_coverage_mcp(
                &run.cfg,
                default_window(LAMBDA0),
                &[thresholds[zero_db]],
                20_000,
                run.seed,
            )?;
            checks.push(check(
                format!(
                    "baseline minus bounded-cell coverage at 0 dB, kappa = {}",
                    run.cfg.kappa
                ),
                mcp.points[0].p_c - run.sim.points[zero_db].p_c,
                0.0,
            ));
        }
        Ok(())
    })?);

    // Criterion 8: user rate against simulation, the sub-2 reference point,
    // and the monotone trend in cell range.
    criteria.push(criterion(8, "user rate agreement", None, |checks| {
        let grid = [0.2, 0.4, 1.0, 2.0];
        let mut theory = Vec::with_capacity(grid.len());
        for kappa in grid {
            let cfg = cfg_for_kappa(kappa)?;
            let model = InterfererDensityModel::from_config(&cfg, &quad, &root)?;
            let area = fit_area_model(LAMBDA0, cfg.r_c(), &quad, &root)?;
            theory.push(average_user_se(&cfg, &model, &area, &quad)?);
        }
        checks.push(check(
            "theory rate at kappa = 0.2, bits/s/Hz",
            theory[0],
            2.0,
        ));
        checks.push(check("theory rate rise along increasing kappa", max_rise(&theory), 0.0));
        for (i, kappa) in grid.iter().copied().enumerate() {
            if kappa == 0.4 || kappa == 1.0 {
                let cfg = cfg_for_kappa(kappa)?;
                let mc = estimate_se(
                    &cfg,
                    default_window(LAMBDA0),
                    20_000,
                    rng::derive(seed, &[8, kappa.to_bits()]),
                )?;
                checks.push(check(
                    format!("relative rate deviation at kappa = {kappa}"),
                    (mc.value - theory[i]).abs() / theory[i],
                    0.05,
                ));
            }
        }
        Ok(())
    })?);

    // Criterion 9: coverage depends on the density only through kappa; the
    // simulated side reuses the seed so the comparison is paired.
    criteria.push(criterion(9, "scale invariance of coverage", None, |checks| {
        let base = runs.iter().find(|r| r.cfg.kappa == 1.0).expect("kappa 1 run");
        let dense_cfg = NetworkConfig::new(1e-5, 1.0, USER_RATIO * 1e-5, ALPHA_PL)?;
        let dense_model = InterfererDensityModel::from_config(&dense_cfg, &quad, &root)?;
        let dense_theory =
            coverage_probability(thresholds[zero_db], &dense_cfg, &dense_model, &quad)?;
        checks.push(check(
            "theory coverage shift across densities at 0 dB",
            (base.theory[zero_db] - dense_theory).abs(),
            0.01,
        ));
        let dense_sim = estimate_coverage(
            &dense_cfg,
            default_window(1e-5),
            &[thresholds[zero_db]],
            20_000,
            base.seed,
        )?;
        checks.push(check(
            "simulated coverage shift across densities at 0 dB",
            (base.sim.points[zero_db].p_c - dense_sim.points[0].p_c).abs(),
            0.01,
        ));
        Ok(())
    })?);

    // Criterion 10: robustness controls for the two declared numerical
    // knobs, the window size and the inverse-moment cutoff.
    criteria.push(criterion(10, "window and cutoff robustness", None, |checks| {
        let base = runs.iter().find(|r| r.cfg.kappa == 1.0).expect("kappa 1 run");
        let doubled = estimate_coverage(
            &base.cfg,
            SimulationWindow::for_density(LAMBDA0, 2.0 * DEFAULT_WINDOW_FACTOR),
            &[thresholds[zero_db]],
            20_000,
            base.seed,
        )?;
        checks.push(check(
            "coverage shift from doubling the window at 0 dB",
            (doubled.points[0].p_c - base.sim.points[zero_db].p_c).abs(),
            0.01,
        ));
        let area = fit_area_model(LAMBDA0, base.cfg.r_c(), &quad, &root)?;
        let coarse = area.inverse_moment_with_cutoff(1e-6, &quad)?;
        let fine = area.inverse_moment_with_cutoff(5e-7, &quad)?;
        checks.push(check(
            "relative inverse-moment shift from halving the cutoff",
            (fine - coarse).abs() / coarse,
            0.01,
        ));
        Ok(())
    })?);

    // Criterion 11: invariants that must hold to numerical exactness.
    criteria.push(criterion(11, "exact invariants", None, |checks| {
        checks.extend(exact_invariants(&quad, &root)?);
        Ok(())
    })?);

    Ok(ValidationReport {
        seed,
        passed: criteria.iter().all(|c| c.passed),
        criteria,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_comparison_handles_boundaries_and_nan() {
        assert!(check("boundary", 1.0, 1.0).passed);
        assert!(check("below", -0.5, 0.0).passed);
        assert!(!check("above", 0.011, 0.01).passed);
        assert!(!check("undefined", f64::NAN, 1.0).passed);
    }

    #[test]
    fn max_rise_finds_monotonicity_violations() {
        assert!(max_rise(&[3.0, 2.0, 1.0]) < 0.0);
        assert_eq!(max_rise(&[3.0, 1.0, 2.0]), 1.0);
    }

    #[test]
    fn exact_invariants_all_pass() {
        let checks = exact_invariants(&QuadratureSpec::default(), &RootFindSpec::default()).unwrap();
        assert_eq!(checks.len(), 7);
        for c in &checks {
            assert!(c.passed, "{}: {} > {}", c.name, c.measured, c.tolerance);
        }
    }

    #[test]
    fn criterion_records_runtime_and_aggregates() {
        let ok = criterion(42, "demo", Some(1000.0), |checks| {
            checks.push(check("fine", 0.0, 1.0));
            Ok(())
        })
        .unwrap();
        assert!(ok.passed);
        assert_eq!(ok.id, 42);
        assert_eq!(ok.checks.len(), 2);
        assert!(ok.checks[1].name.contains("runtime"));

        let bad = criterion(7, "demo", None, |checks| {
            checks.push(check("fine", 0.0, 1.0));
            checks.push(check("broken", 2.0, 1.0));
            Ok(())
        })
        .unwrap();
        assert!(!bad.passed);
        assert_eq!(bad.failures().count(), 1);
    }

    #[test]
    fn report_serializes_with_stable_field_names() {
        let report = ValidationReport {
            seed: 5,
            passed: false,
            criteria: vec![CriterionResult {
                id: 1,
                name: "demo".into(),
                passed: false,
                runtime_s: 0.25,
                checks: vec![check("value", 2.0, 1.0)],
            }],
        };
        let json = serde_json::to_value(&report).unwrap();
        assert_eq!(json["seed"], 5);
        assert_eq!(json["passed"], false);
        assert_eq!(json["criteria"][0]["id"], 1);
        assert_eq!(json["criteria"][0]["checks"][0]["measured"], 2.0);
        assert_eq!(json["criteria"][0]["checks"][0]["tolerance"], 1.0);
    }
}
