//! The five subcommands: each one runs analysis and simulation for a
//! scenario and writes its artifacts into the output directory.
//!
//! Models and reports are written as JSON; curves are written as CSV with a
//! `# schema_version=1` comment line so downstream readers can detect layout
//! changes. Numbers use the shortest round-trip decimal form, so reruns with
//! the same scenario and seed produce byte-identical files.

use std::fs;
use std::path::Path;

use jm_uplink_core::area_model::fit_area_model;
use jm_uplink_core::monte_carlo::{
    collect_samples, estimate_area_cdf, estimate_coverage, estimate_coverage_mcp, estimate_pcf,
    estimate_se, goodness_of_fit,
};
use jm_uplink_core::numerics::{QuadratureSpec, RootFindSpec};
use jm_uplink_core::rng;
use jm_uplink_core::uplink::{self, average_user_se, coverage_curve, InterfererDensityModel};
use jm_uplink_core::validation::run_validation;
use jm_uplink_core::Error;

use crate::scenario::Scenario;
use crate::CliError;

/// Columns written by the raw sample dump.
const SAMPLE_HEADER: &str = "seed_index,sir_linear,serving_distance_m,load,origin_area_m2";
/// Grid points for the area CDF curve.
const CDF_GRID: usize = 200;
/// Pair-correlation bins of normalized width 0.05, reaching 2.5 cell spacings.
const PCF_BINS: usize = 50;
/// Probe points per realization when estimating cell areas.
const AREA_PROBES: u32 = 4096;

/// `10^(db/10)`.
fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Write a curve CSV: schema comment, header, one row per line.
fn write_csv(path: &Path, header: &str, rows: &[String]) -> Result<(), CliError> {
    let mut text = String::from("# schema_version=1\n");
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(())
}

/// Write pretty-printed JSON.
fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Scenario(format!("cannot serialize {}: {e}", path.display())))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn announce(path: &Path, detail: &str) {
    println!("wrote {} ({detail})", path.display());
}

/// Fit the cell-area distribution, compare it against simulated areas, and
/// write the fitted model, the CDF curve, and the fit-quality report.
pub fn cmd_area(scenario: &Scenario, out: &Path) -> Result<(), CliError> {
    let quad = QuadratureSpec::default();
    let root = RootFindSpec::default();
    let cfg = scenario.config()?;
    let model = fit_area_model(cfg.lambda0, cfg.r_c(), &quad, &root)?;
    let empirical = estimate_area_cdf(
        &cfg,
        scenario.window(),
        scenario.n_realizations,
        AREA_PROBES,
        scenario.seed,
    )?;
    let fit = goodness_of_fit(&empirical, &model, &quad)?;

    let model_path = out.join("area_model.json");
    write_json(&model_path, &model)?;
    announce(&model_path, &format!("cell range {:.1} m", model.r_c));

    let w = model.truncation_point();
    let mut rows = Vec::with_capacity(CDF_GRID + 1);
    for i in 0..=CDF_GRID {
        let x = w * i as f64 / CDF_GRID as f64;
        rows.push(format!(
            "{x},{},{}",
            model.cdf(x, &quad)?,
            empirical.cdf(x)
        ));
    }
    let cdf_path = out.join("area_cdf.csv");
    write_csv(&cdf_path, "x_m2,cdf_model,cdf_empirical", &rows)?;
    announce(
        &cdf_path,
        &format!("{} points, {} realizations", CDF_GRID + 1, empirical.n_realizations),
    );

    let fit_path = out.join("area_gof.json");
    write_json(&fit_path, &fit)?;
    announce(&fit_path, &format!("ksd {:.4}, kld {:.4}", fit.ksd, fit.kld));
    Ok(())
}

/// Coverage probability over the configured threshold grid: closed form,
/// bounded-cell simulation, and the unbounded cluster baseline.
pub fn cmd_coverage(scenario: &Scenario, out: &Path) -> Result<(), CliError> {
    if scenario.thresholds_db.is_empty() {
        return Err(Error::InvalidParameter(
            "coverage needs a nonempty thresholds_db grid".into(),
        )
        .into());
    }
    let quad = QuadratureSpec::default();
    let root = RootFindSpec::default();
    let cfg = scenario.config()?;
    let model = InterfererDensityModel::from_config(&cfg, &quad, &root)?;
    let linear: Vec<f64> = scenario.thresholds_db.iter().map(|&t| db_to_linear(t)).collect();

    let theory = coverage_curve(&linear, &cfg, &model, &quad)?;
    let window = scenario.window();
    let sim = estimate_coverage(&cfg, window, &linear, scenario.n_realizations, scenario.seed)?;
    let mcp = estimate_coverage_mcp(&cfg, window, &linear, scenario.n_realizations, scenario.seed)?;

    let rows: Vec<String> = scenario
        .thresholds_db
        .iter()
        .zip(theory.points.iter())
        .zip(sim.points.iter().zip(mcp.points.iter()))
        .map(|((db, th), (s, m))| format!("{db},{},{},{},{}", th.1, s.p_c, s.stderr, m.p_c))
        .collect();
    let path = out.join("coverage.csv");
    write_csv(&path, "T_db,pc_theory,pc_sim,pc_sim_stderr,pc_mcp_sim", &rows)?;
    announce(
        &path,
        &format!("{} thresholds, {} realizations", rows.len(), sim.n_realizations),
    );
    Ok(())
}

/// Mean user spectral efficiency across the cell-range grid, closed form
/// next to simulation, plus the optional raw sample dump.
pub fn cmd_se(scenario: &Scenario, out: &Path) -> Result<(), CliError> {
    if scenario.kappa_grid.is_empty() {
        return Err(Error::InvalidParameter(
            "the sweep needs a nonempty kappa_grid".into(),
        )
        .into());
    }
    let quad = QuadratureSpec::default();
    let root = RootFindSpec::default();
    let window = scenario.window();
    let mut rows = Vec::with_capacity(scenario.kappa_grid.len());
    for (i, &kappa) in scenario.kappa_grid.iter().enumerate() {
        let cfg = scenario.config_for_kappa(kappa)?;
        let model = InterfererDensityModel::from_config(&cfg, &quad, &root)?;
        let area = fit_area_model(cfg.lambda0, cfg.r_c(), &quad, &root)?;
        let theory = average_user_se(&cfg, &model, &area, &quad)?;
        let sim = estimate_se(
            &cfg,
            window,
            scenario.n_realizations,
            rng::derive(scenario.seed, &[i as u64]),
        )?;
        rows.push(format!("{kappa},{theory},{},{}", sim.value, sim.stderr));
    }
    let path = out.join("se.csv");
    write_csv(&path, "kappa,se_theory,se_sim,se_sim_stderr", &rows)?;
    announce(
        &path,
        &format!("{} grid points, {} realizations each", rows.len(), scenario.n_realizations),
    );

    if scenario.dump_samples {
        let cfg = scenario.config()?;
        let samples = collect_samples(&cfg, window, scenario.n_realizations, scenario.seed)?;
        let rows: Vec<String> = samples
            .iter()
            .map(|s| {
                format!(
                    "{},{},{},{},{}",
                    s.index, s.sir, s.serving_distance, s.load, s.origin_area
                )
            })
            .collect();
        let path = out.join("samples.csv");
        write_csv(&path, SAMPLE_HEADER, &rows)?;
        announce(&path, &format!("{} realizations at kappa {}", rows.len(), cfg.kappa));
    }
    Ok(())
}

/// Pair correlation of interfering users around the origin station: the
/// closed-form profile next to the binned estimate.
pub fn cmd_pcf(scenario: &Scenario, out: &Path) -> Result<(), CliError> {
    let quad = QuadratureSpec::default();
    let root = RootFindSpec::default();
    let cfg = scenario.config()?;
    let model = InterfererDensityModel::from_config(&cfg, &quad, &root)?;
    let empirical = estimate_pcf(
        &cfg,
        scenario.window(),
        PCF_BINS,
        scenario.n_realizations,
        scenario.seed,
    )?;

    let centers = empirical.centers();
    let normalized = empirical.normalized_centers();
    let rows: Vec<String> = (0..centers.len())
        .map(|k| {
            format!(
                "{},{},{}",
                normalized[k],
                uplink::pcf(centers[k], &model),
                empirical.g[k]
            )
        })
        .collect();
    let path = out.join("pcf.csv");
    write_csv(&path, "r_norm,g_theory,g_empirical", &rows)?;
    announce(
        &path,
        &format!("{} bins, {} realizations", rows.len(), empirical.n_realizations),
    );
    Ok(())
}

/// Run the self-validation suite, print one line per criterion, and write
/// the full report. Returns whether every criterion passed.
pub fn cmd_validate(scenario: &Scenario, out: &Path) -> Result<bool, CliError> {
    let report = run_validation(scenario.seed)?;
    for c in &report.criteria {
        let status = if c.passed { "pass" } else { "FAIL" };
        println!("criterion {:2} {status}: {} ({:.1} s)", c.id, c.name, c.runtime_s);
        for f in c.failures() {
            println!("    {}: measured {:.6} > allowed {:.6}", f.name, f.measured, f.tolerance);
        }
    }
    let path = out.join("validation.json");
    write_json(&path, &report)?;
    announce(
        &path,
        &format!(
            "{} criteria, seed {}, overall {}",
            report.criteria.len(),
            report.seed,
            if report.passed { "pass" } else { "fail" }
        ),
    );
    Ok(report.passed)
}
