//! End-to-end tests: run the built binary against small scenarios and check
//! exit codes, artifact layout, determinism, and the error channel.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_jm-uplink"))
}

fn write_scenario(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().unwrap();
    assert!(
        out.status.success(),
        "command {args:?} failed:\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// Parse a curve CSV: assert the schema comment, return (header, rows).
fn read_csv(path: &Path) -> (String, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# schema_version=1"), "{}", path.display());
    let header = lines.next().unwrap().to_string();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn coverage_artifacts_are_correct_and_deterministic() {
    let dir = TempDir::new().unwrap();
    let scenario = write_scenario(
        dir.path(),
        "s.json",
        r#"{"kappa": 1.0, "n_realizations": 400, "seed": 11, "thresholds_db": [-5.0, 0.0, 5.0]}"#,
    );
    let out_a = dir.path().join("a");
    run_ok(&[
        "coverage",
        "--scenario",
        scenario.to_str().unwrap(),
        "--out",
        out_a.to_str().unwrap(),
    ]);

    let csv = out_a.join("coverage.csv");
    let (header, rows) = read_csv(&csv);
    assert_eq!(header, "T_db,pc_theory,pc_sim,pc_sim_stderr,pc_mcp_sim");
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert_eq!(r.len(), 5);
        for &p in &r[1..] {
            assert!((0.0..=1.0).contains(&p), "column outside [0,1] in {r:?}");
        }
    }
    for pair in rows.windows(2) {
        assert!(pair[1][1] <= pair[0][1], "theory not nonincreasing");
        assert!(pair[1][2] <= pair[0][2], "simulation not nonincreasing");
    }

    // Same scenario and seed: byte-identical output, regardless of the
    // worker-thread cap.
    let out_b = dir.path().join("b");
    let status = bin()
        .args(["coverage", "--scenario", scenario.to_str().unwrap()])
        .args(["--out", out_b.to_str().unwrap()])
        .env("JM_UPLINK_THREADS", "2")
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(
        fs::read(&csv).unwrap(),
        fs::read(out_b.join("coverage.csv")).unwrap()
    );

    // A different seed produces different samples.
    let out_c = dir.path().join("c");
    run_ok(&[
        "coverage",
        "--scenario",
        scenario.to_str().unwrap(),
        "--seed",
        "12",
        "--out",
        out_c.to_str().unwrap(),
    ]);
    assert_ne!(
        fs::read(&csv).unwrap(),
        fs::read(out_c.join("coverage.csv")).unwrap()
    );
}

#[test]
fn area_writes_model_curve_and_fit_quality() {
    let dir = TempDir::new().unwrap();
    let scenario = write_scenario(
        dir.path(),
        "s.json",
        r#"{"n_realizations": 400, "seed": 21}"#,
    );
    let out = dir.path().join("out");
    run_ok(&[
        "area",
        "--scenario",
        scenario.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);

    let model: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("area_model.json")).unwrap()).unwrap();
    assert!(model["alpha"].as_f64().unwrap() > 0.0);
    assert!(model["beta"].as_f64().unwrap() > 0.0);
    assert!((model["r_c"].as_f64().unwrap() - 250.0).abs() < 1e-6);
    let p_e1 = model["p_e1"].as_f64().unwrap();
    assert!((0.0..1.0).contains(&p_e1));

    let (header, rows) = read_csv(&out.join("area_cdf.csv"));
    assert_eq!(header, "x_m2,cdf_model,cdf_empirical");
    assert_eq!(rows.len(), 201);
    for pair in rows.windows(2) {
        assert!(pair[1][0] > pair[0][0]);
        assert!(pair[1][1] >= pair[0][1] - 1e-12, "model CDF not monotone");
        assert!(pair[1][2] >= pair[0][2], "empirical CDF not monotone");
    }
    let last = rows.last().unwrap();
    assert!((last[1] - 1.0).abs() < 1e-6);
    assert!((last[2] - 1.0).abs() < 1e-9);

    let fit: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("area_gof.json")).unwrap()).unwrap();
    assert!(fit["ksd"].as_f64().unwrap() >= 0.0);
    assert!(fit["kld"].as_f64().unwrap() >= 0.0);
}

#[test]
fn se_sweep_writes_grid_and_sample_dump() {
    let dir = TempDir::new().unwrap();
    let scenario = write_scenario(
        dir.path(),
        "s.json",
        r#"{"n_realizations": 200, "seed": 31, "kappa_grid": [0.4, 1.0], "dump_samples": true}"#,
    );
    let out = dir.path().join("out");
    run_ok(&[
        "se",
        "--scenario",
        scenario.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);

    let (header, rows) = read_csv(&out.join("se.csv"));
    assert_eq!(header, "kappa,se_theory,se_sim,se_sim_stderr");
    assert_eq!(rows.len(), 2);
    assert!(rows[0][1] > rows[1][1], "mean rate should fall as cells grow");
    for r in &rows {
        assert!(r[1] > 0.0 && r[2] > 0.0 && r[3] > 0.0);
    }

    let (header, samples) = read_csv(&out.join("samples.csv"));
    assert_eq!(
        header,
        "seed_index,sir_linear,serving_distance_m,load,origin_area_m2"
    );
    assert_eq!(samples.len(), 200);
    for (i, s) in samples.iter().enumerate() {
        assert_eq!(s[0] as usize, i, "dump must keep realization order");
        assert!(s[1] > 0.0);
        assert!(s[2] > 0.0 && s[2] < 260.0);
        assert!(s[3] >= 1.0, "origin cell always carries its typical user");
        assert!(s[4] > 0.0);
    }
}

#[test]
fn pcf_writes_profile() {
    let dir = TempDir::new().unwrap();
    let scenario = write_scenario(
        dir.path(),
        "s.json",
        r#"{"kappa": 1.0, "n_realizations": 300, "seed": 41}"#,
    );
    let out = dir.path().join("out");
    run_ok(&[
        "pcf",
        "--scenario",
        scenario.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);

    let (header, rows) = read_csv(&out.join("pcf.csv"));
    assert_eq!(header, "r_norm,g_theory,g_empirical");
    assert_eq!(rows.len(), 50);
    for pair in rows.windows(2) {
        assert!(pair[1][0] > pair[0][0]);
        assert!(pair[1][1] >= pair[0][1], "closed form must be monotone");
    }
    for r in &rows {
        // Mathematically the profile stays below 1, but far out it rounds
        // to exactly 1.0 in double precision.
        assert!((0.0..=1.0).contains(&r[1]));
        assert!(r[2] >= 0.0 && r[2].is_finite());
    }
    assert!(rows[0][1] < 0.05, "near the hole the profile starts low");
    assert!(rows.last().unwrap()[1] > 0.9);
}

#[test]
fn empty_threshold_grid_reports_machine_readable_error() {
    let dir = TempDir::new().unwrap();
    let scenario = write_scenario(dir.path(), "s.json", r#"{"thresholds_db": []}"#);
    let out = bin()
        .args(["coverage", "--scenario", scenario.to_str().unwrap()])
        .args(["--out", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "InvalidParameter");
    assert!(err["error"]["message"].as_str().unwrap().contains("thresholds_db"));
}

#[test]
fn broken_scenarios_are_rejected() {
    let dir = TempDir::new().unwrap();
    for body in ["{not json", r#"{"lambda": 2.0}"#, r#"{"lambda0": -1.0}"#] {
        let scenario = write_scenario(dir.path(), "s.json", body);
        let out = bin()
            .args(["pcf", "--scenario", scenario.to_str().unwrap()])
            .args(["--out", dir.path().to_str().unwrap()])
            .output()
            .unwrap();
        assert!(!out.status.success(), "scenario {body:?} should be rejected");
        let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
        let kind = err["error"]["kind"].as_str().unwrap();
        assert!(
            kind == "InvalidScenario" || kind == "InvalidParameter",
            "unexpected kind {kind} for scenario {body:?}"
        );
    }
}

#[test]
fn bad_thread_cap_is_rejected() {
    let out = bin()
        .args(["pcf"])
        .env("JM_UPLINK_THREADS", "zero")
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "InvalidScenario");
}

#[test]
fn help_lists_every_subcommand() {
    let out = run_ok(&["--help"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["area", "coverage", "se", "pcf", "validate"] {
        assert!(text.contains(name), "help is missing {name}");
    }
}
