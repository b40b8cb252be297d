//! Independent crosschecks of the analytical chain against the simulator
//! through the public API alone: the interference transform against a
//! direct exponential average, the fitted inverse area moment against
//! probe-estimated areas, and the mean inverse load against simulated
//! cell loads.

use jm_uplink_core::area_model::{fit_area_model, mean_inverse_load};
use jm_uplink_core::monte_carlo::{collect_samples, default_window, estimate_area_cdf, realize};
use jm_uplink_core::numerics::{QuadratureSpec, RootFindSpec};
use jm_uplink_core::uplink::{interference_laplace, InterfererDensityModel, NetworkConfig};

fn quad() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn root() -> RootFindSpec {
    RootFindSpec::default()
}

#[test]
fn interference_transform_matches_direct_average() {
    let cfg = NetworkConfig::new(4e-6, 1.0, 8e-4, 3.7).unwrap();
    let model = InterfererDensityModel::from_config(&cfg, &quad(), &root()).unwrap();
    // Transform argument of a 100 m serving link without fading.
    let s = 100f64.powf(cfg.alpha_pl);
    let theory = interference_laplace(s, &model, cfg.alpha_pl, &quad()).unwrap();

    let window = default_window(cfg.lambda0);
    let n = 20_000u64;
    let mut sum = 0.0;
    for i in 0..n {
        let real = realize(&cfg, window, 7_000_000 + i).unwrap();
        let interference: f64 = real
            .interferers
            .iter()
            .zip(&real.interferer_fades)
            .map(|(u, h)| h * u.norm().powf(-cfg.alpha_pl))
            .sum();
        sum += (-s * interference).exp();
    }
    let empirical = sum / n as f64;
    assert!(
        (theory - empirical).abs() <= 0.02,
        "transform {theory} vs direct average {empirical}"
    );
}

#[test]
fn unit_density_inverse_moment_matches_probe_areas() {
    let cfg = NetworkConfig::new(1.0, 1.0, 200.0, 3.7).unwrap();
    let model = fit_area_model(1.0, cfg.r_c(), &quad(), &root()).unwrap();
    let theory = model.inverse_moment(&quad()).unwrap();

    let emp = estimate_area_cdf(&cfg, default_window(1.0), 100_000, 16_384, 31_313).unwrap();
    let mc = emp.samples().iter().map(|a| 1.0 / a).sum::<f64>() / emp.samples().len() as f64;
    assert!(
        (mc - theory).abs() / theory <= 0.03,
        "E[1/X] {theory} vs simulation {mc}"
    );
}

#[test]
fn mean_inverse_load_matches_simulated_loads() {
    let cfg = NetworkConfig::new(4e-6, 1.0, 8e-4, 3.7).unwrap();
    let model = fit_area_model(cfg.lambda0, cfg.r_c(), &quad(), &root()).unwrap();
    let theory = mean_inverse_load(cfg.lambda_u, &model, &quad()).unwrap();

    let samples = collect_samples(&cfg, default_window(cfg.lambda0), 100_000, 424_242).unwrap();
    let mc =
        samples.iter().map(|r| 1.0 / f64::from(r.load)).sum::<f64>() / samples.len() as f64;
    assert!(
        (mc - theory).abs() / theory <= 0.02,
        "E[1/N] {theory} vs simulation {mc}"
    );
}
