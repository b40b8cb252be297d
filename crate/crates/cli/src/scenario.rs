//! Scenario files: JSON run descriptions consumed by every subcommand.
//!
//! A scenario mirrors the network configuration (densities, cell range,
//! path loss) and adds run controls (realization count, seed, window size,
//! threshold grid). Every field has a default, so an empty object `{}` is a
//! valid scenario and a missing `--scenario` flag falls back to the built-in
//! reference operating point: stations at 4e-6 per square meter with a 250 m
//! cell range, users at 200x the station density, and path-loss exponent 3.7.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use jm_uplink_core::monte_carlo::DEFAULT_WINDOW_FACTOR;
use jm_uplink_core::point_process::SimulationWindow;
use jm_uplink_core::uplink::NetworkConfig;
use jm_uplink_core::validation::DEFAULT_VALIDATION_SEED;
use jm_uplink_core::{Result, DISTANCE_CORRECTION_C2};
use serde::Deserialize;

/// Default station density per square meter.
const DEFAULT_LAMBDA0: f64 = 4e-6;
/// Default cell range in meters, expressed through `kappa` below.
const DEFAULT_RANGE_M: f64 = 250.0;
/// Default ratio of active-user density to station density.
const DEFAULT_USER_RATIO: f64 = 200.0;
/// Default path-loss exponent.
const DEFAULT_ALPHA_PL: f64 = 3.7;
/// Default number of Monte Carlo realizations per estimate.
const DEFAULT_REALIZATIONS: u64 = 20_000;

/// One run description: network parameters plus simulation controls.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scenario {
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
    /// Monte Carlo realizations per estimate.
    pub n_realizations: u64,
    /// Master seed; `--seed` on the command line overrides it.
    pub seed: u64,
    /// Simulation window half-width in mean station spacings.
    pub window_halfwidth_factor: f64,
    /// SIR thresholds in dB for the coverage command.
    pub thresholds_db: Vec<f64>,
    /// Cell-range grid for the spectral-efficiency sweep.
    pub kappa_grid: Vec<f64>,
    /// Write one raw-sample CSV row per realization in the sweep command.
    pub dump_samples: bool,
    /// Output directory; `--out` on the command line overrides it.
    pub output_path: Option<String>,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            lambda0: DEFAULT_LAMBDA0,
            kappa: DEFAULT_RANGE_M * (PI * DISTANCE_CORRECTION_C2 * DEFAULT_LAMBDA0).sqrt(),
            c2: DISTANCE_CORRECTION_C2,
            lambda_u: DEFAULT_USER_RATIO * DEFAULT_LAMBDA0,
            alpha_pl: DEFAULT_ALPHA_PL,
            bandwidth: 1.0,
            n_realizations: DEFAULT_REALIZATIONS,
            seed: DEFAULT_VALIDATION_SEED,
            window_halfwidth_factor: DEFAULT_WINDOW_FACTOR,
            thresholds_db: vec![-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0],
            kappa_grid: vec![0.2, 0.4, 1.0, 2.0],
            dump_samples: false,
            output_path: None,
        }
    }
}

impl Scenario {
    /// Parse a scenario from a JSON file.
    pub fn load(path: &Path) -> std::result::Result<Self, String> {
        let text = fs::read_to_string(path)
            .map_err(|e| format!("cannot read scenario {}: {e}", path.display()))?;
        serde_json::from_str(&text)
            .map_err(|e| format!("cannot parse scenario {}: {e}", path.display()))
    }

    /// The network configuration described by this scenario.
    pub fn config(&self) -> Result<NetworkConfig> {
        self.config_for_kappa(self.kappa)
    }

    /// The scenario's configuration with the cell range swapped out, used by
    /// the sweep command.
    pub fn config_for_kappa(&self, kappa: f64) -> Result<NetworkConfig> {
        NetworkConfig::new(self.lambda0, kappa, self.lambda_u, self.alpha_pl)?
            .with_c2(self.c2)?
            .with_bandwidth(self.bandwidth)
    }

    /// The simulation window for this scenario's station density.
    pub fn window(&self) -> SimulationWindow {
        SimulationWindow::for_density(self.lambda0, self.window_halfwidth_factor)
    }
}
