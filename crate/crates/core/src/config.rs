//! Run configuration, read from a TOML file with one table per concern.
//!
//! Every constant of the method is surfaced here with its default value:
//!
//! ```toml
//! [deployment]
//! width = 50.0
//! height = 50.0
//! radius = 5.0
//! seed = 1
//!
//! [optics]
//! eps = 10.0
//! min_pts = 4
//!
//! [protocol]
//! theta = 0.1
//! weight_battery = 0.4
//! weight_neighbors = 0.3
//! weight_distance = 0.2
//!
//! [experiment]
//! d_list = [100, 150, 200, 250, 300, 350, 400, 450, 500]
//! trials = 3
//! rounds = 1
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::DEFAULT_GRID_RESOLUTION;
use crate::network::BatteryRange;
use crate::optics::OpticsParams;
use crate::protocol::{AcceptanceWeights, ProtocolConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeploymentSection {
    /// Node count for single-deployment runs; experiments use `experiment.d_list`.
    pub count: usize,
    pub width: f64,
    pub height: f64,
    pub radius: f64,
    /// Master seed; trial `t` uses `seed + t`.
    pub seed: u64,
    pub battery_low: f64,
    pub battery_high: f64,
}

impl Default for DeploymentSection {
    fn default() -> Self {
        let battery = BatteryRange::default();
        Self {
            count: 100,
            width: 50.0,
            height: 50.0,
            radius: 5.0,
            seed: 1,
            battery_low: battery.low,
            battery_high: battery.high,
        }
    }
}

impl DeploymentSection {
    pub fn battery(&self) -> BatteryRange {
        BatteryRange {
            low: self.battery_low,
            high: self.battery_high,
        }
    }

    pub fn trial_seed(&self, trial: usize) -> u64 {
        self.seed.wrapping_add(trial as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OpticsSection {
    pub eps: f64,
    pub min_pts: usize,
    /// Reachability cut for cluster extraction; defaults to `eps / 2`.
    pub eps_prime: Option<f64>,
}

impl Default for OpticsSection {
    fn default() -> Self {
        Self {
            eps: 10.0,
            min_pts: 4,
            eps_prime: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolSection {
    pub theta: f64,
    pub battery_drain: f64,
    pub sleep_rounds: usize,
    pub grid_resolution: usize,
    pub weight_battery: f64,
    pub weight_neighbors: f64,
    pub weight_distance: f64,
}

impl Default for ProtocolSection {
    fn default() -> Self {
        let w = AcceptanceWeights::default();
        let p = ProtocolConfig::default();
        Self {
            theta: p.theta,
            battery_drain: p.battery_drain,
            sleep_rounds: p.sleep_rounds,
            grid_resolution: DEFAULT_GRID_RESOLUTION,
            weight_battery: w.battery,
            weight_neighbors: w.neighbors,
            weight_distance: w.distance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub d_list: Vec<usize>,
    pub trials: usize,
    pub rounds: usize,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            d_list: (100..=500).step_by(50).collect(),
            trials: 3,
            rounds: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineSection {
    pub deployed: usize,
    pub trials: usize,
}

impl Default for BaselineSection {
    fn default() -> Self {
        Self {
            deployed: 300,
            trials: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub deployment: DeploymentSection,
    pub optics: OpticsSection,
    pub protocol: ProtocolSection,
    pub experiment: ExperimentSection,
    pub baseline: BaselineSection,
    pub output: OutputSection,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn optics_params(&self) -> OpticsParams {
        OpticsParams {
            eps: self.optics.eps,
            min_pts: self.optics.min_pts,
        }
    }

    pub fn protocol_config(&self) -> ProtocolConfig {
        let p = &self.protocol;
        ProtocolConfig {
            weights: AcceptanceWeights {
                battery: p.weight_battery,
                neighbors: p.weight_neighbors,
                distance: p.weight_distance,
            },
            theta: p.theta,
            battery_drain: p.battery_drain,
            sleep_rounds: p.sleep_rounds,
            eps_prime: self.optics.eps_prime,
            grid_resolution: p.grid_resolution,
        }
    }

    /// Checks every invariant that does not need the filesystem.
    pub fn validate(&self) -> Result<()> {
        let d = &self.deployment;
        for (name, v) in [("width", d.width), ("height", d.height), ("radius", d.radius)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("deployment.{name} must be positive, got {v}")));
            }
        }
        if d.count == 0 {
            return Err(Error::InvalidConfig("deployment.count must be at least 1".into()));
        }
        let b = d.battery();
        if !(0.0 < b.low && b.low <= b.high && b.high <= 1.0) {
            return Err(Error::InvalidConfig(
                "battery range must satisfy 0 < battery_low <= battery_high <= 1".into(),
            ));
        }
        let params = self.optics_params();
        params.validate()?;
        // REQ range 2r must stay inside the clustering neighborhood 2*eps.
        if params.eps < d.radius {
            return Err(Error::InvalidConfig(format!(
                "optics.eps ({}) must be at least deployment.radius ({}) so that 2r <= 2*eps",
                params.eps, d.radius
            )));
        }
        self.protocol_config().validate(&params)?;
        let e = &self.experiment;
        if e.d_list.is_empty() || e.d_list.contains(&0) {
            return Err(Error::InvalidConfig("experiment.d_list must list positive node counts".into()));
        }
        if e.trials == 0 {
            return Err(Error::InvalidConfig("experiment.trials must be at least 1".into()));
        }
        if e.rounds == 0 {
            return Err(Error::InvalidConfig("experiment.rounds must be at least 1".into()));
        }
        if self.baseline.deployed == 0 || self.baseline.trials == 0 {
            return Err(Error::InvalidConfig("baseline.deployed and baseline.trials must be positive".into()));
        }
        Ok(())
    }
}
