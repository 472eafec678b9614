//! Scenario files and the four built-in evaluation presets.
//!
//! A scenario is a TOML document. Unknown keys are rejected and every value is
//! checked against its legal set before anything runs. [`ScenarioSpec::to_toml`]
//! writes the fully resolved scenario (every default explicit), which loads
//! back to an identical spec.

mod output;
mod runner;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::adr::Strategy;
use crate::channel::{ChannelParams, Position};
use crate::error::{Error, Result};
use crate::phy::{AirtimeMode, LinkTables, RadioConstants};
use crate::sim::{MissPolicy, MobilityParams, SimConfig};
use crate::space::ConfigDimensions;

pub use output::{
    write_decisions_csv, write_outputs, write_plot_data, write_results_csv, write_summary_csv,
    write_transmissions_csv,
};
pub use runner::{
    aggregate, derive_seed, run_scenario, Cell, ReplicateRow, ResultTable, RunOptions, ScenarioRun,
    SummaryRow,
};

const DAY_S: f64 = 86_400.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Scenario1,
    Scenario2,
    Scenario3,
    Scenario4,
    Custom,
}

impl Preset {
    pub const BUILT_IN: [Preset; 4] = [
        Preset::Scenario1,
        Preset::Scenario2,
        Preset::Scenario3,
        Preset::Scenario4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Scenario1 => "scenario1",
            Preset::Scenario2 => "scenario2",
            Preset::Scenario3 => "scenario3",
            Preset::Scenario4 => "scenario4",
            Preset::Custom => "custom",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::BUILT_IN
            .into_iter()
            .chain([Preset::Custom])
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                Error::illegal(
                    "preset",
                    s,
                    "{scenario1, scenario2, scenario3, scenario4, custom}",
                )
            })
    }
}

/// The swept variable and its values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variable", content = "values", rename_all = "snake_case")]
pub enum Sweep {
    NumEds(Vec<u32>),
    Sigma(Vec<f64>),
}

impl Sweep {
    pub fn variable(&self) -> &'static str {
        match self {
            Sweep::NumEds(_) => "num_eds",
            Sweep::Sigma(_) => "sigma",
        }
    }

    pub fn unit(&self) -> &'static str {
        match self {
            Sweep::NumEds(_) => "devices",
            Sweep::Sigma(_) => "dB",
        }
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            Sweep::NumEds(v) => v.iter().map(|&n| f64::from(n)).collect(),
            Sweep::Sigma(v) => v.clone(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Sweep::NumEds(v) => v.len(),
            Sweep::Sigma(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkSection {
    pub cell_side_m: f64,
    /// Used when the sweep is not over the device count.
    pub num_eds: u32,
    /// Gateway `[x, y]`; the cell centre when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gateway: Option<[f64; 2]>,
}

impl Default for NetworkSection {
    fn default() -> Self {
        NetworkSection {
            cell_side_m: 9800.0,
            num_eds: 100,
            gateway: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrafficSection {
    pub mean_interval_s: f64,
}

impl Default for TrafficSection {
    fn default() -> Self {
        TrafficSection {
            mean_interval_s: 1000.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdrSection {
    pub device_margin_db: f64,
    pub history_window: usize,
    pub rx_delay_s: f64,
    pub gateway_tp_dbm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duty_cycle: Option<f64>,
}

impl Default for AdrSection {
    fn default() -> Self {
        AdrSection {
            device_margin_db: 10.0,
            history_window: 20,
            rx_delay_s: 1.0,
            gateway_tp_dbm: 14.0,
            duty_cycle: None,
        }
    }
}

/// A fully resolved scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: String,
    #[serde(default = "custom")]
    pub preset: Preset,
    pub strategies: Vec<Strategy>,
    #[serde(default = "default_replicates")]
    pub replicates: u32,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_horizon")]
    pub horizon_s: f64,
    #[serde(default)]
    pub airtime_mode: AirtimeMode,
    #[serde(default)]
    pub ideal_downlink: bool,
    #[serde(default)]
    pub ed_miss_policy: MissPolicy,
    pub sweep: Sweep,
    #[serde(default)]
    pub network: NetworkSection,
    #[serde(default)]
    pub channel: ChannelParams,
    #[serde(default)]
    pub traffic: TrafficSection,
    #[serde(default)]
    pub mobility: MobilityParams,
    #[serde(default)]
    pub adr: AdrSection,
    #[serde(default)]
    pub radio: RadioConstants,
    #[serde(default)]
    pub link: LinkTables,
    #[serde(default = "default_dimensions")]
    pub dimensions: Vec<ConfigDimensions>,
}

fn custom() -> Preset {
    Preset::Custom
}

fn default_replicates() -> u32 {
    25
}

fn default_seed() -> u64 {
    1
}

fn default_horizon() -> f64 {
    12.0 * DAY_S
}

fn default_dimensions() -> Vec<ConfigDimensions> {
    vec![ConfigDimensions::sf_tp()]
}

const ED_COUNTS: [u32; 7] = [100, 200, 300, 400, 500, 600, 700];
const SIGMAS: [f64; 9] = [0.0, 0.89, 1.78, 2.67, 3.56, 4.46, 5.36, 6.24, 7.08];

impl ScenarioSpec {
    fn base(preset: Preset, sweep: Sweep) -> Self {
        ScenarioSpec {
            name: preset.name().to_string(),
            preset,
            strategies: Strategy::ALL.to_vec(),
            replicates: default_replicates(),
            seed: default_seed(),
            horizon_s: default_horizon(),
            airtime_mode: AirtimeMode::Paper,
            ideal_downlink: false,
            ed_miss_policy: MissPolicy::default(),
            sweep,
            network: NetworkSection::default(),
            channel: ChannelParams::default(),
            traffic: TrafficSection::default(),
            mobility: MobilityParams::default(),
            adr: AdrSection::default(),
            radio: RadioConstants::default(),
            link: LinkTables::default(),
            dimensions: default_dimensions(),
        }
    }

    /// Full-scale preset: 12 simulated days (120 for scenario 4), 25 replicates.
    pub fn preset(preset: Preset) -> Result<Self> {
        let spec = match preset {
            Preset::Scenario1 => Self::base(preset, Sweep::NumEds(ED_COUNTS.to_vec())),
            Preset::Scenario2 => ScenarioSpec {
                mobility: MobilityParams::random_waypoint(),
                ..Self::base(preset, Sweep::NumEds(ED_COUNTS.to_vec()))
            },
            Preset::Scenario3 => Self::base(preset, Sweep::Sigma(SIGMAS.to_vec())),
            Preset::Scenario4 => ScenarioSpec {
                strategies: vec![Strategy::AdrLite],
                horizon_s: 120.0 * DAY_S,
                dimensions: vec![
                    ConfigDimensions::sf_tp(),
                    ConfigDimensions::sf_tp_cf(),
                    ConfigDimensions::sf_tp_cr(),
                    ConfigDimensions::all(),
                ],
                ..Self::base(preset, Sweep::NumEds(ED_COUNTS.to_vec()))
            },
            Preset::Custom => {
                return Err(Error::invalid(
                    "preset",
                    "custom scenarios come from a file",
                ))
            }
        };
        Ok(spec)
    }

    /// One simulated day, 5 replicates, device counts {100, 300}.
    pub fn desk_scale(mut self) -> Self {
        self.horizon_s = DAY_S;
        self.replicates = 5;
        if let Sweep::NumEds(_) = self.sweep {
            self.sweep = Sweep::NumEds(vec![100, 300]);
        }
        self
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut spec: ScenarioSpec = toml::from_str(text).map_err(|e| Error::Parse {
            what: "scenario".into(),
            reason: e.to_string(),
        })?;
        for (i, d) in spec.dimensions.iter_mut().enumerate() {
            if d.label.is_empty() {
                d.label = format!("dims-{}", i + 1);
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario always serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::invalid("name", "must not be empty"));
        }
        if self.strategies.is_empty() {
            return Err(Error::invalid(
                "strategies",
                "must list at least one strategy",
            ));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(s) = self.strategies.iter().find(|s| !seen.insert(**s)) {
            return Err(Error::invalid("strategies", format!("{s} listed twice")));
        }
        if self.replicates == 0 {
            return Err(Error::invalid("replicates", "must be >= 1"));
        }
        if self.seed > i64::MAX as u64 {
            return Err(Error::invalid(
                "seed",
                "must fit in a signed 64-bit integer",
            ));
        }
        if self.sweep.is_empty() {
            return Err(Error::invalid("sweep.values", "must not be empty"));
        }
        if let Sweep::Sigma(values) = &self.sweep {
            if let Some(v) = values.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
                return Err(Error::invalid(
                    "sweep.values",
                    format!("sigma {v} must be >= 0"),
                ));
            }
        }
        if self.dimensions.is_empty() {
            return Err(Error::invalid(
                "dimensions",
                "must list at least one dimension set",
            ));
        }
        let mut labels = std::collections::HashSet::new();
        for (i, d) in self.dimensions.iter().enumerate() {
            d.validate(&format!("dimensions[{i}]"))?;
            if !labels.insert(d.label.as_str()) {
                return Err(Error::invalid(
                    format!("dimensions[{i}].label"),
                    format!("duplicate label {}", d.label),
                ));
            }
        }
        let sweep_values = self.sweep.values();
        for strategy in &self.strategies {
            for dims in 0..self.dimensions.len() {
                self.sim_config(*strategy, dims, sweep_values[0])?
                    .validate()?;
            }
        }
        Ok(())
    }

    /// Simulation parameters for one sweep cell.
    pub fn sim_config(
        &self,
        strategy: Strategy,
        dims: usize,
        sweep_value: f64,
    ) -> Result<SimConfig> {
        let dims = self
            .dimensions
            .get(dims)
            .ok_or_else(|| Error::invalid("dimensions", format!("no dimension set {dims}")))?
            .clone();
        let side = self.network.cell_side_m;
        let gateway = self
            .network
            .gateway
            .map(|[x, y]| Position::new(x, y))
            .unwrap_or(Position::new(side / 2.0, side / 2.0));
        let mut cfg = SimConfig {
            num_eds: self.network.num_eds,
            cell_side_m: side,
            gateway,
            positions: Vec::new(),
            channel: self.channel.clone(),
            link: self.link.clone(),
            radio: self.radio.clone(),
            airtime_mode: self.airtime_mode,
            mean_interval_s: self.traffic.mean_interval_s,
            mobility: self.mobility.clone(),
            strategy,
            dims,
            horizon_s: self.horizon_s,
            rx_delay_s: self.adr.rx_delay_s,
            gateway_tp_dbm: self.adr.gateway_tp_dbm,
            ideal_downlink: self.ideal_downlink,
            miss_policy: self.ed_miss_policy,
            device_margin_db: self.adr.device_margin_db,
            history_window: self.adr.history_window,
            duty_cycle: self.adr.duty_cycle,
            record_trace: false,
        };
        match self.sweep {
            Sweep::NumEds(_) => cfg.num_eds = sweep_value as u32,
            Sweep::Sigma(_) => cfg.channel.sigma_db = sweep_value,
        }
        Ok(cfg)
    }
}

/// Resolves a built-in preset name or reads a scenario file.
pub fn load_scenario(source: &str) -> Result<ScenarioSpec> {
    if let Ok(preset) = source.parse::<Preset>() {
        if preset != Preset::Custom {
            return ScenarioSpec::preset(preset);
        }
    }
    let path = Path::new(source);
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ScenarioSpec::from_toml_str(&text)
}
