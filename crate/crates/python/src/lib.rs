//! Python bindings for the `adrlite` simulator.

use std::path::PathBuf;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use adrlite::adr::{AdrLiteState, Strategy};
use adrlite::channel::{self, ChannelParams};
use adrlite::phy::{self, AirtimeMode, CodingRate, RadioConstants};
use adrlite::scenario::{self, RunOptions};
use adrlite::sim::{self, MissPolicy, MobilityParams, SimConfig};
use adrlite::space::{self, ConfigDimensions};

fn err(e: adrlite::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse<T: std::str::FromStr<Err = adrlite::Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(err)
}

fn radio(payload_len: Option<u32>) -> RadioConstants {
    let mut r = RadioConstants::default();
    if let Some(pl) = payload_len {
        r.payload_len = pl;
    }
    r
}

#[pyclass(
    name = "LoRaConfig",
    module = "adrlite_py",
    frozen,
    eq,
    hash,
    skip_from_py_object
)]
#[derive(Clone, PartialEq, Eq, Hash)]
struct PyLoRaConfig(phy::LoRaConfig);

#[pymethods]
impl PyLoRaConfig {
    #[new]
    #[pyo3(signature = (sf, tp_dbm, cf_mhz = 868.1, cr = "4/5", bw_hz = 125_000))]
    fn new(sf: u8, tp_dbm: i8, cf_mhz: f64, cr: &str, bw_hz: u32) -> PyResult<Self> {
        let cf_khz = phy::mhz_to_khz("cf_mhz", cf_mhz).map_err(err)?;
        let cr: CodingRate = parse(cr)?;
        phy::LoRaConfig::new(sf, tp_dbm, cf_khz, cr, bw_hz)
            .map(PyLoRaConfig)
            .map_err(err)
    }

    #[getter]
    fn sf(&self) -> u8 {
        self.0.sf
    }

    #[getter]
    fn tp_dbm(&self) -> i8 {
        self.0.tp_dbm
    }

    #[getter]
    fn cf_mhz(&self) -> f64 {
        self.0.cf_mhz()
    }

    #[getter]
    fn cr(&self) -> String {
        self.0.cr.to_string()
    }

    #[getter]
    fn bw_hz(&self) -> u32 {
        self.0.bw_hz
    }

    #[pyo3(signature = (mode = "paper", payload_len = None))]
    fn time_on_air(&self, mode: &str, payload_len: Option<u32>) -> PyResult<f64> {
        phy::time_on_air(&self.0, &radio(payload_len), parse(mode)?).map_err(err)
    }

    #[pyo3(signature = (mode = "paper", payload_len = None))]
    fn energy(&self, mode: &str, payload_len: Option<u32>) -> PyResult<f64> {
        phy::energy_per_packet(&self.0, &radio(payload_len), parse(mode)?).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "LoRaConfig(sf={}, tp_dbm={}, cf_mhz={}, cr='{}', bw_hz={})",
            self.0.sf,
            self.0.tp_dbm,
            self.0.cf_mhz(),
            self.0.cr,
            self.0.bw_hz
        )
    }
}

/// Energy-sorted configuration space with 1-based indices.
#[pyclass(name = "ConfigSpace", module = "adrlite_py", frozen)]
struct PyConfigSpace(space::ConfigSpace);

#[pymethods]
impl PyConfigSpace {
    #[new]
    #[pyo3(signature = (dims = "config-1", mode = "paper"))]
    fn new(dims: &str, mode: &str) -> PyResult<Self> {
        let dims = ConfigDimensions::parse(dims).map_err(err)?;
        space::ConfigSpace::build(&dims, &RadioConstants::default(), parse(mode)?)
            .map(PyConfigSpace)
            .map_err(err)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn config_at(&self, index: usize) -> PyResult<PyLoRaConfig> {
        self.0.config_at(index).map(PyLoRaConfig).map_err(err)
    }

    fn energy_at(&self, index: usize) -> PyResult<f64> {
        self.0.energy_at(index).map_err(err)
    }

    fn airtime_at(&self, index: usize) -> PyResult<f64> {
        self.0.airtime_at(index).map_err(err)
    }

    fn index_of(&self, config: &PyLoRaConfig) -> PyResult<usize> {
        self.0.index_of(&config.0).map_err(err)
    }

    fn energies(&self) -> Vec<f64> {
        self.0.energies().to_vec()
    }

    fn to_csv(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        self.0.write_csv(&mut buf).map_err(err)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

/// Per-device ADR-Lite index state.
#[pyclass(name = "AdrLite", module = "adrlite_py")]
struct PyAdrLite(AdrLiteState);

#[pymethods]
impl PyAdrLite {
    #[new]
    #[pyo3(signature = (space_size, index = None))]
    fn new(space_size: usize, index: Option<usize>) -> PyResult<Self> {
        match index {
            Some(k) => AdrLiteState::with_index(space_size, k),
            None => AdrLiteState::new(space_size),
        }
        .map(PyAdrLite)
        .map_err(err)
    }

    #[getter]
    fn current(&self) -> usize {
        self.0.current()
    }

    #[getter]
    fn space_size(&self) -> usize {
        self.0.space_size()
    }

    /// Feeds the index of a received uplink; returns the new index.
    fn update(&mut self, r_index: usize) -> PyResult<usize> {
        self.0.update(r_index).map(|s| s.index).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "AdrLite(space_size={}, current={})",
            self.0.space_size(),
            self.0.current()
        )
    }
}

#[pyfunction]
#[pyo3(signature = (sf, bw_hz = 125_000))]
fn symbol_time(sf: u8, bw_hz: u32) -> PyResult<f64> {
    phy::symbol_time(sf, bw_hz).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (sf, tp_dbm = 14, cf_mhz = 868.1, cr = "4/5", bw_hz = 125_000, mode = "paper", payload_len = None))]
fn time_on_air(
    sf: u8,
    tp_dbm: i8,
    cf_mhz: f64,
    cr: &str,
    bw_hz: u32,
    mode: &str,
    payload_len: Option<u32>,
) -> PyResult<f64> {
    PyLoRaConfig::new(sf, tp_dbm, cf_mhz, cr, bw_hz)?.time_on_air(mode, payload_len)
}

#[pyfunction]
#[pyo3(signature = (sf, tp_dbm = 14, cf_mhz = 868.1, cr = "4/5", bw_hz = 125_000, mode = "paper", payload_len = None))]
fn energy_per_packet(
    sf: u8,
    tp_dbm: i8,
    cf_mhz: f64,
    cr: &str,
    bw_hz: u32,
    mode: &str,
    payload_len: Option<u32>,
) -> PyResult<f64> {
    PyLoRaConfig::new(sf, tp_dbm, cf_mhz, cr, bw_hz)?.energy(mode, payload_len)
}

#[pyfunction]
fn path_loss_db(distance_m: f64) -> f64 {
    channel::path_loss_db(distance_m, &ChannelParams::default())
}

/// One simulation run; returns network-wide counters and metrics.
#[pyfunction]
#[pyo3(signature = (
    strategy = "adr-lite", num_eds = 100, sigma_db = 7.08, horizon_s = 86_400.0,
    dims = "config-1", mobile = false, seed = 1, ideal_downlink = false,
    miss_policy = "fallback", mode = "paper"
))]
#[allow(clippy::too_many_arguments)]
fn run_simulation<'py>(
    py: Python<'py>,
    strategy: &str,
    num_eds: u32,
    sigma_db: f64,
    horizon_s: f64,
    dims: &str,
    mobile: bool,
    seed: u64,
    ideal_downlink: bool,
    miss_policy: &str,
    mode: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let mut cfg = SimConfig {
        num_eds,
        strategy: parse::<Strategy>(strategy)?,
        dims: ConfigDimensions::parse(dims).map_err(err)?,
        horizon_s,
        ideal_downlink,
        miss_policy: parse::<MissPolicy>(miss_policy)?,
        airtime_mode: parse::<AirtimeMode>(mode)?,
        ..SimConfig::default()
    };
    cfg.channel.sigma_db = sigma_db;
    if mobile {
        cfg.mobility = MobilityParams::random_waypoint();
    }
    let out = py.detach(|| sim::run_standalone(&cfg, seed)).map_err(err)?;
    let s = out.metrics.summary();
    let d = PyDict::new(py);
    d.set_item("packets_sent", out.metrics.packets_sent)?;
    d.set_item("packets_received", out.metrics.packets_received)?;
    d.set_item("total_energy_j", out.metrics.total_energy_j)?;
    d.set_item("pdr", s.pdr)?;
    d.set_item("ec_j", s.ec_j)?;
    Ok(d)
}

/// Runs a scenario file or preset; returns the summary rows. Output files
/// are written when `out` is given.
#[pyfunction]
#[pyo3(signature = (source, desk_scale = false, jobs = None, seed = None, out = None))]
fn run_scenario<'py>(
    py: Python<'py>,
    source: &str,
    desk_scale: bool,
    jobs: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let mut spec = scenario::load_scenario(source).map_err(err)?;
    if desk_scale {
        spec = spec.desk_scale();
    }
    if let Some(s) = seed {
        spec.seed = s;
    }
    let opts = RunOptions {
        jobs,
        record_trace: false,
    };
    let run = py
        .detach(|| scenario::run_scenario(&spec, &opts))
        .map_err(err)?;
    if let Some(dir) = out {
        scenario::write_outputs(&run, &dir).map_err(err)?;
    }
    run.table
        .summary
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("strategy", r.strategy.name())?;
            d.set_item("dims", &r.dims)?;
            d.set_item("k_size", r.k_size)?;
            d.set_item(run.table.sweep_variable.as_str(), r.sweep_value)?;
            d.set_item("replicates", r.replicates)?;
            d.set_item("pdr_mean", r.pdr_mean)?;
            d.set_item("pdr_ci95", r.pdr_ci95)?;
            d.set_item("ec_mean_j", r.ec_mean_j)?;
            d.set_item("ec_ci95_j", r.ec_ci95_j)?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
fn adrlite_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLoRaConfig>()?;
    m.add_class::<PyConfigSpace>()?;
    m.add_class::<PyAdrLite>()?;
    m.add_function(wrap_pyfunction!(symbol_time, m)?)?;
    m.add_function(wrap_pyfunction!(time_on_air, m)?)?;
    m.add_function(wrap_pyfunction!(energy_per_packet, m)?)?;
    m.add_function(wrap_pyfunction!(path_loss_db, m)?)?;
    m.add_function(wrap_pyfunction!(run_simulation, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    Ok(())
}
