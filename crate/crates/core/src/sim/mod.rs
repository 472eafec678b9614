//! Single-gateway discrete-event simulation.
//!
//! Each device sends a fixed-size uplink after an exponential idle time. The
//! gateway resolves receptions when an uplink ends; the network server runs the
//! device's ADR strategy on every received packet and answers in one receive
//! window that opens `rx_delay_s` after the uplink. A run is single-threaded and
//! fully determined by its [`SimConfig`] and seed.

pub mod event;
pub mod metrics;
pub mod mobility;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::adr::{self, AdrDecision, AdrLiteState, LiteBranch, MarginRules, SnrHistory, Strategy};
use crate::channel::{self, ChannelParams, Outcome, Position, TransmissionAttempt};
use crate::error::{Error, Result};
use crate::phy::{self, AirtimeMode, LinkTables, LoRaConfig, RadioConstants};
use crate::space::{ConfigDimensions, ConfigSpace};

pub use event::{Event, EventKind, EventQueue};
pub use metrics::{compute_metrics, EdCounters, Metrics, Summary};
pub use mobility::{MobilityMode, MobilityParams, MobilityState};

/// What an ADR-Lite device does when its receive window brings no assignment.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MissPolicy {
    /// Return to index `|K|`, the configuration ADR-Lite starts from. The next
    /// received packet then carries a configuration the server did not
    /// assign and drives the bisection back up.
    #[default]
    Fallback,
    /// Keep transmitting with the current configuration.
    Keep,
}

impl fmt::Display for MissPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MissPolicy::Fallback => "fallback",
            MissPolicy::Keep => "keep",
        })
    }
}

impl FromStr for MissPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fallback" => Ok(MissPolicy::Fallback),
            "keep" => Ok(MissPolicy::Keep),
            other => Err(Error::illegal("ed_miss_policy", other, "{fallback, keep}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub num_eds: u32,
    pub cell_side_m: f64,
    pub gateway: Position,
    /// Explicit device positions; uniform random placement when empty.
    pub positions: Vec<Position>,
    pub channel: ChannelParams,
    pub link: LinkTables,
    pub radio: RadioConstants,
    pub airtime_mode: AirtimeMode,
    pub mean_interval_s: f64,
    pub mobility: MobilityParams,
    pub strategy: Strategy,
    pub dims: ConfigDimensions,
    pub horizon_s: f64,
    pub rx_delay_s: f64,
    pub gateway_tp_dbm: f64,
    pub ideal_downlink: bool,
    pub miss_policy: MissPolicy,
    pub device_margin_db: f64,
    pub history_window: usize,
    /// Per-device duty-cycle limit, e.g. 0.01; unlimited when `None`.
    pub duty_cycle: Option<f64>,
    /// Keep per-transmission and per-decision logs in the output.
    pub record_trace: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        let side = 9800.0;
        SimConfig {
            num_eds: 100,
            cell_side_m: side,
            gateway: Position::new(side / 2.0, side / 2.0),
            positions: Vec::new(),
            channel: ChannelParams::default(),
            link: LinkTables::default(),
            radio: RadioConstants::default(),
            airtime_mode: AirtimeMode::Paper,
            mean_interval_s: 1000.0,
            mobility: MobilityParams::default(),
            strategy: Strategy::AdrLite,
            dims: ConfigDimensions::sf_tp(),
            horizon_s: 86_400.0,
            rx_delay_s: 1.0,
            gateway_tp_dbm: 14.0,
            ideal_downlink: false,
            miss_policy: MissPolicy::Fallback,
            device_margin_db: 10.0,
            history_window: 20,
            duty_cycle: None,
            record_trace: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("network.cell_side_m", self.cell_side_m),
            ("traffic.mean_interval_s", self.mean_interval_s),
            ("horizon_s", self.horizon_s),
        ];
        for (field, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(
                    field,
                    format!("must be finite and > 0, got {v}"),
                ));
            }
        }
        if !(self.rx_delay_s >= 0.0 && self.rx_delay_s.is_finite()) {
            return Err(Error::invalid("adr.rx_delay_s", "must be finite and >= 0"));
        }
        let inside = |p: &Position| {
            (0.0..=self.cell_side_m).contains(&p.x) && (0.0..=self.cell_side_m).contains(&p.y)
        };
        if !inside(&self.gateway) {
            return Err(Error::invalid(
                "network.gateway",
                "must lie inside the cell",
            ));
        }
        if !self.positions.is_empty() {
            if self.positions.len() != self.num_eds as usize {
                return Err(Error::invalid(
                    "network.positions",
                    format!(
                        "{} positions for {} devices",
                        self.positions.len(),
                        self.num_eds
                    ),
                ));
            }
            if let Some(i) = self.positions.iter().position(|p| !inside(p)) {
                return Err(Error::invalid(
                    format!("network.positions[{i}]"),
                    "outside the cell",
                ));
            }
        }
        if self.history_window == 0 {
            return Err(Error::invalid("adr.history_window", "must be >= 1"));
        }
        if let Some(dc) = self.duty_cycle {
            if !(dc > 0.0 && dc <= 1.0) {
                return Err(Error::invalid("adr.duty_cycle", "must be in (0, 1]"));
            }
        }
        self.channel.validate("channel")?;
        self.mobility.validate("mobility")?;
        self.radio.validate()?;
        self.dims.validate("dimensions")?;
        Ok(())
    }

    fn margin_rules(&self) -> MarginRules {
        MarginRules {
            device_margin_db: self.device_margin_db,
            sf_min: *self.dims.sf.iter().min().expect("validated non-empty"),
            tp_min_dbm: *self.dims.tp.iter().min().expect("validated non-empty"),
            tp_max_dbm: *self.dims.tp.iter().max().expect("validated non-empty"),
            tp_step_db: 3,
            link: self.link.clone(),
        }
    }

    /// Starting configuration of the SNR baselines: highest SF and power,
    /// first carrier and coding rate of the dimensions.
    fn baseline_start(&self) -> LoRaConfig {
        LoRaConfig {
            sf: *self.dims.sf.iter().max().expect("validated non-empty"),
            tp_dbm: *self.dims.tp.iter().max().expect("validated non-empty"),
            cf_khz: self.dims.cf_khz[0],
            cr: self.dims.cr[0],
            bw_hz: self.dims.bw_hz,
        }
    }
}

/// Exponential idle time before the next transmission.
pub fn next_transmission_delay<R: Rng + ?Sized>(rng: &mut R, mean_s: f64) -> f64 {
    Exp::new(1.0 / mean_s).expect("validated mean").sample(rng)
}

/// One logged uplink.
#[derive(Clone, Debug, PartialEq)]
pub struct TransmissionRecord {
    pub attempt: u64,
    pub time_s: f64,
    pub ed_id: u32,
    pub config: LoRaConfig,
    /// Index in the configuration space, 0 when the configuration is outside it.
    pub config_index: usize,
    pub energy_j: f64,
    pub rx_power_dbm: f64,
    pub snr_db: f64,
    pub outcome: Option<Outcome>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecisionKind {
    LiteMatched,
    LiteMismatched,
    Max,
    Avg,
}

impl DecisionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DecisionKind::LiteMatched => "matched",
            DecisionKind::LiteMismatched => "mismatched",
            DecisionKind::Max => "max",
            DecisionKind::Avg => "avg",
        }
    }
}

/// One network-server decision.
#[derive(Clone, Debug, PartialEq)]
pub struct DecisionRecord {
    pub time_s: f64,
    pub ed_id: u32,
    pub r_index: usize,
    pub branch: DecisionKind,
    pub new_index: usize,
    pub sf: u8,
    pub tp_dbm: i8,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunOutput {
    pub metrics: Metrics,
    pub transmissions: Vec<TransmissionRecord>,
    pub decisions: Vec<DecisionRecord>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Assignment {
    Index(usize),
    SfTp { sf: u8, tp_dbm: i8 },
}

#[derive(Clone, Debug)]
struct Device {
    mobility: MobilityState,
    config: LoRaConfig,
    index: usize,
    busy: bool,
    deferred: bool,
    ready_at: f64,
    last_uplink: Option<LoRaConfig>,
    pending: Option<Assignment>,
    downlink_ok: bool,
    lite: Option<AdrLiteState>,
    history: Option<SnrHistory>,
}

#[derive(Clone, Copy, Debug)]
enum Stream {
    Placement = 0,
    Traffic = 1,
    Channel = 2,
    Mobility = 3,
    Strategy = 4,
}

fn stream(seed: u64, s: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(s as u64);
    rng
}

struct Engine<'a> {
    cfg: &'a SimConfig,
    space: &'a ConfigSpace,
    rules: MarginRules,
    queue: EventQueue,
    devices: Vec<Device>,
    on_air: Vec<TransmissionAttempt>,
    guard_s: f64,
    next_attempt: u64,
    traffic_rng: ChaCha8Rng,
    channel_rng: ChaCha8Rng,
    mobility_rng: ChaCha8Rng,
    strategy_rng: ChaCha8Rng,
    out: RunOutput,
}

/// Runs one simulation. `space` must have been built from `cfg.dims`,
/// `cfg.radio` and `cfg.airtime_mode`.
pub fn run(cfg: &SimConfig, space: &ConfigSpace, seed: u64) -> Result<RunOutput> {
    cfg.validate()?;
    if space.len() != cfg.dims.cardinality() || space.airtime_mode() != cfg.airtime_mode {
        return Err(Error::invalid(
            "dimensions",
            "configuration space does not match the run configuration",
        ));
    }
    let mut engine = Engine::new(cfg, space, seed)?;
    engine.start();
    while let Some(ev) = engine.queue.pop() {
        engine.handle(ev)?;
    }
    Ok(engine.out)
}

/// Builds the configuration space and runs.
pub fn run_standalone(cfg: &SimConfig, seed: u64) -> Result<RunOutput> {
    cfg.validate()?;
    let space = ConfigSpace::build(&cfg.dims, &cfg.radio, cfg.airtime_mode)?;
    run(cfg, &space, seed)
}

impl<'a> Engine<'a> {
    fn new(cfg: &'a SimConfig, space: &'a ConfigSpace, seed: u64) -> Result<Self> {
        let mut placement_rng = stream(seed, Stream::Placement);
        let mut mobility_rng = stream(seed, Stream::Mobility);
        let k = space.len();
        let baseline = cfg.baseline_start();
        let mut devices = Vec::with_capacity(cfg.num_eds as usize);
        for id in 0..cfg.num_eds {
            let at = match cfg.positions.get(id as usize) {
                Some(p) => *p,
                None => mobility::uniform_position(&mut placement_rng, cfg.cell_side_m),
            };
            let mobility = match cfg.mobility.mode {
                MobilityMode::Static => MobilityState::fixed(at),
                MobilityMode::RandomWaypoint => MobilityState::moving(
                    at,
                    0.0,
                    &mut mobility_rng,
                    &cfg.mobility,
                    cfg.cell_side_m,
                ),
            };
            let (config, index) = match cfg.strategy {
                Strategy::AdrLite | Strategy::NoAdr => (space.config_at(k)?, k),
                Strategy::AdrMax | Strategy::AdrAvg => {
                    (baseline, space.index_of(&baseline).unwrap_or(0))
                }
            };
            devices.push(Device {
                mobility,
                config,
                index,
                busy: false,
                deferred: false,
                ready_at: 0.0,
                last_uplink: None,
                pending: None,
                downlink_ok: false,
                lite: (cfg.strategy == Strategy::AdrLite)
                    .then(|| AdrLiteState::new(k))
                    .transpose()?,
                history: matches!(cfg.strategy, Strategy::AdrMax | Strategy::AdrAvg)
                    .then(|| SnrHistory::new(cfg.history_window)),
            });
        }
        let baseline_toa = phy::time_on_air(&baseline, &cfg.radio, cfg.airtime_mode)?;
        Ok(Engine {
            cfg,
            space,
            rules: cfg.margin_rules(),
            queue: EventQueue::new(),
            devices,
            on_air: Vec::new(),
            guard_s: space.max_airtime().max(baseline_toa),
            next_attempt: 0,
            traffic_rng: stream(seed, Stream::Traffic),
            channel_rng: stream(seed, Stream::Channel),
            mobility_rng,
            strategy_rng: stream(seed, Stream::Strategy),
            out: RunOutput {
                metrics: Metrics::new(cfg.num_eds as usize),
                ..Default::default()
            },
        })
    }

    fn start(&mut self) {
        for id in 0..self.cfg.num_eds {
            let t = next_transmission_delay(&mut self.traffic_rng, self.cfg.mean_interval_s);
            if t < self.cfg.horizon_s {
                self.queue.schedule(t, EventKind::NextTransmission(id));
            }
            let arrive = self.devices[id as usize].mobility.arrive_s;
            if arrive < self.cfg.horizon_s {
                self.queue.schedule(arrive, EventKind::WaypointArrival(id));
            }
        }
    }

    fn handle(&mut self, ev: Event) -> Result<()> {
        let now = ev.time_s;
        match ev.kind {
            EventKind::NextTransmission(ed) => self.on_next_transmission(ed, now),
            EventKind::UplinkStart(ed) => self.on_uplink_start(ed, now)?,
            EventKind::UplinkEnd { ed, attempt } => self.on_uplink_end(ed, attempt, now)?,
            EventKind::DownlinkStart(ed) => self.on_downlink_start(ed, now)?,
            EventKind::DownlinkEnd(ed) => self.on_downlink_end(ed, now)?,
            EventKind::WaypointArrival(ed) => self.on_waypoint(ed, now),
        }
        Ok(())
    }

    fn on_next_transmission(&mut self, ed: u32, now: f64) {
        let dev = &mut self.devices[ed as usize];
        if dev.busy {
            dev.deferred = true;
        } else if now < dev.ready_at {
            let at = dev.ready_at;
            self.queue.schedule(at, EventKind::NextTransmission(ed));
        } else {
            dev.busy = true;
            self.queue.schedule(now, EventKind::UplinkStart(ed));
        }
    }

    fn on_uplink_start(&mut self, ed: u32, now: f64) -> Result<()> {
        let cfg = self.cfg;
        if cfg.strategy == Strategy::NoAdr {
            let index = adr::no_adr_pick(&mut self.strategy_rng, self.space.len());
            let dev = &mut self.devices[ed as usize];
            dev.index = index;
            dev.config = self.space.config_at(index)?;
        }
        let dev = &mut self.devices[ed as usize];
        let config = dev.config;
        let toa = phy::time_on_air(&config, &cfg.radio, cfg.airtime_mode)?;
        let energy = phy::energy_per_packet(&config, &cfg.radio, cfg.airtime_mode)?;
        let distance = dev.mobility.position_at(now).distance(&cfg.gateway);
        let shadow = channel::sample_shadowing(&mut self.channel_rng, cfg.channel.sigma_db);
        let rx =
            channel::received_power_dbm(f64::from(config.tp_dbm), distance, shadow, &cfg.channel);
        let end = now + toa;
        if let Some(dc) = cfg.duty_cycle {
            dev.ready_at = end + toa * (1.0 / dc - 1.0);
        }
        dev.last_uplink = Some(config);
        let attempt = self.next_attempt;
        self.next_attempt += 1;
        self.on_air.push(TransmissionAttempt {
            id: attempt,
            ed_id: ed,
            config,
            start_s: now,
            end_s: end,
            rx_power_dbm: rx,
            outcome: None,
        });
        self.out.metrics.record_sent(ed as usize, energy);
        if cfg.record_trace {
            self.out.transmissions.push(TransmissionRecord {
                attempt,
                time_s: now,
                ed_id: ed,
                config,
                config_index: dev.index,
                energy_j: energy,
                rx_power_dbm: rx,
                snr_db: channel::snr_db(rx, config.bw_hz, cfg.channel.noise_figure_db),
                outcome: None,
            });
        }
        self.queue
            .schedule(end, EventKind::UplinkEnd { ed, attempt });
        Ok(())
    }

    fn on_uplink_end(&mut self, ed: u32, attempt: u64, now: f64) -> Result<()> {
        let cfg = self.cfg;
        let pos = self
            .on_air
            .iter()
            .position(|a| a.id == attempt)
            .expect("ended attempt is on air");
        let outcome = channel::reception_outcome(
            &self.on_air[pos],
            &self.on_air,
            &cfg.link,
            cfg.channel.capture_threshold_db,
        )?;
        self.on_air[pos].outcome = Some(outcome);
        let tx = self.on_air[pos].clone();
        if cfg.record_trace {
            self.out.transmissions[attempt as usize].outcome = Some(outcome);
        }
        let horizon = now - self.guard_s;
        self.on_air.retain(|a| a.end_s >= horizon);

        if outcome == Outcome::Ok {
            self.out.metrics.record_received(ed as usize);
            let snr = channel::snr_db(
                tx.rx_power_dbm,
                tx.config.bw_hz,
                cfg.channel.noise_figure_db,
            );
            self.network_server(ed, &tx, snr, now)?;
        }

        let delay = next_transmission_delay(&mut self.traffic_rng, cfg.mean_interval_s);
        if now + delay < cfg.horizon_s {
            self.queue
                .schedule(now + delay, EventKind::NextTransmission(ed));
        }
        self.queue
            .schedule(now + cfg.rx_delay_s, EventKind::DownlinkStart(ed));
        Ok(())
    }

    fn network_server(
        &mut self,
        ed: u32,
        tx: &TransmissionAttempt,
        snr: f64,
        now: f64,
    ) -> Result<()> {
        let strategy = self.cfg.strategy;
        let record = self.cfg.record_trace;
        let dev = &mut self.devices[ed as usize];
        let r_index = self.space.index_of(&tx.config).unwrap_or(0);
        let decision = match strategy {
            Strategy::NoAdr => return Ok(()),
            Strategy::AdrLite => {
                let lite = dev.lite.as_mut().expect("lite state");
                let step = lite.update(r_index)?;
                let kind = match step.branch {
                    LiteBranch::Matched => DecisionKind::LiteMatched,
                    LiteBranch::Mismatched => DecisionKind::LiteMismatched,
                };
                dev.pending = Some(Assignment::Index(step.index));
                Some((kind, step.index, self.space.config_at(step.index)?))
            }
            Strategy::AdrMax | Strategy::AdrAvg => {
                let history = dev.history.as_mut().expect("snr history");
                history.push(snr);
                if !history.is_full() {
                    return Ok(());
                }
                let (sf, tp) = (tx.config.sf, tx.config.tp_dbm);
                let (decision, kind) = if strategy == Strategy::AdrMax {
                    (
                        adr::adr_max_update(history, sf, tp, &self.rules)?,
                        DecisionKind::Max,
                    )
                } else {
                    (
                        adr::adr_avg_update(history, sf, tp, &self.rules)?,
                        DecisionKind::Avg,
                    )
                };
                history.clear();
                match decision {
                    AdrDecision::NewSfTp { sf, tp_dbm } => {
                        dev.pending = Some(Assignment::SfTp { sf, tp_dbm });
                        let c = LoRaConfig {
                            sf,
                            tp_dbm,
                            ..tx.config
                        };
                        Some((kind, self.space.index_of(&c).unwrap_or(0), c))
                    }
                    _ => None,
                }
            }
        };
        if let (true, Some((branch, new_index, c))) = (record, decision) {
            self.out.decisions.push(DecisionRecord {
                time_s: now,
                ed_id: ed,
                r_index,
                branch,
                new_index,
                sf: c.sf,
                tp_dbm: c.tp_dbm,
            });
        }
        Ok(())
    }

    fn on_downlink_start(&mut self, ed: u32, now: f64) -> Result<()> {
        let cfg = self.cfg;
        let dev = &mut self.devices[ed as usize];
        let uplink = dev.last_uplink.expect("window follows an uplink");
        if dev.pending.is_none() {
            self.window_closed(ed, now, false)?;
            return Ok(());
        }
        dev.downlink_ok = if cfg.ideal_downlink {
            true
        } else {
            let distance = dev.mobility.position_at(now).distance(&cfg.gateway);
            let shadow = channel::sample_shadowing(&mut self.channel_rng, cfg.channel.sigma_db);
            let rx =
                channel::received_power_dbm(cfg.gateway_tp_dbm, distance, shadow, &cfg.channel);
            rx >= cfg.link.sensitivity(uplink.sf, uplink.bw_hz)?
        };
        let toa = phy::time_on_air(&uplink, &cfg.radio, cfg.airtime_mode)?;
        self.queue.schedule(now + toa, EventKind::DownlinkEnd(ed));
        Ok(())
    }

    fn on_downlink_end(&mut self, ed: u32, now: f64) -> Result<()> {
        let ok = self.devices[ed as usize].downlink_ok;
        self.window_closed(ed, now, ok)
    }

    fn window_closed(&mut self, ed: u32, now: f64, received: bool) -> Result<()> {
        let dev = &mut self.devices[ed as usize];
        let pending = dev.pending.take();
        match (received, pending) {
            (true, Some(Assignment::Index(k))) => {
                dev.index = k;
                dev.config = self.space.config_at(k)?;
            }
            (true, Some(Assignment::SfTp { sf, tp_dbm })) => {
                dev.config = LoRaConfig {
                    sf,
                    tp_dbm,
                    ..dev.config
                };
                dev.index = self.space.index_of(&dev.config).unwrap_or(0);
            }
            _ => {
                if self.cfg.strategy == Strategy::AdrLite
                    && self.cfg.miss_policy == MissPolicy::Fallback
                {
                    let k = self.space.len();
                    dev.index = k;
                    dev.config = self.space.config_at(k)?;
                }
            }
        }
        dev.busy = false;
        if std::mem::take(&mut dev.deferred) {
            self.queue.schedule(now, EventKind::NextTransmission(ed));
        }
        Ok(())
    }

    fn on_waypoint(&mut self, ed: u32, now: f64) {
        let dev = &mut self.devices[ed as usize];
        dev.mobility = mobility::waypoint_step(
            &dev.mobility,
            &mut self.mobility_rng,
            &self.cfg.mobility,
            self.cfg.cell_side_m,
            now,
        );
        let arrive = dev.mobility.arrive_s;
        if arrive < self.cfg.horizon_s {
            self.queue.schedule(arrive, EventKind::WaypointArrival(ed));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_device(at: Position) -> SimConfig {
        SimConfig {
            num_eds: 1,
            positions: vec![at],
            channel: ChannelParams {
                sigma_db: 0.0,
                ..Default::default()
            },
            ideal_downlink: true,
            record_trace: true,
            horizon_s: 20_000.0,
            ..Default::default()
        }
    }

    #[test]
    fn zero_devices() {
        let cfg = SimConfig {
            num_eds: 0,
            ..Default::default()
        };
        let out = run_standalone(&cfg, 1).unwrap();
        assert_eq!(out.metrics.packets_sent, 0);
        assert_eq!(
            out.metrics.summary(),
            Summary {
                pdr: None,
                ec_j: None
            }
        );
    }

    #[test]
    fn close_device_follows_success_trace() {
        let cfg = one_device(Position::new(5000.0, 4900.0));
        let out = run_standalone(&cfg, 7).unwrap();
        let m = &out.metrics;
        assert!(m.packets_sent >= 8, "sent {}", m.packets_sent);
        assert_eq!(m.packets_sent, m.packets_received);
        let trace: Vec<_> = out.decisions.iter().map(|d| d.new_index).collect();
        let mut expected = vec![15, 8, 4, 2, 1];
        expected.resize(trace.len(), 1);
        assert_eq!(trace, expected);
        let used: Vec<_> = out.transmissions.iter().map(|t| t.config_index).collect();
        assert_eq!(&used[..6], &[30, 15, 8, 4, 2, 1]);
    }

    #[test]
    fn lost_downlink_keeps_index_under_keep_policy() {
        // 6 km away at sigma 0: SF12/14 dBm (index 30) reaches the gateway, the
        // downlink at the same SF does too; index 15 does not.
        let mut cfg = one_device(Position::new(
            4900.0 + 6000.0 / 2f64.sqrt(),
            4900.0 + 6000.0 / 2f64.sqrt(),
        ));
        cfg.miss_policy = MissPolicy::Keep;
        cfg.ideal_downlink = false;
        let out = run_standalone(&cfg, 3).unwrap();
        let used: Vec<_> = out.transmissions.iter().map(|t| t.config_index).collect();
        assert_eq!(used[0], 30);
        assert!(used[1..].iter().all(|&k| k == 15), "{used:?}");
        assert_eq!(out.metrics.packets_received, 1);
    }

    #[test]
    fn fallback_policy_returns_to_top_index() {
        let mut cfg = one_device(Position::new(
            4900.0 + 6000.0 / 2f64.sqrt(),
            4900.0 + 6000.0 / 2f64.sqrt(),
        ));
        cfg.ideal_downlink = false;
        let out = run_standalone(&cfg, 3).unwrap();
        let used: Vec<_> = out.transmissions.iter().map(|t| t.config_index).collect();
        // 30 ok -> 15 lost -> back at 30 (mismatch) -> (15+30)/2 = 22 ...
        assert_eq!(&used[..4], &[30, 15, 30, 22]);
        let branches: Vec<_> = out.decisions.iter().map(|d| d.branch).collect();
        assert_eq!(branches[0], DecisionKind::LiteMatched);
        assert_eq!(branches[1], DecisionKind::LiteMismatched);
    }

    #[test]
    fn energy_charged_for_lost_packets() {
        let mut cfg = one_device(Position::new(9800.0, 9800.0));
        cfg.strategy = Strategy::NoAdr;
        cfg.ideal_downlink = false;
        let out = run_standalone(&cfg, 5).unwrap();
        let lost: Vec<_> = out
            .transmissions
            .iter()
            .filter(|t| t.outcome != Some(Outcome::Ok))
            .collect();
        assert!(!lost.is_empty());
        let sum: f64 = out.transmissions.iter().map(|t| t.energy_j).sum();
        assert_eq!(sum, out.metrics.total_energy_j);
    }

    #[test]
    fn same_seed_same_output() {
        let cfg = SimConfig {
            num_eds: 30,
            mobility: MobilityParams::random_waypoint(),
            record_trace: true,
            horizon_s: 30_000.0,
            ..Default::default()
        };
        let a = run_standalone(&cfg, 42).unwrap();
        let b = run_standalone(&cfg, 42).unwrap();
        assert_eq!(a, b);
        let c = run_standalone(&cfg, 43).unwrap();
        assert_ne!(a.metrics, c.metrics);
    }

    #[test]
    fn invalid_config_rejected() {
        let cfg = SimConfig {
            num_eds: 2,
            positions: vec![Position::new(1.0, 1.0)],
            ..Default::default()
        };
        assert!(run_standalone(&cfg, 1).is_err());
        let cfg = SimConfig {
            horizon_s: 0.0,
            ..Default::default()
        };
        assert!(run_standalone(&cfg, 1).is_err());
        let cfg = SimConfig {
            duty_cycle: Some(1.5),
            ..Default::default()
        };
        assert!(run_standalone(&cfg, 1).is_err());
    }

    #[test]
    fn duty_cycle_spaces_transmissions() {
        let mut cfg = one_device(Position::new(5000.0, 4900.0));
        cfg.duty_cycle = Some(0.01);
        cfg.mean_interval_s = 1.0;
        cfg.horizon_s = 2000.0;
        let out = run_standalone(&cfg, 2).unwrap();
        for w in out.transmissions.windows(2) {
            let toa = phy::time_on_air(&w[0].config, &cfg.radio, cfg.airtime_mode).unwrap();
            assert!(w[1].time_s - w[0].time_s >= 100.0 * toa - 1e-9);
        }
    }

    #[test]
    fn exponential_delays() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let n = 100_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| next_transmission_delay(&mut rng, 1000.0))
            .collect();
        assert!(xs.iter().all(|&x| x > 0.0));
        let mean = xs.iter().sum::<f64>() / n as f64;
        assert!((mean / 1000.0 - 1.0).abs() < 0.02, "mean {mean}");
    }
}
