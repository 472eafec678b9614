//! Log-distance path loss with log-normal shadowing, SNR, and the gateway
//! reception rule (sensitivity, then same-SF/same-channel capture).

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phy::{LinkTables, LoRaConfig};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn new(x: f64, y: f64) -> Self {
        Position { x, y }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn lerp(&self, to: &Position, frac: f64) -> Position {
        Position {
            x: self.x + (to.x - self.x) * frac,
            y: self.y + (to.y - self.y) * frac,
        }
    }
}

/// Oulu log-distance model parameters and receiver front-end constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelParams {
    /// Path loss at the reference distance (dB).
    pub pl0_db: f64,
    pub exponent: f64,
    pub d0_m: f64,
    /// Shadowing standard deviation (dB).
    pub sigma_db: f64,
    pub noise_figure_db: f64,
    /// Sum of transmitter and receiver antenna gains (dB).
    pub antenna_gains_db: f64,
    pub capture_threshold_db: f64,
    /// Distances below this are clamped.
    pub min_distance_m: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        ChannelParams {
            pl0_db: 128.95,
            exponent: 2.32,
            d0_m: 1000.0,
            sigma_db: 7.08,
            noise_figure_db: 6.0,
            antenna_gains_db: 0.0,
            capture_threshold_db: 6.0,
            min_distance_m: 1.0,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self, field: &str) -> Result<()> {
        let checks = [
            ("sigma_db", self.sigma_db >= 0.0, "must be >= 0"),
            ("d0_m", self.d0_m > 0.0, "must be > 0"),
            ("min_distance_m", self.min_distance_m > 0.0, "must be > 0"),
            ("exponent", self.exponent > 0.0, "must be > 0"),
            (
                "capture_threshold_db",
                self.capture_threshold_db >= 0.0,
                "must be >= 0",
            ),
        ];
        for (name, ok, reason) in checks {
            if !ok {
                return Err(Error::invalid(format!("{field}.{name}"), reason));
            }
        }
        let finite = [
            self.pl0_db,
            self.exponent,
            self.d0_m,
            self.sigma_db,
            self.noise_figure_db,
            self.antenna_gains_db,
            self.capture_threshold_db,
            self.min_distance_m,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(
                field,
                "all channel parameters must be finite",
            ));
        }
        Ok(())
    }
}

/// `B + 10 n log10(d / d0)`.
pub fn path_loss_db(distance_m: f64, params: &ChannelParams) -> f64 {
    let d = if distance_m < params.min_distance_m {
        log::warn!(
            "distance {distance_m} m below {} m, clamped",
            params.min_distance_m
        );
        params.min_distance_m
    } else {
        distance_m
    };
    params.pl0_db + 10.0 * params.exponent * (d / params.d0_m).log10()
}

/// Zero-mean Gaussian shadowing sample in dB.
pub fn sample_shadowing<R: Rng + ?Sized>(rng: &mut R, sigma_db: f64) -> f64 {
    if sigma_db == 0.0 {
        return 0.0;
    }
    Normal::new(0.0, sigma_db)
        .expect("sigma validated non-negative")
        .sample(rng)
}

pub fn received_power_dbm(
    tp_dbm: f64,
    distance_m: f64,
    shadow_db: f64,
    params: &ChannelParams,
) -> f64 {
    tp_dbm + params.antenna_gains_db - path_loss_db(distance_m, params) - shadow_db
}

/// Thermal noise floor `-174 + 10 log10(bw) + NF` in dBm.
pub fn noise_floor_dbm(bw_hz: u32, noise_figure_db: f64) -> f64 {
    -174.0 + 10.0 * f64::from(bw_hz).log10() + noise_figure_db
}

pub fn snr_db(rx_power_dbm: f64, bw_hz: u32, noise_figure_db: f64) -> f64 {
    rx_power_dbm - noise_floor_dbm(bw_hz, noise_figure_db)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Ok,
    BelowSensitivity,
    Collision,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Ok => "ok",
            Outcome::BelowSensitivity => "below_sensitivity",
            Outcome::Collision => "collision",
        }
    }
}

/// One uplink on the air.
#[derive(Clone, Debug, PartialEq)]
pub struct TransmissionAttempt {
    pub id: u64,
    pub ed_id: u32,
    pub config: LoRaConfig,
    pub start_s: f64,
    pub end_s: f64,
    pub rx_power_dbm: f64,
    pub outcome: Option<Outcome>,
}

impl TransmissionAttempt {
    pub fn overlaps(&self, other: &TransmissionAttempt) -> bool {
        self.start_s < other.end_s && other.start_s < self.end_s
    }

    fn interferes_with(&self, other: &TransmissionAttempt) -> bool {
        self.id != other.id
            && self.config.sf == other.config.sf
            && self.config.cf_khz == other.config.cf_khz
            && self.overlaps(other)
    }
}

/// Outcome of `target` given every other attempt that may overlap it.
pub fn reception_outcome<'a>(
    target: &TransmissionAttempt,
    others: impl IntoIterator<Item = &'a TransmissionAttempt>,
    link: &LinkTables,
    capture_threshold_db: f64,
) -> Result<Outcome> {
    let floor = link.sensitivity(target.config.sf, target.config.bw_hz)?;
    if target.rx_power_dbm < floor {
        return Ok(Outcome::BelowSensitivity);
    }
    let captured = others
        .into_iter()
        .filter(|o| o.interferes_with(target))
        .all(|o| target.rx_power_dbm - o.rx_power_dbm >= capture_threshold_db);
    Ok(if captured {
        Outcome::Ok
    } else {
        Outcome::Collision
    })
}

/// Resolves a batch of attempts against each other.
pub fn resolve_receptions(
    attempts: &[TransmissionAttempt],
    link: &LinkTables,
    capture_threshold_db: f64,
) -> Result<Vec<Outcome>> {
    attempts
        .iter()
        .map(|a| reception_outcome(a, attempts, link, capture_threshold_db))
        .collect()
}
