//! LoRa physical-layer model: symbol time, payload symbol count, time on air,
//! per-packet transmit energy, and the receiver tables (sensitivity and
//! demodulation SNR floor) used by the channel and the SNR-based baselines.
//!
//! All functions here are pure. Energy is `(P_on + P_tx(tp)) * T_toa`; only the
//! transmit phase is charged.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const SPREADING_FACTORS: [u8; 6] = [7, 8, 9, 10, 11, 12];
pub const TX_POWERS_DBM: [i8; 5] = [2, 5, 8, 11, 14];
/// Carrier frequencies in kHz (868.1, 868.4 and 868.7 MHz).
pub const CARRIERS_KHZ: [u32; 3] = [868_100, 868_400, 868_700];
pub const BANDWIDTHS_HZ: [u32; 3] = [125_000, 250_000, 500_000];
pub const DEFAULT_BW_HZ: u32 = 125_000;

fn check_sf(field: &str, sf: u8) -> Result<()> {
    if SPREADING_FACTORS.contains(&sf) {
        Ok(())
    } else {
        Err(Error::illegal(field, sf, "{7, 8, 9, 10, 11, 12}"))
    }
}

fn check_tp(field: &str, tp: i8) -> Result<()> {
    if TX_POWERS_DBM.contains(&tp) {
        Ok(())
    } else {
        Err(Error::illegal(field, tp, "{2, 5, 8, 11, 14} dBm"))
    }
}

fn check_cf(field: &str, cf_khz: u32) -> Result<()> {
    if CARRIERS_KHZ.contains(&cf_khz) {
        Ok(())
    } else {
        Err(Error::illegal(
            field,
            format!("{} MHz", khz_to_mhz(cf_khz)),
            "{868.1, 868.4, 868.7} MHz",
        ))
    }
}

fn check_bw(field: &str, bw_hz: u32) -> Result<()> {
    if BANDWIDTHS_HZ.contains(&bw_hz) {
        Ok(())
    } else {
        Err(Error::illegal(field, bw_hz, "{125000, 250000, 500000} Hz"))
    }
}

pub fn khz_to_mhz(khz: u32) -> f64 {
    f64::from(khz) / 1000.0
}

/// Converts a carrier in MHz (as written in files) to the legal kHz grid value.
pub fn mhz_to_khz(field: &str, mhz: f64) -> Result<u32> {
    let khz = (mhz * 1000.0).round();
    if (khz - mhz * 1000.0).abs() > 1e-6 || !(0.0..=f64::from(u32::MAX)).contains(&khz) {
        return Err(Error::illegal(field, mhz, "{868.1, 868.4, 868.7} MHz"));
    }
    let khz = khz as u32;
    check_cf(field, khz)?;
    Ok(khz)
}

/// LoRa coding rate `4/d`, stored as the denominator `d` in `5..=8`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CodingRate(u8);

impl CodingRate {
    pub const CR4_5: CodingRate = CodingRate(5);
    pub const CR4_6: CodingRate = CodingRate(6);
    pub const CR4_7: CodingRate = CodingRate(7);
    pub const CR4_8: CodingRate = CodingRate(8);
    pub const ALL: [CodingRate; 4] = [Self::CR4_5, Self::CR4_6, Self::CR4_7, Self::CR4_8];

    pub fn from_denominator(denominator: u8) -> Result<Self> {
        if (5..=8).contains(&denominator) {
            Ok(CodingRate(denominator))
        } else {
            Err(Error::illegal(
                "cr",
                format!("4/{denominator}"),
                "{4/5, 4/6, 4/7, 4/8}",
            ))
        }
    }

    pub fn denominator(self) -> u8 {
        self.0
    }

    /// Redundancy bits per 4 data bits (`k` in `4/(4+k)`).
    pub fn extra_bits(self) -> u8 {
        self.0 - 4
    }

    /// Numeric rate, e.g. 0.8 for 4/5.
    pub fn value(self) -> f64 {
        4.0 / f64::from(self.0)
    }
}

impl Default for CodingRate {
    fn default() -> Self {
        Self::CR4_5
    }
}

impl fmt::Display for CodingRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "4/{}", self.0)
    }
}

impl FromStr for CodingRate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let den = s
            .trim()
            .strip_prefix("4/")
            .and_then(|d| d.parse::<u8>().ok())
            .ok_or_else(|| Error::illegal("cr", s, "{4/5, 4/6, 4/7, 4/8}"))?;
        CodingRate::from_denominator(den)
    }
}

impl Serialize for CodingRate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CodingRate {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One transmission-parameter tuple: SF, TP, CF and CR, plus bandwidth.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LoRaConfig {
    pub sf: u8,
    pub tp_dbm: i8,
    pub cf_khz: u32,
    pub cr: CodingRate,
    pub bw_hz: u32,
}

impl LoRaConfig {
    pub fn new(sf: u8, tp_dbm: i8, cf_khz: u32, cr: CodingRate, bw_hz: u32) -> Result<Self> {
        let config = LoRaConfig {
            sf,
            tp_dbm,
            cf_khz,
            cr,
            bw_hz,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        check_sf("sf", self.sf)?;
        check_tp("tp", self.tp_dbm)?;
        check_cf("cf", self.cf_khz)?;
        check_bw("bw", self.bw_hz)?;
        CodingRate::from_denominator(self.cr.denominator()).map(|_| ())
    }

    pub fn cf_mhz(&self) -> f64 {
        khz_to_mhz(self.cf_khz)
    }
}

impl fmt::Display for LoRaConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "SF{}/{}dBm/{}MHz/CR{}/{}kHz",
            self.sf,
            self.tp_dbm,
            self.cf_mhz(),
            self.cr,
            self.bw_hz / 1000
        )
    }
}

/// How the payload symbol count is evaluated.
///
/// `Paper` divides `theta` by `SF - 2*DE` and scales by `1/CR`, which can give a
/// fractional count. `Semtech` is the transceiver datasheet form: divide by
/// `4*(SF - 2*DE)` and multiply by `4 + k`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AirtimeMode {
    #[default]
    Paper,
    Semtech,
}

impl fmt::Display for AirtimeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AirtimeMode::Paper => "paper",
            AirtimeMode::Semtech => "semtech",
        })
    }
}

impl FromStr for AirtimeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(AirtimeMode::Paper),
            "semtech" => Ok(AirtimeMode::Semtech),
            other => Err(Error::illegal("airtime_mode", other, "{paper, semtech}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TxPowerEntry {
    pub tp_dbm: i8,
    /// Supply power drawn by the radio while transmitting at `tp_dbm` (W).
    pub power_w: f64,
}

/// Radio and frame constants that enter the airtime and energy formulas.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadioConstants {
    /// Microcontroller power draw while the radio transmits (W).
    pub p_on_mcu_w: f64,
    /// Radio supply power per transmit power level (W).
    pub tx_power: Vec<TxPowerEntry>,
    /// Preamble symbols.
    pub n_preamble: u32,
    /// Implicit header mode (no PHY header).
    pub header_disabled: bool,
    /// Low data rate optimisation forced on.
    pub ldro: bool,
    /// Enable low data rate optimisation for SF11/SF12 at 125 kHz.
    pub auto_ldro: bool,
    /// Application payload in bytes.
    pub payload_len: u32,
}

const SUPPLY_VOLTAGE_V: f64 = 3.3;

impl Default for RadioConstants {
    /// Supply currents follow a straight line through the SX1276 RFO datasheet
    /// points (+7 dBm, 20 mA) and (+13 dBm, 29 mA) at 3.3 V; the MCU draws
    /// 1.5 mA. These are implementation-chosen values, see
    /// `data/radio_constants.toml`.
    fn default() -> Self {
        let tx_power = TX_POWERS_DBM
            .iter()
            .map(|&tp| {
                let current_ma = 20.0 + 1.5 * (f64::from(tp) - 7.0);
                TxPowerEntry {
                    tp_dbm: tp,
                    power_w: round_nano(SUPPLY_VOLTAGE_V * current_ma / 1000.0),
                }
            })
            .collect();
        RadioConstants {
            p_on_mcu_w: round_nano(SUPPLY_VOLTAGE_V * 1.5 / 1000.0),
            tx_power,
            n_preamble: 8,
            header_disabled: false,
            ldro: false,
            auto_ldro: false,
            payload_len: 20,
        }
    }
}

fn round_nano(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

impl RadioConstants {
    pub fn p_toa(&self, tp_dbm: i8) -> Result<f64> {
        self.tx_power
            .iter()
            .find(|e| e.tp_dbm == tp_dbm)
            .map(|e| e.power_w)
            .ok_or(Error::MissingTxPower(tp_dbm))
    }

    /// Effective DE flag for a given SF and bandwidth.
    pub fn ldro_for(&self, sf: u8, bw_hz: u32) -> bool {
        self.ldro || (self.auto_ldro && sf >= 11 && bw_hz == 125_000)
    }

    pub fn validate(&self) -> Result<()> {
        for &tp in &TX_POWERS_DBM {
            let power = self.p_toa(tp).map_err(|_| {
                Error::invalid("radio.tx_power", format!("missing entry for {tp} dBm"))
            })?;
            if !(power > 0.0 && power.is_finite()) {
                return Err(Error::invalid(
                    "radio.tx_power",
                    format!("power for {tp} dBm must be positive, got {power}"),
                ));
            }
        }
        for (i, e) in self.tx_power.iter().enumerate() {
            check_tp(&format!("radio.tx_power[{i}].tp_dbm"), e.tp_dbm)?;
        }
        if !(self.p_on_mcu_w >= 0.0 && self.p_on_mcu_w.is_finite()) {
            return Err(Error::invalid(
                "radio.p_on_mcu_w",
                "must be finite and >= 0",
            ));
        }
        if self.payload_len == 0 {
            return Err(Error::invalid("radio.payload_len", "must be >= 1"));
        }
        Ok(())
    }
}

/// Receiver sensitivity per bandwidth and the demodulation SNR floor, indexed
/// SF7..SF12.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkTables {
    pub sensitivity_125khz_dbm: [f64; 6],
    pub sensitivity_250khz_dbm: [f64; 6],
    pub sensitivity_500khz_dbm: [f64; 6],
    pub required_snr_db: [f64; 6],
}

impl Default for LinkTables {
    fn default() -> Self {
        LinkTables {
            sensitivity_125khz_dbm: [-124.0, -127.0, -130.0, -133.0, -135.0, -137.0],
            sensitivity_250khz_dbm: [-122.0, -125.0, -128.0, -130.0, -132.0, -135.0],
            sensitivity_500khz_dbm: [-116.0, -119.0, -122.0, -125.0, -128.0, -129.0],
            required_snr_db: [-7.5, -10.0, -12.5, -15.0, -17.5, -20.0],
        }
    }
}

impl LinkTables {
    pub fn sensitivity(&self, sf: u8, bw_hz: u32) -> Result<f64> {
        check_sf("sf", sf)?;
        let row = match bw_hz {
            125_000 => &self.sensitivity_125khz_dbm,
            250_000 => &self.sensitivity_250khz_dbm,
            500_000 => &self.sensitivity_500khz_dbm,
            other => return Err(Error::illegal("bw", other, "{125000, 250000, 500000} Hz")),
        };
        Ok(row[usize::from(sf - 7)])
    }

    pub fn required_snr(&self, sf: u8) -> Result<f64> {
        check_sf("sf", sf)?;
        Ok(self.required_snr_db[usize::from(sf - 7)])
    }
}

/// Contents of a constants file: a `[radio]` and a `[link]` table.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhyConstants {
    pub radio: RadioConstants,
    pub link: LinkTables,
}

impl PhyConstants {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let constants: PhyConstants = toml::from_str(text).map_err(|e| Error::Parse {
            what: "constants file".into(),
            reason: e.to_string(),
        })?;
        constants.radio.validate()?;
        Ok(constants)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("constants always serialize")
    }
}

/// `2^sf / bw` in seconds.
pub fn symbol_time(sf: u8, bw_hz: u32) -> Result<f64> {
    check_sf("sf", sf)?;
    if bw_hz == 0 {
        return Err(Error::invalid("bw", "must be > 0"));
    }
    Ok(f64::from(1u32 << sf) / f64::from(bw_hz))
}

/// `8*PL - 4*SF + 16 + 28 - 20*H`.
pub fn theta(payload_len: u32, sf: u8, header_disabled: bool) -> i64 {
    8 * i64::from(payload_len) - 4 * i64::from(sf) + 16 + 28 - 20 * i64::from(header_disabled)
}

fn ceil_div(num: i64, den: i64) -> i64 {
    debug_assert!(den > 0);
    let q = num.div_euclid(den);
    if num.rem_euclid(den) == 0 {
        q
    } else {
        q + 1
    }
}

pub fn payload_symbols(
    payload_len: u32,
    sf: u8,
    cr: CodingRate,
    header_disabled: bool,
    ldro: bool,
    mode: AirtimeMode,
) -> Result<f64> {
    let gamma = i64::from(sf) - 2 * i64::from(ldro);
    if gamma <= 0 {
        return Err(Error::invalid(
            "sf",
            format!("SF - 2*DE must be positive, got {gamma}"),
        ));
    }
    let theta = theta(payload_len, sf, header_disabled);
    let blocks = match mode {
        AirtimeMode::Paper => ceil_div(theta, gamma) as f64 * f64::from(cr.denominator()) / 4.0,
        AirtimeMode::Semtech => {
            (ceil_div(theta, 4 * gamma) * (4 + i64::from(cr.extra_bits()))) as f64
        }
    };
    Ok(8.0 + blocks.max(0.0))
}

/// Preamble plus payload duration in seconds.
pub fn time_on_air(config: &LoRaConfig, radio: &RadioConstants, mode: AirtimeMode) -> Result<f64> {
    let t_sym = symbol_time(config.sf, config.bw_hz)?;
    let n_payload = payload_symbols(
        radio.payload_len,
        config.sf,
        config.cr,
        radio.header_disabled,
        radio.ldro_for(config.sf, config.bw_hz),
        mode,
    )?;
    let t_preamble = (4.25 + f64::from(radio.n_preamble)) * t_sym;
    Ok(t_preamble + n_payload * t_sym)
}

/// Transmit-phase energy in joules.
pub fn energy_per_packet(
    config: &LoRaConfig,
    radio: &RadioConstants,
    mode: AirtimeMode,
) -> Result<f64> {
    let p_tx = radio.p_toa(config.tp_dbm)?;
    Ok((radio.p_on_mcu_w + p_tx) * time_on_air(config, radio, mode)?)
}

/// Sensitivity from the default table.
pub fn sensitivity(sf: u8, bw_hz: u32) -> Result<f64> {
    LinkTables::default().sensitivity(sf, bw_hz)
}

/// Demodulation SNR floor from the default table.
pub fn required_snr(sf: u8) -> Result<f64> {
    LinkTables::default().required_snr(sf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sf7() -> LoRaConfig {
        LoRaConfig::new(7, 14, 868_100, CodingRate::CR4_5, 125_000).unwrap()
    }

    #[test]
    fn symbol_time_examples() {
        assert_relative_eq!(
            symbol_time(7, 125_000).unwrap(),
            1.024e-3,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            symbol_time(12, 125_000).unwrap(),
            32.768e-3,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            symbol_time(7, 250_000).unwrap(),
            0.512e-3,
            max_relative = 1e-15
        );
        assert!(symbol_time(6, 125_000).is_err());
        assert!(symbol_time(13, 125_000).is_err());
        assert!(symbol_time(7, 0).is_err());
    }

    #[test]
    fn symbol_time_doubles_per_sf() {
        for sf in 7..12 {
            let a = symbol_time(sf, 125_000).unwrap();
            let b = symbol_time(sf + 1, 125_000).unwrap();
            assert_eq!(b, 2.0 * a);
        }
    }

    #[test]
    fn theta_examples() {
        assert_eq!(theta(20, 7, false), 176);
        assert_eq!(theta(20, 12, false), 156);
        assert_eq!(theta(20, 7, true), 156);
    }

    #[test]
    fn payload_symbol_examples() {
        let cr = CodingRate::CR4_5;
        assert_eq!(
            payload_symbols(20, 7, cr, false, false, AirtimeMode::Paper).unwrap(),
            40.5
        );
        assert_eq!(
            payload_symbols(20, 7, cr, false, false, AirtimeMode::Semtech).unwrap(),
            43.0
        );
        // theta = 8 - 48 + 44 - 20 = -16 clamps to the 8-symbol floor
        assert_eq!(
            payload_symbols(1, 12, cr, true, false, AirtimeMode::Paper).unwrap(),
            8.0
        );
        assert_eq!(
            payload_symbols(1, 12, cr, true, false, AirtimeMode::Semtech).unwrap(),
            8.0
        );
    }

    #[test]
    fn time_on_air_examples() {
        let radio = RadioConstants::default();
        let paper = time_on_air(&sf7(), &radio, AirtimeMode::Paper).unwrap();
        let semtech = time_on_air(&sf7(), &radio, AirtimeMode::Semtech).unwrap();
        assert_relative_eq!(paper, 54.016e-3, max_relative = 1e-12);
        assert_relative_eq!(semtech, 56.576e-3, max_relative = 1e-12);

        let short = RadioConstants {
            payload_len: 1,
            header_disabled: true,
            ..RadioConstants::default()
        };
        let cfg = LoRaConfig::new(12, 14, 868_100, CodingRate::CR4_5, 125_000).unwrap();
        let t = time_on_air(&cfg, &short, AirtimeMode::Paper).unwrap();
        assert_relative_eq!(
            t,
            20.25 * symbol_time(12, 125_000).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn energy_examples() {
        let radio = RadioConstants {
            p_on_mcu_w: 0.0,
            tx_power: TX_POWERS_DBM
                .iter()
                .map(|&tp| TxPowerEntry {
                    tp_dbm: tp,
                    power_w: 0.1,
                })
                .collect(),
            ..RadioConstants::default()
        };
        let e = energy_per_packet(&sf7(), &radio, AirtimeMode::Paper).unwrap();
        assert_relative_eq!(e, 5.4016e-3, max_relative = 1e-12);

        let doubled = RadioConstants {
            tx_power: radio
                .tx_power
                .iter()
                .map(|e| TxPowerEntry { power_w: 0.2, ..*e })
                .collect(),
            ..radio.clone()
        };
        let e2 = energy_per_packet(&sf7(), &doubled, AirtimeMode::Paper).unwrap();
        assert_relative_eq!(e2, 2.0 * e, max_relative = 1e-15);

        let sf12 = LoRaConfig { sf: 12, ..sf7() };
        assert!(energy_per_packet(&sf12, &radio, AirtimeMode::Paper).unwrap() > e);
    }

    #[test]
    fn missing_tx_power_is_an_error() {
        let radio = RadioConstants {
            tx_power: vec![TxPowerEntry {
                tp_dbm: 2,
                power_w: 0.05,
            }],
            ..RadioConstants::default()
        };
        assert!(matches!(
            energy_per_packet(&sf7(), &radio, AirtimeMode::Paper),
            Err(Error::MissingTxPower(14))
        ));
        assert!(radio.validate().is_err());
    }

    #[test]
    fn monotone_in_sf_and_cr() {
        let radio = RadioConstants::default();
        for mode in [AirtimeMode::Paper, AirtimeMode::Semtech] {
            for cr in CodingRate::ALL {
                for sf in 7..12 {
                    let a = LoRaConfig { sf, cr, ..sf7() };
                    let b = LoRaConfig { sf: sf + 1, ..a };
                    assert!(
                        time_on_air(&b, &radio, mode).unwrap()
                            > time_on_air(&a, &radio, mode).unwrap()
                    );
                    assert!(
                        energy_per_packet(&b, &radio, mode).unwrap()
                            > energy_per_packet(&a, &radio, mode).unwrap()
                    );
                }
            }
            for sf in 7..=12 {
                for w in CodingRate::ALL.windows(2) {
                    // w[1] is the lower rate (more redundancy)
                    let hi = LoRaConfig {
                        sf,
                        cr: w[0],
                        ..sf7()
                    };
                    let lo = LoRaConfig {
                        sf,
                        cr: w[1],
                        ..sf7()
                    };
                    assert!(
                        time_on_air(&lo, &radio, mode).unwrap()
                            > time_on_air(&hi, &radio, mode).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn energy_nondecreasing_in_tp() {
        let radio = RadioConstants::default();
        for w in TX_POWERS_DBM.windows(2) {
            let a = LoRaConfig {
                tp_dbm: w[0],
                ..sf7()
            };
            let b = LoRaConfig {
                tp_dbm: w[1],
                ..sf7()
            };
            assert!(
                energy_per_packet(&b, &radio, AirtimeMode::Paper).unwrap()
                    >= energy_per_packet(&a, &radio, AirtimeMode::Paper).unwrap()
            );
        }
    }

    #[test]
    fn auto_ldro_only_for_slow_125k() {
        let radio = RadioConstants {
            auto_ldro: true,
            ..RadioConstants::default()
        };
        assert!(radio.ldro_for(11, 125_000));
        assert!(radio.ldro_for(12, 125_000));
        assert!(!radio.ldro_for(10, 125_000));
        assert!(!radio.ldro_for(12, 250_000));
        assert!(!RadioConstants::default().ldro_for(12, 125_000));
    }

    #[test]
    fn sensitivity_and_snr_tables() {
        assert_eq!(sensitivity(7, 125_000).unwrap(), -124.0);
        assert_eq!(sensitivity(12, 125_000).unwrap(), -137.0);
        assert_eq!(required_snr(7).unwrap(), -7.5);
        assert_eq!(required_snr(12).unwrap(), -20.0);
        for sf in 7..12 {
            for bw in BANDWIDTHS_HZ {
                assert!(sensitivity(sf + 1, bw).unwrap() < sensitivity(sf, bw).unwrap());
            }
            assert!(required_snr(sf + 1).unwrap() < required_snr(sf).unwrap());
        }
        assert!(sensitivity(7, 300_000).is_err());
        assert!(required_snr(13).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(LoRaConfig::new(7, 3, 868_100, CodingRate::CR4_5, 125_000).is_err());
        assert!(LoRaConfig::new(6, 2, 868_100, CodingRate::CR4_5, 125_000).is_err());
        assert!(LoRaConfig::new(7, 2, 868_200, CodingRate::CR4_5, 125_000).is_err());
        assert!(LoRaConfig::new(7, 2, 868_100, CodingRate::CR4_5, 100_000).is_err());
        assert!(CodingRate::from_denominator(9).is_err());
        assert_eq!("4/7".parse::<CodingRate>().unwrap(), CodingRate::CR4_7);
        assert!("3/5".parse::<CodingRate>().is_err());
        assert_eq!(mhz_to_khz("cf", 868.4).unwrap(), 868_400);
        assert!(mhz_to_khz("cf", 868.25).is_err());
    }

    #[test]
    fn shipped_constants_file_matches_defaults() {
        let text = include_str!("../data/radio_constants.toml");
        let parsed = PhyConstants::from_toml_str(text).unwrap();
        assert_eq!(parsed, PhyConstants::default());
    }

    #[test]
    fn constants_file_rejects_unknown_keys() {
        let err = PhyConstants::from_toml_str("[radio]\nwatts = 3\n").unwrap_err();
        assert!(err.to_string().contains("watts"), "{err}");
    }
}
