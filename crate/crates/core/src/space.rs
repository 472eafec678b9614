//! The ordered configuration array searched by ADR-Lite.
//!
//! A [`ConfigSpace`] is the Cartesian product of the chosen parameter
//! dimensions, sorted ascending by per-packet transmit energy. Indices are
//! 1-based: index 1 is the cheapest configuration and index `len()` the most
//! expensive one.

use std::collections::HashMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phy::{
    self, AirtimeMode, CodingRate, LoRaConfig, RadioConstants, CARRIERS_KHZ, DEFAULT_BW_HZ,
    SPREADING_FACTORS, TX_POWERS_DBM,
};

/// Candidate values per transmission parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDimensions {
    #[serde(default)]
    pub label: String,
    pub sf: Vec<u8>,
    pub tp: Vec<i8>,
    #[serde(rename = "cf_mhz", with = "mhz_list")]
    pub cf_khz: Vec<u32>,
    pub cr: Vec<CodingRate>,
    #[serde(default = "default_bw")]
    pub bw_hz: u32,
}

fn default_bw() -> u32 {
    DEFAULT_BW_HZ
}

mod mhz_list {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::phy::khz_to_mhz;

    pub fn serialize<S: Serializer>(v: &[u32], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|&k| khz_to_mhz(k)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u32>, D::Error> {
        let mhz = Vec::<f64>::deserialize(d)?;
        mhz.into_iter()
            .map(|m| crate::phy::mhz_to_khz("cf_mhz", m).map_err(serde::de::Error::custom))
            .collect()
    }
}

impl ConfigDimensions {
    fn with(label: &str, cf: bool, cr: bool) -> Self {
        ConfigDimensions {
            label: label.to_string(),
            sf: SPREADING_FACTORS.to_vec(),
            tp: TX_POWERS_DBM.to_vec(),
            cf_khz: if cf {
                CARRIERS_KHZ.to_vec()
            } else {
                vec![CARRIERS_KHZ[0]]
            },
            cr: if cr {
                CodingRate::ALL.to_vec()
            } else {
                vec![CodingRate::CR4_5]
            },
            bw_hz: DEFAULT_BW_HZ,
        }
    }

    /// SF and TP only (30 configurations).
    pub fn sf_tp() -> Self {
        Self::with("config-1", false, false)
    }

    /// SF, TP and CF (90 configurations).
    pub fn sf_tp_cf() -> Self {
        Self::with("config-2", true, false)
    }

    /// SF, TP and CR (120 configurations).
    pub fn sf_tp_cr() -> Self {
        Self::with("config-3", false, true)
    }

    /// SF, TP, CF and CR (360 configurations).
    pub fn all() -> Self {
        Self::with("config-4", true, true)
    }

    /// Parses `config-1`..`config-4` or a `+`-joined list of the free
    /// dimensions such as `sf+tp+cr`. Dimensions left out are pinned to
    /// SF7, 14 dBm, 868.1 MHz and 4/5.
    pub fn parse(spec: &str) -> Result<Self> {
        match spec.trim() {
            "config-1" => return Ok(Self::sf_tp()),
            "config-2" => return Ok(Self::sf_tp_cf()),
            "config-3" => return Ok(Self::sf_tp_cr()),
            "config-4" => return Ok(Self::all()),
            _ => {}
        }
        let mut dims = ConfigDimensions {
            label: spec.trim().to_string(),
            sf: vec![7],
            tp: vec![14],
            cf_khz: vec![CARRIERS_KHZ[0]],
            cr: vec![CodingRate::CR4_5],
            bw_hz: DEFAULT_BW_HZ,
        };
        for part in spec.split('+').map(str::trim) {
            match part {
                "sf" => dims.sf = SPREADING_FACTORS.to_vec(),
                "tp" => dims.tp = TX_POWERS_DBM.to_vec(),
                "cf" => dims.cf_khz = CARRIERS_KHZ.to_vec(),
                "cr" => dims.cr = CodingRate::ALL.to_vec(),
                other => {
                    return Err(Error::illegal(
                        "dims",
                        other,
                        "{config-1..config-4} or a '+'-joined subset of {sf, tp, cf, cr}",
                    ))
                }
            }
        }
        Ok(dims)
    }

    pub fn cardinality(&self) -> usize {
        self.sf.len() * self.tp.len() * self.cf_khz.len() * self.cr.len()
    }

    /// Checks every value against its legal set; `field` prefixes error paths.
    pub fn validate(&self, field: &str) -> Result<()> {
        for (name, empty) in [
            ("sf", self.sf.is_empty()),
            ("tp", self.tp.is_empty()),
            ("cf_mhz", self.cf_khz.is_empty()),
            ("cr", self.cr.is_empty()),
        ] {
            if empty {
                return Err(Error::invalid(
                    format!("{field}.{name}"),
                    "must not be empty",
                ));
            }
        }
        for &sf in &self.sf {
            if !SPREADING_FACTORS.contains(&sf) {
                return Err(Error::illegal(
                    format!("{field}.sf"),
                    sf,
                    "{7, 8, 9, 10, 11, 12}",
                ));
            }
        }
        for &tp in &self.tp {
            if !TX_POWERS_DBM.contains(&tp) {
                return Err(Error::illegal(
                    format!("{field}.tp"),
                    tp,
                    "{2, 5, 8, 11, 14} dBm",
                ));
            }
        }
        for &cf in &self.cf_khz {
            if !CARRIERS_KHZ.contains(&cf) {
                return Err(Error::illegal(
                    format!("{field}.cf_mhz"),
                    phy::khz_to_mhz(cf),
                    "{868.1, 868.4, 868.7} MHz",
                ));
            }
        }
        if !phy::BANDWIDTHS_HZ.contains(&self.bw_hz) {
            return Err(Error::illegal(
                format!("{field}.bw_hz"),
                self.bw_hz,
                "{125000, 250000, 500000} Hz",
            ));
        }
        let mut seen = std::collections::HashSet::new();
        for c in self.iter_product() {
            if !seen.insert(c) {
                return Err(Error::invalid(
                    field,
                    format!("duplicate value producing {c}"),
                ));
            }
        }
        Ok(())
    }

    fn iter_product(&self) -> impl Iterator<Item = LoRaConfig> + '_ {
        self.sf.iter().flat_map(move |&sf| {
            self.tp.iter().flat_map(move |&tp| {
                self.cf_khz.iter().flat_map(move |&cf| {
                    self.cr.iter().map(move |&cr| LoRaConfig {
                        sf,
                        tp_dbm: tp,
                        cf_khz: cf,
                        cr,
                        bw_hz: self.bw_hz,
                    })
                })
            })
        })
    }
}

/// Configurations sorted ascending by per-packet energy, with 1-based access.
#[derive(Clone, Debug)]
pub struct ConfigSpace {
    configs: Vec<LoRaConfig>,
    energies: Vec<f64>,
    airtimes: Vec<f64>,
    lookup: HashMap<LoRaConfig, usize>,
    mode: AirtimeMode,
}

impl ConfigSpace {
    /// Energy ties are broken by (SF, TP, CR denominator, CF) ascending.
    pub fn build(
        dims: &ConfigDimensions,
        radio: &RadioConstants,
        mode: AirtimeMode,
    ) -> Result<Self> {
        dims.validate("dims")?;
        let mut scored = dims
            .iter_product()
            .map(|c| {
                let toa = phy::time_on_air(&c, radio, mode)?;
                let energy = phy::energy_per_packet(&c, radio, mode)?;
                Ok((c, toa, energy))
            })
            .collect::<Result<Vec<_>>>()?;
        scored.sort_by(|a, b| {
            a.2.total_cmp(&b.2)
                .then(a.0.sf.cmp(&b.0.sf))
                .then(a.0.tp_dbm.cmp(&b.0.tp_dbm))
                .then(a.0.cr.cmp(&b.0.cr))
                .then(a.0.cf_khz.cmp(&b.0.cf_khz))
        });
        let configs: Vec<_> = scored.iter().map(|s| s.0).collect();
        let lookup = configs
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, i + 1))
            .collect();
        Ok(ConfigSpace {
            airtimes: scored.iter().map(|s| s.1).collect(),
            energies: scored.iter().map(|s| s.2).collect(),
            configs,
            lookup,
            mode,
        })
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn airtime_mode(&self) -> AirtimeMode {
        self.mode
    }

    fn check(&self, index: usize) -> Result<usize> {
        if index == 0 || index > self.len() {
            Err(Error::IndexOutOfRange {
                index,
                len: self.len(),
            })
        } else {
            Ok(index - 1)
        }
    }

    pub fn config_at(&self, index: usize) -> Result<LoRaConfig> {
        Ok(self.configs[self.check(index)?])
    }

    pub fn energy_at(&self, index: usize) -> Result<f64> {
        Ok(self.energies[self.check(index)?])
    }

    pub fn airtime_at(&self, index: usize) -> Result<f64> {
        Ok(self.airtimes[self.check(index)?])
    }

    pub fn index_of(&self, config: &LoRaConfig) -> Result<usize> {
        self.lookup
            .get(config)
            .copied()
            .ok_or_else(|| Error::NotInSpace(config.to_string()))
    }

    pub fn configs(&self) -> &[LoRaConfig] {
        &self.configs
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn max_airtime(&self) -> f64 {
        self.airtimes.iter().copied().fold(0.0, f64::max)
    }

    /// Writes `index,sf,tp,cf_mhz,cr,toa_s,energy_j` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "sf", "tp", "cf_mhz", "cr", "toa_s", "energy_j"])?;
        for (i, c) in self.configs.iter().enumerate() {
            w.write_record([
                (i + 1).to_string(),
                c.sf.to_string(),
                c.tp_dbm.to_string(),
                c.cf_mhz().to_string(),
                c.cr.to_string(),
                self.airtimes[i].to_string(),
                self.energies[i].to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}
