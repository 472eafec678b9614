//! Network-server ADR strategies.
//!
//! * ADR-Lite keeps one index into the sorted [`ConfigSpace`](crate::space::ConfigSpace)
//!   per device and bisects it on every received uplink: toward index 1 when the
//!   packet used the assigned configuration, toward `|K|` otherwise.
//! * ADR-MAX / ADR-AVG collect the SNR of the last `W` received packets and move
//!   SF and TP by the link margin in 3 dB steps, using the max or the mean.
//! * No-ADR draws a uniform index for every transmission on the device side.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phy::LinkTables;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    AdrLite,
    AdrMax,
    AdrAvg,
    NoAdr,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::AdrLite,
        Strategy::AdrMax,
        Strategy::AdrAvg,
        Strategy::NoAdr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::AdrLite => "adr-lite",
            Strategy::AdrMax => "adr-max",
            Strategy::AdrAvg => "adr-avg",
            Strategy::NoAdr => "no-adr",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::illegal("strategy", s, "{adr-lite, adr-max, adr-avg, no-adr}"))
    }
}

/// What the network server observed for one received uplink.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UplinkObservation {
    pub ed_id: u32,
    pub timestamp_s: f64,
    /// Index of the configuration the packet was sent with (0 when the
    /// configuration is not part of the space, as for the SNR baselines).
    pub r_index: usize,
    pub snr_db: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdrDecision {
    NewIndex(usize),
    NewSfTp { sf: u8, tp_dbm: i8 },
    NoChange,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LiteBranch {
    /// Packet carried the assigned configuration: search `[1, k]`.
    Matched,
    /// Packet carried some other configuration: search `[k, |K|]`.
    Mismatched,
}

impl fmt::Display for LiteBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LiteBranch::Matched => "matched",
            LiteBranch::Mismatched => "mismatched",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LiteStep {
    pub branch: LiteBranch,
    pub min: usize,
    pub max: usize,
    pub index: usize,
}

/// Per-device ADR-Lite state: the last assigned index and the space size.
/// No packet history is kept.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AdrLiteState {
    k_prev: usize,
    space_size: usize,
}

impl AdrLiteState {
    /// Starts at `k = |K|`, the most robust configuration.
    pub fn new(space_size: usize) -> Result<Self> {
        if space_size == 0 {
            return Err(Error::invalid("space_size", "must be >= 1"));
        }
        Ok(AdrLiteState {
            k_prev: space_size,
            space_size,
        })
    }

    pub fn with_index(space_size: usize, k: usize) -> Result<Self> {
        let mut state = Self::new(space_size)?;
        if k == 0 || k > space_size {
            return Err(Error::IndexOutOfRange {
                index: k,
                len: space_size,
            });
        }
        state.k_prev = k;
        Ok(state)
    }

    pub fn current(&self) -> usize {
        self.k_prev
    }

    pub fn space_size(&self) -> usize {
        self.space_size
    }

    pub fn update(&mut self, r_index: usize) -> Result<LiteStep> {
        if r_index == 0 || r_index > self.space_size {
            return Err(Error::IndexOutOfRange {
                index: r_index,
                len: self.space_size,
            });
        }
        let (branch, min, max) = if r_index == self.k_prev {
            (LiteBranch::Matched, 1, self.k_prev)
        } else {
            (LiteBranch::Mismatched, self.k_prev, self.space_size)
        };
        let index = (min + max) / 2;
        self.k_prev = index;
        Ok(LiteStep {
            branch,
            min,
            max,
            index,
        })
    }
}

/// Convenience wrapper returning only the new index.
pub fn adr_lite_update(state: &mut AdrLiteState, r_index: usize) -> Result<usize> {
    state.update(r_index).map(|s| s.index)
}

/// The last `window` SNR samples, oldest evicted first.
#[derive(Clone, Debug, PartialEq)]
pub struct SnrHistory {
    window: usize,
    samples: VecDeque<f64>,
}

impl SnrHistory {
    pub fn new(window: usize) -> Self {
        assert!(window > 0, "history window must be positive");
        SnrHistory {
            window,
            samples: VecDeque::with_capacity(window),
        }
    }

    pub fn push(&mut self, snr_db: f64) {
        if self.samples.len() == self.window {
            self.samples.pop_front();
        }
        self.samples.push_back(snr_db);
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.samples.len() == self.window
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn clear(&mut self) {
        self.samples.clear();
    }

    pub fn max(&self) -> Option<f64> {
        self.samples.iter().copied().reduce(f64::max)
    }

    pub fn mean(&self) -> Option<f64> {
        if self.samples.is_empty() {
            None
        } else {
            Some(self.samples.iter().sum::<f64>() / self.samples.len() as f64)
        }
    }
}

/// Bounds and tables for the SNR-margin baselines.
#[derive(Clone, Debug, PartialEq)]
pub struct MarginRules {
    pub device_margin_db: f64,
    pub sf_min: u8,
    pub tp_min_dbm: i8,
    pub tp_max_dbm: i8,
    pub tp_step_db: i8,
    pub link: LinkTables,
}

impl Default for MarginRules {
    fn default() -> Self {
        MarginRules {
            device_margin_db: 10.0,
            sf_min: 7,
            tp_min_dbm: 2,
            tp_max_dbm: 14,
            tp_step_db: 3,
            link: LinkTables::default(),
        }
    }
}

fn margin_step(link_snr_db: f64, sf: u8, tp_dbm: i8, rules: &MarginRules) -> Result<AdrDecision> {
    let margin = link_snr_db - rules.link.required_snr(sf)? - rules.device_margin_db;
    let mut n_step = (margin / 3.0).floor() as i64;
    let (mut new_sf, mut new_tp) = (sf, tp_dbm);
    while n_step > 0 && new_sf > rules.sf_min {
        new_sf -= 1;
        n_step -= 1;
    }
    while n_step > 0 && new_tp > rules.tp_min_dbm {
        new_tp = (new_tp - rules.tp_step_db).max(rules.tp_min_dbm);
        n_step -= 1;
    }
    while n_step < 0 && new_tp < rules.tp_max_dbm {
        new_tp = (new_tp + rules.tp_step_db).min(rules.tp_max_dbm);
        n_step += 1;
    }
    if (new_sf, new_tp) == (sf, tp_dbm) {
        Ok(AdrDecision::NoChange)
    } else {
        Ok(AdrDecision::NewSfTp {
            sf: new_sf,
            tp_dbm: new_tp,
        })
    }
}

/// ADR-MAX: margin from the best SNR in a full window.
pub fn adr_max_update(
    history: &SnrHistory,
    sf: u8,
    tp_dbm: i8,
    rules: &MarginRules,
) -> Result<AdrDecision> {
    match history.max() {
        Some(best) if history.is_full() => margin_step(best, sf, tp_dbm, rules),
        _ => Ok(AdrDecision::NoChange),
    }
}

/// ADR-AVG: margin from the mean SNR in a full window.
pub fn adr_avg_update(
    history: &SnrHistory,
    sf: u8,
    tp_dbm: i8,
    rules: &MarginRules,
) -> Result<AdrDecision> {
    match history.mean() {
        Some(mean) if history.is_full() => margin_step(mean, sf, tp_dbm, rules),
        _ => Ok(AdrDecision::NoChange),
    }
}

/// No-ADR: a uniform index in `1..=space_size`.
pub fn no_adr_pick<R: Rng + ?Sized>(rng: &mut R, space_size: usize) -> usize {
    rng.random_range(1..=space_size)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn trace(state: &mut AdrLiteState, r: impl Fn(usize) -> usize, n: usize) -> Vec<usize> {
        (0..n)
            .map(|_| {
                let r_index = r(state.current());
                adr_lite_update(state, r_index).unwrap()
            })
            .collect()
    }

    #[test]
    fn lite_success_trace() {
        let mut s = AdrLiteState::new(30).unwrap();
        assert_eq!(s.current(), 30);
        assert_eq!(trace(&mut s, |k| k, 7), vec![15, 8, 4, 2, 1, 1, 1]);
    }

    #[test]
    fn lite_mismatch_trace() {
        let mut s = AdrLiteState::with_index(30, 15).unwrap();
        let step = s.update(7).unwrap();
        assert_eq!(
            step,
            LiteStep {
                branch: LiteBranch::Mismatched,
                min: 15,
                max: 30,
                index: 22
            }
        );
        let mut s = AdrLiteState::with_index(30, 15).unwrap();
        let other = |k: usize| if k == 1 { 2 } else { 1 };
        assert_eq!(trace(&mut s, other, 6), vec![22, 26, 28, 29, 29, 29]);
    }

    #[test]
    fn lite_rejects_bad_indices() {
        assert!(AdrLiteState::new(0).is_err());
        assert!(AdrLiteState::with_index(30, 31).is_err());
        let mut s = AdrLiteState::new(30).unwrap();
        assert!(s.update(0).is_err());
        assert!(s.update(31).is_err());
        assert_eq!(s.current(), 30);
    }

    #[test]
    fn lite_state_holds_no_history() {
        assert_eq!(
            std::mem::size_of::<AdrLiteState>(),
            2 * std::mem::size_of::<usize>()
        );
    }

    #[test]
    fn single_config_space_is_fixed() {
        let mut s = AdrLiteState::new(1).unwrap();
        assert_eq!(adr_lite_update(&mut s, 1).unwrap(), 1);
        assert_eq!(adr_lite_update(&mut s, 1).unwrap(), 1);
    }

    fn full(values: &[f64]) -> SnrHistory {
        let mut h = SnrHistory::new(20);
        for i in 0..20 {
            h.push(values[i % values.len()]);
        }
        h
    }

    #[test]
    fn history_evicts_oldest() {
        let mut h = SnrHistory::new(3);
        for v in [1.0, 2.0, 3.0, 4.0] {
            h.push(v);
        }
        assert_eq!(h.len(), 3);
        assert_eq!(h.mean(), Some(3.0));
        assert_eq!(h.max(), Some(4.0));
    }

    #[test]
    fn max_step_trace() {
        // margin = 0 - (-20) - 10 = 10, n_step = 3: SF 12 -> 9
        let h = full(&[0.0, -5.0]);
        assert_eq!(
            adr_max_update(&h, 12, 14, &MarginRules::default()).unwrap(),
            AdrDecision::NewSfTp { sf: 9, tp_dbm: 14 }
        );
    }

    #[test]
    fn zero_margin_is_no_change() {
        let h = full(&[-20.0 + 10.0]);
        assert_eq!(
            adr_max_update(&h, 12, 14, &MarginRules::default()).unwrap(),
            AdrDecision::NoChange
        );
    }

    #[test]
    fn negative_margin_raises_power() {
        // margin = -30 + 7.5 - 10 = -32.5 -> n_step = -11, TP climbs to 14
        let h = full(&[-30.0]);
        assert_eq!(
            adr_max_update(&h, 7, 2, &MarginRules::default()).unwrap(),
            AdrDecision::NewSfTp { sf: 7, tp_dbm: 14 }
        );
        // margin = -4 -> n_step = -2: 2 -> 8 dBm
        let h = full(&[-7.5 + 10.0 - 4.0]);
        assert_eq!(
            adr_max_update(&h, 7, 2, &MarginRules::default()).unwrap(),
            AdrDecision::NewSfTp { sf: 7, tp_dbm: 8 }
        );
    }

    #[test]
    fn large_margin_lowers_sf_then_power() {
        // margin = 30 + 20 - 10 = 40 -> n_step = 13: SF 12 -> 7 (5), TP 14 -> 2 (4)
        let h = full(&[30.0]);
        assert_eq!(
            adr_max_update(&h, 12, 14, &MarginRules::default()).unwrap(),
            AdrDecision::NewSfTp { sf: 7, tp_dbm: 2 }
        );
    }

    #[test]
    fn avg_uses_mean() {
        // mean of alternating -10/0 is -5: margin = -5 + 20 - 10 = 5 -> n_step 1
        let h = full(&[-10.0, 0.0]);
        assert_eq!(
            adr_avg_update(&h, 12, 14, &MarginRules::default()).unwrap(),
            AdrDecision::NewSfTp { sf: 11, tp_dbm: 14 }
        );
        // max would be 0 -> n_step 3
        assert_eq!(
            adr_max_update(&h, 12, 14, &MarginRules::default()).unwrap(),
            AdrDecision::NewSfTp { sf: 9, tp_dbm: 14 }
        );
        let constant = full(&[-3.0]);
        assert_eq!(
            adr_avg_update(&constant, 11, 8, &MarginRules::default()).unwrap(),
            adr_max_update(&constant, 11, 8, &MarginRules::default()).unwrap()
        );
    }

    #[test]
    fn partial_history_is_no_change() {
        let mut h = SnrHistory::new(20);
        let rules = MarginRules::default();
        assert_eq!(
            adr_avg_update(&h, 12, 14, &rules).unwrap(),
            AdrDecision::NoChange
        );
        for _ in 0..19 {
            h.push(30.0);
        }
        assert_eq!(
            adr_max_update(&h, 12, 14, &rules).unwrap(),
            AdrDecision::NoChange
        );
        assert_eq!(
            adr_avg_update(&h, 12, 14, &rules).unwrap(),
            AdrDecision::NoChange
        );
    }

    #[test]
    fn no_adr_single_and_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert!((0..100).all(|_| no_adr_pick(&mut rng, 1) == 1));
        let mut a = ChaCha8Rng::seed_from_u64(9);
        let mut b = ChaCha8Rng::seed_from_u64(9);
        let xa: Vec<_> = (0..50).map(|_| no_adr_pick(&mut a, 30)).collect();
        let xb: Vec<_> = (0..50).map(|_| no_adr_pick(&mut b, 30)).collect();
        assert_eq!(xa, xb);
    }

    #[test]
    fn no_adr_is_uniform() {
        // Pearson chi-square over 30 bins, 29 dof; 0.999 quantile is 58.30.
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 100_000;
        let mut counts = [0u32; 30];
        for _ in 0..n {
            counts[no_adr_pick(&mut rng, 30) - 1] += 1;
        }
        let expected = n as f64 / 30.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (f64::from(c) - expected).powi(2) / expected)
            .sum();
        assert!(chi2 < 58.30, "chi2 = {chi2}");
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in Strategy::ALL {
            assert_eq!(s.name().parse::<Strategy>().unwrap(), s);
        }
        assert!("adr-owa".parse::<Strategy>().is_err());
    }
}
