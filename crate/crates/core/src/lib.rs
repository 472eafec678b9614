//! Discrete-event simulator of a single-gateway LoRa network with ADR-Lite,
//! ADR-MAX, ADR-AVG and No-ADR transmission-parameter strategies.
//!
//! The crate is layered bottom-up:
//!
//! * [`phy`]: airtime and per-packet energy, receiver tables
//! * [`space`]: the energy-sorted configuration array
//! * [`adr`]: network-server strategies
//! * [`channel`]: path loss, shadowing, SNR and collision resolution
//! * [`sim`]: the event-driven network simulation and its metrics
//! * [`scenario`]: scenario files, presets, replicate sweeps and result files

pub mod adr;
pub mod channel;
pub mod error;
pub mod phy;
pub mod scenario;
pub mod sim;
pub mod space;

pub use error::{Error, Result};
