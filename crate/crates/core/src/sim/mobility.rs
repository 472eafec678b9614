//! Static placement and random-waypoint motion inside the square cell.

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::channel::Position;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MobilityMode {
    #[default]
    Static,
    RandomWaypoint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MobilityParams {
    pub mode: MobilityMode,
    /// Mean of the exponential speed distribution before truncation (m/s).
    pub speed_mean_mps: f64,
    /// Speeds are resampled until they fall in `(0, speed_max_mps]`.
    pub speed_max_mps: f64,
}

impl Default for MobilityParams {
    fn default() -> Self {
        MobilityParams {
            mode: MobilityMode::Static,
            speed_mean_mps: 2.5,
            speed_max_mps: 5.0,
        }
    }
}

impl MobilityParams {
    pub fn random_waypoint() -> Self {
        MobilityParams {
            mode: MobilityMode::RandomWaypoint,
            ..Default::default()
        }
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        if !(self.speed_mean_mps > 0.0 && self.speed_mean_mps.is_finite()) {
            return Err(Error::invalid(
                format!("{field}.speed_mean_mps"),
                "must be > 0",
            ));
        }
        if !(self.speed_max_mps > 0.0 && self.speed_max_mps.is_finite()) {
            return Err(Error::invalid(
                format!("{field}.speed_max_mps"),
                "must be > 0",
            ));
        }
        Ok(())
    }
}

/// Truncated exponential speed in `(0, max]`.
pub fn sample_speed<R: Rng + ?Sized>(rng: &mut R, params: &MobilityParams) -> f64 {
    let exp = Exp::new(1.0 / params.speed_mean_mps).expect("validated speed mean");
    loop {
        let v: f64 = exp.sample(rng);
        if v > 0.0 && v <= params.speed_max_mps {
            return v;
        }
    }
}

pub fn uniform_position<R: Rng + ?Sized>(rng: &mut R, side_m: f64) -> Position {
    Position::new(
        rng.random_range(0.0..=side_m),
        rng.random_range(0.0..=side_m),
    )
}

/// Current leg of a device's motion. Static devices have a single
/// zero-length leg that never ends.
#[derive(Clone, Debug, PartialEq)]
pub struct MobilityState {
    pub mode: MobilityMode,
    pub origin: Position,
    pub target: Position,
    pub speed_mps: f64,
    pub depart_s: f64,
    pub arrive_s: f64,
}

impl MobilityState {
    pub fn fixed(at: Position) -> Self {
        MobilityState {
            mode: MobilityMode::Static,
            origin: at,
            target: at,
            speed_mps: 0.0,
            depart_s: 0.0,
            arrive_s: f64::INFINITY,
        }
    }

    /// Begins moving from `at` toward a fresh waypoint at `now`.
    pub fn moving<R: Rng + ?Sized>(
        at: Position,
        now: f64,
        rng: &mut R,
        params: &MobilityParams,
        side_m: f64,
    ) -> Self {
        let mut state = MobilityState {
            mode: MobilityMode::RandomWaypoint,
            origin: at,
            target: at,
            speed_mps: 0.0,
            depart_s: now,
            arrive_s: now,
        };
        state.next_leg(now, rng, params, side_m);
        state
    }

    /// Exact linear interpolation along the current leg.
    pub fn position_at(&self, t: f64) -> Position {
        if self.mode == MobilityMode::Static || t >= self.arrive_s {
            return self.target;
        }
        if t <= self.depart_s {
            return self.origin;
        }
        let frac = (t - self.depart_s) / (self.arrive_s - self.depart_s);
        self.origin.lerp(&self.target, frac)
    }

    fn next_leg<R: Rng + ?Sized>(
        &mut self,
        now: f64,
        rng: &mut R,
        params: &MobilityParams,
        side_m: f64,
    ) {
        let from = self.position_at(now);
        let to = uniform_position(rng, side_m);
        let speed = sample_speed(rng, params);
        self.origin = from;
        self.target = to;
        self.speed_mps = speed;
        self.depart_s = now;
        self.arrive_s = now + from.distance(&to) / speed;
    }
}

/// On arrival, draws the next waypoint and speed (zero pause time).
/// Static devices are returned unchanged.
pub fn waypoint_step<R: Rng + ?Sized>(
    state: &MobilityState,
    rng: &mut R,
    params: &MobilityParams,
    side_m: f64,
    now: f64,
) -> MobilityState {
    let mut next = state.clone();
    if next.mode == MobilityMode::RandomWaypoint {
        next.next_leg(now, rng, params, side_m);
    }
    next
}
