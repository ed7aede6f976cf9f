//! Random waypoint motion for traffic endpoints and exploring swarm nodes.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::geometry::{distance, Vec2, Zone};
use crate::model::NodeState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RwpParams {
    pub v_min: f64,
    pub v_max: f64,
    pub zone: Zone,
    /// Pause at each waypoint, s. Only zero is used by the scenarios.
    pub pause: f64,
}

impl RwpParams {
    pub fn new(v_min: f64, v_max: f64, zone: Zone) -> Self {
        Self {
            v_min,
            v_max,
            zone,
            pause: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(0.0 < self.v_min && self.v_min <= self.v_max && self.pause >= 0.0) {
            return Err(ConfigError::Invalid(format!(
                "random waypoint speeds must satisfy 0 < v_min <= v_max, got [{}, {}]",
                self.v_min, self.v_max
            )));
        }
        Ok(())
    }
}

/// Draws the next waypoint (uniform over the zone) and leg speed (uniform in range).
pub fn rwp_next_leg<R: Rng + ?Sized>(rng: &mut R, params: &RwpParams) -> (Vec2, f64) {
    let x = rng.random_range(0.0..=params.zone.width);
    let y = rng.random_range(0.0..=params.zone.height);
    let speed = if params.v_min < params.v_max {
        rng.random_range(params.v_min..=params.v_max)
    } else {
        params.v_min
    };
    (Vec2::new(x, y), speed)
}

/// Advances a node along its current leg, drawing a new one on arrival.
///
/// A node whose waypoint is within one step's travel lands exactly on it.
pub fn rwp_step<R: Rng + ?Sized>(
    node: &NodeState,
    dt: f64,
    rng: &mut R,
    params: &RwpParams,
) -> NodeState {
    let mut next = node.clone();
    let (target, speed) = match node.waypoint {
        Some(wp) => (wp, node.waypoint_speed),
        None => rwp_next_leg(rng, params),
    };
    let remaining = distance(node.pos, target);
    let travel = speed * dt;
    if remaining <= travel {
        next.pos = target;
        let (wp, sp) = rwp_next_leg(rng, params);
        next.waypoint = Some(wp);
        next.waypoint_speed = sp;
        next.vel = (wp - target).normalized().map_or(Vec2::ZERO, |d| d * sp);
    } else {
        let dir = (target - node.pos) / remaining;
        next.pos = node.pos + dir * travel;
        next.waypoint = Some(target);
        next.waypoint_speed = speed;
        next.vel = dir * speed;
    }
    next
}
