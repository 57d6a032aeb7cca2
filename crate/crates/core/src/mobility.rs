//! Constant-speed motion on a two-way road with wrap-around ends.

use core::fmt;

use rand::Rng;

use crate::config::{DistanceMode, ScenarioConfig};

/// Position of one vehicle. `y` is derived from the lane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VehiclePose {
    /// Along-road coordinate in `[0, D)`.
    pub x: f64,
    /// Lane index, `1..=U`.
    pub lane: u32,
    /// +1 forward, -1 reverse.
    pub direction: i8,
    pub y: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LaneOutOfRange {
    pub lane: u32,
    pub lanes: u32,
}

impl fmt::Display for LaneOutOfRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "lane {} outside 1..={}", self.lane, self.lanes)
    }
}

impl core::error::Error for LaneOutOfRange {}

/// Lateral coordinate `y = u * d_y - y0` of lane `u`.
pub fn lane_center(lane: u32, lanes: u32, lane_width: f64, edge_offset: f64) -> Result<f64, LaneOutOfRange> {
    if lane == 0 || lane > lanes {
        return Err(LaneOutOfRange { lane, lanes });
    }
    Ok(lane as f64 * lane_width - edge_offset)
}

/// Lanes `1..=U/2` drive forward, the rest in reverse.
pub fn lane_direction(lane: u32, lanes: u32) -> i8 {
    if lane <= lanes / 2 {
        1
    } else {
        -1
    }
}

/// Wraps `x` into `[0, road_length)`.
fn wrap(x: f64, road_length: f64) -> f64 {
    let mut r = libm::fmod(x, road_length);
    if r < 0.0 {
        r += road_length;
    }
    // adding road_length to a tiny negative remainder can round up to it
    if r >= road_length {
        0.0
    } else {
        r
    }
}

/// Advances a pose by one slot: `x' = x + δ V τ`, wrapped onto the road.
pub fn step_position(pose: VehiclePose, speed: f64, slot_duration: f64, road_length: f64) -> VehiclePose {
    VehiclePose {
        x: wrap(pose.x + pose.direction as f64 * speed * slot_duration, road_length),
        ..pose
    }
}

/// Distance between two vehicles on the same road. The along-road gap is
/// the shorter way around the ring.
pub fn distance(a: &VehiclePose, b: &VehiclePose, road_length: f64, mode: DistanceMode) -> f64 {
    let raw = libm::fabs(a.x - b.x);
    let dx = raw.min(road_length - raw).max(0.0);
    match mode {
        DistanceMode::OneD => dx,
        DistanceMode::TwoD => libm::hypot(dx, a.y - b.y),
    }
}

/// Initial placement: uniform `x`, lanes assigned round-robin.
pub fn initial_pose<R: Rng>(vehicle: usize, cfg: &ScenarioConfig, rng: &mut R) -> VehiclePose {
    let lane = (vehicle as u32 % cfg.lanes) + 1;
    VehiclePose {
        x: wrap(rng.gen::<f64>() * cfg.road_length, cfg.road_length),
        lane,
        direction: lane_direction(lane, cfg.lanes),
        // lane is in range by construction
        y: lane as f64 * cfg.lane_width - cfg.edge_offset,
    }
}
