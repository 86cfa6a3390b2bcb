use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::road::RoadModel;

/// Height of the point a gaze ray is measured against.
pub const REFERENCE_HEIGHT: f64 = 0.75;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VehicleId(pub String);

impl VehicleId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for VehicleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for VehicleId {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VehicleKind {
    Car,
    Truck,
    Van,
    SportsCar,
}

impl VehicleKind {
    /// Default body (length, width) in meters.
    pub fn dimensions(self) -> (f64, f64) {
        match self {
            VehicleKind::Car => (4.5, 1.8),
            VehicleKind::Truck => (12.0, 2.5),
            VehicleKind::Van => (5.5, 2.0),
            VehicleKind::SportsCar => (4.4, 1.9),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            VehicleKind::Car => "car",
            VehicleKind::Truck => "truck",
            VehicleKind::Van => "van",
            VehicleKind::SportsCar => "sports_car",
        }
    }
}

impl FromStr for VehicleKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "car" => Ok(VehicleKind::Car),
            "truck" => Ok(VehicleKind::Truck),
            "van" => Ok(VehicleKind::Van),
            "sports_car" => Ok(VehicleKind::SportsCar),
            other => Err(format!("unknown vehicle kind `{other}`")),
        }
    }
}

/// Lane change direction. Left moves toward higher lane indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn lane_offset(self) -> i64 {
        match self {
            Side::Left => 1,
            Side::Right => -1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }

    pub fn target_lane(self, lane_index: usize) -> i64 {
        lane_index as i64 + self.lane_offset()
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Side {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "left" => Ok(Side::Left),
            "right" => Ok(Side::Right),
            other => Err(format!("unknown direction `{other}` (expected left or right)")),
        }
    }
}

/// Point-kinematic vehicle state. `s` is the longitudinal position of the body
/// center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    pub id: VehicleId,
    pub kind: VehicleKind,
    pub s: f64,
    pub lane_index: usize,
    /// Signed offset from the lane center, positive toward the left.
    pub lateral_offset: f64,
    pub v: f64,
    pub a: f64,
    pub length: f64,
    pub width: f64,
}

impl VehicleState {
    pub fn new(id: impl Into<String>, kind: VehicleKind, lane_index: usize, s: f64, v: f64) -> Self {
        let (length, width) = kind.dimensions();
        Self {
            id: VehicleId::new(id),
            kind,
            s,
            lane_index,
            lateral_offset: 0.0,
            v,
            a: 0.0,
            length,
            width,
        }
    }

    pub fn y(&self, road: &RoadModel) -> f64 {
        road.lane_center(self.lane_index) + self.lateral_offset
    }

    /// Body center at [`REFERENCE_HEIGHT`] in world coordinates
    /// (x forward along the road, y left, z up).
    pub fn reference_point(&self, road: &RoadModel) -> Vector3<f64> {
        Vector3::new(self.s, self.y(road), REFERENCE_HEIGHT)
    }

    /// Re-derive lane index and offset from an absolute lateral position.
    pub fn set_lateral(&mut self, road: &RoadModel, y: f64) {
        let lane = road.nearest_lane(y).clamp(0, road.lane_count as i64 - 1) as usize;
        self.lane_index = lane;
        self.lateral_offset = y - road.lane_center(lane);
    }

    /// Whether the two bodies overlap as axis-aligned rectangles.
    pub fn overlaps(&self, other: &VehicleState, road: &RoadModel) -> bool {
        (self.s - other.s).abs() < 0.5 * (self.length + other.length)
            && (self.y(road) - other.y(road)).abs() < 0.5 * (self.width + other.width)
    }
}
