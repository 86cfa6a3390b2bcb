use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::idm::IdmParams;
use super::road::RoadModel;
use super::vehicle::{Side, VehicleId, VehicleState};
use crate::intervention::InterventionRecord;
use crate::planner::ManeuverPlan;

/// Half-width of the longitudinal window, relative to the ego, inside which
/// vehicles are predicted and selectable.
pub const RELEVANCE_BEHIND: f64 = 30.0;
pub const RELEVANCE_AHEAD: f64 = 150.0;

/// Smooth 0→1 ramp used for every lateral lane change.
pub fn cosine_blend(progress: f64) -> f64 {
    let p = progress.clamp(0.0, 1.0);
    0.5 * (1.0 - (PI * p).cos())
}

/// An ongoing lateral maneuver of an ambient vehicle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaneChange {
    pub side: Side,
    pub from_y: f64,
    pub to_y: f64,
    pub start_time: f64,
    pub duration: f64,
}

impl LaneChange {
    pub fn y_at(&self, time: f64) -> f64 {
        let progress = (time - self.start_time) / self.duration;
        self.from_y + (self.to_y - self.from_y) * cosine_blend(progress)
    }

    pub fn finished_at(&self, time: f64) -> bool {
        time >= self.start_time + self.duration
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaneChangeTrigger {
    pub side: Side,
    pub at_time: f64,
    pub fired: bool,
}

/// Behavior model of a non-ego vehicle: IDM car following plus scripted and
/// merge-forced lane changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmbientDriver {
    pub idm: IdmParams,
    pub v_des: f64,
    pub triggers: Vec<LaneChangeTrigger>,
    pub maneuver: Option<LaneChange>,
}

/// Full simulation snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneState {
    pub time: f64,
    pub tick: u64,
    pub dt: f64,
    pub road: RoadModel,
    pub ego: VehicleState,
    pub ego_v_des: f64,
    pub traffic: Vec<VehicleState>,
    pub drivers: BTreeMap<VehicleId, AmbientDriver>,
    pub active_plan: Option<ManeuverPlan>,
    pub interventions: Vec<InterventionRecord>,
}

impl SceneState {
    pub fn vehicle(&self, id: &VehicleId) -> Option<&VehicleState> {
        self.traffic.iter().find(|v| &v.id == id)
    }

    /// Ego followed by all traffic.
    pub fn bodies(&self) -> impl Iterator<Item = &VehicleState> {
        std::iter::once(&self.ego).chain(self.traffic.iter())
    }

    pub fn is_relevant(&self, vehicle: &VehicleState) -> bool {
        let ds = vehicle.s - self.ego.s;
        (-RELEVANCE_BEHIND..=RELEVANCE_AHEAD).contains(&ds)
    }
}

/// Traffic vehicles inside the relevance window around the ego, ordered by id.
pub fn relevant_vehicles(scene: &SceneState) -> Vec<&VehicleState> {
    let mut out: Vec<&VehicleState> = scene.traffic.iter().filter(|v| scene.is_relevant(v)).collect();
    out.sort_by(|a, b| a.id.cmp(&b.id));
    out
}
