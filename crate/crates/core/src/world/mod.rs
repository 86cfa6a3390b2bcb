//! Road, vehicles and the fixed-step kinematic simulation.

mod idm;
mod road;
mod scenario;
mod scene;
mod step;
mod vehicle;

pub use idm::{IdmParams, Leader};
pub use road::{MergeSection, RoadModel, DEFAULT_LANE_WIDTH};
pub use scenario::{load_scenario, EgoConfig, ScenarioConfig, TrafficConfig, EGO_ID};
pub use scene::{
    cosine_blend, relevant_vehicles, AmbientDriver, LaneChange, LaneChangeTrigger, SceneState, RELEVANCE_AHEAD,
    RELEVANCE_BEHIND,
};
pub use step::{step_world, EgoControls, LANE_CHANGE_DURATION};
pub(crate) use step::leader_in_lanes;
pub use vehicle::{Side, VehicleId, VehicleKind, VehicleState, REFERENCE_HEIGHT};
