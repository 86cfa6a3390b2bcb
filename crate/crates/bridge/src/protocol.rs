//! Wire protocol: JSON text frames, one message per frame, tagged by `type`.
//!
//! Client to server:
//!
//! ```json
//! {"type": "intervene", "u": 0.62, "v": 0.41}
//! {"type": "intervene_by_id", "vehicle_id": "van", "direction": "left"}
//! {"type": "pause"}
//! {"type": "resume"}
//! {"type": "reset"}
//! {"type": "load_scenario", "name": "s3_merging_van"}
//! ```
//!
//! Server to client: `{"type": "state", ...}` after every tick (a
//! [`WireState`]), `{"type": "ack", ...}` to the sender of each event (an
//! [`Ack`]), and `{"type": "error", "message": ...}` for frames that do not
//! parse. The connection stays open after an error.

use foresight_core::gaze::CameraModel;
use foresight_core::planner::{IndicatorSide, PlanSample};
use foresight_core::world::{Side, VehicleId, VehicleKind};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientEvent {
    /// Gaze-button input: normalized screen coordinates, origin top-left.
    Intervene { u: f64, v: f64 },
    /// Direct injection without gaze selection.
    InterveneById { vehicle_id: VehicleId, direction: Side },
    Pause,
    Resume,
    Reset,
    LoadScenario { name: String },
}

impl ClientEvent {
    pub fn kind(&self) -> &'static str {
        match self {
            ClientEvent::Intervene { .. } => "intervene",
            ClientEvent::InterveneById { .. } => "intervene_by_id",
            ClientEvent::Pause => "pause",
            ClientEvent::Resume => "resume",
            ClientEvent::Reset => "reset",
            ClientEvent::LoadScenario { .. } => "load_scenario",
        }
    }
}

/// Outcome of one client event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ack {
    /// Event kind as in [`ClientEvent::kind`].
    pub event: String,
    pub ok: bool,
    /// Tick at which the event was handled.
    pub tick: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vehicle_id: Option<VehicleId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Side>,
    /// Stable error name, e.g. `NoSelectableVehicle`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireFlag {
    pub direction: Side,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireVehicle {
    pub id: VehicleId,
    pub kind: VehicleKind,
    pub lane: usize,
    pub s: f64,
    pub lateral: f64,
    pub v: f64,
    pub length: f64,
    pub width: f64,
    pub flag: Option<WireFlag>,
    pub selected: bool,
    pub injected: bool,
    /// Projected screen position of the reference point, if in view.
    pub screen: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireEgo {
    pub s: f64,
    pub lane: usize,
    pub lateral: f64,
    pub v: f64,
    pub a: f64,
    pub indicator: IndicatorSide,
    /// Planned acceleration below the brake-light threshold.
    pub braking: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireState {
    pub tick: u64,
    pub time: f64,
    pub scenario: String,
    pub paused: bool,
    pub finished: bool,
    pub lane_count: usize,
    pub lane_width: f64,
    pub ego: WireEgo,
    /// The ego followed by every relevant vehicle, ordered by id.
    pub vehicles: Vec<WireVehicle>,
    pub plan: Vec<PlanSample>,
    pub camera: CameraModel,
    /// Acknowledgements issued since the previous state.
    pub acks: Vec<Ack>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    State(Box<WireState>),
    Ack(Ack),
    Error { message: String },
}

impl ServerMessage {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("server messages serialize")
    }
}

pub fn parse_client_event(text: &str) -> Result<ClientEvent, String> {
    serde_json::from_str(text).map_err(|e| e.to_string())
}
