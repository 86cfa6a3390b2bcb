use thiserror::Error;

use crate::world::VehicleId;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid scenario: {0}")]
    Validation(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GazeError {
    #[error("screen point ({u}, {v}) is outside the unit square")]
    OutOfScreen { u: f64, v: f64 },
    #[error("target is {distance} m from the ray origin")]
    DegenerateTarget { distance: f64 },
    #[error("no vehicle in front of the gaze ray")]
    NoSelectableVehicle,
    #[error("selected vehicle shares the ego lane; lane change direction is ambiguous")]
    AmbiguousDirection,
}

impl GazeError {
    /// Stable name shown to the user.
    pub fn name(&self) -> &'static str {
        match self {
            GazeError::OutOfScreen { .. } => "OutOfScreen",
            GazeError::DegenerateTarget { .. } => "DegenerateTarget",
            GazeError::NoSelectableVehicle => "NoSelectableVehicle",
            GazeError::AmbiguousDirection => "AmbiguousDirection",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InterventionError {
    #[error("vehicle `{0}` is not within the relevance window")]
    VehicleNotRelevant(VehicleId),
    #[error("vehicle `{vehicle}` cannot change {side}: target lane is off the road")]
    InvalidDirection { vehicle: VehicleId, side: crate::world::Side },
}

impl InterventionError {
    pub fn name(&self) -> &'static str {
        match self {
            InterventionError::VehicleNotRelevant(_) => "VehicleNotRelevant",
            InterventionError::InvalidDirection { .. } => "InvalidDirection",
        }
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("script line {line}: {message}")]
    Script { line: usize, message: String },
    #[error("script references unknown vehicle `{0}`")]
    ScriptVehicleUnknown(VehicleId),
    #[error("injection at t = {time} s rejected: {source}")]
    InjectionRejected { time: f64, source: InterventionError },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("trace: {0}")]
    Trace(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
