//! The simulation as seen by clients: a scenario catalog, the running loop,
//! the chase camera and event handling. Synchronous; the server drives it.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use foresight_core::gaze::{infer_direction, screen_to_ray, select_vehicle, CameraModel};
use foresight_core::planner::{IndicatorSide, ManeuverPlan};
use foresight_core::prediction::LaneChangeFlag;
use foresight_core::sim::{RunMetrics, Simulation};
use foresight_core::world::{load_scenario, relevant_vehicles, ScenarioConfig, SceneState, Side, VehicleId, VehicleState};

use crate::protocol::{Ack, ClientEvent, WireEgo, WireFlag, WireState, WireVehicle};
use crate::BridgeError;

/// Planned acceleration below which the brake light is on, m/s².
pub const BRAKE_LIGHT_THRESHOLD: f64 = -0.5;

/// Scenarios a client may load, keyed by file stem.
#[derive(Debug, Clone, Default)]
pub struct Catalog {
    scenarios: BTreeMap<String, ScenarioConfig>,
}

impl Catalog {
    /// Every `*.scn` file in `dir`.
    pub fn from_dir(dir: &Path) -> Result<Self, BridgeError> {
        let mut scenarios = BTreeMap::new();
        let entries = fs::read_dir(dir).map_err(|e| BridgeError::Catalog(format!("{}: {e}", dir.display())))?;
        for entry in entries {
            let path = entry.map_err(|e| BridgeError::Catalog(e.to_string()))?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("scn") {
                continue;
            }
            let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
            let text = fs::read_to_string(&path).map_err(|e| BridgeError::Catalog(format!("{}: {e}", path.display())))?;
            let config = load_scenario(&text).map_err(|e| BridgeError::Catalog(format!("{}: {e}", path.display())))?;
            scenarios.insert(name, config);
        }
        if scenarios.is_empty() {
            return Err(BridgeError::Catalog(format!("no .scn files in {}", dir.display())));
        }
        Ok(Self { scenarios })
    }

    pub fn insert(&mut self, name: impl Into<String>, config: ScenarioConfig) {
        self.scenarios.insert(name.into(), config);
    }

    pub fn get(&self, name: &str) -> Option<&ScenarioConfig> {
        self.scenarios.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.scenarios.keys().map(String::as_str)
    }
}

pub struct Session {
    catalog: Catalog,
    scenario: String,
    sim: Simulation,
    camera: CameraModel,
    paused: bool,
    selected: Option<VehicleId>,
    flags: Vec<LaneChangeFlag>,
    acks: Vec<Ack>,
}

impl Session {
    pub fn new(catalog: Catalog, scenario: &str) -> Result<Self, BridgeError> {
        let config = catalog
            .get(scenario)
            .ok_or_else(|| BridgeError::UnknownScenario(scenario.to_string()))?
            .clone();
        config.validate().map_err(|e| BridgeError::Catalog(e.to_string()))?;
        let mut session = Self {
            catalog,
            scenario: scenario.to_string(),
            sim: Simulation::new(config),
            camera: CameraModel::default(),
            paused: false,
            selected: None,
            flags: Vec::new(),
            acks: Vec::new(),
        };
        session.follow();
        Ok(session)
    }

    pub fn scene(&self) -> &SceneState {
        self.sim.scene()
    }

    pub fn camera(&self) -> &CameraModel {
        &self.camera
    }

    pub fn metrics(&self) -> &RunMetrics {
        self.sim.metrics()
    }

    pub fn is_paused(&self) -> bool {
        self.paused
    }

    pub fn is_finished(&self) -> bool {
        self.sim.is_finished()
    }

    pub fn dt(&self) -> f64 {
        self.sim.config().dt
    }

    fn follow(&mut self) {
        let scene = self.sim.scene();
        self.camera.follow(&scene.ego, &scene.road);
    }

    fn restart(&mut self, config: ScenarioConfig) {
        self.sim = Simulation::new(config);
        self.selected = None;
        self.flags.clear();
        self.follow();
    }

    /// Advance one tick unless paused or finished. Queued injections are
    /// applied at the start of the tick.
    pub fn step(&mut self) -> bool {
        if self.paused || self.sim.is_finished() {
            return false;
        }
        let report = self.sim.tick();
        self.flags = report.flags;
        self.follow();
        true
    }

    /// Apply one client event between ticks and acknowledge it. The ack is
    /// also kept for the next [`WireState`].
    pub fn handle_event(&mut self, event: ClientEvent) -> Ack {
        let mut ack = Ack {
            event: event.kind().to_string(),
            ok: true,
            tick: self.sim.scene().tick,
            vehicle_id: None,
            direction: None,
            error: None,
            message: None,
        };
        let fail = |ack: &mut Ack, name: &str, message: String| {
            ack.ok = false;
            ack.error = Some(name.to_string());
            ack.message = Some(message);
        };
        match event {
            ClientEvent::Intervene { u, v } => match self.gaze_select(u, v) {
                Ok((id, side)) => {
                    ack.vehicle_id = Some(id);
                    ack.direction = Some(side);
                }
                Err((id, name, message)) => {
                    ack.vehicle_id = id;
                    fail(&mut ack, name, message);
                }
            },
            ClientEvent::InterveneById { vehicle_id, direction } => {
                ack.vehicle_id = Some(vehicle_id.clone());
                ack.direction = Some(direction);
                match self.sim.check_injection(&vehicle_id, direction) {
                    Ok(_) => self.sim.queue_injection(vehicle_id, direction),
                    Err(e) => fail(&mut ack, e.name(), e.to_string()),
                }
            }
            ClientEvent::Pause => self.paused = true,
            ClientEvent::Resume => self.paused = false,
            ClientEvent::Reset => {
                let config = self.sim.config().clone();
                self.restart(config);
            }
            ClientEvent::LoadScenario { name } => match self.catalog.get(&name).cloned() {
                Some(config) => {
                    self.scenario = name;
                    self.restart(config);
                }
                None => fail(&mut ack, "UnknownScenario", format!("no scenario named `{name}`")),
            },
        }
        self.acks.push(ack.clone());
        ack
    }

    /// Gaze path: screen point → ray → vehicle → direction → queued injection.
    fn gaze_select(&mut self, u: f64, v: f64) -> Result<(VehicleId, Side), (Option<VehicleId>, &'static str, String)> {
        let scene = self.sim.scene();
        let ray = screen_to_ray(&self.camera, u, v).map_err(|e| (None, e.name(), e.to_string()))?;
        let id = select_vehicle(&ray, scene).map_err(|e| (None, e.name(), e.to_string()))?;
        self.selected = Some(id.clone());
        let vehicle = scene.vehicle(&id).expect("selected vehicle exists");
        let side = infer_direction(vehicle, &scene.ego).map_err(|e| (Some(id.clone()), e.name(), e.to_string()))?;
        self.sim
            .check_injection(&id, side)
            .map_err(|e| (Some(id.clone()), e.name(), e.to_string()))?;
        self.sim.queue_injection(id.clone(), side);
        Ok((id, side))
    }

    /// Current state for clients; drains the pending acknowledgements.
    pub fn snapshot(&mut self) -> WireState {
        let acks = std::mem::take(&mut self.acks);
        self.state_with(acks)
    }

    fn state_with(&self, acks: Vec<Ack>) -> WireState {
        let scene = self.sim.scene();
        let road = &scene.road;
        let plan: Option<&ManeuverPlan> = scene.active_plan.as_ref();
        let planner = &self.sim.config().planner;
        let ego = &scene.ego;
        let wire = |v: &VehicleState| WireVehicle {
            id: v.id.clone(),
            kind: v.kind,
            lane: v.lane_index,
            s: v.s,
            lateral: v.lateral_offset,
            v: v.v,
            length: v.length,
            width: v.width,
            flag: self.flags.iter().find(|f| f.vehicle_id == v.id).map(|f| WireFlag {
                direction: f.side,
                probability: f.probability,
            }),
            selected: self.selected.as_ref() == Some(&v.id),
            injected: scene.interventions.iter().any(|r| r.vehicle_id == v.id),
            screen: self.camera.project(&v.reference_point(road)),
        };
        let mut vehicles = vec![wire(ego)];
        vehicles.extend(relevant_vehicles(scene).into_iter().map(wire));
        WireState {
            tick: scene.tick,
            time: scene.time,
            scenario: self.scenario.clone(),
            paused: self.paused,
            finished: self.sim.is_finished(),
            lane_count: road.lane_count,
            lane_width: road.lane_width,
            ego: WireEgo {
                s: ego.s,
                lane: ego.lane_index,
                lateral: ego.lateral_offset,
                v: ego.v,
                a: ego.a,
                indicator: plan.map_or(IndicatorSide::Off, |p| p.indicator_at(scene.time)),
                braking: plan.is_some_and(|p| p.acceleration_at(scene.time, planner) < BRAKE_LIGHT_THRESHOLD),
            },
            vehicles,
            plan: plan.map(|p| p.samples.clone()).unwrap_or_default(),
            camera: self.camera.clone(),
            acks,
        }
    }
}
