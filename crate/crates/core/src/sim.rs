//! The closed simulation loop: world, prediction, overrides, planner and
//! ego controls, one tick at a time.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::InterventionError;
use crate::intervention::{apply_overrides, expire, inject, upsert, InterventionRecord};
use crate::planner::{select_behavior, ManeuverPlan};
use crate::prediction::{high_probability_flags, predict_scene, ConditionalPrediction, EgoBehavior, LaneChangeFlag};
use crate::world::{step_world, EgoControls, ScenarioConfig, SceneState, Side, VehicleId, VehicleState};

/// Summary of one run. Every field is a deterministic function of the
/// scenario and the injection timeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    /// Largest commanded ego deceleration, as a magnitude.
    pub max_decel: f64,
    /// Smallest bumper gap to a vehicle ahead in the ego lane.
    pub min_front_gap: Option<f64>,
    /// Smallest time to collision with a closing vehicle ahead.
    pub min_ttc: Option<f64>,
    pub min_speed: f64,
    /// Onset times of ego lateral motion.
    pub ego_lane_change_times: Vec<f64>,
    /// Onset times of lateral motion of each traffic vehicle.
    pub traffic_lane_change_times: BTreeMap<VehicleId, Vec<f64>>,
    /// Σ jerk² · dt of the commanded ego acceleration.
    pub comfort: f64,
    /// Number of body-overlap onsets between any two vehicles.
    pub collisions: u32,
    /// Ticks at which the selected ego behavior changed, with the new behavior.
    pub behavior_changes: Vec<(u64, EgoBehavior)>,
    pub ticks: u64,
    pub trace_path: Option<String>,
}

#[derive(Debug, Clone)]
struct MetricsAccumulator {
    metrics: RunMetrics,
    last_behavior: Option<EgoBehavior>,
    last_ego_lateral_start: Option<f64>,
}

impl MetricsAccumulator {
    fn new(scene: &SceneState) -> Self {
        Self {
            metrics: RunMetrics {
                max_decel: 0.0,
                min_front_gap: None,
                min_ttc: None,
                min_speed: scene.ego.v,
                ego_lane_change_times: Vec::new(),
                traffic_lane_change_times: BTreeMap::new(),
                comfort: 0.0,
                collisions: 0,
                behavior_changes: Vec::new(),
                ticks: 0,
                trace_path: None,
            },
            last_behavior: None,
            last_ego_lateral_start: None,
        }
    }

    /// Record the transition `prev → next` driven by `plan`.
    fn record(&mut self, prev: &SceneState, next: &SceneState, plan: &ManeuverPlan) {
        let m = &mut self.metrics;
        m.ticks += 1;
        let ego = &next.ego;
        if ego.a < 0.0 {
            m.max_decel = m.max_decel.max(-ego.a);
        }
        m.min_speed = m.min_speed.min(ego.v);
        let jerk = (ego.a - prev.ego.a) / next.dt;
        m.comfort += jerk * jerk * next.dt;

        if self.last_behavior != Some(plan.ego_behavior) {
            m.behavior_changes.push((prev.tick, plan.ego_behavior));
            self.last_behavior = Some(plan.ego_behavior);
        }
        if let Some(l) = plan.lateral {
            if prev.time >= l.start_time - 1e-9 && self.last_ego_lateral_start != Some(l.start_time) {
                m.ego_lane_change_times.push(l.start_time);
                self.last_ego_lateral_start = Some(l.start_time);
            }
        }
        for (id, driver) in &next.drivers {
            let Some(man) = &driver.maneuver else { continue };
            let before = prev.drivers.get(id).and_then(|d| d.maneuver.as_ref());
            if before.is_none_or(|b| b.start_time != man.start_time) {
                m.traffic_lane_change_times.entry(id.clone()).or_default().push(man.start_time);
            }
        }

        if let Some((gap, closing)) = front_gap(next) {
            m.min_front_gap = Some(m.min_front_gap.map_or(gap, |g: f64| g.min(gap)));
            if closing > 0.0 && gap > 0.0 {
                let ttc = gap / closing;
                m.min_ttc = Some(m.min_ttc.map_or(ttc, |t: f64| t.min(ttc)));
            }
        }
        m.collisions += collision_onsets(prev, next);
    }
}

/// Gap and closing speed to the nearest vehicle ahead in the ego lane.
pub fn front_gap(scene: &SceneState) -> Option<(f64, f64)> {
    let ego = &scene.ego;
    scene
        .traffic
        .iter()
        .filter(|v| v.lane_index == ego.lane_index && v.s >= ego.s)
        .map(|v| (v.s - ego.s - 0.5 * (v.length + ego.length), ego.v - v.v))
        .min_by(|a, b| a.0.total_cmp(&b.0))
}

fn collision_onsets(prev: &SceneState, next: &SceneState) -> u32 {
    let before: Vec<&VehicleState> = prev.bodies().collect();
    let after: Vec<&VehicleState> = next.bodies().collect();
    let mut count = 0;
    for i in 0..after.len() {
        for j in i + 1..after.len() {
            if after[i].overlaps(after[j], &next.road) && !before[i].overlaps(before[j], &prev.road) {
                count += 1;
            }
        }
    }
    count
}

/// What happened during one tick, for display and tracing.
#[derive(Debug, Clone, PartialEq)]
pub struct TickReport {
    /// State the tick was computed on (interventions and plan included).
    pub scene: SceneState,
    pub predictions: Vec<ConditionalPrediction>,
    pub effective: Vec<ConditionalPrediction>,
    pub flags: Vec<LaneChangeFlag>,
    pub injections: Vec<Result<InterventionRecord, InterventionError>>,
    pub expired: Vec<VehicleId>,
    pub replanned: bool,
    pub controls: EgoControls,
}

pub struct Simulation {
    config: ScenarioConfig,
    scene: SceneState,
    pending: Vec<(VehicleId, Side)>,
    metrics: MetricsAccumulator,
}

impl Simulation {
    pub fn new(config: ScenarioConfig) -> Self {
        let scene = config.initial_scene();
        let metrics = MetricsAccumulator::new(&scene);
        Self {
            config,
            scene,
            pending: Vec::new(),
            metrics,
        }
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn scene(&self) -> &SceneState {
        &self.scene
    }

    pub fn is_finished(&self) -> bool {
        self.scene.tick >= self.config.tick_count()
    }

    pub fn metrics(&self) -> &RunMetrics {
        &self.metrics.metrics
    }

    pub fn into_metrics(self) -> RunMetrics {
        self.metrics.metrics
    }

    /// Queue an injection; it is applied at the start of the next tick.
    pub fn queue_injection(&mut self, vehicle: VehicleId, direction: Side) {
        self.pending.push((vehicle, direction));
    }

    /// Validate an injection against the current state without applying it.
    pub fn check_injection(&self, vehicle: &VehicleId, direction: Side) -> Result<InterventionRecord, InterventionError> {
        inject(&self.scene, vehicle, direction)
    }

    /// Advance one tick: apply queued injections, expire records, predict,
    /// override, replan if due, then step the world under the plan.
    pub fn tick(&mut self) -> TickReport {
        let mut scene = self.scene.clone();

        let injections: Vec<_> = std::mem::take(&mut self.pending)
            .into_iter()
            .map(|(id, side)| {
                let record = inject(&scene, &id, side)?;
                upsert(&mut scene.interventions, record.clone());
                Ok(record)
            })
            .collect();
        let before: Vec<VehicleId> = scene.interventions.iter().map(|r| r.vehicle_id.clone()).collect();
        scene.interventions = expire(&scene, &scene.interventions);
        let expired: Vec<VehicleId> = before
            .into_iter()
            .filter(|id| !scene.interventions.iter().any(|r| &r.vehicle_id == id))
            .collect();
        let interventions_changed = injections.iter().any(Result::is_ok) || !expired.is_empty();

        let params = &self.config.prediction;
        let predictions = predict_scene(&scene, params);
        let effective = apply_overrides(&predictions, &scene.interventions);

        // Regular replans keep a fixed cadence; intervention changes add
        // extra replans without shifting it.
        let due = scene.tick.is_multiple_of(self.config.planner.replan_period);
        let replanned = due || interventions_changed || scene.active_plan.is_none();
        if replanned {
            scene.active_plan = Some(select_behavior(&scene, &effective, params, &self.config.planner));
        }
        let plan = scene.active_plan.clone().expect("plan present after replan");
        let flags = high_probability_flags(&effective, plan.ego_behavior, params.threshold);
        let controls = plan.controls(&scene, &self.config.planner);

        let next = step_world(&scene, controls);
        self.metrics.record(&scene, &next, &plan);
        self.scene = next;

        TickReport {
            scene,
            predictions,
            effective,
            flags,
            injections,
            expired,
            replanned,
            controls,
        }
    }
}
