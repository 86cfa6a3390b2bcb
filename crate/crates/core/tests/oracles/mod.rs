//! Brute-force reference implementations shared by the integration tests and
//! the acceptance suite. They recompute results from first principles instead
//! of calling the code under test.

#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, PI};

use foresight_core::planner::{lateral_plan_for, rollout, AccelProfile, CandidateTrajectory, PlannerParams};
use foresight_core::prediction::{BehaviorLabel, EgoBehavior, SceneComposition};
use foresight_core::world::{RoadModel, SceneState, VehicleId, VehicleKind, VehicleState, EGO_ID};
use nalgebra::Vector3;
use rand::Rng;

pub const KINDS: [VehicleKind; 4] = [VehicleKind::Car, VehicleKind::Truck, VehicleKind::Van, VehicleKind::SportsCar];

/// Scene without drivers, plan or interventions.
pub fn bare_scene(lanes: usize, ego: VehicleState, v_des: f64, traffic: Vec<VehicleState>) -> SceneState {
    SceneState {
        time: 0.0,
        tick: 0,
        dt: 0.05,
        road: RoadModel::new(lanes),
        ego,
        ego_v_des: v_des,
        traffic,
        drivers: Default::default(),
        active_plan: None,
        interventions: Vec::new(),
    }
}

/// Angle between two vectors, stable for small and large angles.
pub fn angle_between(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    let (a, b) = (a.normalize(), b.normalize());
    2.0 * (a - b).norm().atan2((a + b).norm())
}

/// Minimal-angle selection: vehicles in the window [-30, 150] m around the
/// ego, in front of the ray, smallest angle, then nearest to the ego, then id.
pub fn gaze_oracle(origin: &Vector3<f64>, direction: &Vector3<f64>, scene: &SceneState) -> Option<VehicleId> {
    let w_lane = scene.road.lane_width;
    let point = |v: &VehicleState| Vector3::new(v.s, v.lane_index as f64 * w_lane + v.lateral_offset, 0.75);
    let ego_point = point(&scene.ego);
    let mut best: Option<(f64, f64, VehicleId)> = None;
    for v in &scene.traffic {
        let ds = v.s - scene.ego.s;
        if !(-30.0..=150.0).contains(&ds) {
            continue;
        }
        let w = point(v) - origin;
        if w.norm() < 0.1 {
            continue;
        }
        let alpha = angle_between(direction, &w);
        if alpha > FRAC_PI_2 {
            continue;
        }
        let key = (alpha, (point(v) - ego_point).norm(), v.id.clone());
        let better = match &best {
            None => true,
            Some(b) => key.0 < b.0 || (key.0 == b.0 && (key.1 < b.1 || (key.1 == b.1 && key.2 < b.2))),
        };
        if better {
            best = Some(key);
        }
    }
    best.map(|b| b.2)
}

pub fn random_vehicle(rng: &mut impl Rng, id: String, lanes: usize, s_range: (f64, f64)) -> VehicleState {
    let kind = KINDS[rng.random_range(0..KINDS.len())];
    let mut v = VehicleState::new(id, kind, rng.random_range(0..lanes), rng.random_range(s_range.0..s_range.1), rng.random_range(5.0..35.0));
    v.lateral_offset = rng.random_range(-1.0..1.0);
    v
}

/// Random scene with up to `max_vehicles` traffic vehicles, some of them
/// outside the relevance window.
pub fn random_gaze_scene(rng: &mut impl Rng, max_vehicles: usize) -> SceneState {
    let lanes = rng.random_range(2..5);
    let mut ego = VehicleState::new(EGO_ID, VehicleKind::Car, rng.random_range(0..lanes), rng.random_range(-100.0..100.0), 30.0);
    ego.lateral_offset = rng.random_range(-0.5..0.5);
    let n = rng.random_range(0..=max_vehicles);
    let traffic = (0..n)
        .map(|i| random_vehicle(rng, format!("v{i}"), lanes, (ego.s - 60.0, ego.s + 200.0)))
        .collect();
    bare_scene(lanes, ego, 30.0, traffic)
}

pub fn random_unit(rng: &mut impl Rng) -> Vector3<f64> {
    let z: f64 = rng.random_range(-1.0..1.0);
    let phi: f64 = rng.random_range(0.0..2.0 * PI);
    let r = (1.0 - z * z).sqrt();
    Vector3::new(r * phi.cos(), r * phi.sin(), z)
}

/// Random planner case: scene, composition over the relevant vehicles and a
/// feasible ego behavior.
pub fn random_planner_case(rng: &mut impl Rng) -> (SceneState, SceneComposition, EgoBehavior) {
    let lanes = 3;
    let mut ego = VehicleState::new(EGO_ID, VehicleKind::Car, rng.random_range(0..lanes), 0.0, rng.random_range(10.0..35.0));
    ego.a = [-3.0, -2.0, -1.0, 0.0, 1.0, 2.0][rng.random_range(0..6)];
    let n = rng.random_range(0..=4);
    let traffic: Vec<_> = (0..n)
        .map(|i| {
            let mut v = random_vehicle(rng, format!("v{i}"), lanes, (-25.0, 140.0));
            v.lateral_offset = 0.0;
            v
        })
        .collect();
    let mut scene = bare_scene(lanes, ego, rng.random_range(20.0..35.0), traffic);
    scene.time = rng.random_range(0.0..20.0);
    let labels = [BehaviorLabel::Keep, BehaviorLabel::ChangeLeft, BehaviorLabel::ChangeRight];
    let assignment = scene
        .traffic
        .iter()
        .map(|v| (v.id.clone(), labels[rng.random_range(0..3)]))
        .collect();
    let mut behaviors = vec![EgoBehavior::Straight];
    if scene.ego.lane_index + 1 < lanes {
        behaviors.push(EgoBehavior::LaneChangeLeft);
    }
    if scene.ego.lane_index > 0 {
        behaviors.push(EgoBehavior::LaneChangeRight);
    }
    let behavior = behaviors[rng.random_range(0..behaviors.len())];
    let composition = SceneComposition {
        ego_behavior: behavior,
        assignment,
        probability: 1.0,
    };
    (scene, composition, behavior)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleResult {
    pub profile: [f64; 4],
    pub total: f64,
    pub collision: bool,
}

/// Independent evaluation context for one (scene, composition, behavior).
/// Other vehicles are open loop, so their trajectories are taken once from a
/// reference rollout; the ego, lanes and costs are recomputed here.
pub struct PlannerOracle<'a> {
    scene: &'a SceneState,
    params: &'a PlannerParams,
    behavior: EgoBehavior,
    ego_lane: Vec<i64>,
    /// Per step: (s, length) of every other vehicle and its lane.
    others: Vec<Vec<(f64, f64, i64)>>,
}

impl<'a> PlannerOracle<'a> {
    pub fn new(scene: &'a SceneState, composition: &SceneComposition, behavior: EgoBehavior, params: &'a PlannerParams) -> Self {
        let lateral = lateral_plan_for(scene, behavior, params);
        let reference = rollout(
            scene,
            composition,
            &CandidateTrajectory {
                ego_behavior: behavior,
                profile: AccelProfile::ZERO,
                lateral,
            },
            params,
        );
        let dt = params.rollout_dt;
        let n = (params.horizon / dt).round() as usize;
        assert_eq!(reference.steps.len(), n + 1);
        let w = scene.road.lane_width;
        let ego_y0 = scene.ego.lane_index as f64 * w + scene.ego.lateral_offset;
        let lane_of = |y: f64| (y / w + 0.5).floor() as i64;
        let ego_lane = (0..=n)
            .map(|k| {
                let y = match lateral {
                    None => ego_y0,
                    Some(l) => {
                        let p = ((scene.time + k as f64 * dt - l.start_time) / l.duration).clamp(0.0, 1.0);
                        let (from, to) = (l.from_lane as f64 * w, l.to_lane as f64 * w);
                        from + (to - from) * 0.5 * (1.0 - (PI * p).cos())
                    }
                };
                lane_of(y)
            })
            .collect();
        let others = reference
            .steps
            .iter()
            .map(|st| st.others.iter().map(|o| (o.s, o.length, lane_of(o.y))).collect())
            .collect();
        Self {
            scene,
            params,
            behavior,
            ego_lane,
            others,
        }
    }

    /// Total cost and collision flag of one profile.
    pub fn evaluate(&self, profile: [f64; 4]) -> (f64, bool) {
        let p = self.params;
        let dt = p.rollout_dt;
        let n = self.ego_lane.len() - 1;
        let per_seg = n / 4;
        let ego_len = self.scene.ego.length;
        let (mut s, mut v) = (self.scene.ego.s, self.scene.ego.v);
        let (mut safety, mut utility, mut collision) = (0.0, 0.0, false);
        for k in 1..=n {
            v = (v + profile[(k - 1) / per_seg] * dt).max(0.0);
            s += v * dt;
            let mut front: Option<f64> = None;
            for &(os, olen, olane) in &self.others[k] {
                if olane != self.ego_lane[k] {
                    continue;
                }
                let half = 0.5 * (olen + ego_len);
                if os >= s {
                    let gap = os - s - half;
                    front = Some(front.map_or(gap, |f: f64| f.min(gap)));
                } else if s - os < half {
                    collision = true;
                }
            }
            if let Some(gap) = front {
                collision |= gap <= 0.0;
                safety += (p.min_gap + p.time_gap * v - gap).max(0.0).powi(2);
            }
            utility += (v - self.scene.ego_v_des).powi(2) * dt;
        }
        let seg_len = p.horizon / 4.0;
        let mut comfort = 0.0;
        let mut prev = self.scene.ego.a;
        for a in profile {
            comfort += ((a - prev) / seg_len).powi(2) * seg_len;
            prev = a;
        }
        let penalty = if self.behavior == EgoBehavior::Straight { 0.0 } else { p.lane_change_penalty };
        let mut total = p.w_safety * safety + p.w_utility * utility + p.w_comfort * comfort + penalty;
        if collision {
            total += p.collision_penalty;
        }
        (total, collision)
    }

    /// Minimum over every profile on the grid.
    pub fn best(&self) -> OracleResult {
        let grid = &self.params.grid;
        let mut best: Option<OracleResult> = None;
        for &a0 in grid {
            for &a1 in grid {
                for &a2 in grid {
                    for &a3 in grid {
                        let profile = [a0, a1, a2, a3];
                        let (total, collision) = self.evaluate(profile);
                        if best.is_none_or(|b| total < b.total) {
                            best = Some(OracleResult { profile, total, collision });
                        }
                    }
                }
            }
        }
        best.expect("grid is non-empty")
    }
}
