//! Per-composition trajectory optimization and probability-weighted behavior
//! selection.
//!
//! The ego trajectory is parametrized by four constant-acceleration segments
//! over the horizon plus an optional lane change whose lateral motion starts a
//! fixed lead time after the indicator comes on. Every profile on the
//! acceleration grid is rolled out against every likely composition; the
//! behavior with the lowest expected cost wins.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::prediction::{enumerate_compositions, BehaviorLabel, ConditionalPrediction, EgoBehavior, PredictionParams, SceneComposition};
use crate::world::{cosine_blend, relevant_vehicles, EgoControls, IdmParams, Leader, RoadModel, SceneState, Side, VehicleId};

pub const SEGMENTS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerParams {
    pub w_safety: f64,
    pub w_utility: f64,
    pub w_comfort: f64,
    pub collision_penalty: f64,
    /// Planning horizon, s. Split into [`SEGMENTS`] equal segments.
    pub horizon: f64,
    pub rollout_dt: f64,
    /// Admissible segment accelerations, m/s².
    pub grid: Vec<f64>,
    pub lane_change_penalty: f64,
    /// Replan every this many world ticks.
    pub replan_period: u64,
    /// Time between indicator activation and start of lateral motion, s.
    pub indicator_lead: f64,
    pub lane_change_duration: f64,
    /// Safe distance is `min_gap + time_gap * v`.
    pub min_gap: f64,
    pub time_gap: f64,
}

impl Default for PlannerParams {
    fn default() -> Self {
        Self {
            w_safety: 10.0,
            w_utility: 0.1,
            w_comfort: 1.0,
            collision_penalty: 1e6,
            horizon: 8.0,
            rollout_dt: 0.25,
            grid: vec![-3.0, -2.0, -1.0, 0.0, 1.0, 2.0],
            lane_change_penalty: 5.0,
            replan_period: 10,
            indicator_lead: 3.0,
            lane_change_duration: 3.0,
            min_gap: 2.0,
            time_gap: 1.5,
        }
    }
}

impl PlannerParams {
    pub fn validate(&self) -> Result<(), String> {
        if self.grid.is_empty() || self.grid.iter().any(|a| !a.is_finite()) {
            return Err("planner grid must be a non-empty list of finite values".into());
        }
        if !(self.rollout_dt > 0.0) || !(self.horizon > 0.0) {
            return Err("planner horizon and rollout_dt must be positive".into());
        }
        let steps = self.segment_length() / self.rollout_dt;
        if (steps - steps.round()).abs() > 1e-9 || steps.round() < 1.0 {
            return Err("planner horizon / 4 must be a multiple of rollout_dt".into());
        }
        if self.replan_period == 0 {
            return Err("planner replan_period must be >= 1".into());
        }
        if !(self.lane_change_duration > 0.0) || !(self.indicator_lead >= 0.0) {
            return Err("lane change timing must be positive".into());
        }
        Ok(())
    }

    pub fn segment_length(&self) -> f64 {
        self.horizon / SEGMENTS as f64
    }

    pub fn steps_per_segment(&self) -> usize {
        (self.segment_length() / self.rollout_dt).round() as usize
    }

    pub fn step_count(&self) -> usize {
        self.steps_per_segment() * SEGMENTS
    }

    pub fn safe_distance(&self, v: f64) -> f64 {
        self.min_gap + self.time_gap * v
    }

    pub fn maneuver_penalty(&self, behavior: EgoBehavior) -> f64 {
        match behavior {
            EgoBehavior::Straight => 0.0,
            _ => self.lane_change_penalty,
        }
    }

    /// Grid values in search preference order: closer to zero first, then
    /// braking before accelerating.
    fn preference_order(&self) -> Vec<f64> {
        let mut g = self.grid.clone();
        g.sort_by(|a, b| a.abs().total_cmp(&b.abs()).then(a.total_cmp(b)));
        g.dedup();
        g
    }
}

/// Piecewise-constant acceleration over the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccelProfile(pub [f64; SEGMENTS]);

impl AccelProfile {
    pub const ZERO: AccelProfile = AccelProfile([0.0; SEGMENTS]);

    /// Profile whose values all lie on `grid`.
    pub fn on_grid(values: [f64; SEGMENTS], grid: &[f64]) -> Option<Self> {
        values.iter().all(|v| grid.contains(v)).then_some(AccelProfile(values))
    }

    pub fn segment(&self, index: usize) -> f64 {
        self.0[index.min(SEGMENTS - 1)]
    }

    /// Every profile on the grid, in lexicographic grid order.
    pub fn enumerate(grid: &[f64]) -> impl Iterator<Item = AccelProfile> + '_ {
        let n = grid.len();
        (0..n.pow(SEGMENTS as u32)).map(move |mut i| {
            let mut values = [0.0; SEGMENTS];
            for slot in values.iter_mut().rev() {
                *slot = grid[i % n];
                i /= n;
            }
            AccelProfile(values)
        })
    }
}

/// Lateral part of an ego lane change: cosine blend between lane centers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LateralPlan {
    pub from_lane: usize,
    pub to_lane: usize,
    /// Absolute time at which lateral motion begins.
    pub start_time: f64,
    pub duration: f64,
}

impl LateralPlan {
    pub fn y_at(&self, road: &RoadModel, time: f64) -> f64 {
        let from = road.lane_center(self.from_lane);
        let to = road.lane_center(self.to_lane);
        from + (to - from) * cosine_blend((time - self.start_time) / self.duration)
    }

    pub fn end_time(&self) -> f64 {
        self.start_time + self.duration
    }

    pub fn side(&self) -> Side {
        if self.to_lane > self.from_lane {
            Side::Left
        } else {
            Side::Right
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateTrajectory {
    pub ego_behavior: EgoBehavior,
    pub profile: AccelProfile,
    pub lateral: Option<LateralPlan>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndicatorSide {
    Off,
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Indicator {
    pub side: IndicatorSide,
    pub activation_time: Option<f64>,
}

impl Indicator {
    pub const OFF: Indicator = Indicator {
        side: IndicatorSide::Off,
        activation_time: None,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub safety: f64,
    pub utility: f64,
    pub comfort: f64,
    pub maneuver_penalty: f64,
    pub collision: bool,
    pub total: f64,
}

impl CostBreakdown {
    pub fn new(safety: f64, utility: f64, comfort: f64, maneuver_penalty: f64, collision: bool, params: &PlannerParams) -> Self {
        let mut total = params.w_safety * safety + params.w_utility * utility + params.w_comfort * comfort + maneuver_penalty;
        if collision {
            total += params.collision_penalty;
        }
        Self {
            safety,
            utility,
            comfort,
            maneuver_penalty,
            collision,
            total,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanSample {
    pub t: f64,
    pub s: f64,
    pub y: f64,
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManeuverPlan {
    pub ego_behavior: EgoBehavior,
    pub profile: AccelProfile,
    pub expected_cost: f64,
    pub indicator: Indicator,
    pub lateral: Option<LateralPlan>,
    pub planned_at: f64,
    /// Expected cost of every feasible behavior considered.
    pub behavior_costs: Vec<(EgoBehavior, f64)>,
    /// Display samples of the chosen rollout (absolute time).
    pub samples: Vec<PlanSample>,
}

impl ManeuverPlan {
    /// Whether a lane change of this plan is under way (indicator on or
    /// lateral motion not finished).
    pub fn is_committed_at(&self, time: f64) -> bool {
        self.lateral.is_some_and(|l| time < l.end_time())
    }

    pub fn indicator_at(&self, time: f64) -> IndicatorSide {
        if self.is_committed_at(time) {
            self.indicator.side
        } else {
            IndicatorSide::Off
        }
    }

    pub fn acceleration_at(&self, time: f64, params: &PlannerParams) -> f64 {
        let elapsed = (time - self.planned_at).max(0.0);
        let seg = (elapsed / params.segment_length()).floor() as usize;
        self.profile.segment(seg)
    }

    /// Controls that track this plan over the next world tick.
    pub fn controls(&self, scene: &SceneState, params: &PlannerParams) -> EgoControls {
        let road = &scene.road;
        let next = scene.time + scene.dt;
        let target_y = match &self.lateral {
            Some(l) => l.y_at(road, next),
            None => road.lane_center(scene.ego.lane_index),
        };
        EgoControls {
            accel: self.acceleration_at(scene.time, params),
            lateral_rate: (target_y - scene.ego.y(road)) / scene.dt,
        }
    }
}

/// Kinematic sample of one body in a rollout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodySample {
    pub id: VehicleId,
    pub s: f64,
    pub y: f64,
    pub v: f64,
    pub lane: i64,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontGap {
    pub vehicle: VehicleId,
    pub gap: f64,
    pub closing_speed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RolloutStep {
    /// Time since rollout start.
    pub t: f64,
    pub ego: BodySample,
    /// Acceleration applied over the step that ended here.
    pub ego_accel: f64,
    pub others: Vec<BodySample>,
    pub front: Option<FrontGap>,
    /// Some vehicle on the ego lane overlaps the ego longitudinally.
    pub collision: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rollout {
    /// `steps[0]` is the initial state; costs are summed over the rest.
    pub steps: Vec<RolloutStep>,
}

/// Predicted motion of one other vehicle; index = rollout step.
struct OtherTrack {
    id: VehicleId,
    length: f64,
    s: Vec<f64>,
    y: Vec<f64>,
    v: Vec<f64>,
}

/// Lane a vehicle ends up on when it executes `label`. A vehicle already past
/// the boundary toward `label` is finishing that change, so its current lane
/// is the target.
fn label_target_lane(lane: usize, offset: f64, label: BehaviorLabel) -> Option<i64> {
    match label {
        BehaviorLabel::Keep => None,
        BehaviorLabel::ChangeLeft if offset < 0.0 => Some(lane as i64),
        BehaviorLabel::ChangeRight if offset > 0.0 => Some(lane as i64),
        BehaviorLabel::ChangeLeft => Some(lane as i64 + 1),
        BehaviorLabel::ChangeRight => Some(lane as i64 - 1),
    }
}

/// Roll the relevant vehicles forward under their composition labels. They
/// follow each other with default IDM at their current speed but do not react
/// to the ego. Lane changes start at the beginning of the horizon.
fn simulate_others(scene: &SceneState, composition: &SceneComposition, params: &PlannerParams) -> Vec<OtherTrack> {
    let road = &scene.road;
    let idm = IdmParams::default();
    let n = params.step_count();
    let dt = params.rollout_dt;
    let vehicles = relevant_vehicles(scene);

    struct Plan {
        y0: f64,
        target_y: Option<f64>,
        v_des: f64,
    }
    let plans: Vec<Plan> = vehicles
        .iter()
        .map(|v| {
            let target = label_target_lane(v.lane_index, v.lateral_offset, composition.label(&v.id))
                .filter(|&l| road.has_lane(l))
                .map(|l| road.lane_center(l as usize));
            Plan {
                y0: v.y(road),
                target_y: target,
                v_des: v.v.max(0.1),
            }
        })
        .collect();

    let mut tracks: Vec<OtherTrack> = vehicles
        .iter()
        .zip(&plans)
        .map(|(v, p)| OtherTrack {
            id: v.id.clone(),
            length: v.length,
            s: vec![v.s],
            y: vec![p.y0],
            v: vec![v.v],
        })
        .collect();

    let lateral_at = |p: &Plan, t: f64| match p.target_y {
        Some(to) => p.y0 + (to - p.y0) * cosine_blend(t / params.lane_change_duration),
        None => p.y0,
    };

    for k in 0..n {
        let t = k as f64 * dt;
        let lanes: Vec<i64> = tracks.iter().map(|tr| road.nearest_lane(tr.y[k])).collect();
        let accels: Vec<f64> = (0..tracks.len())
            .map(|i| {
                let me = &tracks[i];
                let changing = plans[i].target_y.filter(|_| t < params.lane_change_duration);
                let target_lane = changing.map(|y| road.nearest_lane(y));
                let mut leader: Option<Leader> = None;
                for (j, other) in tracks.iter().enumerate() {
                    if j == i || (lanes[j] != lanes[i] && Some(lanes[j]) != target_lane) {
                        continue;
                    }
                    if other.s[k] < me.s[k] || (other.s[k] == me.s[k] && j < i) {
                        continue;
                    }
                    let gap = other.s[k] - me.s[k] - 0.5 * (other.length + me.length);
                    if leader.is_none_or(|l| gap < l.gap) {
                        leader = Some(Leader { gap, v: other.v[k] });
                    }
                }
                idm.acceleration(me.v[k], plans[i].v_des, leader)
            })
            .collect();
        let t_next = (k + 1) as f64 * dt;
        for (i, tr) in tracks.iter_mut().enumerate() {
            let v = (tr.v[k] + accels[i] * dt).max(0.0);
            let s = tr.s[k] + v * dt;
            tr.v.push(v);
            tr.s.push(s);
            tr.y.push(lateral_at(&plans[i], t_next));
        }
    }
    tracks
}

/// Ego lateral position at rollout step `k`.
fn ego_y(scene: &SceneState, lateral: Option<&LateralPlan>, t: f64) -> f64 {
    match lateral {
        Some(l) => l.y_at(&scene.road, scene.time + t),
        None => scene.ego.y(&scene.road),
    }
}

/// Roll the ego out under `candidate` against the vehicles of `composition`.
pub fn rollout(scene: &SceneState, composition: &SceneComposition, candidate: &CandidateTrajectory, params: &PlannerParams) -> Rollout {
    let road = &scene.road;
    let tracks = simulate_others(scene, composition, params);
    let dt = params.rollout_dt;
    let per_seg = params.steps_per_segment();
    let ego = &scene.ego;
    let mut s = ego.s;
    let mut v = ego.v;
    let mut steps = Vec::with_capacity(params.step_count() + 1);

    for k in 0..=params.step_count() {
        let t = k as f64 * dt;
        let mut accel = 0.0;
        if k > 0 {
            accel = candidate.profile.segment((k - 1) / per_seg);
            v = (v + accel * dt).max(0.0);
            s += v * dt;
        }
        let y = ego_y(scene, candidate.lateral.as_ref(), t);
        let lane = road.nearest_lane(y);
        let others: Vec<BodySample> = tracks
            .iter()
            .map(|tr| BodySample {
                id: tr.id.clone(),
                s: tr.s[k],
                y: tr.y[k],
                v: tr.v[k],
                lane: road.nearest_lane(tr.y[k]),
                length: tr.length,
            })
            .collect();
        let mut front: Option<FrontGap> = None;
        let mut collision = false;
        for o in others.iter().filter(|o| o.lane == lane) {
            let half = 0.5 * (o.length + ego.length);
            if o.s >= s {
                let gap = o.s - s - half;
                if front.as_ref().is_none_or(|f| gap < f.gap) {
                    front = Some(FrontGap {
                        vehicle: o.id.clone(),
                        gap,
                        closing_speed: v - o.v,
                    });
                }
            } else if s - o.s < half {
                collision = true;
            }
        }
        if front.as_ref().is_some_and(|f| f.gap <= 0.0) {
            collision = true;
        }
        steps.push(RolloutStep {
            t,
            ego: BodySample {
                id: ego.id.clone(),
                s,
                y,
                v,
                lane,
                length: ego.length,
            },
            ego_accel: accel,
            others,
            front,
            collision,
        });
    }
    Rollout { steps }
}

/// Cost of a finished rollout.
pub fn rollout_cost(
    rollout: &Rollout,
    candidate: &CandidateTrajectory,
    initial_accel: f64,
    v_des: f64,
    params: &PlannerParams,
) -> CostBreakdown {
    let dt = params.rollout_dt;
    let mut safety = 0.0;
    let mut utility = 0.0;
    let mut collision = false;
    for step in &rollout.steps[1..] {
        if let Some(f) = &step.front {
            let shortfall = params.safe_distance(step.ego.v) - f.gap;
            if shortfall > 0.0 {
                safety += shortfall * shortfall;
            }
        }
        utility += (step.ego.v - v_des).powi(2) * dt;
        collision |= step.collision;
    }
    let comfort = comfort_cost(&candidate.profile, initial_accel, params);
    CostBreakdown::new(
        safety,
        utility,
        comfort,
        params.maneuver_penalty(candidate.ego_behavior),
        collision,
        params,
    )
}

/// Squared jerk of the acceleration steps at segment boundaries, starting from
/// the current acceleration.
pub fn comfort_cost(profile: &AccelProfile, initial_accel: f64, params: &PlannerParams) -> f64 {
    let seg = params.segment_length();
    let mut prev = initial_accel;
    let mut sum = 0.0;
    for &a in &profile.0 {
        let jerk = (a - prev) / seg;
        sum += jerk * jerk * seg;
        prev = a;
    }
    sum
}

/// Lateral plan the ego would follow for `behavior`, honoring a lane change
/// that is already committed.
pub fn lateral_plan_for(scene: &SceneState, behavior: EgoBehavior, params: &PlannerParams) -> Option<LateralPlan> {
    if let Some(plan) = scene.active_plan.as_ref().filter(|p| p.is_committed_at(scene.time)) {
        if plan.ego_behavior == behavior {
            return plan.lateral;
        }
    }
    let side = behavior.side()?;
    let to = side.target_lane(scene.ego.lane_index);
    Some(LateralPlan {
        from_lane: scene.ego.lane_index,
        to_lane: to.max(0) as usize,
        start_time: scene.time + params.indicator_lead,
        duration: params.lane_change_duration,
    })
}

/// Best profile for one composition and ego behavior over the full grid.
pub fn optimize_trajectory(
    scene: &SceneState,
    composition: &SceneComposition,
    ego_behavior: EgoBehavior,
    params: &PlannerParams,
) -> (AccelProfile, CostBreakdown) {
    let lateral = lateral_plan_for(scene, ego_behavior, params);
    Search::new(scene, composition, ego_behavior, lateral, params).run()
}

/// Exhaustive depth-first search over segment accelerations. Profiles sharing
/// a prefix share its integration; the arithmetic per step is the same as in
/// [`rollout`] and [`rollout_cost`].
struct Search<'a> {
    params: &'a PlannerParams,
    grid: Vec<f64>,
    per_seg: usize,
    v_des: f64,
    initial_accel: f64,
    penalty: f64,
    /// For each step k: (s, half length sum) of others on the ego lane.
    same_lane: Vec<Vec<(f64, f64)>>,
    start: Partial,
    values: [f64; SEGMENTS],
    best: Option<(AccelProfile, CostBreakdown)>,
}

#[derive(Clone, Copy)]
struct Partial {
    s: f64,
    v: f64,
    safety: f64,
    utility: f64,
    collision: bool,
}

impl<'a> Search<'a> {
    fn new(
        scene: &SceneState,
        composition: &SceneComposition,
        ego_behavior: EgoBehavior,
        lateral: Option<LateralPlan>,
        params: &'a PlannerParams,
    ) -> Self {
        let road = &scene.road;
        let tracks = simulate_others(scene, composition, params);
        let dt = params.rollout_dt;
        let same_lane = (0..=params.step_count())
            .map(|k| {
                let lane = road.nearest_lane(ego_y(scene, lateral.as_ref(), k as f64 * dt));
                tracks
                    .iter()
                    .filter(|tr| road.nearest_lane(tr.y[k]) == lane)
                    .map(|tr| (tr.s[k], 0.5 * (tr.length + scene.ego.length)))
                    .collect()
            })
            .collect();
        Self {
            params,
            grid: params.preference_order(),
            per_seg: params.steps_per_segment(),
            v_des: scene.ego_v_des,
            initial_accel: scene.ego.a,
            penalty: params.maneuver_penalty(ego_behavior),
            same_lane,
            start: Partial {
                s: scene.ego.s,
                v: scene.ego.v,
                safety: 0.0,
                utility: 0.0,
                collision: false,
            },
            values: [0.0; SEGMENTS],
            best: None,
        }
    }

    fn run(mut self) -> (AccelProfile, CostBreakdown) {
        self.descend(0, self.start);
        self.best.expect("grid is non-empty")
    }

    fn descend(&mut self, segment: usize, state: Partial) {
        if segment == SEGMENTS {
            self.finish(state);
            return;
        }
        for gi in 0..self.grid.len() {
            let a = self.grid[gi];
            self.values[segment] = a;
            let next = self.integrate(segment, a, state);
            self.descend(segment + 1, next);
        }
    }

    fn integrate(&self, segment: usize, a: f64, mut st: Partial) -> Partial {
        let dt = self.params.rollout_dt;
        let first = segment * self.per_seg + 1;
        for k in first..first + self.per_seg {
            st.v = (st.v + a * dt).max(0.0);
            st.s += st.v * dt;
            let mut front: Option<f64> = None;
            for &(s_o, half) in &self.same_lane[k] {
                if s_o >= st.s {
                    let gap = s_o - st.s - half;
                    if front.is_none_or(|g| gap < g) {
                        front = Some(gap);
                    }
                } else if st.s - s_o < half {
                    st.collision = true;
                }
            }
            if let Some(gap) = front {
                if gap <= 0.0 {
                    st.collision = true;
                }
                let shortfall = self.params.safe_distance(st.v) - gap;
                if shortfall > 0.0 {
                    st.safety += shortfall * shortfall;
                }
            }
            st.utility += (st.v - self.v_des).powi(2) * dt;
        }
        st
    }

    fn finish(&mut self, st: Partial) {
        let profile = AccelProfile(self.values);
        let comfort = comfort_cost(&profile, self.initial_accel, self.params);
        let cost = CostBreakdown::new(st.safety, st.utility, comfort, self.penalty, st.collision, self.params);
        if self.best.as_ref().is_none_or(|(_, b)| cost.total < b.total) {
            self.best = Some((profile, cost));
        }
    }
}

/// Ego behaviors whose target lane exists and is not a merge lane.
pub fn feasible_behaviors(scene: &SceneState) -> Vec<EgoBehavior> {
    let road = &scene.road;
    EgoBehavior::ALL
        .into_iter()
        .filter(|b| match b.side() {
            None => true,
            Some(side) => {
                let target = side.target_lane(scene.ego.lane_index);
                road.has_lane(target) && !road.is_merge_lane(target as usize)
            }
        })
        .collect()
}

/// Expected cost of one behavior and the best profile under its most likely
/// composition.
#[derive(Debug, Clone, PartialEq)]
pub struct BehaviorEvaluation {
    pub ego_behavior: EgoBehavior,
    pub expected_cost: f64,
    pub compositions: Vec<(SceneComposition, AccelProfile, CostBreakdown)>,
}

pub fn evaluate_behavior(
    scene: &SceneState,
    predictions: &[ConditionalPrediction],
    ego_behavior: EgoBehavior,
    prediction_params: &PredictionParams,
    params: &PlannerParams,
) -> BehaviorEvaluation {
    let lateral = lateral_plan_for(scene, ego_behavior, params);
    let compositions: Vec<_> = enumerate_compositions(predictions, ego_behavior, prediction_params.k)
        .into_iter()
        .map(|c| {
            let (profile, cost) = Search::new(scene, &c, ego_behavior, lateral, params).run();
            (c, profile, cost)
        })
        .collect();
    let expected_cost = compositions.iter().map(|(c, _, cost)| c.probability * cost.total).sum();
    BehaviorEvaluation {
        ego_behavior,
        expected_cost,
        compositions,
    }
}

/// Choose the ego behavior with the lowest expected cost and build the plan.
/// While a lane change is committed only its acceleration profile is
/// re-optimized.
pub fn select_behavior(
    scene: &SceneState,
    predictions: &[ConditionalPrediction],
    prediction_params: &PredictionParams,
    params: &PlannerParams,
) -> ManeuverPlan {
    let committed = scene.active_plan.as_ref().filter(|p| p.is_committed_at(scene.time));
    let behaviors = match committed {
        Some(p) => vec![p.ego_behavior],
        None => feasible_behaviors(scene),
    };
    let evaluations: Vec<BehaviorEvaluation> = behaviors
        .iter()
        .map(|&b| evaluate_behavior(scene, predictions, b, prediction_params, params))
        .collect();
    let best = evaluations
        .iter()
        .fold(None::<&BehaviorEvaluation>, |best, e| match best {
            Some(b) if e.expected_cost.total_cmp(&b.expected_cost) != Ordering::Less => Some(b),
            _ => Some(e),
        })
        .expect("straight is always feasible");

    let lateral = lateral_plan_for(scene, best.ego_behavior, params);
    let (composition, profile) = match best.compositions.first() {
        Some((c, p, _)) => (c.clone(), *p),
        None => (
            SceneComposition {
                ego_behavior: best.ego_behavior,
                assignment: Default::default(),
                probability: 1.0,
            },
            AccelProfile::ZERO,
        ),
    };
    let indicator = match (lateral, committed) {
        (None, _) => Indicator::OFF,
        (Some(_), Some(p)) => p.indicator,
        (Some(l), None) => Indicator {
            side: match l.side() {
                Side::Left => IndicatorSide::Left,
                Side::Right => IndicatorSide::Right,
            },
            activation_time: Some(scene.time),
        },
    };
    let candidate = CandidateTrajectory {
        ego_behavior: best.ego_behavior,
        profile,
        lateral,
    };
    let samples = rollout(scene, &composition, &candidate, params)
        .steps
        .iter()
        .map(|st| PlanSample {
            t: scene.time + st.t,
            s: st.ego.s,
            y: st.ego.y,
            v: st.ego.v,
        })
        .collect();
    ManeuverPlan {
        ego_behavior: best.ego_behavior,
        profile,
        expected_cost: best.expected_cost,
        indicator,
        lateral,
        planned_at: scene.time,
        behavior_costs: evaluations.iter().map(|e| (e.ego_behavior, e.expected_cost)).collect(),
        samples,
    }
}
