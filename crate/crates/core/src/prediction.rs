//! Motif-based cut-in prediction conditioned on the ego behavior, and the
//! enumeration of joint scene compositions.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::world::{leader_in_lanes, relevant_vehicles, IdmParams, SceneState, Side, VehicleId, VehicleState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BehaviorLabel {
    Keep,
    ChangeLeft,
    ChangeRight,
}

impl BehaviorLabel {
    pub const ALL: [BehaviorLabel; 3] = [BehaviorLabel::Keep, BehaviorLabel::ChangeLeft, BehaviorLabel::ChangeRight];

    pub fn change(side: Side) -> Self {
        match side {
            Side::Left => BehaviorLabel::ChangeLeft,
            Side::Right => BehaviorLabel::ChangeRight,
        }
    }

    pub fn side(self) -> Option<Side> {
        match self {
            BehaviorLabel::Keep => None,
            BehaviorLabel::ChangeLeft => Some(Side::Left),
            BehaviorLabel::ChangeRight => Some(Side::Right),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EgoBehavior {
    Straight,
    LaneChangeLeft,
    LaneChangeRight,
}

impl EgoBehavior {
    pub const ALL: [EgoBehavior; 3] = [EgoBehavior::Straight, EgoBehavior::LaneChangeLeft, EgoBehavior::LaneChangeRight];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn side(self) -> Option<Side> {
        match self {
            EgoBehavior::Straight => None,
            EgoBehavior::LaneChangeLeft => Some(Side::Left),
            EgoBehavior::LaneChangeRight => Some(Side::Right),
        }
    }

    pub fn lane_offset(self) -> i64 {
        self.side().map_or(0, Side::lane_offset)
    }
}

/// Probability of each [`BehaviorLabel`] for one vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BehaviorDistribution {
    pub keep: f64,
    pub change_left: f64,
    pub change_right: f64,
}

impl BehaviorDistribution {
    pub const KEEP: BehaviorDistribution = BehaviorDistribution {
        keep: 1.0,
        change_left: 0.0,
        change_right: 0.0,
    };

    pub fn point_mass(label: BehaviorLabel) -> Self {
        let mut d = BehaviorDistribution {
            keep: 0.0,
            change_left: 0.0,
            change_right: 0.0,
        };
        *d.get_mut(label) = 1.0;
        d
    }

    /// Lane change toward `side` with probability `p`, otherwise keep.
    pub fn change(side: Side, p: f64) -> Self {
        let mut d = BehaviorDistribution {
            keep: 1.0 - p,
            change_left: 0.0,
            change_right: 0.0,
        };
        *d.get_mut(BehaviorLabel::change(side)) = p;
        d
    }

    pub fn get(&self, label: BehaviorLabel) -> f64 {
        match label {
            BehaviorLabel::Keep => self.keep,
            BehaviorLabel::ChangeLeft => self.change_left,
            BehaviorLabel::ChangeRight => self.change_right,
        }
    }

    fn get_mut(&mut self, label: BehaviorLabel) -> &mut f64 {
        match label {
            BehaviorLabel::Keep => &mut self.keep,
            BehaviorLabel::ChangeLeft => &mut self.change_left,
            BehaviorLabel::ChangeRight => &mut self.change_right,
        }
    }

    pub fn total(&self) -> f64 {
        self.keep + self.change_left + self.change_right
    }

    /// Labels with nonzero probability, in label order.
    pub fn support(&self) -> impl Iterator<Item = (BehaviorLabel, f64)> + '_ {
        BehaviorLabel::ALL
            .into_iter()
            .map(|l| (l, self.get(l)))
            .filter(|&(_, p)| p > 0.0)
    }

    /// Most likely lane change and its probability.
    pub fn strongest_change(&self) -> Option<(Side, f64)> {
        match (self.change_left, self.change_right) {
            (l, r) if l >= r && l > 0.0 => Some((Side::Left, l)),
            (_, r) if r > 0.0 => Some((Side::Right, r)),
            _ => None,
        }
    }
}

/// Per-vehicle behavior distribution for each possible ego behavior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalPrediction {
    pub vehicle_id: VehicleId,
    pub by_ego: [BehaviorDistribution; 3],
}

impl ConditionalPrediction {
    pub fn given(&self, ego_behavior: EgoBehavior) -> &BehaviorDistribution {
        &self.by_ego[ego_behavior.index()]
    }
}

/// One joint assignment of behaviors to all relevant vehicles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneComposition {
    pub ego_behavior: EgoBehavior,
    pub assignment: BTreeMap<VehicleId, BehaviorLabel>,
    pub probability: f64,
}

impl SceneComposition {
    pub fn label(&self, id: &VehicleId) -> BehaviorLabel {
        self.assignment.get(id).copied().unwrap_or(BehaviorLabel::Keep)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionParams {
    /// Trigger time at which a motif reaches probability 0.5, s.
    pub t0: f64,
    /// Logistic slope, s.
    pub tau: f64,
    /// Probability from which a lane change is flagged in the GUI.
    pub threshold: f64,
    /// Number of compositions kept per ego behavior.
    pub k: usize,
    /// How far ahead positions are projected for the gap check, s.
    pub projection_time: f64,
}

impl Default for PredictionParams {
    fn default() -> Self {
        Self {
            t0: 6.0,
            tau: 1.5,
            threshold: 0.5,
            k: 8,
            projection_time: 3.0,
        }
    }
}

impl PredictionParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.tau > 0.0) {
            return Err("prediction tau must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err("prediction threshold must lie in [0, 1]".into());
        }
        if self.k == 0 {
            return Err("prediction k must be at least 1".into());
        }
        if !(self.projection_time >= 0.0) {
            return Err("prediction projection must be >= 0".into());
        }
        Ok(())
    }

    /// Motif probability for a given trigger time.
    pub fn motif_probability(&self, trigger_time: f64) -> f64 {
        1.0 / (1.0 + (-(self.t0 - trigger_time) / self.tau).exp())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Motif {
    /// Faster vehicle closing in on a slower leader in its lane.
    Overtake,
    /// Vehicle running out of merge lane.
    Merge,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotifHit {
    pub motif: Motif,
    pub side: Side,
    pub trigger_time: f64,
    pub p_raw: f64,
}

/// Strongest cut-in motif for `vehicle`, ignoring gap availability.
pub fn motif(scene: &SceneState, vehicle: &VehicleState, params: &PredictionParams) -> Option<MotifHit> {
    let road = &scene.road;
    let mut best: Option<MotifHit> = None;
    let mut offer = |hit: MotifHit| {
        if best.is_none_or(|b| hit.p_raw > b.p_raw) {
            best = Some(hit);
        }
    };

    let passing = vehicle.lane_index + 1;
    if passing < road.lane_count && !road.is_merge_lane(passing) {
        if let Some((leader, _)) = leader_in_lanes(scene, vehicle, &[vehicle.lane_index]) {
            if vehicle.v > leader.v {
                let trigger_time = leader.gap.max(0.0) / (vehicle.v - leader.v);
                offer(MotifHit {
                    motif: Motif::Overtake,
                    side: Side::Left,
                    trigger_time,
                    p_raw: params.motif_probability(trigger_time),
                });
            }
        }
    }

    if let Some(section) = road.merge_section_at(vehicle.lane_index, vehicle.s) {
        if let Some(exit) = road.merge_exit_lane(vehicle.lane_index) {
            let trigger_time = (section.s_end - vehicle.s) / vehicle.v.max(1.0);
            offer(MotifHit {
                motif: Motif::Merge,
                side: if exit > vehicle.lane_index { Side::Left } else { Side::Right },
                trigger_time,
                p_raw: params.motif_probability(trigger_time),
            });
        }
    }
    best
}

/// Whether the slot the vehicle would take on `target_lane` after the
/// projection time is free, keeping IDM spacing to every projected occupant.
/// The ego counts as an occupant only if its behavior puts it on that lane.
pub fn target_gap_free(
    scene: &SceneState,
    vehicle: &VehicleState,
    target_lane: usize,
    ego_behavior: EgoBehavior,
    params: &PredictionParams,
) -> bool {
    let idm = IdmParams::default();
    let horizon = params.projection_time;
    let own = vehicle.s + vehicle.v * horizon;
    let ego_lane = scene.ego.lane_index as i64 + ego_behavior.lane_offset();
    let ego = (ego_lane == target_lane as i64).then_some(&scene.ego);
    scene
        .traffic
        .iter()
        .filter(|o| o.id != vehicle.id && o.lane_index == target_lane)
        .chain(ego)
        .all(|o| {
            let other = o.s + o.v * horizon;
            let half = 0.5 * (o.length + vehicle.length);
            if other >= own {
                other - own - half >= idm.spacing(vehicle.v)
            } else {
                own - other - half >= idm.spacing(o.v)
            }
        })
}

/// Behavior distribution of `vehicle` given the ego behavior.
pub fn predict_vehicle(
    scene: &SceneState,
    vehicle: &VehicleState,
    ego_behavior: EgoBehavior,
    params: &PredictionParams,
) -> BehaviorDistribution {
    let Some(hit) = motif(scene, vehicle, params) else {
        return BehaviorDistribution::KEEP;
    };
    let target = hit.side.target_lane(vehicle.lane_index);
    if !scene.road.has_lane(target) || !target_gap_free(scene, vehicle, target as usize, ego_behavior, params) {
        return BehaviorDistribution::KEEP;
    }
    BehaviorDistribution::change(hit.side, hit.p_raw)
}

pub fn predict_conditional(scene: &SceneState, vehicle: &VehicleState, params: &PredictionParams) -> ConditionalPrediction {
    ConditionalPrediction {
        vehicle_id: vehicle.id.clone(),
        by_ego: EgoBehavior::ALL.map(|b| predict_vehicle(scene, vehicle, b, params)),
    }
}

/// Conditional predictions for every relevant vehicle, ordered by id.
pub fn predict_scene(scene: &SceneState, params: &PredictionParams) -> Vec<ConditionalPrediction> {
    relevant_vehicles(scene)
        .into_iter()
        .map(|v| predict_conditional(scene, v, params))
        .collect()
}

type Partial = (Vec<BehaviorLabel>, f64);

fn rank(a: &Partial, b: &Partial) -> Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0))
}

/// The `k` most probable joint assignments under `ego_behavior`, assuming the
/// vehicles behave independently. Probabilities are renormalized over the
/// kept set. Order: descending probability, then assignment in vehicle-id
/// order.
pub fn enumerate_compositions(
    predictions: &[ConditionalPrediction],
    ego_behavior: EgoBehavior,
    k: usize,
) -> Vec<SceneComposition> {
    let k = k.max(1);
    let mut sorted: Vec<&ConditionalPrediction> = predictions.iter().collect();
    sorted.sort_by(|a, b| a.vehicle_id.cmp(&b.vehicle_id));

    // Pruning to the top k after each vehicle is exact: a prefix outside the
    // top k is beaten by k prefixes that extend with the same suffix.
    let mut partials: Vec<Partial> = vec![(Vec::new(), 1.0)];
    for pred in &sorted {
        let dist = pred.given(ego_behavior);
        let mut next = Vec::with_capacity(partials.len() * 2);
        for (labels, p) in &partials {
            for (label, q) in dist.support() {
                let mut l = labels.clone();
                l.push(label);
                next.push((l, p * q));
            }
        }
        next.retain(|(_, p)| *p > 0.0);
        next.sort_by(rank);
        next.truncate(k);
        partials = next;
    }

    let total: f64 = partials.iter().map(|(_, p)| p).sum();
    partials
        .into_iter()
        .map(|(labels, p)| SceneComposition {
            ego_behavior,
            assignment: sorted.iter().map(|c| c.vehicle_id.clone()).zip(labels).collect(),
            probability: p / total,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaneChangeFlag {
    pub vehicle_id: VehicleId,
    pub side: Side,
    pub probability: f64,
}

/// Vehicles whose lane-change probability under `ego_behavior` reaches the
/// threshold.
pub fn high_probability_flags(
    predictions: &[ConditionalPrediction],
    ego_behavior: EgoBehavior,
    threshold: f64,
) -> Vec<LaneChangeFlag> {
    predictions
        .iter()
        .filter_map(|p| {
            let (side, probability) = p.given(ego_behavior).strongest_change()?;
            (probability >= threshold).then(|| LaneChangeFlag {
                vehicle_id: p.vehicle_id.clone(),
                side,
                probability,
            })
        })
        .collect()
}
