//! Human-injected predictions: creation, override and expiry.
//!
//! An injected prediction replaces the vehicle's predicted distribution with a
//! certain lane change for every ego behavior. Nothing else in the stack sees
//! the intervention, so the planner's own safety terms stay in force.

use serde::{Deserialize, Serialize};

use crate::error::InterventionError;
use crate::prediction::{BehaviorDistribution, BehaviorLabel, ConditionalPrediction};
use crate::world::{SceneState, Side, VehicleId};

/// A lane change counts as finished once the vehicle is this close to the
/// target lane center.
pub const LANE_CHANGE_DONE_OFFSET: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterventionRecord {
    pub vehicle_id: VehicleId,
    pub direction: Side,
    pub created_time: f64,
    pub source_lane: usize,
}

impl InterventionRecord {
    pub fn target_lane(&self) -> i64 {
        self.direction.target_lane(self.source_lane)
    }
}

pub fn inject(scene: &SceneState, vehicle_id: &VehicleId, direction: Side) -> Result<InterventionRecord, InterventionError> {
    let vehicle = scene
        .vehicle(vehicle_id)
        .filter(|v| scene.is_relevant(v))
        .ok_or_else(|| InterventionError::VehicleNotRelevant(vehicle_id.clone()))?;
    if !scene.road.has_lane(direction.target_lane(vehicle.lane_index)) {
        return Err(InterventionError::InvalidDirection {
            vehicle: vehicle_id.clone(),
            side: direction,
        });
    }
    Ok(InterventionRecord {
        vehicle_id: vehicle_id.clone(),
        direction,
        created_time: scene.time,
        source_lane: vehicle.lane_index,
    })
}

/// Insert `record`, replacing any record for the same vehicle.
pub fn upsert(records: &mut Vec<InterventionRecord>, record: InterventionRecord) {
    records.retain(|r| r.vehicle_id != record.vehicle_id);
    records.push(record);
}

pub fn apply_overrides(predictions: &[ConditionalPrediction], records: &[InterventionRecord]) -> Vec<ConditionalPrediction> {
    predictions
        .iter()
        .map(|p| match records.iter().find(|r| r.vehicle_id == p.vehicle_id) {
            Some(r) => ConditionalPrediction {
                vehicle_id: p.vehicle_id.clone(),
                by_ego: [BehaviorDistribution::point_mass(BehaviorLabel::change(r.direction)); 3],
            },
            None => p.clone(),
        })
        .collect()
}

/// Whether the record no longer applies: the vehicle left the relevance
/// window or completed the injected lane change.
pub fn is_expired(scene: &SceneState, record: &InterventionRecord) -> bool {
    let Some(vehicle) = scene.vehicle(&record.vehicle_id) else {
        return true;
    };
    if !scene.is_relevant(vehicle) {
        return true;
    }
    vehicle.lane_index as i64 == record.target_lane() && vehicle.lateral_offset.abs() < LANE_CHANGE_DONE_OFFSET
}

pub fn expire(scene: &SceneState, records: &[InterventionRecord]) -> Vec<InterventionRecord> {
    records.iter().filter(|r| !is_expired(scene, r)).cloned().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::test_support::scene_with;
    use crate::world::{VehicleKind, VehicleState};

    fn scene() -> SceneState {
        scene_with(vec![
            VehicleState::new("a", VehicleKind::Car, 0, 40.0, 25.0),
            VehicleState::new("b", VehicleKind::Car, 2, 60.0, 25.0),
            VehicleState::new("far", VehicleKind::Car, 0, 200.0, 25.0),
        ])
    }

    #[test]
    fn inject_checks_relevance_and_lane() {
        let s = scene();
        assert_eq!(
            inject(&s, &"far".into(), Side::Left),
            Err(InterventionError::VehicleNotRelevant("far".into()))
        );
        assert!(matches!(
            inject(&s, &"a".into(), Side::Right),
            Err(InterventionError::InvalidDirection { .. })
        ));
        let r = inject(&s, &"a".into(), Side::Left).unwrap();
        assert_eq!((r.source_lane, r.created_time), (0, 0.0));
    }

    #[test]
    fn reinjection_replaces() {
        let mut s = scene();
        s.traffic.push(VehicleState::new("c", VehicleKind::Car, 1, 80.0, 25.0));
        let mut records = Vec::new();
        upsert(&mut records, inject(&s, &"a".into(), Side::Left).unwrap());
        upsert(&mut records, inject(&s, &"c".into(), Side::Left).unwrap());
        upsert(&mut records, inject(&s, &"c".into(), Side::Right).unwrap());
        assert_eq!(records.len(), 2);
        let c: Vec<_> = records.iter().filter(|r| r.vehicle_id.as_str() == "c").collect();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].direction, Side::Right);
    }

    #[test]
    fn overrides_are_local_point_masses() {
        let preds = vec![
            ConditionalPrediction {
                vehicle_id: "a".into(),
                by_ego: [BehaviorDistribution::change(Side::Left, 0.1); 3],
            },
            ConditionalPrediction {
                vehicle_id: "b".into(),
                by_ego: [BehaviorDistribution::KEEP; 3],
            },
        ];
        assert_eq!(apply_overrides(&preds, &[]), preds);
        let r = inject(&scene(), &"a".into(), Side::Left).unwrap();
        let out = apply_overrides(&preds, &[r]);
        for d in out[0].by_ego {
            assert_eq!(d, BehaviorDistribution::point_mass(BehaviorLabel::ChangeLeft));
        }
        assert_eq!(out[1], preds[1]);
    }

    #[test]
    fn expiry_conditions() {
        let mut s = scene();
        let r = inject(&s, &"a".into(), Side::Left).unwrap();
        let records = vec![r];

        // Mid lane change: crossed into lane 1 but 1.5 m from its center.
        s.traffic[0].lane_index = 1;
        s.traffic[0].lateral_offset = -1.5;
        assert_eq!(expire(&s, &records), records);

        s.traffic[0].lateral_offset = -0.1;
        assert!(expire(&s, &records).is_empty());

        // Overtaken: more than 30 m behind the ego.
        let mut s = scene();
        s.ego.s = 70.5;
        assert!(expire(&s, &records).is_empty());
        assert_eq!(expire(&s, &expire(&s, &records)), expire(&s, &records));
    }
}
