use super::idm::{IdmParams, Leader};
use super::scene::{AmbientDriver, LaneChange, SceneState};
use super::vehicle::{Side, VehicleState};

/// Duration of every ambient lane change, s.
pub const LANE_CHANGE_DURATION: f64 = 3.0;
/// Merge-lane occupants start looking for a gap this many seconds before the
/// end of the lane...
pub const MERGE_LOOKAHEAD_TIME: f64 = 3.0;
/// ...or at this distance, whichever is larger.
pub const MERGE_MIN_DISTANCE: f64 = 15.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EgoControls {
    /// Longitudinal acceleration, m/s².
    pub accel: f64,
    /// Lateral velocity, m/s, positive toward the left.
    pub lateral_rate: f64,
}

impl EgoControls {
    pub const IDLE: EgoControls = EgoControls {
        accel: 0.0,
        lateral_rate: 0.0,
    };
}

/// Nearest vehicle ahead of `vehicle` in any of `lanes`, as seen from the
/// snapshot. Lane membership is by current `lane_index`.
pub(crate) fn leader_in_lanes(scene: &SceneState, vehicle: &VehicleState, lanes: &[usize]) -> Option<(Leader, usize)> {
    let mut best: Option<(Leader, usize)> = None;
    for (idx, other) in scene.bodies().enumerate() {
        if other.id == vehicle.id || !lanes.contains(&other.lane_index) || other.s < vehicle.s {
            continue;
        }
        if other.s == vehicle.s && other.id < vehicle.id {
            continue;
        }
        let gap = other.s - vehicle.s - 0.5 * (other.length + vehicle.length);
        if best.is_none_or(|(l, _)| gap < l.gap) {
            best = Some((Leader { gap, v: other.v }, idx));
        }
    }
    best
}

/// Gap acceptance for a lane change into `target_lane`: the vehicle keeps its
/// own IDM spacing to the new leader and the new follower keeps the same
/// headway to the vehicle.
pub(crate) fn target_gap_fits(scene: &SceneState, vehicle: &VehicleState, target_lane: usize, idm: &IdmParams) -> bool {
    scene
        .bodies()
        .filter(|o| o.id != vehicle.id && o.lane_index == target_lane)
        .all(|o| {
            let half = 0.5 * (o.length + vehicle.length);
            if o.s >= vehicle.s {
                o.s - vehicle.s - half >= idm.spacing(vehicle.v)
            } else {
                vehicle.s - o.s - half >= idm.spacing(o.v)
            }
        })
}

/// Scripted lane changes only wait until no body occupies the target slot.
fn target_slot_clear(scene: &SceneState, vehicle: &VehicleState, target_lane: usize, s0: f64) -> bool {
    scene
        .bodies()
        .filter(|o| o.id != vehicle.id && o.lane_index == target_lane)
        .all(|o| (o.s - vehicle.s).abs() >= 0.5 * (o.length + vehicle.length) + s0)
}

fn start_lane_change(scene: &SceneState, vehicle: &VehicleState, side: Side, target_lane: usize) -> LaneChange {
    LaneChange {
        side,
        from_y: vehicle.y(&scene.road),
        to_y: scene.road.lane_center(target_lane),
        start_time: scene.time,
        duration: LANE_CHANGE_DURATION,
    }
}

/// Decide this tick's lane-change start (if any) and longitudinal acceleration.
fn ambient_decision(scene: &SceneState, vehicle: &VehicleState, driver: &AmbientDriver) -> (Option<LaneChange>, Vec<bool>, f64) {
    let road = &scene.road;
    let mut maneuver = driver.maneuver.clone();
    let mut fired: Vec<bool> = driver.triggers.iter().map(|t| t.fired).collect();
    let mut merge_blocked = false;

    if maneuver.is_none() {
        for (i, trigger) in driver.triggers.iter().enumerate() {
            if trigger.fired || scene.time < trigger.at_time {
                continue;
            }
            let target = trigger.side.target_lane(vehicle.lane_index);
            if !road.has_lane(target) {
                fired[i] = true;
                continue;
            }
            if target_slot_clear(scene, vehicle, target as usize, driver.idm.s0) {
                maneuver = Some(start_lane_change(scene, vehicle, trigger.side, target as usize));
                fired[i] = true;
                break;
            }
        }
    }

    let merge = road.merge_section_at(vehicle.lane_index, vehicle.s).copied();
    if let (None, Some(section)) = (&maneuver, merge) {
        let remaining = section.s_end - vehicle.s;
        if remaining < (vehicle.v * MERGE_LOOKAHEAD_TIME).max(MERGE_MIN_DISTANCE) {
            match road.merge_exit_lane(vehicle.lane_index) {
                Some(exit) if target_gap_fits(scene, vehicle, exit, &driver.idm) => {
                    let side = if exit > vehicle.lane_index { Side::Left } else { Side::Right };
                    maneuver = Some(start_lane_change(scene, vehicle, side, exit));
                }
                _ => merge_blocked = true,
            }
        }
    }

    let mut lanes = vec![vehicle.lane_index];
    if let Some(m) = &maneuver {
        let target = road.nearest_lane(m.to_y);
        if road.has_lane(target) && target as usize != vehicle.lane_index {
            lanes.push(target as usize);
        }
    }
    let leader = leader_in_lanes(scene, vehicle, &lanes).map(|(l, _)| l);
    let mut accel = driver.idm.acceleration(vehicle.v, driver.v_des, leader);
    if merge_blocked {
        // The end of the merge lane acts as a standing obstacle.
        let section = merge.expect("blocked implies merge section");
        let gap = section.s_end - vehicle.s - 0.5 * vehicle.length;
        let stop = driver.idm.acceleration(vehicle.v, driver.v_des, Some(Leader { gap, v: 0.0 }));
        accel = accel.min(stop);
    }
    (maneuver, fired, accel)
}

/// Advance the world by one tick of `scene.dt`.
///
/// Ambient decisions are all taken on the incoming snapshot, so the update is
/// independent of vehicle order. Integration is semi-implicit Euler.
pub fn step_world(scene: &SceneState, controls: EgoControls) -> SceneState {
    let dt = scene.dt;
    let road = &scene.road;
    let mut next = scene.clone();
    next.tick = scene.tick + 1;
    next.time = next.tick as f64 * dt;

    // Ego.
    let ego = &mut next.ego;
    ego.a = controls.accel;
    ego.v = (ego.v + controls.accel * dt).max(0.0);
    ego.s += ego.v * dt;
    let (y_min, y_max) = road.lateral_bounds();
    let y = (scene.ego.y(road) + controls.lateral_rate * dt).clamp(y_min, y_max);
    ego.set_lateral(road, y);

    // Ambient traffic.
    for (i, vehicle) in scene.traffic.iter().enumerate() {
        let Some(driver) = scene.drivers.get(&vehicle.id) else {
            // Driverless entries just coast.
            let out = &mut next.traffic[i];
            out.s += out.v * dt;
            continue;
        };
        let (maneuver, fired, accel) = ambient_decision(scene, vehicle, driver);

        let out = &mut next.traffic[i];
        out.a = accel;
        out.v = (vehicle.v + accel * dt).max(0.0);
        out.s = vehicle.s + out.v * dt;

        let mut maneuver = maneuver;
        if let Some(m) = &maneuver {
            out.set_lateral(road, m.y_at(next.time));
            if m.finished_at(next.time) {
                out.set_lateral(road, m.to_y);
                maneuver = None;
            }
        }

        // Never run past the end of a merge lane.
        if let Some(section) = road.merge_sections.iter().find(|m| m.lane_index == out.lane_index) {
            if vehicle.s <= section.s_end && out.s > section.s_end {
                out.s = section.s_end;
                out.v = 0.0;
            }
        }

        let d = next.drivers.get_mut(&vehicle.id).expect("driver present");
        d.maneuver = maneuver;
        for (t, f) in d.triggers.iter_mut().zip(fired) {
            t.fired = f;
        }
    }
    next
}
