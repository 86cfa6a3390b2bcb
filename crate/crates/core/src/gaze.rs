//! Gaze-based vehicle referencing.
//!
//! A screen point is turned into a world-space ray through the chase camera,
//! and the referenced vehicle is the one with the smallest angular error
//! `e = |gaze × w| / |w| = sin(alpha)`, where `w` points from the ray origin to
//! the vehicle. Dividing by `|w|` removes the bias toward nearby vehicles that
//! a plain perpendicular-distance test would have.

use std::cmp::Ordering;
use std::f64::consts::FRAC_PI_2;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::GazeError;
use crate::world::{relevant_vehicles, RoadModel, SceneState, Side, VehicleId, VehicleState};

/// Targets closer than this to the ray origin have no meaningful bearing.
pub const MIN_TARGET_DISTANCE: f64 = 0.1;

/// Pinhole chase camera following the ego vehicle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraModel {
    /// Eye position relative to the ego ground point (s, y, 0).
    pub eye_offset: Vector3<f64>,
    /// Current eye position in world coordinates.
    pub eye: Vector3<f64>,
    pub forward: Vector3<f64>,
    pub up: Vector3<f64>,
    pub horizontal_fov_deg: f64,
    /// Width over height of the viewport.
    pub aspect: f64,
}

impl Default for CameraModel {
    fn default() -> Self {
        Self::chase(8.0, 60.0, 16.0 / 9.0)
    }
}

impl CameraModel {
    /// Camera 12 m behind and 4 m above the ego, looking along the road and
    /// pitched down by `pitch_deg`.
    pub fn chase(pitch_deg: f64, horizontal_fov_deg: f64, aspect: f64) -> Self {
        let pitch = pitch_deg.to_radians();
        let eye_offset = Vector3::new(-12.0, 0.0, 4.0);
        Self {
            eye_offset,
            eye: eye_offset,
            forward: Vector3::new(pitch.cos(), 0.0, -pitch.sin()),
            up: Vector3::new(pitch.sin(), 0.0, pitch.cos()),
            horizontal_fov_deg,
            aspect,
        }
    }

    pub fn right(&self) -> Vector3<f64> {
        self.forward.cross(&self.up)
    }

    pub fn is_valid(&self) -> bool {
        (self.forward.norm() - 1.0).abs() < 1e-9
            && (self.up.norm() - 1.0).abs() < 1e-9
            && self.forward.dot(&self.up).abs() < 1e-9
            && self.horizontal_fov_deg > 0.0
            && self.horizontal_fov_deg < 180.0
            && self.aspect > 0.0
    }

    /// Move the eye to follow the ego.
    pub fn follow(&mut self, ego: &VehicleState, road: &RoadModel) {
        self.eye = Vector3::new(ego.s, ego.y(road), 0.0) + self.eye_offset;
    }

    fn half_extents(&self) -> (f64, f64) {
        let h = (self.horizontal_fov_deg.to_radians() / 2.0).tan();
        (h, h / self.aspect)
    }

    /// Screen position of a world point, origin top-left. `None` when the point
    /// is not in front of the camera.
    pub fn project(&self, point: &Vector3<f64>) -> Option<(f64, f64)> {
        let rel = point - self.eye;
        let depth = rel.dot(&self.forward);
        if depth <= 0.0 {
            return None;
        }
        let (hx, hy) = self.half_extents();
        let x = rel.dot(&self.right()) / depth / hx;
        let y = rel.dot(&self.up) / depth / hy;
        Some(((x + 1.0) / 2.0, (1.0 - y) / 2.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GazeRay {
    pub origin: Vector3<f64>,
    pub direction: Vector3<f64>,
}

impl GazeRay {
    /// Ray with a normalized copy of `direction`.
    pub fn new(origin: Vector3<f64>, direction: Vector3<f64>) -> Self {
        Self {
            origin,
            direction: direction.normalize(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BearingError {
    pub vehicle: Option<VehicleId>,
    /// Angle between the gaze direction and the direction to the target, rad.
    pub alpha: f64,
    /// Distance-normalized perpendicular error, equal to `sin(alpha)`.
    pub e: f64,
    /// Distance from the ray origin to the target.
    pub distance: f64,
}

/// Inverse pinhole projection of a normalized screen point (origin top-left).
pub fn screen_to_ray(camera: &CameraModel, u: f64, v: f64) -> Result<GazeRay, GazeError> {
    if !(0.0..=1.0).contains(&u) || !(0.0..=1.0).contains(&v) {
        return Err(GazeError::OutOfScreen { u, v });
    }
    let (hx, hy) = camera.half_extents();
    let x = 2.0 * u - 1.0;
    let y = 1.0 - 2.0 * v;
    let direction = camera.forward + camera.right() * (x * hx) + camera.up * (y * hy);
    Ok(GazeRay::new(camera.eye, direction))
}

pub fn bearing_error_to_point(ray: &GazeRay, target: &Vector3<f64>) -> Result<BearingError, GazeError> {
    let w = target - ray.origin;
    let distance = w.norm();
    if distance < MIN_TARGET_DISTANCE {
        return Err(GazeError::DegenerateTarget { distance });
    }
    let cross = ray.direction.cross(&w).norm();
    let alpha = cross.atan2(ray.direction.dot(&w));
    Ok(BearingError {
        vehicle: None,
        alpha,
        e: (cross / distance).min(1.0),
        distance,
    })
}

pub fn bearing_error(ray: &GazeRay, vehicle: &VehicleState, road: &RoadModel) -> Result<BearingError, GazeError> {
    let mut err = bearing_error_to_point(ray, &vehicle.reference_point(road))?;
    err.vehicle = Some(vehicle.id.clone());
    Ok(err)
}

/// A selectable target: a world point plus its distance to the ego, which
/// breaks exact ties.
#[derive(Debug, Clone, PartialEq)]
pub struct GazeTarget<'a> {
    pub id: &'a VehicleId,
    pub point: Vector3<f64>,
    pub ego_distance: f64,
}

/// Among targets in front of the ray (alpha ≤ π/2), the one with the smallest
/// error. Exact ties go to the target nearer the ego, then the lower id.
/// Targets too close to the ray origin are skipped.
pub fn select_target<'a>(ray: &GazeRay, targets: impl IntoIterator<Item = GazeTarget<'a>>) -> Result<VehicleId, GazeError> {
    let mut best: Option<(f64, f64, &VehicleId)> = None;
    for target in targets {
        let Ok(err) = bearing_error_to_point(ray, &target.point) else {
            continue;
        };
        if err.alpha > FRAC_PI_2 {
            continue;
        }
        let candidate = (err.e, target.ego_distance, target.id);
        let better = match &best {
            None => true,
            Some(b) => {
                let ord = candidate
                    .0
                    .total_cmp(&b.0)
                    .then(candidate.1.total_cmp(&b.1))
                    .then_with(|| candidate.2.cmp(b.2));
                ord == Ordering::Less
            }
        };
        if better {
            best = Some(candidate);
        }
    }
    best.map(|(_, _, id)| id.clone()).ok_or(GazeError::NoSelectableVehicle)
}

/// Vehicle referenced by the ray among the relevant vehicles of the scene.
pub fn select_vehicle(ray: &GazeRay, scene: &SceneState) -> Result<VehicleId, GazeError> {
    let ego_ref = scene.ego.reference_point(&scene.road);
    let targets = relevant_vehicles(scene).into_iter().map(|v| {
        let point = v.reference_point(&scene.road);
        GazeTarget {
            id: &v.id,
            point,
            ego_distance: (point - ego_ref).norm(),
        }
    });
    select_target(ray, targets)
}

/// A vehicle to the right of the ego is expected to move left into the ego
/// path, and vice versa.
pub fn infer_direction(selected: &VehicleState, ego: &VehicleState) -> Result<Side, GazeError> {
    match selected.lane_index.cmp(&ego.lane_index) {
        Ordering::Less => Ok(Side::Left),
        Ordering::Greater => Ok(Side::Right),
        Ordering::Equal => Err(GazeError::AmbiguousDirection),
    }
}
