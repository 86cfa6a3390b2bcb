mod oracles;

use std::f64::consts::FRAC_PI_2;

use foresight_core::gaze::{bearing_error_to_point, screen_to_ray, select_vehicle, CameraModel, GazeRay};
use nalgebra::Vector3;
use oracles::{angle_between, gaze_oracle, random_gaze_scene, random_unit};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn vec3() -> impl Strategy<Value = Vector3<f64>> {
    (-200.0..200.0f64, -200.0..200.0f64, -20.0..20.0f64).prop_map(|(x, y, z)| Vector3::new(x, y, z))
}

#[test]
fn inverse_projection_matches_pinhole_math() {
    let cam = CameraModel::default();
    let (u, v) = (0.75, 0.4);
    // Camera basis written out for a pitch of 8 degrees about the lateral axis.
    let pitch = 8f64.to_radians();
    let forward = Vector3::new(pitch.cos(), 0.0, -pitch.sin());
    let up = Vector3::new(pitch.sin(), 0.0, pitch.cos());
    let right = Vector3::new(0.0, -1.0, 0.0);
    let half_w = (30f64).to_radians().tan();
    let half_h = half_w * 9.0 / 16.0;
    let expected = (forward + right * ((2.0 * u - 1.0) * half_w) + up * ((1.0 - 2.0 * v) * half_h)).normalize();
    let ray = screen_to_ray(&cam, u, v).unwrap();
    assert!((ray.direction - expected).norm() < 1e-12, "{:?} vs {expected:?}", ray.direction);
}

#[test]
fn far_target_error_matches_cross_product() {
    let ray = GazeRay::new(Vector3::zeros(), Vector3::x());
    let w = Vector3::new(200.0, 5.0, 0.0);
    let e = bearing_error_to_point(&ray, &w).unwrap().e;
    assert!((e - 5.0 / (200f64 * 200.0 + 25.0).sqrt()).abs() < 1e-12);
    assert!((e - 0.024992).abs() < 1e-6);
}

#[test]
fn selection_matches_brute_force_on_random_scenes() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..300 {
        let scene = random_gaze_scene(&mut rng, 10);
        let origin = scene.ego.reference_point(&scene.road) + Vector3::new(-12.0, 0.0, 3.25);
        let direction = random_unit(&mut rng) + Vector3::new(rng.random_range(0.0..2.0), 0.0, 0.0);
        let got = select_vehicle(&GazeRay::new(origin, direction), &scene).ok();
        assert_eq!(got, gaze_oracle(&origin, &direction, &scene), "case {case}");
    }
}

proptest! {
    #[test]
    fn error_is_sine_of_angle(origin in vec3(), target in vec3(), dir in vec3()) {
        prop_assume!((target - origin).norm() >= 0.1 && dir.norm() > 1e-6);
        let err = bearing_error_to_point(&GazeRay::new(origin, dir), &target).unwrap();
        let alpha = angle_between(&dir, &(target - origin));
        prop_assert!((err.e - alpha.sin()).abs() <= 1e-9);
        prop_assert!((err.alpha - alpha).abs() <= 1e-9);
    }

    #[test]
    fn error_ignores_direction_scale(origin in vec3(), target in vec3(), dir in vec3(), log_scale in -4.0..4.0f64) {
        prop_assume!((target - origin).norm() >= 0.1 && dir.norm() > 1e-6);
        let a = bearing_error_to_point(&GazeRay::new(origin, dir), &target).unwrap();
        let b = bearing_error_to_point(&GazeRay::new(origin, dir * 10f64.powf(log_scale)), &target).unwrap();
        prop_assert!((a.e - b.e).abs() <= 1e-9);
    }

    #[test]
    fn nothing_behind_the_ray_is_selected(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scene = random_gaze_scene(&mut rng, 10);
        let origin = scene.ego.reference_point(&scene.road);
        let direction = random_unit(&mut rng);
        let ray = GazeRay::new(origin, direction);
        if let Ok(id) = select_vehicle(&ray, &scene) {
            let v = scene.vehicle(&id).unwrap();
            prop_assert!(angle_between(&direction, &(v.reference_point(&scene.road) - origin)) <= FRAC_PI_2);
            prop_assert!(scene.is_relevant(v));
        }
    }

    #[test]
    fn projection_inverts_screen_ray(u in 0.0..=1.0f64, v in 0.0..=1.0f64, depth in 1.0..300.0f64) {
        let cam = CameraModel::default();
        let ray = screen_to_ray(&cam, u, v).unwrap();
        let (pu, pv) = cam.project(&(ray.origin + ray.direction * depth)).unwrap();
        prop_assert!((pu - u).abs() < 1e-9 && (pv - v).abs() < 1e-9);
    }
}
