mod oracles;

use foresight_core::world::{step_world, AmbientDriver, EgoControls, IdmParams, LaneChangeTrigger, Side, VehicleState};
use oracles::random_gaze_scene;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn driven_scene(seed: u64) -> foresight_core::world::SceneState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scene = random_gaze_scene(&mut rng, 8);
    let road = scene.road.clone();
    let (lo, hi) = road.lateral_bounds();
    for v in scene.traffic.iter_mut().chain(std::iter::once(&mut scene.ego)) {
        let y = v.y(&road).clamp(lo, hi);
        v.set_lateral(&road, y);
    }
    for v in &scene.traffic.clone() {
        let side = if rng.random_bool(0.5) { Side::Left } else { Side::Right };
        scene.drivers.insert(
            v.id.clone(),
            AmbientDriver {
                idm: IdmParams::default(),
                v_des: rng.random_range(15.0..35.0),
                triggers: vec![LaneChangeTrigger {
                    side,
                    at_time: rng.random_range(0.0..5.0),
                    fired: false,
                }],
                maneuver: None,
            },
        );
    }
    scene
}

fn lateral_ok(v: &VehicleState, scene: &foresight_core::world::SceneState) -> bool {
    let (lo, hi) = scene.road.lateral_bounds();
    let y = v.y(&scene.road);
    v.lane_index < scene.road.lane_count && y >= lo - 1e-9 && y <= hi + 1e-9
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn speeds_stay_non_negative_and_lateral_on_road(seed in any::<u64>(), accel in -8.0..3.0f64, rate in -3.0..3.0f64) {
        let mut scene = driven_scene(seed);
        for _ in 0..200 {
            scene = step_world(&scene, EgoControls { accel, lateral_rate: rate });
            for v in scene.bodies() {
                prop_assert!(v.v >= 0.0, "{} has speed {}", v.id, v.v);
                prop_assert!(lateral_ok(v, &scene), "{} off road", v.id);
            }
        }
    }

    #[test]
    fn stepping_is_deterministic(seed in any::<u64>()) {
        let (mut a, mut b) = (driven_scene(seed), driven_scene(seed));
        for _ in 0..100 {
            a = step_world(&a, EgoControls::IDLE);
            b = step_world(&b, EgoControls::IDLE);
        }
        prop_assert_eq!(a, b);
    }
}
