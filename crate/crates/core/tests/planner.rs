mod oracles;

use foresight_core::planner::{
    optimize_trajectory, rollout, rollout_cost, select_behavior, AccelProfile, CandidateTrajectory, PlannerParams,
};
use foresight_core::prediction::{predict_scene, EgoBehavior, PredictionParams, SceneComposition};
use foresight_core::world::{VehicleKind, VehicleState, EGO_ID};
use oracles::{bare_scene, random_planner_case, PlannerOracle};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

#[test]
fn slow_leader_matches_oracle() {
    let params = PlannerParams::default();
    let ego = VehicleState::new(EGO_ID, VehicleKind::Car, 1, 0.0, 30.0);
    let leader = VehicleState::new("lead", VehicleKind::Car, 1, 25.0 + 4.5, 25.0);
    let scene = bare_scene(3, ego, 30.0, vec![leader]);
    let comp = SceneComposition {
        ego_behavior: EgoBehavior::Straight,
        assignment: [("lead".into(), foresight_core::prediction::BehaviorLabel::Keep)].into(),
        probability: 1.0,
    };
    let (profile, cost) = optimize_trajectory(&scene, &comp, EgoBehavior::Straight, &params);
    let best = PlannerOracle::new(&scene, &comp, EgoBehavior::Straight, &params).best();
    assert_eq!(profile.0, best.profile);
    assert!(close(cost.total, best.total), "{} vs {}", cost.total, best.total);
    assert!(profile.0[0] < 0.0, "closing on a slow leader needs braking: {:?}", profile.0);
}

#[test]
fn optimizer_matches_oracle_on_random_cases() {
    let params = PlannerParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for case in 0..100 {
        let (scene, comp, b) = random_planner_case(&mut rng);
        let (profile, cost) = optimize_trajectory(&scene, &comp, b, &params);
        let oracle = PlannerOracle::new(&scene, &comp, b, &params);
        let best = oracle.best();
        assert!(close(cost.total, best.total), "case {case}: {} vs {}", cost.total, best.total);
        assert!(close(oracle.evaluate(profile.0).0, cost.total), "case {case}");
        // Never worse than holding the current acceleration at zero.
        let zero = CandidateTrajectory {
            ego_behavior: b,
            profile: AccelProfile::ZERO,
            lateral: foresight_core::planner::lateral_plan_for(&scene, b, &params),
        };
        let zero_cost = rollout_cost(&rollout(&scene, &comp, &zero, &params), &zero, scene.ego.a, scene.ego_v_des, &params);
        assert!(cost.total <= zero_cost.total, "case {case}");
    }
}

#[test]
fn selected_behavior_dominates_straight_zero_profile() {
    let params = PlannerParams::default();
    let pred_params = PredictionParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for case in 0..30 {
        let (scene, _, _) = random_planner_case(&mut rng);
        let preds = predict_scene(&scene, &pred_params);
        let plan = select_behavior(&scene, &preds, &pred_params, &params);
        let comps = foresight_core::prediction::enumerate_compositions(&preds, EgoBehavior::Straight, pred_params.k);
        let zero = CandidateTrajectory {
            ego_behavior: EgoBehavior::Straight,
            profile: AccelProfile::ZERO,
            lateral: None,
        };
        let straight_zero: f64 = comps
            .iter()
            .map(|c| c.probability * rollout_cost(&rollout(&scene, c, &zero, &params), &zero, scene.ego.a, scene.ego_v_des, &params).total)
            .sum();
        assert!(plan.expected_cost <= straight_zero + 1e-9 * (1.0 + straight_zero), "case {case}");
        let chosen = plan.behavior_costs.iter().find(|(b, _)| *b == plan.ego_behavior).unwrap().1;
        assert!(plan.behavior_costs.iter().all(|(_, c)| chosen <= *c), "case {case}");
        if let Some(l) = plan.lateral {
            assert_eq!(plan.indicator.activation_time.map(|t| t + params.indicator_lead), Some(l.start_time), "case {case}");
        }
    }
}
