//! Line-oriented scenario files.
//!
//! ```text
//! # comment
//! [road]
//! lanes=3 lane_width=3.5
//! merge=0:300:500            # lane:s_start:s_end, repeatable
//!
//! [ego]
//! lane=1 s=0 v=30 v_des=30
//!
//! [vehicle]                  # one section per vehicle
//! id=truck1 kind=truck lane=0 s=120 v=17
//! v_des=17 change=left@9.0   # scripted lane change at t = 9 s
//!
//! [sim]
//! dt=0.05 duration=40 seed=1
//!
//! [prediction]               # optional
//! t0=6 tau=1.5 threshold=0.5 k=8
//!
//! [planner]                  # optional
//! w_safety=10 w_utility=0.1 w_comfort=1 horizon=8 grid=-3,-2,-1,0,1,2
//! lane_change_penalty=5 replan_period=10
//! ```
//!
//! Each non-header line holds whitespace-separated `key=value` pairs. Unknown
//! sections or keys are rejected.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::idm::IdmParams;
use super::road::{MergeSection, RoadModel, DEFAULT_LANE_WIDTH};
use super::scene::{AmbientDriver, LaneChangeTrigger, SceneState};
use super::vehicle::{Side, VehicleId, VehicleKind, VehicleState};
use crate::error::ScenarioError;
use crate::planner::PlannerParams;
use crate::prediction::PredictionParams;

pub const EGO_ID: &str = "ego";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EgoConfig {
    pub state: VehicleState,
    pub v_des: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficConfig {
    pub state: VehicleState,
    pub v_des: f64,
    pub idm: IdmParams,
    pub triggers: Vec<(Side, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub road: RoadModel,
    pub ego: EgoConfig,
    pub traffic: Vec<TrafficConfig>,
    pub duration: f64,
    pub dt: f64,
    pub seed: u64,
    pub prediction: PredictionParams,
    pub planner: PlannerParams,
}

impl ScenarioConfig {
    pub fn tick_count(&self) -> u64 {
        (self.duration / self.dt).round() as u64
    }

    pub fn vehicle(&self, id: &VehicleId) -> Option<&TrafficConfig> {
        self.traffic.iter().find(|t| &t.state.id == id)
    }

    /// Scene at t = 0.
    pub fn initial_scene(&self) -> SceneState {
        let drivers = self
            .traffic
            .iter()
            .map(|t| {
                let driver = AmbientDriver {
                    idm: t.idm,
                    v_des: t.v_des,
                    triggers: t
                        .triggers
                        .iter()
                        .map(|&(side, at_time)| LaneChangeTrigger {
                            side,
                            at_time,
                            fired: false,
                        })
                        .collect(),
                    maneuver: None,
                };
                (t.state.id.clone(), driver)
            })
            .collect::<BTreeMap<_, _>>();
        SceneState {
            time: 0.0,
            tick: 0,
            dt: self.dt,
            road: self.road.clone(),
            ego: self.ego.state.clone(),
            ego_v_des: self.ego.v_des,
            traffic: self.traffic.iter().map(|t| t.state.clone()).collect(),
            drivers,
            active_plan: None,
            interventions: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let invalid = |msg: String| Err(ScenarioError::Validation(msg));
        let road = &self.road;
        if road.lane_count < 2 {
            return invalid(format!("road needs at least 2 lanes, got {}", road.lane_count));
        }
        if !(road.lane_width > 0.0) {
            return invalid("lane_width must be positive".into());
        }
        for m in &road.merge_sections {
            if m.lane_index >= road.lane_count {
                return invalid(format!("merge section on lane {} outside the road", m.lane_index));
            }
            if !(m.s_start < m.s_end) {
                return invalid(format!("merge section {}:{}:{} has s_start >= s_end", m.lane_index, m.s_start, m.s_end));
            }
            if road.merge_exit_lane(m.lane_index).is_none() {
                return invalid(format!("merge lane {} has no through lane next to it", m.lane_index));
            }
        }
        if !(self.dt > 0.0) {
            return invalid(format!("dt must be > 0, got {}", self.dt));
        }
        if !(self.duration > 0.0) {
            return invalid(format!("duration must be > 0, got {}", self.duration));
        }
        if road.is_merge_lane(self.ego.state.lane_index) {
            return invalid("ego cannot start on a merge lane".into());
        }
        if !(self.ego.v_des > 0.0) {
            return invalid("ego v_des must be positive".into());
        }

        let mut ids = BTreeSet::new();
        ids.insert(EGO_ID.to_owned());
        let all: Vec<&VehicleState> = std::iter::once(&self.ego.state)
            .chain(self.traffic.iter().map(|t| &t.state))
            .collect();
        for t in &self.traffic {
            let st = &t.state;
            if !ids.insert(st.id.0.clone()) {
                return invalid(format!("duplicate vehicle id `{}`", st.id));
            }
            if !(t.v_des > 0.0) {
                return invalid(format!("vehicle `{}`: v_des must be positive", st.id));
            }
            if let Some(m) = road.merge_sections.iter().find(|m| m.lane_index == st.lane_index) {
                if st.s > m.s_end {
                    return invalid(format!("vehicle `{}` spawns past the end of merge lane {}", st.id, m.lane_index));
                }
            }
            for &(_, at) in &t.triggers {
                if !(at >= 0.0) {
                    return invalid(format!("vehicle `{}`: trigger time must be >= 0", st.id));
                }
            }
        }
        for st in &all {
            if st.lane_index >= road.lane_count {
                return invalid(format!("vehicle `{}` on lane {} but road has {} lanes", st.id, st.lane_index, road.lane_count));
            }
            if !(st.v >= 0.0) {
                return invalid(format!("vehicle `{}` has negative speed", st.id));
            }
            if st.lateral_offset.abs() > road.lane_width {
                return invalid(format!("vehicle `{}` lateral offset exceeds lane width", st.id));
            }
        }
        for (i, a) in all.iter().enumerate() {
            for b in &all[i + 1..] {
                if a.lane_index == b.lane_index && (a.s - b.s).abs() < 0.5 * (a.length + b.length) {
                    return invalid(format!("vehicles `{}` and `{}` spawn overlapping on lane {}", a.id, b.id, a.lane_index));
                }
            }
        }
        Ok(())
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Parse {
        line,
        message: message.into(),
    }
}

fn num<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T, ScenarioError> {
    value
        .parse()
        .map_err(|_| parse_err(line, format!("`{key}`: cannot parse `{value}`")))
}

#[derive(Default)]
struct VehicleDraft {
    line: usize,
    id: Option<String>,
    kind: Option<VehicleKind>,
    lane: Option<usize>,
    s: Option<f64>,
    v: Option<f64>,
    v_des: Option<f64>,
    lateral: f64,
    length: Option<f64>,
    width: Option<f64>,
    idm: IdmParams,
    triggers: Vec<(Side, f64)>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Road,
    Ego,
    Vehicle,
    Sim,
    Prediction,
    Planner,
}

/// Parse and validate a scenario file.
pub fn load_scenario(text: &str) -> Result<ScenarioConfig, ScenarioError> {
    let mut road = RoadModel {
        lane_count: 0,
        lane_width: DEFAULT_LANE_WIDTH,
        merge_sections: Vec::new(),
    };
    let mut saw_road = false;
    let mut ego: Option<VehicleDraft> = None;
    let mut vehicles: Vec<VehicleDraft> = Vec::new();
    let mut dt = 0.05;
    let mut duration: Option<f64> = None;
    let mut seed = 0u64;
    let mut prediction = PredictionParams::default();
    let mut planner = PlannerParams::default();
    let mut section: Option<Section> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| parse_err(line_no, "unterminated section header"))?;
            let s = match name.trim() {
                "road" => {
                    saw_road = true;
                    Section::Road
                }
                "ego" => {
                    if ego.is_some() {
                        return Err(parse_err(line_no, "duplicate [ego] section"));
                    }
                    ego = Some(VehicleDraft {
                        line: line_no,
                        ..Default::default()
                    });
                    Section::Ego
                }
                "vehicle" => {
                    vehicles.push(VehicleDraft {
                        line: line_no,
                        ..Default::default()
                    });
                    Section::Vehicle
                }
                "sim" => Section::Sim,
                "prediction" => Section::Prediction,
                "planner" => Section::Planner,
                other => return Err(parse_err(line_no, format!("unknown section [{other}]"))),
            };
            section = Some(s);
            continue;
        }
        let Some(current) = section else {
            return Err(parse_err(line_no, "key/value pair outside of any section"));
        };
        for token in line.split_whitespace() {
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| parse_err(line_no, format!("expected key=value, got `{token}`")))?;
            match current {
                Section::Road => match key {
                    "lanes" => road.lane_count = num(line_no, key, value)?,
                    "lane_width" => road.lane_width = num(line_no, key, value)?,
                    "merge" => {
                        let parts: Vec<&str> = value.split(':').collect();
                        if parts.len() != 3 {
                            return Err(parse_err(line_no, "merge expects lane:s_start:s_end"));
                        }
                        road.merge_sections.push(MergeSection {
                            lane_index: num(line_no, key, parts[0])?,
                            s_start: num(line_no, key, parts[1])?,
                            s_end: num(line_no, key, parts[2])?,
                        });
                    }
                    _ => return Err(parse_err(line_no, format!("unknown key `{key}` in [road]"))),
                },
                Section::Ego | Section::Vehicle => {
                    let draft = if current == Section::Ego {
                        ego.as_mut().expect("ego draft exists")
                    } else {
                        vehicles.last_mut().expect("vehicle draft exists")
                    };
                    parse_vehicle_key(draft, current == Section::Ego, line_no, key, value)?;
                }
                Section::Sim => match key {
                    "dt" => dt = num(line_no, key, value)?,
                    "duration" => duration = Some(num(line_no, key, value)?),
                    "seed" => seed = num(line_no, key, value)?,
                    _ => return Err(parse_err(line_no, format!("unknown key `{key}` in [sim]"))),
                },
                Section::Prediction => match key {
                    "t0" => prediction.t0 = num(line_no, key, value)?,
                    "tau" => prediction.tau = num(line_no, key, value)?,
                    "threshold" => prediction.threshold = num(line_no, key, value)?,
                    "k" => prediction.k = num(line_no, key, value)?,
                    "projection" => prediction.projection_time = num(line_no, key, value)?,
                    _ => return Err(parse_err(line_no, format!("unknown key `{key}` in [prediction]"))),
                },
                Section::Planner => match key {
                    "w_safety" => planner.w_safety = num(line_no, key, value)?,
                    "w_utility" => planner.w_utility = num(line_no, key, value)?,
                    "w_comfort" => planner.w_comfort = num(line_no, key, value)?,
                    "horizon" => planner.horizon = num(line_no, key, value)?,
                    "rollout_dt" => planner.rollout_dt = num(line_no, key, value)?,
                    "grid" => {
                        planner.grid = value
                            .split(',')
                            .map(|v| num(line_no, key, v))
                            .collect::<Result<_, _>>()?
                    }
                    "lane_change_penalty" => planner.lane_change_penalty = num(line_no, key, value)?,
                    "collision_penalty" => planner.collision_penalty = num(line_no, key, value)?,
                    "replan_period" => planner.replan_period = num(line_no, key, value)?,
                    _ => return Err(parse_err(line_no, format!("unknown key `{key}` in [planner]"))),
                },
            }
        }
    }

    if !saw_road {
        return Err(parse_err(0, "missing [road] section"));
    }
    let ego = ego.ok_or_else(|| parse_err(0, "missing [ego] section"))?;
    let duration = duration.ok_or_else(|| parse_err(0, "missing `duration` in [sim]"))?;

    let ego_state = finish_vehicle(&ego, true)?;
    let ego_cfg = EgoConfig {
        v_des: ego.v_des.unwrap_or(ego_state.v),
        state: ego_state,
    };
    let traffic = vehicles
        .iter()
        .map(|d| {
            let state = finish_vehicle(d, false)?;
            Ok(TrafficConfig {
                v_des: d.v_des.unwrap_or(state.v),
                idm: d.idm,
                triggers: d.triggers.clone(),
                state,
            })
        })
        .collect::<Result<Vec<_>, ScenarioError>>()?;

    planner.validate().map_err(ScenarioError::Validation)?;
    prediction.validate().map_err(ScenarioError::Validation)?;

    let config = ScenarioConfig {
        road,
        ego: ego_cfg,
        traffic,
        duration,
        dt,
        seed,
        prediction,
        planner,
    };
    config.validate()?;
    Ok(config)
}

fn parse_vehicle_key(d: &mut VehicleDraft, is_ego: bool, line: usize, key: &str, value: &str) -> Result<(), ScenarioError> {
    match key {
        "lane" => d.lane = Some(num(line, key, value)?),
        "s" => d.s = Some(num(line, key, value)?),
        "v" => d.v = Some(num(line, key, value)?),
        "v_des" => d.v_des = Some(num(line, key, value)?),
        "lateral" => d.lateral = num(line, key, value)?,
        "length" => d.length = Some(num(line, key, value)?),
        "width" => d.width = Some(num(line, key, value)?),
        "kind" => d.kind = Some(value.parse().map_err(|e: String| parse_err(line, e))?),
        "id" if !is_ego => {
            if value == EGO_ID {
                return Err(parse_err(line, "vehicle id `ego` is reserved"));
            }
            d.id = Some(value.to_owned())
        }
        "idm_a" if !is_ego => d.idm.a_max = num(line, key, value)?,
        "idm_b" if !is_ego => d.idm.b = num(line, key, value)?,
        "idm_t" if !is_ego => d.idm.time_headway = num(line, key, value)?,
        "idm_s0" if !is_ego => d.idm.s0 = num(line, key, value)?,
        "change" if !is_ego => {
            let (side, at) = value
                .split_once('@')
                .ok_or_else(|| parse_err(line, "change expects <left|right>@<time>"))?;
            let side: Side = side.parse().map_err(|e: String| parse_err(line, e))?;
            d.triggers.push((side, num(line, key, at)?));
        }
        _ => {
            let section = if is_ego { "ego" } else { "vehicle" };
            return Err(parse_err(line, format!("unknown key `{key}` in [{section}]")));
        }
    }
    Ok(())
}

fn finish_vehicle(d: &VehicleDraft, is_ego: bool) -> Result<VehicleState, ScenarioError> {
    let missing = |k: &str| parse_err(d.line, format!("missing `{k}`"));
    let id = if is_ego {
        EGO_ID.to_owned()
    } else {
        d.id.clone().ok_or_else(|| missing("id"))?
    };
    let kind = d.kind.unwrap_or(VehicleKind::Car);
    let mut state = VehicleState::new(
        id,
        kind,
        d.lane.ok_or_else(|| missing("lane"))?,
        d.s.ok_or_else(|| missing("s"))?,
        d.v.ok_or_else(|| missing("v"))?,
    );
    state.lateral_offset = d.lateral;
    if let Some(l) = d.length {
        state.length = l;
    }
    if let Some(w) = d.width {
        state.width = w;
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_has_no_traffic() {
        let cfg = load_scenario("[road]\nlanes=3\n[ego]\nlane=1 s=0 v=30\n[sim]\nduration=10\n").unwrap();
        assert!(cfg.traffic.is_empty());
        assert_eq!(cfg.duration, 10.0);
        assert_eq!(cfg.dt, 0.05);
        assert_eq!(cfg.ego.v_des, 30.0);
        assert_eq!(cfg.tick_count(), 200);
    }

    #[test]
    fn overlapping_spawn_is_rejected() {
        let text = "[road]\nlanes=3\n[ego]\nlane=1 s=0 v=30\n\
                    [vehicle]\nid=a lane=0 s=50 v=20\n[vehicle]\nid=b lane=0 s=50 v=20\n[sim]\nduration=10\n";
        assert!(matches!(load_scenario(text), Err(ScenarioError::Validation(_))));
    }

    #[test]
    fn unknown_key_reports_line() {
        let text = "[road]\nlanes=3\n[ego]\nlane=1 s=0 v=30 colour=red\n[sim]\nduration=10\n";
        match load_scenario(text) {
            Err(ScenarioError::Parse { line, message }) => {
                assert_eq!(line, 4);
                assert!(message.contains("colour"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn invalid_values_are_rejected() {
        let bad = [
            "[road]\nlanes=1\n[ego]\nlane=0 s=0 v=30\n[sim]\nduration=10\n",
            "[road]\nlanes=3\n[ego]\nlane=3 s=0 v=30\n[sim]\nduration=10\n",
            "[road]\nlanes=3\n[ego]\nlane=1 s=0 v=30\n[sim]\nduration=10 dt=0\n",
            "[road]\nlanes=3 merge=0:500:300\n[ego]\nlane=1 s=0 v=30\n[sim]\nduration=10\n",
        ];
        for text in bad {
            assert!(matches!(load_scenario(text), Err(ScenarioError::Validation(_))), "{text}");
        }
        assert!(matches!(
            load_scenario("[road]\nlanes=x\n"),
            Err(ScenarioError::Parse { line: 2, .. })
        ));
        assert!(matches!(load_scenario("lanes=3\n"), Err(ScenarioError::Parse { line: 1, .. })));
        assert!(matches!(load_scenario("[weather]\n"), Err(ScenarioError::Parse { line: 1, .. })));
    }

    #[test]
    fn vehicle_keys_round_out_state() {
        let text = "[road]\nlanes=3 lane_width=3.75 merge=0:300:500\n[ego]\nlane=1 s=0 v=30 v_des=32\n\
                    [vehicle]\nid=van kind=van lane=0 s=200 v=20 idm_t=1.0 change=left@4.5\n\
                    [sim]\ndt=0.1 duration=5 seed=7\n[prediction]\nk=4\n[planner]\ngrid=-1,0,1\n";
        let cfg = load_scenario(text).unwrap();
        let van = &cfg.traffic[0];
        assert_eq!(van.state.kind, VehicleKind::Van);
        assert_eq!(van.state.length, 5.5);
        assert_eq!(van.idm.time_headway, 1.0);
        assert_eq!(van.triggers, vec![(Side::Left, 4.5)]);
        assert_eq!(van.v_des, 20.0);
        assert_eq!(cfg.road.merge_sections[0].s_end, 500.0);
        assert_eq!(cfg.prediction.k, 4);
        assert_eq!(cfg.planner.grid, vec![-1.0, 0.0, 1.0]);
        assert_eq!(cfg.seed, 7);
    }
}
