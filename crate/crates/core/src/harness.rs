//! Headless runs with scripted interventions, and baseline comparisons.
//!
//! Script files hold one injection per line, `time vehicle_id left|right`,
//! with `#` comments. Times must be non-decreasing.
//!
//! Trace files are CSV with one row per tick:
//!
//! | column | content |
//! |---|---|
//! | `tick`, `time` | tick index and its start time, s |
//! | `ego_s`, `ego_lane`, `ego_offset`, `ego_v`, `ego_a` | ego state after the tick |
//! | `behavior` | selected ego behavior |
//! | `profile` | segment accelerations, `;`-separated |
//! | `indicator` | `off`, `left` or `right` |
//! | `expected_cost` | expected cost of the selected behavior |
//! | `replanned` | whether the plan was recomputed this tick |
//! | `interventions` | active records, `id:direction;...` |
//! | `vehicles` | traffic after the tick, `id:lane:s:offset:v;...` |
//! | `predictions` | per vehicle given the selected behavior, `id:keep:left:right;...` |
//! | `flags` | flagged vehicles, `id:direction:probability;...` |
//! | `collision_free` | no two bodies overlap after the tick |

use std::fmt::Write as _;
use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::HarnessError;
use crate::planner::IndicatorSide;
use crate::prediction::EgoBehavior;
use crate::sim::{RunMetrics, Simulation, TickReport};
use crate::world::{ScenarioConfig, SceneState, Side, VehicleId};

/// Slack when matching script times to the tick grid.
const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptEntry {
    pub time: f64,
    pub vehicle_id: VehicleId,
    pub direction: Side,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InterventionScript {
    pub entries: Vec<ScriptEntry>,
}

impl InterventionScript {
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut entries: Vec<ScriptEntry> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| HarnessError::Script { line: idx + 1, message };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [time, id, dir] = fields[..] else {
                return Err(err(format!("expected `time vehicle_id direction`, got `{line}`")));
            };
            let time: f64 = time.parse().map_err(|_| err(format!("invalid time `{time}`")))?;
            if !time.is_finite() || time < 0.0 {
                return Err(err(format!("time must be finite and non-negative, got {time}")));
            }
            let direction: Side = dir.parse().map_err(|_| err(format!("invalid direction `{dir}`")))?;
            if entries.last().is_some_and(|e| e.time > time) {
                return Err(err("times must be non-decreasing".into()));
            }
            entries.push(ScriptEntry {
                time,
                vehicle_id: VehicleId::new(id),
                direction,
            });
        }
        Ok(Self { entries })
    }

    pub fn validate(&self, config: &ScenarioConfig) -> Result<(), HarnessError> {
        for (i, e) in self.entries.iter().enumerate() {
            if config.vehicle(&e.vehicle_id).is_none() {
                return Err(HarnessError::ScriptVehicleUnknown(e.vehicle_id.clone()));
            }
            if e.time > config.duration {
                return Err(HarnessError::Script {
                    line: i + 1,
                    message: format!("time {} is beyond the scenario duration {}", e.time, config.duration),
                });
            }
            if i > 0 && self.entries[i - 1].time > e.time {
                return Err(HarnessError::Script {
                    line: i + 1,
                    message: "times must be non-decreasing".into(),
                });
            }
        }
        Ok(())
    }
}

/// Feeds script entries into a simulation at the first tick whose start time
/// reaches the entry time.
#[derive(Debug, Clone)]
pub struct ScriptCursor<'a> {
    entries: &'a [ScriptEntry],
    next: usize,
}

impl<'a> ScriptCursor<'a> {
    pub fn new(script: &'a InterventionScript) -> Self {
        Self {
            entries: &script.entries,
            next: 0,
        }
    }

    /// Entries due at `time`, in script order.
    pub fn due(&mut self, time: f64) -> &'a [ScriptEntry] {
        let start = self.next;
        while self.next < self.entries.len() && self.entries[self.next].time <= time + TIME_EPS {
            self.next += 1;
        }
        &self.entries[start..self.next]
    }
}

/// Run the full loop for the configured duration.
pub fn run(config: &ScenarioConfig, script: &InterventionScript, trace: Option<&Path>) -> Result<RunMetrics, HarnessError> {
    config.validate()?;
    script.validate(config)?;
    let mut writer = match trace {
        Some(path) => {
            let mut w = csv::Writer::from_writer(File::create(path)?);
            w.write_record(TRACE_HEADER)?;
            Some(w)
        }
        None => None,
    };
    let mut sim = Simulation::new(config.clone());
    let mut cursor = ScriptCursor::new(script);
    while !sim.is_finished() {
        for e in cursor.due(sim.scene().time) {
            sim.queue_injection(e.vehicle_id.clone(), e.direction);
        }
        let report = sim.tick();
        if let Some(Err(source)) = report.injections.iter().find(|r| r.is_err()) {
            return Err(HarnessError::InjectionRejected {
                time: report.scene.time,
                source: source.clone(),
            });
        }
        if let Some(w) = writer.as_mut() {
            w.write_record(trace_row(&report, sim.scene()))?;
        }
    }
    if let Some(mut w) = writer {
        w.flush()?;
    }
    let mut metrics = sim.into_metrics();
    metrics.trace_path = trace.map(|p| p.display().to_string());
    Ok(metrics)
}

const TRACE_HEADER: [&str; 17] = [
    "tick",
    "time",
    "ego_s",
    "ego_lane",
    "ego_offset",
    "ego_v",
    "ego_a",
    "behavior",
    "profile",
    "indicator",
    "expected_cost",
    "replanned",
    "interventions",
    "vehicles",
    "predictions",
    "flags",
    "collision_free",
];

fn behavior_name(b: EgoBehavior) -> &'static str {
    match b {
        EgoBehavior::Straight => "straight",
        EgoBehavior::LaneChangeLeft => "lane_change_left",
        EgoBehavior::LaneChangeRight => "lane_change_right",
    }
}

fn side_name(s: Side) -> &'static str {
    match s {
        Side::Left => "left",
        Side::Right => "right",
    }
}

fn join<T>(items: impl IntoIterator<Item = T>, f: impl Fn(T) -> String) -> String {
    items.into_iter().map(f).collect::<Vec<_>>().join(";")
}

fn trace_row(report: &TickReport, after: &SceneState) -> Vec<String> {
    let scene = &report.scene;
    let plan = scene.active_plan.as_ref().expect("plan present");
    let ego = &after.ego;
    let indicator = match plan.indicator_at(scene.time) {
        IndicatorSide::Off => "off",
        IndicatorSide::Left => "left",
        IndicatorSide::Right => "right",
    };
    let collision_free = !after.bodies().enumerate().any(|(i, a)| after.bodies().skip(i + 1).any(|b| a.overlaps(b, &after.road)));
    vec![
        scene.tick.to_string(),
        scene.time.to_string(),
        ego.s.to_string(),
        ego.lane_index.to_string(),
        ego.lateral_offset.to_string(),
        ego.v.to_string(),
        ego.a.to_string(),
        behavior_name(plan.ego_behavior).to_string(),
        join(plan.profile.0, |a| a.to_string()),
        indicator.to_string(),
        plan.expected_cost.to_string(),
        report.replanned.to_string(),
        join(&scene.interventions, |r| format!("{}:{}", r.vehicle_id, side_name(r.direction))),
        join(&after.traffic, |v| format!("{}:{}:{}:{}:{}", v.id, v.lane_index, v.s, v.lateral_offset, v.v)),
        join(&report.effective, |p| {
            let d = p.given(plan.ego_behavior);
            format!("{}:{}:{}:{}", p.vehicle_id, d.keep, d.change_left, d.change_right)
        }),
        join(&report.flags, |f| format!("{}:{}:{}", f.vehicle_id, side_name(f.side), f.probability)),
        collision_free.to_string(),
    ]
}

/// Selected behavior at every tick, expanded from the change list.
pub fn behavior_sequence(metrics: &RunMetrics) -> Vec<EgoBehavior> {
    let mut out = Vec::with_capacity(metrics.ticks as usize);
    for (i, &(tick, b)) in metrics.behavior_changes.iter().enumerate() {
        let end = metrics.behavior_changes.get(i + 1).map_or(metrics.ticks, |c| c.0);
        out.extend(std::iter::repeat_n(b, (end - tick) as usize));
    }
    out
}

/// Number of ticks at which two runs selected different behaviors.
pub fn behavior_tick_differences(a: &RunMetrics, b: &RunMetrics) -> usize {
    let (sa, sb) = (behavior_sequence(a), behavior_sequence(b));
    let common = sa.iter().zip(&sb).filter(|(x, y)| x != y).count();
    common + sa.len().abs_diff(sb.len())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub metric: String,
    pub baseline: Value,
    pub intervened: Value,
    /// intervened − baseline, where a numeric difference is defined.
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub baseline: RunMetrics,
    pub intervened: RunMetrics,
    pub rows: Vec<ReportRow>,
    pub behavior_tick_differences: usize,
}

impl CompareReport {
    pub fn new(baseline: RunMetrics, intervened: RunMetrics) -> Self {
        let base = serde_json::to_value(&baseline).expect("metrics serialize");
        let with = serde_json::to_value(&intervened).expect("metrics serialize");
        let (Value::Object(base), Value::Object(mut with)) = (base, with) else {
            unreachable!("metrics serialize to an object")
        };
        let rows = base
            .into_iter()
            .filter(|(k, _)| k != "trace_path")
            .map(|(metric, b)| {
                let i = with.remove(&metric).unwrap_or(Value::Null);
                let delta = numeric_delta(&metric, &b, &i);
                ReportRow {
                    metric,
                    baseline: b,
                    intervened: i,
                    delta,
                }
            })
            .collect();
        Self {
            behavior_tick_differences: behavior_tick_differences(&baseline, &intervened),
            baseline,
            intervened,
            rows,
        }
    }

    pub fn to_json(&self) -> Result<String, HarnessError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let cell = |v: &Value| match v {
            Value::Null => "-".to_string(),
            Value::Array(a) if a.is_empty() => "[]".to_string(),
            other => other.to_string(),
        };
        let _ = writeln!(out, "{:<26} {:>20} {:>20} {:>12}", "metric", "baseline", "intervened", "delta");
        for row in &self.rows {
            let delta = row.delta.map_or("-".to_string(), |d| format!("{d:.4}"));
            let _ = writeln!(
                out,
                "{:<26} {:>20} {:>20} {:>12}",
                row.metric,
                cell(&row.baseline),
                cell(&row.intervened),
                delta
            );
        }
        let _ = writeln!(out, "{:<26} {:>20}", "behavior_tick_differences", self.behavior_tick_differences);
        out
    }
}

fn numeric_delta(metric: &str, b: &Value, i: &Value) -> Option<f64> {
    match (b, i) {
        (Value::Number(x), Value::Number(y)) => Some(y.as_f64()? - x.as_f64()?),
        // Lists of onset times compare by their first entry.
        (Value::Array(x), Value::Array(y)) if metric == "ego_lane_change_times" => Some(y.first()?.as_f64()? - x.first()?.as_f64()?),
        _ => None,
    }
}

/// Run once without and once with `script`.
pub fn compare(config: &ScenarioConfig, script: &InterventionScript) -> Result<CompareReport, HarnessError> {
    let baseline = run(config, &InterventionScript::default(), None)?;
    let intervened = run(config, script, None)?;
    Ok(CompareReport::new(baseline, intervened))
}
