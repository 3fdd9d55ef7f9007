//! Scenario files: the JSON description of an arena, a parameter set, and
//! the outcomes each policy is expected to produce there.
//!
//! Files are strict — every parameter is spelled out, unknown keys are
//! rejected — so a scenario on disk is a complete, diffable record of an
//! experiment. A bundled set of arenas covering the classic failure
//! geometries (concave traps, closed rooms, repetitive loops) ships with
//! the crate.

use crate::apf::{ApfError, ApfParams, RepulsiveForm};
use crate::memory::{MemoryError, MemoryParams};
use crate::sensing::{SensorConfig, SensorError};
use crate::sim::{
    Outcome, RunConfig, SimParams, StepRecord, SupervisorSettings, MIN_SPEED_FOR_HEADING,
};
use crate::supervisor::Policy;
use crate::wfm::{WfmError, WfmParams};
use crate::world::{angle_between, Polygon, Rect, Vec2, World, WorldError};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid world: {0}")]
    World(#[from] WorldError),
    #[error("invalid sensor config: {0}")]
    Sensor(#[from] SensorError),
    #[error("invalid field parameters: {0}")]
    Apf(#[from] ApfError),
    #[error("invalid wall-following parameters: {0}")]
    Wfm(#[from] WfmError),
    #[error("invalid memory parameters: {0}")]
    Memory(#[from] MemoryError),
    #[error("{0}")]
    Invalid(String),
}

/// Arena geometry section of a scenario file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldSpec {
    /// Axis-aligned arena rectangle, `[min, max]` corners.
    pub bounds: (Vec2, Vec2),
    pub start: Vec2,
    pub goal: Vec2,
    /// Each obstacle is a simple polygon given as a vertex list.
    pub obstacles: Vec<Vec<Vec2>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SensorPreset {
    /// Eight beams on a 45 degree pitch.
    Ring8,
    /// Five forward beams from -90 to +90 degrees.
    Uav5,
}

/// Rangefinder section: either a named preset or explicit mount angles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<SensorPreset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angles: Option<Vec<f64>>,
    pub max_range: f64,
    pub noise_sigma: f64,
}

/// Potential-field section.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApfSpec {
    pub zeta: f64,
    pub rho: f64,
    pub eta: f64,
    pub d_c: f64,
    pub v_max: f64,
    /// Force magnitude at which the commanded speed saturates; defaults
    /// to `zeta * rho` (the far-field attraction) when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_sat: Option<f64>,
    /// Repulsive magnitude law; gradient-consistent when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repulsive_form: Option<RepulsiveForm>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
}

/// Wall-following section.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WfmSpec {
    pub d_wall: f64,
    pub v_tangent_mag: f64,
    pub pid: PidGains,
    pub integral_limit: f64,
}

/// Path-length bound relative to another policy's run on the same file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathRatioBound {
    /// Policy whose path length is the denominator.
    pub policy: Policy,
    /// Required: this policy's length / other policy's length <= max_ratio.
    pub max_ratio: f64,
}

/// Expected result for one policy on this scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    pub outcome: Outcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path_ratio_vs: Option<PathRatioBound>,
}

/// A complete experiment description as stored on disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub world: WorldSpec,
    pub sensors: SensorSpec,
    pub apf: ApfSpec,
    pub wfm: WfmSpec,
    pub memory: MemoryParams,
    pub supervisor: SupervisorSettings,
    pub sim: SimParams,
    /// Per-policy expectations, checked by the regression suite.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub expected: BTreeMap<String, Expected>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialization cannot fail")
    }

    /// Construct the validated runtime configuration.
    pub fn build(&self) -> Result<RunConfig, ScenarioError> {
        let (min, max) = self.world.bounds;
        let bounds = Rect::new(min, max).map_err(WorldError::Geometry)?;
        let obstacles = self
            .world
            .obstacles
            .iter()
            .map(|verts| Polygon::new(verts.clone()))
            .collect::<Result<Vec<_>, _>>()
            .map_err(WorldError::Geometry)?;
        let world = World::new(obstacles, self.world.start, self.world.goal, bounds)?;

        let sensors = match (&self.sensors.preset, &self.sensors.angles) {
            (Some(preset), None) => match preset {
                SensorPreset::Ring8 => {
                    SensorConfig::ring8(self.sensors.max_range, self.sensors.noise_sigma)
                }
                SensorPreset::Uav5 => {
                    SensorConfig::uav5(self.sensors.max_range, self.sensors.noise_sigma)
                }
            },
            (None, Some(angles)) => SensorConfig::new(
                angles.clone(),
                self.sensors.max_range,
                self.sensors.noise_sigma,
            )?,
            _ => {
                return Err(ScenarioError::Invalid(
                    "sensors must specify exactly one of 'preset' or 'angles'".into(),
                ))
            }
        };
        // Preset constructors panic only on bad range/noise; re-validate
        // those fields through the checked path.
        SensorConfig::new(
            sensors.mount_angles().to_vec(),
            self.sensors.max_range,
            self.sensors.noise_sigma,
        )?;

        let mut apf = match self.apf.f_sat {
            Some(f_sat) => ApfParams::with_saturation(
                self.apf.zeta,
                self.apf.rho,
                self.apf.eta,
                self.apf.d_c,
                self.apf.v_max,
                f_sat,
            )?,
            None => ApfParams::new(
                self.apf.zeta,
                self.apf.rho,
                self.apf.eta,
                self.apf.d_c,
                self.apf.v_max,
            )?,
        };
        if let Some(form) = self.apf.repulsive_form {
            apf.repulsive_form = form;
        }
        if apf.d_c > self.sensors.max_range {
            return Err(ScenarioError::Invalid(format!(
                "repulsion cutoff d_c = {} exceeds sensor max_range = {}; \
                 obstacles inside the cutoff would be invisible",
                apf.d_c, self.sensors.max_range
            )));
        }

        let wfm = WfmParams::with_gains(
            self.wfm.d_wall,
            self.wfm.v_tangent_mag,
            self.wfm.pid.kp,
            self.wfm.pid.ki,
            self.wfm.pid.kd,
            self.wfm.integral_limit,
        )?;
        let memory = MemoryParams::new(
            self.memory.d_th,
            self.memory.theta_th,
            self.memory.f_th,
            self.memory.t_refractory,
        )?;

        if !(self.sim.dt > 0.0 && self.sim.dt.is_finite()) {
            return Err(ScenarioError::Invalid("sim.dt must be positive".into()));
        }
        if self.sim.max_steps == 0 {
            return Err(ScenarioError::Invalid(
                "sim.max_steps must be positive".into(),
            ));
        }
        if !(self.sim.goal_tol > 0.0 && self.sim.goal_tol.is_finite()) {
            return Err(ScenarioError::Invalid(
                "sim.goal_tol must be positive".into(),
            ));
        }
        if !(self.sim.radius > 0.0 && self.sim.radius.is_finite()) {
            return Err(ScenarioError::Invalid("sim.radius must be positive".into()));
        }

        Ok(RunConfig {
            world,
            sensors,
            apf,
            wfm,
            memory,
            supervisor: self.supervisor.clone(),
            sim: self.sim.clone(),
        })
    }

    /// Full structural validation: buildable, and the expectations table
    /// references real policies.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.build()?;
        if self.name.trim().is_empty() {
            return Err(ScenarioError::Invalid("scenario name is empty".into()));
        }
        for (key, expected) in &self.expected {
            let policy: Policy = key.parse().map_err(ScenarioError::Invalid)?;
            if let Some(bound) = &expected.path_ratio_vs {
                if bound.policy == policy {
                    return Err(ScenarioError::Invalid(format!(
                        "expected[{key}] compares a policy's path against itself"
                    )));
                }
                if !(bound.max_ratio > 0.0 && bound.max_ratio.is_finite()) {
                    return Err(ScenarioError::Invalid(format!(
                        "expected[{key}] has a non-positive path ratio bound"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Expectation entry for a policy, if the file carries one.
    pub fn expectation(&self, policy: Policy) -> Option<&Expected> {
        self.expected.get(&policy.to_string())
    }
}

/// The arenas bundled with the crate, parsed from their JSON sources
/// (the files under `scenarios/` are the source of truth).
pub fn builtin_scenarios() -> Vec<Scenario> {
    const SOURCES: [(&str, &str); 7] = [
        (
            "local-min-wall",
            include_str!("../scenarios/local-min-wall.json"),
        ),
        (
            "endless-loop",
            include_str!("../scenarios/endless-loop.json"),
        ),
        (
            "closed-room-small-exit",
            include_str!("../scenarios/closed-room-small-exit.json"),
        ),
        (
            "repetitive-path",
            include_str!("../scenarios/repetitive-path.json"),
        ),
        (
            "open-corridor",
            include_str!("../scenarios/open-corridor.json"),
        ),
        ("h-shape", include_str!("../scenarios/h-shape.json")),
        (
            "comparison-arena",
            include_str!("../scenarios/comparison-arena.json"),
        ),
    ];
    SOURCES
        .iter()
        .map(|(name, text)| {
            let s = Scenario::from_json(text)
                .unwrap_or_else(|e| panic!("bundled scenario '{name}' is unparseable: {e}"));
            assert_eq!(
                &s.name, name,
                "bundled scenario file name and declared name disagree"
            );
            s
        })
        .collect()
}

/// Bundled scenario lookup by name.
pub fn builtin_scenario(name: &str) -> Option<Scenario> {
    builtin_scenarios().into_iter().find(|s| s.name == name)
}

/// Does the tail of a run repeatedly retrace the same ground?
///
/// A trajectory counts as cyclic when some anchor state in its final
/// quarter — a (position, moving-direction) pair — is entered at least
/// four times over the run (the anchor's own pass plus three revisits)
/// at near-equal intervals (coefficient of variation of the periods
/// below 10%). Runs shorter than 2,000 ticks never qualify: they have
/// not been given time to loop.
pub fn detect_cycle(records: &[StepRecord], d_th: f64, theta_th: f64) -> bool {
    const MIN_RECORDS: usize = 2_000;
    const MAX_ANCHORS: usize = 64;
    const MIN_ENTRIES: usize = 4;
    const MAX_PERIOD_CV: f64 = 0.10;

    if records.len() < MIN_RECORDS {
        return false;
    }
    let moving_dir = |r: &StepRecord| -> Option<Vec2> {
        if r.velocity.norm() > MIN_SPEED_FOR_HEADING {
            r.velocity.normalized()
        } else {
            None
        }
    };
    let tail_start = records.len() - records.len() / 4;
    let stride = ((records.len() - tail_start) / MAX_ANCHORS).max(1);
    for anchor in records[tail_start..].iter().step_by(stride) {
        let Some(anchor_dir) = moving_dir(anchor) else {
            continue;
        };
        let mut entry_times: Vec<f64> = Vec::new();
        let mut was_inside = false;
        for r in records {
            let inside = match moving_dir(r) {
                Some(dir) => {
                    r.position.dist(anchor.position) <= d_th
                        && angle_between(dir, anchor_dir) <= theta_th
                }
                None => false,
            };
            if inside && !was_inside {
                entry_times.push(r.t);
            }
            was_inside = inside;
        }
        if entry_times.len() < MIN_ENTRIES {
            continue;
        }
        let periods: Vec<f64> = entry_times.windows(2).map(|w| w[1] - w[0]).collect();
        let mean = periods.iter().sum::<f64>() / periods.len() as f64;
        if mean <= 0.0 {
            continue;
        }
        let variance =
            periods.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / periods.len() as f64;
        if variance.sqrt() / mean < MAX_PERIOD_CV {
            return true;
        }
    }
    false
}
