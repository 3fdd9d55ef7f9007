//! Fixed-timestep kinematic simulation loop.
//!
//! Each tick: scan the rangefinder, build the net potential-field force,
//! estimate the nearest wall, let the supervisor pick a controller, apply
//! the controller's velocity (capped at the cruise speed), consider
//! recording a key frame, log a step record, test termination, then
//! integrate. Velocity commands take effect instantly — the robot is a
//! first-order point with a collision radius, so every run is a pure
//! function of (configuration, policy, seed).

use crate::apf::{apf_velocity, total_force, ApfError, ApfParams};
use crate::memory::{MemoryError, MemoryParams, TrajectoryMemory};
use crate::sensing::{obstacle_points, scan, SensorConfig};
use crate::supervisor::{
    Mode, Policy, Supervisor, SupervisorConfig, SupervisorInputs, SwitchEvent,
};
use crate::wfm::{estimate_wall, WfmParams};
use crate::world::{Vec2, World};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Below this speed the robot is considered stationary: the heading (and
/// the recorded moving direction) hold their previous values.
pub const MIN_SPEED_FOR_HEADING: f64 = 0.01;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid run configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Force(#[from] ApfError),
    #[error(transparent)]
    Memory(#[from] MemoryError),
}

/// Integration and termination settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimParams {
    /// Timestep, seconds.
    pub dt: f64,
    /// Tick count at which the run gives up.
    pub max_steps: u32,
    /// Distance to the goal that counts as arrival.
    pub goal_tol: f64,
    /// Robot disc radius for collision tests.
    pub radius: f64,
}

/// Supervisor tuning carried by a scenario (the policy itself is chosen
/// per run).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupervisorSettings {
    /// Minimum ticks between mode switches.
    pub hysteresis_ticks: u32,
    /// Ticks to coast on a lost wall before returning to the field.
    pub n_coast: u32,
}

/// Everything a run needs except the policy and the seed.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub world: World,
    pub sensors: SensorConfig,
    pub apf: ApfParams,
    pub wfm: WfmParams,
    pub memory: MemoryParams,
    pub supervisor: SupervisorSettings,
    pub sim: SimParams,
}

/// How a run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    GoalReached,
    MaxStepsExceeded,
    Collision,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Outcome::GoalReached => "goal-reached",
            Outcome::MaxStepsExceeded => "max-steps-exceeded",
            Outcome::Collision => "collision",
        };
        write!(f, "{s}")
    }
}

/// Snapshot of one tick, taken before that tick's integration, so a
/// colliding position appears in the log with the state that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub tick: u32,
    /// Simulation clock, seconds.
    pub t: f64,
    pub position: Vec2,
    /// Velocity applied during this tick.
    pub velocity: Vec2,
    pub mode: Mode,
    /// Net potential-field force at `position` (logged in both modes).
    pub force: Vec2,
    /// Smallest rangefinder reading this tick.
    pub min_reading: f64,
    /// Whether this tick laid down a trajectory key frame.
    pub keyframe_recorded: bool,
    /// Mode transition that happened on this tick, if any.
    pub event: Option<SwitchEvent>,
}

/// Full product of one run.
#[derive(Clone, Debug)]
pub struct RunResult {
    pub outcome: Outcome,
    /// Tick at which the run terminated (equals the last record's tick).
    pub final_tick: u32,
    /// Total distance travelled.
    pub path_length: f64,
    pub records: Vec<StepRecord>,
    pub memory: TrajectoryMemory,
}

impl RunResult {
    /// Number of mode switches over the run.
    pub fn switch_count(&self) -> usize {
        self.records.iter().filter(|r| r.event.is_some()).count()
    }

    /// Fraction of ticks spent wall-following.
    pub fn wfm_fraction(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        let wfm = self.records.iter().filter(|r| r.mode == Mode::Wfm).count();
        wfm as f64 / self.records.len() as f64
    }
}

fn cap_speed(v: Vec2, v_max: f64) -> Vec2 {
    let n = v.norm();
    if n > v_max {
        v * (v_max / n)
    } else {
        v
    }
}

/// Smallest clearance (surface distance minus radius) over a logged run.
pub fn clearance(world: &World, records: &[StepRecord], radius: f64) -> f64 {
    debug_assert!(!records.is_empty());
    records
        .iter()
        .map(|r| world.signed_clearance(r.position, radius))
        .fold(f64::INFINITY, f64::min)
}

/// Simulate one run under the given policy and noise seed.
pub fn run(config: &RunConfig, policy: Policy, seed: u64) -> Result<RunResult, SimError> {
    if !(config.sim.dt > 0.0 && config.sim.dt.is_finite()) {
        return Err(SimError::Config("dt must be positive".into()));
    }
    if config.sim.max_steps == 0 {
        return Err(SimError::Config("max_steps must be positive".into()));
    }
    if !(config.sim.goal_tol > 0.0 && config.sim.goal_tol.is_finite()) {
        return Err(SimError::Config("goal_tol must be positive".into()));
    }
    if !(config.sim.radius > 0.0 && config.sim.radius.is_finite()) {
        return Err(SimError::Config("radius must be positive".into()));
    }
    let world = &config.world;
    let goal = world.goal();
    if world.disc_collides(world.start(), config.sim.radius) {
        return Err(SimError::Config(
            "start position leaves the robot disc in contact with an obstacle".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut supervisor = Supervisor::new(SupervisorConfig {
        policy,
        hysteresis_ticks: config.supervisor.hysteresis_ticks,
        n_coast: config.supervisor.n_coast,
        f_th: config.memory.f_th,
        d_th: config.memory.d_th,
        goal_tol: config.sim.goal_tol,
    });
    let mut memory = TrajectoryMemory::new(config.memory.clone());

    let mut position = world.start();
    let mut heading = (goal - position).angle();
    let mut move_dir = Vec2::from_angle(heading);
    let mut path_length = 0.0;
    let mut records: Vec<StepRecord> = Vec::new();
    let dt = config.sim.dt;

    let mut tick: u32 = 0;
    loop {
        let t = f64::from(tick) * dt;
        let s = scan(world, position, heading, &config.sensors, &mut rng);
        let points = obstacle_points(&s, position, heading, &config.sensors);
        let force = total_force(position, goal, &points, &config.apf)?;
        let wall = estimate_wall(&s, position, heading, &config.sensors);
        let dist_to_goal = position.dist(goal);

        let decision = supervisor.step(
            &SupervisorInputs {
                t,
                position,
                goal,
                dist_to_goal,
                f_total: force,
                move_dir,
                wall: wall.as_ref(),
            },
            &memory,
        );
        let commanded = match decision.mode {
            Mode::Apf => apf_velocity(force, &config.apf),
            Mode::Wfm => supervisor.wfm_velocity(wall.as_ref(), &config.wfm, dt),
        };
        let velocity = cap_speed(commanded, config.apf.v_max);

        let frame_dir = if velocity.norm() > MIN_SPEED_FOR_HEADING {
            velocity.normalized().expect("speed above threshold")
        } else {
            Vec2::from_angle(heading)
        };
        let recorded = memory.maybe_record(
            t,
            position,
            frame_dir,
            force.norm(),
            decision.mode,
            match decision.mode {
                Mode::Wfm => supervisor.direction(),
                Mode::Apf => None,
            },
        )?;

        records.push(StepRecord {
            tick,
            t,
            position,
            velocity,
            mode: decision.mode,
            force,
            min_reading: s.min_reading(),
            keyframe_recorded: recorded,
            event: decision.event,
        });

        let outcome = if dist_to_goal <= config.sim.goal_tol {
            Some(Outcome::GoalReached)
        } else if world.disc_collides(position, config.sim.radius) {
            Some(Outcome::Collision)
        } else if tick >= config.sim.max_steps {
            Some(Outcome::MaxStepsExceeded)
        } else {
            None
        };
        if let Some(outcome) = outcome {
            return Ok(RunResult {
                outcome,
                final_tick: tick,
                path_length,
                records,
                memory,
            });
        }

        let delta = velocity * dt;
        position = position + delta;
        path_length += delta.norm();
        if velocity.norm() > MIN_SPEED_FOR_HEADING {
            heading = velocity.angle();
            move_dir = velocity.normalized().expect("speed above threshold");
        }
        tick += 1;
    }
}
