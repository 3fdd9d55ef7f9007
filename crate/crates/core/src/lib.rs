//! Hybrid reactive navigation in two dimensions.
//!
//! A point robot with a ring of ray-cast rangefinders moves through a
//! polygonal arena under two cooperating controllers: an artificial
//! potential field that pulls it toward the goal, and a wall-following
//! controller that carries it out of the potential field's dead ends.
//! A supervisor arbitrates between the two using a store of visited
//! key frames, so the robot recognises places it has already been.
//!
//! Everything is deterministic for a fixed scenario and seed.

pub mod apf;
pub mod memory;
pub mod scenario;
pub mod sensing;
pub mod sim;
pub mod supervisor;
pub mod wfm;
pub mod world;

pub use apf::{ApfParams, RepulsiveForm};
pub use memory::{KeyFrame, MemoryParams, TrajectoryMemory};
pub use scenario::{builtin_scenario, builtin_scenarios, detect_cycle, Scenario, ScenarioError};
pub use sensing::{SensorConfig, SensorScan};
pub use sim::{
    clearance, run, Outcome, RunConfig, RunResult, SimError, SimParams, StepRecord,
    SupervisorSettings,
};
pub use supervisor::{Mode, Policy, Supervisor, SwitchEvent, SwitchReason};
pub use wfm::{FollowDirection, PidState, WallEstimate, WfmParams};
pub use world::{Dir2, Polygon, Rect, Vec2, World};
