//! Mode arbitration between the potential-field and wall-following
//! controllers.
//!
//! The supervisor is a two-state machine. In potential-field mode it
//! watches for force stalls (a trap) and, under the full policy, for
//! revisits of remembered ground. In wall-following mode it watches for
//! the goal bearing to swing clear of the wall tangent, vetoed — except
//! under the memoryless policy — when the straight line to the goal would
//! cross the remembered path. A minimum dwell between switches stops the
//! two predicates from chattering at their shared boundary.

use crate::memory::TrajectoryMemory;
use crate::wfm::{
    choose_direction, oriented_tangent, FollowDirection, PidState, WallEstimate, WfmParams,
};
use crate::world::{wrap_angle, Vec2};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

/// Which controller drives the robot this tick.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Apf,
    Wfm,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Apf => write!(f, "apf"),
            Mode::Wfm => write!(f, "wfm"),
        }
    }
}

/// Arbitration policy for a run.
///
/// `Full` uses trajectory memory in both modes. `Memoryless` keeps no
/// history at all; `WfmMemoryOnly` consults history only while
/// wall-following. `ApfOnly` disables arbitration entirely and drives the
/// potential field everywhere — the diagnostic baseline that exhibits the
/// classic trap behaviours.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Policy {
    #[serde(rename = "full")]
    Full,
    #[serde(rename = "memoryless")]
    Memoryless,
    #[serde(rename = "wfm-memory")]
    WfmMemoryOnly,
    #[serde(rename = "apf-only")]
    ApfOnly,
}

impl Policy {
    pub const ALL: [Policy; 4] = [
        Policy::Full,
        Policy::Memoryless,
        Policy::WfmMemoryOnly,
        Policy::ApfOnly,
    ];

    /// History consulted while in potential-field mode (revisit search).
    fn apf_uses_memory(self) -> bool {
        matches!(self, Policy::Full)
    }

    /// History consulted while in wall-following mode (crossing veto and
    /// direction flip).
    fn wfm_uses_memory(self) -> bool {
        matches!(self, Policy::Full | Policy::WfmMemoryOnly)
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Policy::Full => "full",
            Policy::Memoryless => "memoryless",
            Policy::WfmMemoryOnly => "wfm-memory",
            Policy::ApfOnly => "apf-only",
        };
        write!(f, "{s}")
    }
}

impl FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(Policy::Full),
            "memoryless" => Ok(Policy::Memoryless),
            "wfm-memory" => Ok(Policy::WfmMemoryOnly),
            "apf-only" => Ok(Policy::ApfOnly),
            other => Err(format!(
                "unknown policy '{other}' (expected full, memoryless, wfm-memory, or apf-only)"
            )),
        }
    }
}

/// What tripped a mode switch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SwitchReason {
    /// Net force stalled below the threshold away from the goal.
    LocalMinimum,
    /// The robot re-entered remembered ground laid down before the last
    /// stall.
    Revisit,
    /// Goal bearing swung more than a quarter turn off the wall tangent
    /// (and the straight line to the goal clears history, where checked).
    GoalAngleClear,
    /// No wall estimate for the full coast window.
    WallLost,
}

impl SwitchReason {
    fn id(self) -> &'static str {
        match self {
            SwitchReason::LocalMinimum => "local_minimum",
            SwitchReason::Revisit => "revisit",
            SwitchReason::GoalAngleClear => "goal_angle_clear",
            SwitchReason::WallLost => "wall_lost",
        }
    }
}

/// One mode transition, loggable as `from->to:reason`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SwitchEvent {
    pub from: Mode,
    pub to: Mode,
    pub reason: SwitchReason,
}

impl fmt::Display for SwitchEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}:{}", self.from, self.to, self.reason.id())
    }
}

#[derive(Clone, Debug)]
pub struct SupervisorConfig {
    pub policy: Policy,
    /// Minimum ticks between any two mode switches.
    pub hysteresis_ticks: u32,
    /// Ticks to coast along the last tangent after losing the wall before
    /// giving up and switching back to the potential field.
    pub n_coast: u32,
    /// Net-force magnitude below which the field counts as stalled.
    pub f_th: f64,
    /// Position radius for the direction-flip memory lookup.
    pub d_th: f64,
    /// Stall detection is suppressed within this distance of the goal,
    /// where the attractive force legitimately vanishes.
    pub goal_tol: f64,
}

/// Supervisor verdict for one tick.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decision {
    /// Controller to use this tick (post-switch when a switch occurred).
    pub mode: Mode,
    pub event: Option<SwitchEvent>,
}

/// Per-tick inputs to the arbitration step.
#[derive(Clone, Copy, Debug)]
pub struct SupervisorInputs<'a> {
    /// Simulation clock, seconds.
    pub t: f64,
    pub position: Vec2,
    pub goal: Vec2,
    pub dist_to_goal: f64,
    /// Net potential-field force at the current position.
    pub f_total: Vec2,
    /// Unit direction of the robot's current motion (heading when
    /// stationary).
    pub move_dir: Vec2,
    pub wall: Option<&'a WallEstimate>,
}

#[derive(Clone, Debug)]
pub struct Supervisor {
    config: SupervisorConfig,
    mode: Mode,
    /// Follow side, present exactly while in wall-following mode.
    direction: Option<FollowDirection>,
    pid: PidState,
    /// Most recent oriented tangent, kept for coasting through wall-estimate
    /// dropouts.
    last_tangent: Option<Vec2>,
    ticks_without_wall: u32,
    ticks_since_switch: u32,
}

impl Supervisor {
    pub fn new(config: SupervisorConfig) -> Self {
        let initial_dwell = config.hysteresis_ticks.saturating_add(1);
        Supervisor {
            config,
            mode: Mode::Apf,
            direction: None,
            pid: PidState::new(),
            last_tangent: None,
            ticks_without_wall: 0,
            // A legitimate first switch is never delayed by the dwell gate.
            ticks_since_switch: initial_dwell,
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn policy(&self) -> Policy {
        self.config.policy
    }

    /// Active follow side; present exactly while wall-following.
    pub fn direction(&self) -> Option<FollowDirection> {
        self.direction
    }

    pub fn ticks_since_switch(&self) -> u32 {
        self.ticks_since_switch
    }

    fn dwell_satisfied(&self) -> bool {
        self.ticks_since_switch > self.config.hysteresis_ticks
    }

    /// Exit predicate for potential-field mode. `None` means stay.
    fn wfm_switch_reason(
        &self,
        f_total: Vec2,
        position: Vec2,
        move_dir: Vec2,
        memory: &TrajectoryMemory,
        t_now: f64,
        dist_to_goal: f64,
    ) -> Option<SwitchReason> {
        if self.config.policy == Policy::ApfOnly {
            return None;
        }
        if f_total.norm() < self.config.f_th && dist_to_goal > self.config.goal_tol {
            return Some(SwitchReason::LocalMinimum);
        }
        if self.config.policy.apf_uses_memory()
            && memory.find_revisit(position, move_dir, t_now).is_some()
        {
            return Some(SwitchReason::Revisit);
        }
        None
    }

    /// Exit predicate for wall-following mode. `None` means stay.
    /// `ticks_without_wall` is passed in so the query form and the
    /// stateful step share one definition.
    fn apf_switch_reason(
        &self,
        position: Vec2,
        goal: Vec2,
        wall: Option<&WallEstimate>,
        memory: &TrajectoryMemory,
        ticks_without_wall: u32,
    ) -> Option<SwitchReason> {
        if ticks_without_wall >= self.config.n_coast {
            return Some(SwitchReason::WallLost);
        }
        let wall = wall?;
        let direction = self.direction?;
        let theta_0 = oriented_tangent(wall, direction).angle();
        let theta_goal = (goal - position).angle();
        if wrap_angle(theta_goal - theta_0).abs() <= FRAC_PI_2 {
            return None;
        }
        if self.config.policy.wfm_uses_memory() && memory.crosses_history(position, goal) {
            return None;
        }
        Some(SwitchReason::GoalAngleClear)
    }

    /// Query form of the wall-following entry test (valid in
    /// potential-field mode). True when a stall or, under the full policy,
    /// a revisit calls for wall-following.
    pub fn should_switch_to_wfm(
        &self,
        f_total: Vec2,
        position: Vec2,
        velocity_direction: Vec2,
        memory: &TrajectoryMemory,
        t_now: f64,
        dist_to_goal: f64,
    ) -> bool {
        self.wfm_switch_reason(
            f_total,
            position,
            velocity_direction,
            memory,
            t_now,
            dist_to_goal,
        )
        .is_some()
    }

    /// Query form of the potential-field re-entry test (valid in
    /// wall-following mode). Where history is consulted, the dwell gate is
    /// part of the predicate.
    pub fn should_switch_to_apf(
        &self,
        position: Vec2,
        goal: Vec2,
        wall: Option<&WallEstimate>,
        memory: &TrajectoryMemory,
    ) -> bool {
        match self.apf_switch_reason(position, goal, wall, memory, self.ticks_without_wall) {
            Some(SwitchReason::WallLost) => true,
            Some(_) => self.config.policy == Policy::Memoryless || self.dwell_satisfied(),
            None => false,
        }
    }

    /// Advance the state machine one tick and return the controller to use.
    pub fn step(&mut self, inputs: &SupervisorInputs<'_>, memory: &TrajectoryMemory) -> Decision {
        self.ticks_since_switch = self.ticks_since_switch.saturating_add(1);
        match self.mode {
            Mode::Apf => {
                let reason = self.wfm_switch_reason(
                    inputs.f_total,
                    inputs.position,
                    inputs.move_dir,
                    memory,
                    inputs.t,
                    inputs.dist_to_goal,
                );
                // Entry needs a wall to follow; with none in sight the
                // switch waits.
                if let (Some(reason), Some(wall), true) =
                    (reason, inputs.wall, self.dwell_satisfied())
                {
                    let consulted = self.config.policy.wfm_uses_memory().then_some(memory);
                    let dir = choose_direction(
                        inputs.position,
                        consulted,
                        inputs.goal,
                        wall,
                        self.config.d_th,
                    );
                    self.mode = Mode::Wfm;
                    self.direction = Some(dir);
                    self.pid.reset();
                    self.last_tangent = Some(oriented_tangent(wall, dir));
                    self.ticks_without_wall = 0;
                    self.ticks_since_switch = 0;
                    return Decision {
                        mode: Mode::Wfm,
                        event: Some(SwitchEvent {
                            from: Mode::Apf,
                            to: Mode::Wfm,
                            reason,
                        }),
                    };
                }
                Decision {
                    mode: Mode::Apf,
                    event: None,
                }
            }
            Mode::Wfm => {
                if inputs.wall.is_some() {
                    self.ticks_without_wall = 0;
                } else {
                    self.ticks_without_wall = self.ticks_without_wall.saturating_add(1);
                }
                let reason = self.apf_switch_reason(
                    inputs.position,
                    inputs.goal,
                    inputs.wall,
                    memory,
                    self.ticks_without_wall,
                );
                if let (Some(reason), true) = (reason, self.dwell_satisfied()) {
                    self.mode = Mode::Apf;
                    self.direction = None;
                    self.ticks_since_switch = 0;
                    return Decision {
                        mode: Mode::Apf,
                        event: Some(SwitchEvent {
                            from: Mode::Wfm,
                            to: Mode::Apf,
                            reason,
                        }),
                    };
                }
                if let (Some(wall), Some(dir)) = (inputs.wall, self.direction) {
                    self.last_tangent = Some(oriented_tangent(wall, dir));
                }
                Decision {
                    mode: Mode::Wfm,
                    event: None,
                }
            }
        }
    }

    /// Wall-following velocity for this tick: the PID-controlled slide
    /// when a wall estimate exists, else a straight coast along the last
    /// seen tangent.
    pub fn wfm_velocity(
        &mut self,
        wall: Option<&WallEstimate>,
        params: &WfmParams,
        dt: f64,
    ) -> Vec2 {
        debug_assert_eq!(self.mode, Mode::Wfm);
        match (wall, self.direction) {
            (Some(w), Some(dir)) => crate::wfm::wfm_velocity(w, dir, params, &mut self.pid, dt),
            _ => {
                let tangent = self
                    .last_tangent
                    .expect("wall-following mode always has a last tangent");
                tangent * params.v_tangent_mag
            }
        }
    }
}
