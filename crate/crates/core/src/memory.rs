//! Key-frame trajectory memory.
//!
//! A sparse, append-only record of where the robot has been and which way
//! it was moving. Frames are laid down only when the robot enters new
//! territory, changes direction near old territory, or stalls in a force
//! balance; that keeps the store small while preserving enough history to
//! answer the two questions the supervisor asks: "would this move cross my
//! past path?" and "am I back somewhere I already was, moving the same
//! way?"

use crate::supervisor::Mode;
use crate::wfm::FollowDirection;
use crate::world::{angle_between, segments_intersect, Vec2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MemoryError {
    #[error("{0} must be positive and finite")]
    BadParam(&'static str),
    #[error("key frame time {t} is not after the last stored time {last}")]
    NonMonotonicTime { t: f64, last: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemoryParams {
    /// Position radius for "near an existing frame" tests.
    pub d_th: f64,
    /// Direction tolerance for "moving the same way" tests.
    pub theta_th: f64,
    /// Net-force magnitude at or below which the robot counts as stalled.
    pub f_th: f64,
    /// Frames younger than this are invisible to revisit queries, so the
    /// robot cannot "revisit" its own immediate past.
    pub t_refractory: f64,
}

impl MemoryParams {
    pub fn new(
        d_th: f64,
        theta_th: f64,
        f_th: f64,
        t_refractory: f64,
    ) -> Result<Self, MemoryError> {
        for (name, v) in [("d_th", d_th), ("theta_th", theta_th)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(MemoryError::BadParam(name));
            }
        }
        for (name, v) in [("f_th", f_th), ("t_refractory", t_refractory)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(MemoryError::BadParam(name));
            }
        }
        Ok(MemoryParams {
            d_th,
            theta_th,
            f_th,
            t_refractory,
        })
    }
}

/// One remembered waypoint.
#[derive(Clone, Debug, PartialEq)]
pub struct KeyFrame {
    /// Simulation clock at record time.
    pub t: f64,
    pub position: Vec2,
    /// Unit moving direction at record time (heading when stationary).
    pub direction: Vec2,
    /// Set when the frame was recorded because the net force had stalled.
    pub is_local_min: bool,
    /// Wall-follow side in effect, tagged on wall-following frames only.
    pub wfm_direction: Option<FollowDirection>,
    pub mode: Mode,
}

/// Append-only key-frame store with the history queries the supervisor
/// needs. One instance per run; queries are linear scans, which is fine at
/// the few hundred frames a run produces.
#[derive(Clone, Debug)]
pub struct TrajectoryMemory {
    params: MemoryParams,
    frames: Vec<KeyFrame>,
    /// Time of the most recent stalled (local-minimum) frame.
    t_m: Option<f64>,
}

impl TrajectoryMemory {
    pub fn new(params: MemoryParams) -> Self {
        TrajectoryMemory {
            params,
            frames: Vec::new(),
            t_m: None,
        }
    }

    pub fn params(&self) -> &MemoryParams {
        &self.params
    }

    pub fn frames(&self) -> &[KeyFrame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Time of the most recent local-minimum frame, if any.
    pub fn last_local_min_time(&self) -> Option<f64> {
        self.t_m
    }

    /// Record a frame if the current state earns one. A frame is stored
    /// when any of these hold:
    ///
    ///  i. the position is farther than `d_th` from every stored frame
    ///     (new territory; vacuously true for the first frame);
    /// ii. some frame is within `d_th` but the moving direction differs by
    ///     more than `theta_th` from every such nearby frame;
    /// iii. the net force magnitude is at or below `f_th` (stalled); this
    ///      also flags the frame as a local minimum.
    ///
    /// Returns whether a frame was appended.
    pub fn maybe_record(
        &mut self,
        t: f64,
        position: Vec2,
        direction: Vec2,
        force_norm: f64,
        mode: Mode,
        wfm_direction: Option<FollowDirection>,
    ) -> Result<bool, MemoryError> {
        debug_assert!(
            (direction.norm() - 1.0).abs() < 1e-6,
            "direction must be unit"
        );
        if let Some(last) = self.frames.last() {
            if t <= last.t {
                return Err(MemoryError::NonMonotonicTime { t, last: last.t });
            }
        }
        let mut any_near = false;
        let mut all_near_diverge = true;
        for f in &self.frames {
            if f.position.dist(position) <= self.params.d_th {
                any_near = true;
                if angle_between(direction, f.direction) <= self.params.theta_th {
                    all_near_diverge = false;
                    break;
                }
            }
        }
        let new_territory = !any_near;
        let new_direction = any_near && all_near_diverge;
        let stalled = force_norm <= self.params.f_th;
        if !(new_territory || new_direction || stalled) {
            return Ok(false);
        }
        self.frames.push(KeyFrame {
            t,
            position,
            direction,
            is_local_min: stalled,
            wfm_direction,
            mode,
        });
        if stalled {
            self.t_m = Some(t);
        }
        Ok(true)
    }

    /// Segments between consecutive frame positions, zero-length ones
    /// skipped. Empty for fewer than two frames.
    pub fn history_polyline(&self) -> Vec<(Vec2, Vec2)> {
        self.frames
            .windows(2)
            .map(|w| (w[0].position, w[1].position))
            .filter(|(a, b)| a.dist(*b) > 0.0)
            .collect()
    }

    /// Does the segment `from`→`to` cross the remembered path? The most
    /// recent history segment is ignored: it ends at the robot's own
    /// recent position and would trivially intersect any move from there.
    pub fn crosses_history(&self, from: Vec2, to: Vec2) -> bool {
        let segs = self.history_polyline();
        if segs.len() < 2 {
            return false;
        }
        segs[..segs.len() - 1]
            .iter()
            .any(|(a, b)| segments_intersect(from, to, *a, *b))
    }

    /// Is the robot back at a previously stored frame, moving the same
    /// way? Returns the earliest stored time `t_0` with position within
    /// `d_th`, direction within `theta_th`, laid down before the last
    /// local minimum, and older than the refractory window. No local
    /// minimum on record means no revisit, ever.
    pub fn find_revisit(&self, position: Vec2, direction: Vec2, t_now: f64) -> Option<f64> {
        let t_m = self.t_m?;
        self.frames
            .iter()
            .find(|f| {
                f.t < t_m
                    && t_now - f.t > self.params.t_refractory
                    && f.position.dist(position) <= self.params.d_th
                    && angle_between(direction, f.direction) <= self.params.theta_th
            })
            .map(|f| f.t)
    }
}
