//! Wall-following controller.
//!
//! Adjacent rangefinder beams that both see a surface triangulate a local
//! wall line. The robot slides along that line at a fixed tangential
//! speed while a PID loop on the wall distance holds the stand-off, and a
//! remembered follow direction (wall kept to the robot's left or right)
//! decides which way along the wall to go.

use crate::memory::TrajectoryMemory;
use crate::sensing::{SensorConfig, SensorScan};
use crate::world::{wrap_angle, Vec2};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum WfmError {
    #[error("{0} must be positive and finite")]
    BadParam(&'static str),
}

/// Which side of the robot the wall is kept on while following.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FollowDirection {
    Left,
    Right,
}

impl FollowDirection {
    pub fn opposite(self) -> Self {
        match self {
            FollowDirection::Left => FollowDirection::Right,
            FollowDirection::Right => FollowDirection::Left,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WfmParams {
    /// Stand-off distance held from the wall.
    pub d_wall: f64,
    /// Constant speed along the wall tangent.
    pub v_tangent_mag: f64,
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// Anti-windup clamp on the PID integral term.
    pub integral_limit: f64,
}

impl WfmParams {
    pub fn new(d_wall: f64, v_tangent_mag: f64) -> Result<Self, WfmError> {
        Self::with_gains(d_wall, v_tangent_mag, 2.0, 0.1, 0.5, 1.0)
    }

    pub fn with_gains(
        d_wall: f64,
        v_tangent_mag: f64,
        kp: f64,
        ki: f64,
        kd: f64,
        integral_limit: f64,
    ) -> Result<Self, WfmError> {
        for (name, v) in [("d_wall", d_wall), ("v_tangent_mag", v_tangent_mag)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(WfmError::BadParam(name));
            }
        }
        for (name, v) in [
            ("kp", kp),
            ("ki", ki),
            ("kd", kd),
            ("integral_limit", integral_limit),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(WfmError::BadParam(name));
            }
        }
        Ok(WfmParams {
            d_wall,
            v_tangent_mag,
            kp,
            ki,
            kd,
            integral_limit,
        })
    }
}

/// PID integrator state for the stand-off loop.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PidState {
    integral: f64,
    prev_error: Option<f64>,
}

impl PidState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn reset(&mut self) {
        self.integral = 0.0;
        self.prev_error = None;
    }

    fn update(&mut self, error: f64, dt: f64, params: &WfmParams) -> f64 {
        self.integral =
            (self.integral + error * dt).clamp(-params.integral_limit, params.integral_limit);
        let derivative = match self.prev_error {
            Some(prev) => (error - prev) / dt,
            None => 0.0,
        };
        self.prev_error = Some(error);
        params.kp * error + params.ki * self.integral + params.kd * derivative
    }
}

/// Local wall line triangulated from one beam pair.
#[derive(Clone, Debug, PartialEq)]
pub struct WallEstimate {
    /// Unit normal of the wall line, pointing from the wall toward the robot.
    pub normal: Vec2,
    /// True perpendicular distance from the robot to the wall line.
    pub distance: f64,
    /// Indices of the two beams the estimate came from.
    pub source_pair: (usize, usize),
}

/// Triangulated proximity score of a beam pair: half the perpendicular
/// distance from the robot to the line through the two sensed points,
/// expressed purely in the two readings and their angular separation.
/// Valid for separations strictly below a quarter turn.
pub fn pair_distance(d_i: f64, d_j: f64, theta_ij: f64) -> f64 {
    debug_assert!(theta_ij > 0.0 && theta_ij < FRAC_PI_2);
    let chord = (d_i * d_i + d_j * d_j - 2.0 * d_i * d_j * theta_ij.cos()).sqrt();
    0.5 * d_i * d_j * theta_ij.sin() / chord
}

/// Pick the closest wall line seen by any qualifying beam pair.
///
/// A pair qualifies when both readings are unsaturated and the beams are
/// separated by strictly less than a quarter turn. Minimising the
/// triangulated score is equivalent to minimising the true point-to-line
/// distance, which is what `distance` reports.
pub fn estimate_wall(
    scan: &SensorScan,
    position: Vec2,
    heading: f64,
    config: &SensorConfig,
) -> Option<WallEstimate> {
    let angles = config.mount_angles();
    let readings = scan.readings();
    let mut best: Option<(f64, usize, usize)> = None;
    for i in 0..angles.len() {
        if readings[i] >= config.max_range {
            continue;
        }
        for j in i + 1..angles.len() {
            if readings[j] >= config.max_range {
                continue;
            }
            let sep = wrap_angle(angles[i] - angles[j]).abs();
            if sep <= 0.0 || sep >= FRAC_PI_2 {
                continue;
            }
            let score = pair_distance(readings[i], readings[j], sep);
            if best.is_none_or(|(s, _, _)| score < s) {
                best = Some((score, i, j));
            }
        }
    }
    let (_, i, j) = best?;
    let p_i = position + Vec2::from_angle(heading + angles[i]) * readings[i];
    let p_j = position + Vec2::from_angle(heading + angles[j]) * readings[j];
    let tangent = (p_j - p_i).normalized()?;
    let offset = position - p_i;
    let perp = offset - tangent * offset.dot(tangent);
    let distance = perp.norm();
    let normal = perp.normalized()?;
    Some(WallEstimate {
        normal,
        distance,
        source_pair: (i, j),
    })
}

/// Unit direction of travel along the wall for a given follow side.
pub fn oriented_tangent(wall: &WallEstimate, direction: FollowDirection) -> Vec2 {
    // With the wall on the left, travel is the normal rotated +90 degrees;
    // on the right, -90.
    match direction {
        FollowDirection::Left => wall.normal.perp(),
        FollowDirection::Right => -wall.normal.perp(),
    }
}

/// Velocity command: constant tangential speed plus a PID correction along
/// the normal that drives the stand-off error to zero. The correction is
/// clamped to the tangential speed so the heading never reverses.
pub fn wfm_velocity(
    wall: &WallEstimate,
    direction: FollowDirection,
    params: &WfmParams,
    pid: &mut PidState,
    dt: f64,
) -> Vec2 {
    let error = wall.distance - params.d_wall;
    let u = pid
        .update(error, dt, params)
        .clamp(-params.v_tangent_mag, params.v_tangent_mag);
    // Positive error (too far out) moves the robot toward the wall,
    // against the outward normal.
    let v_normal = -wall.normal * u;
    let v_tangent = oriented_tangent(wall, direction) * params.v_tangent_mag;
    v_tangent + v_normal
}

/// Decide which way to follow a newly engaged wall.
///
/// If remembered key frames near this position carry a follow-direction
/// tag, the previous choice evidently did not work out: take the opposite.
/// Otherwise pick the tangent that makes more progress toward the goal,
/// preferring `Left` on ties.
pub fn choose_direction(
    position: Vec2,
    memory: Option<&TrajectoryMemory>,
    goal: Vec2,
    wall: &WallEstimate,
    d_th: f64,
) -> FollowDirection {
    if let Some(mem) = memory {
        let tagged = mem
            .frames()
            .iter()
            .rev()
            .find(|f| f.position.dist(position) <= d_th && f.wfm_direction.is_some());
        if let Some(frame) = tagged {
            return frame.wfm_direction.expect("filtered on tag").opposite();
        }
    }
    let to_goal = goal - position;
    let left_progress = oriented_tangent(wall, FollowDirection::Left).dot(to_goal);
    let right_progress = oriented_tangent(wall, FollowDirection::Right).dot(to_goal);
    if left_progress >= right_progress {
        FollowDirection::Left
    } else {
        FollowDirection::Right
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::memory::{MemoryParams, TrajectoryMemory};
    use crate::sensing::scan;
    use crate::supervisor::Mode;
    use crate::world::{Polygon, Rect, World};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn params() -> WfmParams {
        WfmParams::new(0.5, 0.5).unwrap()
    }

    #[test]
    fn param_validation() {
        assert_eq!(WfmParams::new(0.0, 0.5), Err(WfmError::BadParam("d_wall")));
        assert_eq!(
            WfmParams::with_gains(0.5, 0.5, -1.0, 0.0, 0.0, 1.0),
            Err(WfmError::BadParam("kp"))
        );
    }

    #[test]
    fn pair_distance_frozen_value() {
        // Equal unit readings separated by 45 degrees.
        let d = pair_distance(1.0, 1.0, FRAC_PI_4);
        assert!((d - 0.46193976625564337).abs() < 1e-12);
    }

    #[test]
    fn pair_distance_narrow_angle_limit() {
        // For equal readings the score tends to d/2 as the separation
        // closes: the single-point degenerate case.
        let d = pair_distance(2.0, 2.0, 1e-4);
        assert!((d - 1.0).abs() < 1e-6, "{d}");
    }

    #[test]
    fn pair_distance_is_half_point_to_line_distance() {
        // Robot at origin, beams at angles a and b hitting a known line.
        let cases = [
            (1.0, 2f64.sqrt(), FRAC_PI_4, 1.0), // wall x=1 seen at 0 and 45 deg
            (0.5, 0.5 * 2f64.sqrt(), FRAC_PI_4, 0.5),
        ];
        for (d_i, d_j, sep, true_dist) in cases {
            let s = pair_distance(d_i, d_j, sep);
            assert!(
                (s - 0.5 * true_dist).abs() < 1e-12,
                "score {s} vs half of {true_dist}"
            );
        }
    }

    proptest! {
        #[test]
        fn pair_distance_scales_linearly(
            d_i in 0.1..4.0f64,
            d_j in 0.1..4.0f64,
            theta in 0.05..1.5f64,
            c in 0.1..5.0f64,
        ) {
            let base = pair_distance(d_i, d_j, theta);
            let scaled = pair_distance(c * d_i, c * d_j, theta);
            prop_assert!((scaled - c * base).abs() < 1e-9 * c.max(1.0));
        }
    }

    fn wall_world() -> (World, SensorConfig) {
        let bounds = Rect::new(Vec2::new(-10.0, -10.0), Vec2::new(10.0, 10.0)).unwrap();
        let wall = Polygon::rect(Vec2::new(1.0, -6.0), Vec2::new(1.2, 6.0)).unwrap();
        let w = World::new(
            vec![wall],
            Vec2::new(-9.0, 0.0),
            Vec2::new(9.0, 0.0),
            bounds,
        )
        .unwrap();
        (w, SensorConfig::ring8(4.0, 0.0))
    }

    #[test]
    fn estimates_vertical_wall() {
        let (w, cfg) = wall_world();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = scan(&w, Vec2::zero(), 0.0, &cfg, &mut rng);
        let est = estimate_wall(&s, Vec2::zero(), 0.0, &cfg).unwrap();
        assert!((est.distance - 1.0).abs() < 1e-9);
        assert!((est.normal - Vec2::new(-1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn no_estimate_when_everything_saturates() {
        let bounds = Rect::new(Vec2::new(-10.0, -10.0), Vec2::new(10.0, 10.0)).unwrap();
        let w = World::new(vec![], Vec2::new(-9.0, 0.0), Vec2::new(9.0, 0.0), bounds).unwrap();
        let cfg = SensorConfig::ring8(4.0, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = scan(&w, Vec2::zero(), 0.0, &cfg, &mut rng);
        assert!(estimate_wall(&s, Vec2::zero(), 0.0, &cfg).is_none());
    }

    #[test]
    fn nearest_of_two_walls_wins() {
        let bounds = Rect::new(Vec2::new(-10.0, -10.0), Vec2::new(10.0, 10.0)).unwrap();
        let near = Polygon::rect(Vec2::new(1.0, -6.0), Vec2::new(1.2, 6.0)).unwrap();
        let far = Polygon::rect(Vec2::new(-6.0, -3.2), Vec2::new(6.0, -3.0)).unwrap();
        let w = World::new(
            vec![near, far],
            Vec2::new(-9.0, 5.0),
            Vec2::new(9.0, 5.0),
            bounds,
        )
        .unwrap();
        let cfg = SensorConfig::ring8(4.0, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = scan(&w, Vec2::zero(), 0.0, &cfg, &mut rng);
        let est = estimate_wall(&s, Vec2::zero(), 0.0, &cfg).unwrap();
        assert!((est.distance - 1.0).abs() < 1e-9, "x=1 wall is nearer");
        assert!(est.normal.x < -0.99);
    }

    // Brute-force reference: enumerate qualifying pairs, recompute the two
    // surface points and the exact point-to-line distance from scratch.
    fn oracle_min_line_distance(
        s: &SensorScan,
        position: Vec2,
        heading: f64,
        cfg: &SensorConfig,
    ) -> Option<f64> {
        let angles = cfg.mount_angles();
        let mut best: Option<f64> = None;
        for i in 0..angles.len() {
            for j in 0..angles.len() {
                if i >= j || s.readings()[i] >= cfg.max_range || s.readings()[j] >= cfg.max_range {
                    continue;
                }
                let mut sep = (angles[i] - angles[j]).abs() % (2.0 * PI);
                if sep > PI {
                    sep = 2.0 * PI - sep;
                }
                if sep <= 0.0 || sep >= FRAC_PI_2 {
                    continue;
                }
                let pi = position + Vec2::from_angle(heading + angles[i]) * s.readings()[i];
                let pj = position + Vec2::from_angle(heading + angles[j]) * s.readings()[j];
                let e = pj - pi;
                if e.norm() < 1e-12 {
                    continue;
                }
                let dist = (e.cross(position - pi) / e.norm()).abs();
                best = Some(best.map_or(dist, |b: f64| b.min(dist)));
            }
        }
        best
    }

    #[test]
    fn selected_pair_minimises_true_line_distance() {
        // 500 random poses in a cluttered arena; the estimator's reported
        // distance must equal the brute-force minimum over all pairs.
        let bounds = Rect::new(Vec2::new(-8.0, -8.0), Vec2::new(8.0, 8.0)).unwrap();
        let obstacles = vec![
            Polygon::rect(Vec2::new(1.0, -5.0), Vec2::new(1.6, 5.0)).unwrap(),
            Polygon::rect(Vec2::new(-6.0, -6.5), Vec2::new(6.0, -6.0)).unwrap(),
            Polygon::new(vec![
                Vec2::new(-4.0, 2.0),
                Vec2::new(-2.0, 3.0),
                Vec2::new(-3.0, 5.0),
                Vec2::new(-5.0, 4.0),
            ])
            .unwrap(),
        ];
        let w = World::new(
            obstacles,
            Vec2::new(-7.0, -7.0),
            Vec2::new(7.0, 7.0),
            bounds,
        )
        .unwrap();
        let cfg = SensorConfig::ring8(4.0, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut checked = 0;
        while checked < 500 {
            let p = Vec2::new(rand::Rng::gen_range(&mut rng, -7.5..7.5), {
                rand::Rng::gen_range(&mut rng, -5.5..7.5)
            });
            if w.point_in_obstacle(p) || w.boundary_distance(p) < 0.05 {
                continue;
            }
            let heading = rand::Rng::gen_range(&mut rng, -PI..PI);
            let s = scan(&w, p, heading, &cfg, &mut rng);
            let est = estimate_wall(&s, p, heading, &cfg);
            let want = oracle_min_line_distance(&s, p, heading, &cfg);
            match (est, want) {
                (None, None) => {}
                (Some(e), Some(d)) => {
                    assert!(
                        (e.distance - d).abs() < 1e-9,
                        "estimate {} vs oracle {d} at {p:?}",
                        e.distance
                    );
                }
                (e, d) => panic!("presence mismatch at {p:?}: {e:?} vs {d:?}"),
            }
            checked += 1;
        }
    }

    #[test]
    fn oriented_tangent_sides() {
        let wall = WallEstimate {
            normal: Vec2::new(0.0, 1.0), // wall below the robot
            distance: 0.5,
            source_pair: (0, 1),
        };
        // Wall on the left means heading -x; on the right, +x.
        assert!(
            (oriented_tangent(&wall, FollowDirection::Left) - Vec2::new(-1.0, 0.0)).norm() < 1e-12
        );
        assert!(
            (oriented_tangent(&wall, FollowDirection::Right) - Vec2::new(1.0, 0.0)).norm() < 1e-12
        );
    }

    #[test]
    fn velocity_on_track_is_pure_tangent() {
        let wall = WallEstimate {
            normal: Vec2::new(0.0, 1.0),
            distance: 0.5,
            source_pair: (0, 1),
        };
        let p = params();
        let mut pid = PidState::new();
        let v = wfm_velocity(&wall, FollowDirection::Right, &p, &mut pid, 0.05);
        assert!((v - Vec2::new(0.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn velocity_correction_example() {
        // Stand-off error +0.2 with pure proportional gain 1: normal speed
        // 0.2 toward the wall on top of tangential 0.5.
        let wall = WallEstimate {
            normal: Vec2::new(0.0, 1.0),
            distance: 0.7,
            source_pair: (0, 1),
        };
        let p = WfmParams::with_gains(0.5, 0.5, 1.0, 0.0, 0.0, 1.0).unwrap();
        let mut pid = PidState::new();
        let v = wfm_velocity(&wall, FollowDirection::Right, &p, &mut pid, 0.05);
        assert!((v - Vec2::new(0.5, -0.2)).norm() < 1e-12);
        assert!((v.norm() - 0.5385164807134504).abs() < 1e-12);
    }

    #[test]
    fn velocity_correction_reverses_when_too_close() {
        let wall = WallEstimate {
            normal: Vec2::new(0.0, 1.0),
            distance: 0.3,
            source_pair: (0, 1),
        };
        let p = params();
        let mut pid = PidState::new();
        let v = wfm_velocity(&wall, FollowDirection::Right, &p, &mut pid, 0.05);
        assert!(v.y > 0.0, "too close: correction pushes away from the wall");
    }

    #[test]
    fn pid_correction_is_clamped_to_tangent_speed() {
        let wall = WallEstimate {
            normal: Vec2::new(0.0, 1.0),
            distance: 4.0,
            source_pair: (0, 1),
        };
        let p = params();
        let mut pid = PidState::new();
        let v = wfm_velocity(&wall, FollowDirection::Right, &p, &mut pid, 0.05);
        assert!((v.y.abs() - p.v_tangent_mag).abs() < 1e-12);
    }

    #[test]
    fn choose_direction_prefers_goal_progress() {
        let wall = WallEstimate {
            normal: Vec2::new(0.0, 1.0),
            distance: 0.5,
            source_pair: (0, 1),
        };
        // Goal to the right: right-follow tangent (+x) wins.
        let d = choose_direction(Vec2::zero(), None, Vec2::new(5.0, 1.0), &wall, 0.3);
        assert_eq!(d, FollowDirection::Right);
        // Goal to the left.
        let d = choose_direction(Vec2::zero(), None, Vec2::new(-5.0, 1.0), &wall, 0.3);
        assert_eq!(d, FollowDirection::Left);
        // Dead tie (goal straight above): Left by convention.
        let d = choose_direction(Vec2::zero(), None, Vec2::new(0.0, 5.0), &wall, 0.3);
        assert_eq!(d, FollowDirection::Left);
    }

    fn memory_with_tagged_frame(at: Vec2, dir: FollowDirection) -> TrajectoryMemory {
        let mp = MemoryParams::new(0.3, FRAC_PI_4, 0.05, 2.0).unwrap();
        let mut mem = TrajectoryMemory::new(mp);
        mem.maybe_record(0.0, at, Vec2::new(1.0, 0.0), 1.0, Mode::Wfm, Some(dir))
            .unwrap();
        mem
    }

    #[test]
    fn choose_direction_flips_on_remembered_tag() {
        let wall = WallEstimate {
            normal: Vec2::new(0.0, 1.0),
            distance: 0.5,
            source_pair: (0, 1),
        };
        let mem = memory_with_tagged_frame(Vec2::new(0.1, 0.0), FollowDirection::Right);
        let d = choose_direction(Vec2::zero(), Some(&mem), Vec2::new(5.0, 1.0), &wall, 0.3);
        assert_eq!(d, FollowDirection::Left, "tagged frame nearby: flip");

        // Same tag but outside d_th: heuristic applies.
        let mem = memory_with_tagged_frame(Vec2::new(0.31, 0.0), FollowDirection::Right);
        let d = choose_direction(Vec2::zero(), Some(&mem), Vec2::new(5.0, 1.0), &wall, 0.3);
        assert_eq!(d, FollowDirection::Right);
    }

    #[test]
    fn standoff_converges_on_long_wall() {
        // Closed-loop check: follow a long straight wall for 30 simulated
        // seconds; after 10 s the stand-off error stays within 5 cm.
        let bounds = Rect::new(Vec2::new(-40.0, -10.0), Vec2::new(40.0, 10.0)).unwrap();
        let wall = Polygon::rect(Vec2::new(-39.0, -2.0), Vec2::new(39.0, -1.0)).unwrap();
        let w = World::new(
            vec![wall],
            Vec2::new(-35.0, 5.0),
            Vec2::new(35.0, 5.0),
            bounds,
        )
        .unwrap();
        let cfg = SensorConfig::ring8(4.0, 0.0);
        let p = params();
        let mut pid = PidState::new();
        let dt = 0.05;
        let mut pos = Vec2::new(-30.0, 0.2); // 1.2 above the wall top
        let mut heading = 0.0;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut t = 0.0;
        while t < 30.0 {
            let s = scan(&w, pos, heading, &cfg, &mut rng);
            let est = estimate_wall(&s, pos, heading, &cfg).expect("wall in range");
            let v = wfm_velocity(&est, FollowDirection::Right, &p, &mut pid, dt);
            pos = pos + v * dt;
            if v.norm() > 0.01 {
                heading = v.angle();
            }
            t += dt;
            if t > 10.0 {
                let standoff = pos.y - (-1.0);
                assert!(
                    (standoff - p.d_wall).abs() < 0.05,
                    "stand-off {standoff} at t={t}"
                );
            }
        }
        assert!(
            pos.x > -25.0,
            "the robot must have travelled along the wall"
        );
    }
}
