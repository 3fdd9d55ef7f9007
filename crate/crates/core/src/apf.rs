//! Artificial potential field controller.
//!
//! The goal exerts an attraction that is quadratic near the goal and
//! conic (constant magnitude) beyond the blend radius `rho`; every sensed
//! obstacle point within the cutoff `d_c` exerts a barrier repulsion.
//! The commanded velocity follows the total force, with speed tapered
//! below the saturation force `f_sat`.

use crate::world::Vec2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ApfError {
    #[error("{0} must be positive and finite")]
    BadParam(&'static str),
    #[error("obstacle point coincides with the robot position")]
    ObstacleSingularity,
}

/// Which repulsive force law to apply.
///
/// `GradientConsistent` is the exact negative gradient of the barrier
/// potential and is the default. `Printed` is the law as commonly printed
/// in introductory derivations, eta * (1/d - 1/d_c) along the escape
/// direction: it omits the gradient's 1/d^2 factor, so it is not the
/// gradient of the potential. It stays selectable per scenario so the two
/// laws can be compared on the same arena.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepulsiveForm {
    #[serde(rename = "gradient")]
    GradientConsistent,
    Printed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApfParams {
    /// Attractive gain.
    pub zeta: f64,
    /// Radius where attraction blends from quadratic to conic.
    pub rho: f64,
    /// Repulsive gain.
    pub eta: f64,
    /// Repulsion cutoff distance; obstacle points further away are ignored.
    pub d_c: f64,
    /// Commanded speed ceiling.
    pub v_max: f64,
    /// Force magnitude at which the commanded speed reaches `v_max`.
    pub f_sat: f64,
    pub repulsive_form: RepulsiveForm,
}

impl ApfParams {
    pub fn new(zeta: f64, rho: f64, eta: f64, d_c: f64, v_max: f64) -> Result<Self, ApfError> {
        // Unobstructed far-field attraction has magnitude zeta * rho, so
        // saturating there keeps cruise speed at v_max.
        Self::with_saturation(zeta, rho, eta, d_c, v_max, zeta * rho)
    }

    pub fn with_saturation(
        zeta: f64,
        rho: f64,
        eta: f64,
        d_c: f64,
        v_max: f64,
        f_sat: f64,
    ) -> Result<Self, ApfError> {
        for (name, v) in [
            ("zeta", zeta),
            ("rho", rho),
            ("eta", eta),
            ("d_c", d_c),
            ("v_max", v_max),
            ("f_sat", f_sat),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ApfError::BadParam(name));
            }
        }
        Ok(ApfParams {
            zeta,
            rho,
            eta,
            d_c,
            v_max,
            f_sat,
            repulsive_form: RepulsiveForm::GradientConsistent,
        })
    }
}

/// Goal attraction energy: quadratic bowl inside `rho`, cone outside.
pub fn attractive_potential(p: Vec2, goal: Vec2, params: &ApfParams) -> f64 {
    let d = p.dist(goal);
    if d <= params.rho {
        0.5 * params.zeta * d * d
    } else {
        params.zeta * params.rho * d
    }
}

/// Negative gradient of `attractive_potential` (up to the conic kink,
/// where the one-sided gradients agree in magnitude).
pub fn attractive_force(p: Vec2, goal: Vec2, params: &ApfParams) -> Vec2 {
    let to_robot = p - goal;
    let d = to_robot.norm();
    if d <= params.rho {
        -to_robot * params.zeta
    } else {
        -to_robot * (params.zeta * params.rho / d)
    }
}

/// Barrier energy of a single obstacle point; zero beyond the cutoff.
pub fn repulsive_potential(p: Vec2, obstacle: Vec2, params: &ApfParams) -> f64 {
    let d = p.dist(obstacle);
    if d > params.d_c || d == 0.0 {
        return 0.0;
    }
    let gap = 1.0 / d - 1.0 / params.d_c;
    0.5 * params.eta * gap * gap
}

/// Repulsion from a single obstacle point, directed away from it.
pub fn repulsive_force(p: Vec2, obstacle: Vec2, params: &ApfParams) -> Result<Vec2, ApfError> {
    let away = p - obstacle;
    let d = away.norm();
    if d < 1e-12 {
        return Err(ApfError::ObstacleSingularity);
    }
    if d > params.d_c {
        return Ok(Vec2::zero());
    }
    let gap = 1.0 / d - 1.0 / params.d_c;
    let magnitude = match params.repulsive_form {
        RepulsiveForm::GradientConsistent => params.eta * gap / (d * d),
        RepulsiveForm::Printed => params.eta * gap,
    };
    Ok(away * (magnitude / d))
}

/// Attraction plus the sum of repulsions from every obstacle point.
pub fn total_force(
    p: Vec2,
    goal: Vec2,
    obstacle_points: &[Vec2],
    params: &ApfParams,
) -> Result<Vec2, ApfError> {
    let mut f = attractive_force(p, goal, params);
    for &obs in obstacle_points {
        f = f + repulsive_force(p, obs, params)?;
    }
    Ok(f)
}

/// Velocity command for a given total force: full speed along the force
/// direction once `|f| >= f_sat`, linearly tapered below it.
pub fn apf_velocity(f: Vec2, params: &ApfParams) -> Vec2 {
    let n = f.norm();
    if n < 1e-12 {
        return Vec2::zero();
    }
    if n >= params.f_sat {
        f * (params.v_max / n)
    } else {
        f * (params.v_max / params.f_sat)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params() -> ApfParams {
        ApfParams::new(1.0, 3.0, 1.0, 1.5, 0.5).unwrap()
    }

    #[test]
    fn param_validation() {
        assert_eq!(
            ApfParams::new(0.0, 3.0, 1.0, 1.5, 0.5),
            Err(ApfError::BadParam("zeta"))
        );
        assert_eq!(
            ApfParams::new(1.0, 3.0, 1.0, 1.5, f64::NAN),
            Err(ApfError::BadParam("v_max"))
        );
        let p = params();
        assert_eq!(p.f_sat, 3.0, "default saturation is zeta * rho");
    }

    #[test]
    fn attractive_potential_branches() {
        let goal = Vec2::zero();
        let p = ApfParams::new(1.0, 5.0, 1.0, 1.5, 0.5).unwrap();
        assert_eq!(attractive_potential(goal, goal, &p), 0.0);
        // Quadratic branch: 0.5 * 1 * 2^2.
        assert!((attractive_potential(Vec2::new(2.0, 0.0), goal, &p) - 2.0).abs() < 1e-12);
        // Conic branch: 1 * 5 * 10.
        assert!((attractive_potential(Vec2::new(10.0, 0.0), goal, &p) - 50.0).abs() < 1e-12);
    }

    #[test]
    fn attractive_force_examples() {
        let goal = Vec2::zero();
        let p = ApfParams::new(1.0, 5.0, 1.0, 1.5, 0.5).unwrap();
        let f = attractive_force(Vec2::new(10.0, 0.0), goal, &p);
        assert!((f - Vec2::new(-5.0, 0.0)).norm() < 1e-12);

        let p2 = ApfParams::new(2.0, 5.0, 1.0, 1.5, 0.5).unwrap();
        let f = attractive_force(Vec2::new(1.0, 1.0), goal, &p2);
        assert!((f - Vec2::new(-2.0, -2.0)).norm() < 1e-12);
    }

    #[test]
    fn repulsive_force_examples() {
        let p = ApfParams::new(1.0, 3.0, 1.0, 2.0, 0.5).unwrap();
        // Outside cutoff: zero.
        let f = repulsive_force(Vec2::new(3.0, 0.0), Vec2::zero(), &p).unwrap();
        assert_eq!(f, Vec2::zero());
        // At distance 1 with d_c = 2: (1/1 - 1/2) * 1/1 = 0.5, pointing away.
        let f = repulsive_force(Vec2::new(1.0, 0.0), Vec2::zero(), &p).unwrap();
        assert!((f - Vec2::new(0.5, 0.0)).norm() < 1e-12);
        // Robot on top of the obstacle point: error.
        assert_eq!(
            repulsive_force(Vec2::zero(), Vec2::zero(), &p),
            Err(ApfError::ObstacleSingularity)
        );
    }

    #[test]
    fn repulsion_grows_monotonically_toward_contact() {
        let p = params();
        let mut last = 0.0;
        for k in 1..60 {
            let d = p.d_c * (1.0 - k as f64 / 61.0);
            let f = repulsive_force(Vec2::new(d, 0.0), Vec2::zero(), &p)
                .unwrap()
                .norm();
            assert!(f > last, "repulsion must grow as distance shrinks");
            last = f;
        }
    }

    #[test]
    fn total_force_cancels_for_symmetric_obstacles() {
        let p = params();
        // Goal straight ahead, two obstacle points placed mirror-symmetric
        // about the x axis: lateral components cancel exactly.
        let obs = [Vec2::new(1.0, 0.7), Vec2::new(1.0, -0.7)];
        let f = total_force(Vec2::zero(), Vec2::new(10.0, 0.0), &obs, &p).unwrap();
        assert!(f.y.abs() < 1e-12);
    }

    #[test]
    fn balanced_local_minimum_found_by_bisection() {
        let p = params();
        let goal = Vec2::new(100.0, 0.0);
        // Far-field attraction has magnitude zeta * rho = 3. Find the
        // obstacle distance x where the barrier repulsion balances it:
        // (1/x - 1/d_c) / x^2 = 3, by bisection on the monotone barrier.
        let balance = |x: f64| (1.0 / x - 1.0 / p.d_c) / (x * x) - p.zeta * p.rho;
        let (mut lo, mut hi) = (0.05, p.d_c - 1e-6);
        assert!(balance(lo) > 0.0 && balance(hi) < 0.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if balance(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let x = 0.5 * (lo + hi);
        // Obstacle directly between robot and goal at that distance: the
        // total force vanishes.
        let f = total_force(Vec2::zero(), goal, &[Vec2::new(x, 0.0)], &p).unwrap();
        assert!(f.norm() < 1e-6, "forces should balance, |f| = {}", f.norm());
    }

    #[test]
    fn velocity_saturation() {
        let p = params(); // f_sat = 3, v_max = 0.5
        assert_eq!(apf_velocity(Vec2::zero(), &p), Vec2::zero());
        // Strong force: full speed along the force.
        let v = apf_velocity(Vec2::new(0.0, 30.0), &p);
        assert!((v - Vec2::new(0.0, 0.5)).norm() < 1e-12);
        // Half of f_sat: half of v_max.
        let v = apf_velocity(Vec2::new(1.5, 0.0), &p);
        assert!((v - Vec2::new(0.25, 0.0)).norm() < 1e-12);
        // Exactly f_sat: both branches agree.
        let v = apf_velocity(Vec2::new(3.0, 0.0), &p);
        assert!((v - Vec2::new(0.5, 0.0)).norm() < 1e-12);
    }

    fn central_difference_gradient(u: impl Fn(Vec2) -> f64, p: Vec2) -> Vec2 {
        let h = 1e-6;
        Vec2::new(
            (u(Vec2::new(p.x + h, p.y)) - u(Vec2::new(p.x - h, p.y))) / (2.0 * h),
            (u(Vec2::new(p.x, p.y + h)) - u(Vec2::new(p.x, p.y - h))) / (2.0 * h),
        )
    }

    #[test]
    fn attractive_force_is_negative_gradient_both_branches() {
        let p = ApfParams::new(1.3, 2.0, 1.0, 1.5, 0.5).unwrap();
        let goal = Vec2::new(0.7, -0.3);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut checked_near = 0;
        let mut checked_far = 0;
        while checked_near < 200 || checked_far < 200 {
            let r: f64 = rng.gen_range(0.05..6.0);
            let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            // Stay away from the branch kink where the potential is not
            // differentiable in the classical sense.
            if (r - p.rho).abs() < 1e-3 {
                continue;
            }
            let pt = goal + Vec2::from_angle(theta) * r;
            let grad = central_difference_gradient(|q| attractive_potential(q, goal, &p), pt);
            let force = attractive_force(pt, goal, &p);
            let err = (force + grad).norm() / force.norm().max(1e-9);
            assert!(err < 1e-4, "rel err {err} at r={r}");
            if r < p.rho {
                checked_near += 1;
            } else {
                checked_far += 1;
            }
        }
    }

    #[test]
    fn repulsive_force_is_negative_gradient_inside_cutoff() {
        let p = params();
        let obs = Vec2::new(0.2, 0.4);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut checked = 0;
        while checked < 200 {
            let r: f64 = rng.gen_range(0.1..p.d_c - 1e-3);
            let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let pt = obs + Vec2::from_angle(theta) * r;
            let grad = central_difference_gradient(|q| repulsive_potential(q, obs, &p), pt);
            let force = repulsive_force(pt, obs, &p).unwrap();
            let err = (force + grad).norm() / force.norm().max(1e-9);
            assert!(err < 1e-4, "rel err {err} at r={r}");
            checked += 1;
        }
    }

    #[test]
    fn printed_form_differs_from_gradient_form() {
        let mut p = params();
        let f_grad = repulsive_force(Vec2::new(0.5, 0.0), Vec2::zero(), &p)
            .unwrap()
            .norm();
        p.repulsive_form = RepulsiveForm::Printed;
        let f_printed = repulsive_force(Vec2::new(0.5, 0.0), Vec2::zero(), &p)
            .unwrap()
            .norm();
        // At d = 0.5 the gradient-consistent law is 1/d^2 = 4x stronger.
        assert!((f_grad / f_printed - 4.0).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn attraction_points_at_goal(px in -5.0..5.0f64, py in -5.0..5.0f64) {
            let p = params();
            let goal = Vec2::new(1.0, 2.0);
            let pt = Vec2::new(px, py);
            prop_assume!(pt.dist(goal) > 1e-6);
            let f = attractive_force(pt, goal, &p);
            let to_goal = goal - pt;
            prop_assert!(f.dot(to_goal) > 0.0);
            prop_assert!(f.cross(to_goal).abs() < 1e-9 * f.norm() * to_goal.norm());
        }

        #[test]
        fn repulsion_points_away(dx in -2.0..2.0f64, dy in -2.0..2.0f64) {
            let p = params();
            let away = Vec2::new(dx, dy);
            prop_assume!(away.norm() > 0.05);
            let f = repulsive_force(away, Vec2::zero(), &p).unwrap();
            prop_assert!(f.dot(away) >= 0.0);
        }

        #[test]
        fn forces_are_translation_equivariant(
            sx in -3.0..3.0f64, sy in -3.0..3.0f64,
            px in -2.0..2.0f64, py in -2.0..2.0f64,
        ) {
            let p = params();
            let goal = Vec2::new(1.0, 1.0);
            let obs = [Vec2::new(0.5, -0.2)];
            let pt = Vec2::new(px, py);
            prop_assume!(pt.dist(obs[0]) > 0.05);
            let shift = Vec2::new(sx, sy);
            let f0 = total_force(pt, goal, &obs, &p).unwrap();
            let f1 = total_force(pt + shift, goal + shift, &[obs[0] + shift], &p).unwrap();
            prop_assert!((f0 - f1).norm() < 1e-9);
        }

        #[test]
        fn commanded_speed_never_exceeds_v_max(fx in -50.0..50.0f64, fy in -50.0..50.0f64) {
            let p = params();
            let v = apf_velocity(Vec2::new(fx, fy), &p);
            prop_assert!(v.norm() <= p.v_max + 1e-12);
        }
    }
}
