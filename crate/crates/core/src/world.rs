//! Arena geometry: vectors, polygonal obstacles, rectangular bounds and
//! the ray casting / segment intersection primitives the sensor model and
//! history checks are built on.
//!
//! The arena boundary is treated exactly like obstacle surface: rays hit
//! it and the robot disc may collide with it.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use thiserror::Error;

/// Tolerance for geometric predicates (orientation sign, point-on-segment,
/// degenerate input rejection).
pub const GEOM_EPS: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum GeomError {
    #[error("direction vector is zero or not finite")]
    InvalidDirection,
    #[error("segment endpoints coincide")]
    DegenerateSegment,
    #[error("coordinates must be finite")]
    NonFinite,
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon edge starting at vertex {0} has zero length")]
    DegenerateEdge(usize),
    #[error("polygon is self-intersecting (edges {0} and {1})")]
    SelfIntersecting(usize, usize),
    #[error("rectangle min must lie strictly below max on both axes")]
    EmptyRect,
}

#[derive(Debug, Error, PartialEq)]
pub enum WorldError {
    #[error(transparent)]
    Geometry(#[from] GeomError),
    #[error("start position lies inside obstacle {0}")]
    StartInsideObstacle(usize),
    #[error("goal position lies inside obstacle {0}")]
    GoalInsideObstacle(usize),
    #[error("{0} lies outside the arena bounds")]
    OutOfBounds(&'static str),
}

/// 2D vector, used for positions, velocities and forces alike.
#[derive(Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub const fn zero() -> Self {
        Vec2 { x: 0.0, y: 0.0 }
    }

    pub fn from_angle(theta: f64) -> Self {
        Vec2::new(theta.cos(), theta.sin())
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z component of the 3D cross product; positive when `o` is
    /// counter-clockwise from `self`.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dist(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    /// Unit vector in the same direction, or `None` for (near-)zero input.
    pub fn normalized(self) -> Option<Vec2> {
        let n = self.norm();
        if n < 1e-12 {
            None
        } else {
            Some(self / n)
        }
    }

    /// Rotation by +90 degrees (counter-clockwise).
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn rotated(self, theta: f64) -> Vec2 {
        let (s, c) = theta.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    fn div(self, k: f64) -> Vec2 {
        Vec2::new(self.x / k, self.y / k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl fmt::Debug for Vec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

// Serialized as a two-element array so scenario files stay compact.
impl Serialize for Vec2 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        (self.x, self.y).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Vec2 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let (x, y) = <(f64, f64)>::deserialize(d)?;
        Ok(Vec2::new(x, y))
    }
}

/// Unit direction vector; construction rejects zero and non-finite input.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dir2(Vec2);

impl Dir2 {
    pub fn new(v: Vec2) -> Result<Self, GeomError> {
        if !v.is_finite() {
            return Err(GeomError::InvalidDirection);
        }
        v.normalized().map(Dir2).ok_or(GeomError::InvalidDirection)
    }

    pub fn from_angle(theta: f64) -> Result<Self, GeomError> {
        if !theta.is_finite() {
            return Err(GeomError::InvalidDirection);
        }
        Ok(Dir2(Vec2::from_angle(theta)))
    }

    pub fn vec(self) -> Vec2 {
        self.0
    }

    pub fn angle(self) -> f64 {
        self.0.angle()
    }
}

/// Wrap an angle into (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(std::f64::consts::TAU);
    if r > std::f64::consts::PI {
        r -= std::f64::consts::TAU;
    }
    r
}

/// Angle between two directions, in [0, pi]. Inputs need not be unit length.
pub fn angle_between(a: Vec2, b: Vec2) -> f64 {
    match (a.normalized(), b.normalized()) {
        (Some(u), Some(v)) => u.dot(v).clamp(-1.0, 1.0).acos(),
        _ => 0.0,
    }
}

fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b - a).cross(c - a)
}

/// -1, 0, +1 for clockwise, collinear, counter-clockwise within `GEOM_EPS`.
fn orient_sign(a: Vec2, b: Vec2, c: Vec2) -> i8 {
    let o = orient(a, b, c);
    if o > GEOM_EPS {
        1
    } else if o < -GEOM_EPS {
        -1
    } else {
        0
    }
}

/// Given collinear a, b, c: does b lie within the bounding box of segment ac?
fn in_box(a: Vec2, b: Vec2, c: Vec2) -> bool {
    b.x <= a.x.max(c.x) + GEOM_EPS
        && b.x >= a.x.min(c.x) - GEOM_EPS
        && b.y <= a.y.max(c.y) + GEOM_EPS
        && b.y >= a.y.min(c.y) - GEOM_EPS
}

/// Proper and improper intersection of closed segments; touching endpoints
/// and collinear overlap both count.
pub fn segments_intersect(a1: Vec2, a2: Vec2, b1: Vec2, b2: Vec2) -> bool {
    let o1 = orient_sign(a1, a2, b1);
    let o2 = orient_sign(a1, a2, b2);
    let o3 = orient_sign(b1, b2, a1);
    let o4 = orient_sign(b1, b2, a2);

    if o1 != o2 && o3 != o4 {
        return true;
    }
    (o1 == 0 && in_box(a1, b1, a2))
        || (o2 == 0 && in_box(a1, b2, a2))
        || (o3 == 0 && in_box(b1, a1, b2))
        || (o4 == 0 && in_box(b1, a2, b2))
}

/// Distance from `p` to the closed segment ab.
pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let e = b - a;
    let len_sq = e.norm_sq();
    if len_sq < 1e-24 {
        return p.dist(a);
    }
    let t = ((p - a).dot(e) / len_sq).clamp(0.0, 1.0);
    p.dist(a + e * t)
}

/// First hit of the ray `origin + t * dir` (t >= 0) against segment ab.
pub fn ray_segment_intersection(origin: Vec2, dir: Vec2, a: Vec2, b: Vec2) -> Option<f64> {
    let e = b - a;
    let denom = dir.cross(e);
    let ao = a - origin;
    if denom.abs() > GEOM_EPS {
        let t = ao.cross(e) / denom;
        let s = ao.cross(dir) / denom;
        if t >= -GEOM_EPS && (-GEOM_EPS..=1.0 + GEOM_EPS).contains(&s) {
            return Some(t.max(0.0));
        }
        return None;
    }
    // Parallel. Only a collinear segment can be hit, possibly behind us.
    if ao.cross(dir).abs() > GEOM_EPS {
        return None;
    }
    let ta = ao.dot(dir);
    let tb = (b - origin).dot(dir);
    let (lo, hi) = (ta.min(tb), ta.max(tb));
    if hi < 0.0 {
        None
    } else {
        Some(lo.max(0.0))
    }
}

/// Simple polygon (no self-intersection), vertices in either winding order.
#[derive(Clone, Debug, PartialEq)]
pub struct Polygon {
    vertices: Vec<Vec2>,
}

impl Polygon {
    pub fn new(vertices: Vec<Vec2>) -> Result<Self, GeomError> {
        let n = vertices.len();
        if n < 3 {
            return Err(GeomError::TooFewVertices(n));
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(GeomError::NonFinite);
        }
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            if a.dist(b) < GEOM_EPS {
                return Err(GeomError::DegenerateEdge(i));
            }
        }
        // Adjacent edges folding back onto each other make a spike.
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            if orient_sign(a, b, c) == 0 && (b - a).dot(c - b) < 0.0 {
                return Err(GeomError::SelfIntersecting(i, (i + 1) % n));
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                // Skip edge pairs that legitimately share an endpoint.
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                let (a1, a2) = (vertices[i], vertices[(i + 1) % n]);
                let (b1, b2) = (vertices[j], vertices[(j + 1) % n]);
                if segments_intersect(a1, a2, b1, b2) {
                    return Err(GeomError::SelfIntersecting(i, j));
                }
            }
        }
        Ok(Polygon { vertices })
    }

    pub fn rect(min: Vec2, max: Vec2) -> Result<Self, GeomError> {
        Polygon::new(vec![
            min,
            Vec2::new(max.x, min.y),
            max,
            Vec2::new(min.x, max.y),
        ])
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Boundary-inclusive containment (even-odd rule).
    pub fn contains(&self, p: Vec2) -> bool {
        for (a, b) in self.edges() {
            if point_segment_distance(p, a, b) <= GEOM_EPS {
                return true;
            }
        }
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x_int = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x_int {
                    inside = !inside;
                }
            }
        }
        inside
    }

    pub fn boundary_distance(&self, p: Vec2) -> f64 {
        self.edges()
            .map(|(a, b)| point_segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Axis-aligned arena bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    min: Vec2,
    max: Vec2,
}

impl Rect {
    pub fn new(min: Vec2, max: Vec2) -> Result<Self, GeomError> {
        if !min.is_finite() || !max.is_finite() {
            return Err(GeomError::NonFinite);
        }
        if min.x + GEOM_EPS >= max.x || min.y + GEOM_EPS >= max.y {
            return Err(GeomError::EmptyRect);
        }
        Ok(Rect { min, max })
    }

    pub fn min(&self) -> Vec2 {
        self.min
    }

    pub fn max(&self) -> Vec2 {
        self.max
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn perimeter(&self) -> f64 {
        2.0 * (self.width() + self.height())
    }

    pub fn edges(&self) -> [(Vec2, Vec2); 4] {
        let a = self.min;
        let b = Vec2::new(self.max.x, self.min.y);
        let c = self.max;
        let d = Vec2::new(self.min.x, self.max.y);
        [(a, b), (b, c), (c, d), (d, a)]
    }
}

/// Static environment: obstacles, start, goal and bounds.
#[derive(Clone, Debug)]
pub struct World {
    obstacles: Vec<Polygon>,
    start: Vec2,
    goal: Vec2,
    bounds: Rect,
}

impl World {
    pub fn new(
        obstacles: Vec<Polygon>,
        start: Vec2,
        goal: Vec2,
        bounds: Rect,
    ) -> Result<Self, WorldError> {
        if !start.is_finite() || !goal.is_finite() {
            return Err(WorldError::Geometry(GeomError::NonFinite));
        }
        for (i, poly) in obstacles.iter().enumerate() {
            if poly.contains(start) {
                return Err(WorldError::StartInsideObstacle(i));
            }
            if poly.contains(goal) {
                return Err(WorldError::GoalInsideObstacle(i));
            }
            if poly.vertices().iter().any(|v| !bounds.contains(*v)) {
                return Err(WorldError::OutOfBounds("obstacle vertex"));
            }
        }
        if !bounds.contains(start) {
            return Err(WorldError::OutOfBounds("start"));
        }
        if !bounds.contains(goal) {
            return Err(WorldError::OutOfBounds("goal"));
        }
        Ok(World {
            obstacles,
            start,
            goal,
            bounds,
        })
    }

    pub fn obstacles(&self) -> &[Polygon] {
        &self.obstacles
    }

    pub fn start(&self) -> Vec2 {
        self.start
    }

    pub fn goal(&self) -> Vec2 {
        self.goal
    }

    pub fn bounds(&self) -> Rect {
        self.bounds
    }

    pub fn point_in_obstacle(&self, p: Vec2) -> bool {
        self.obstacles.iter().any(|poly| poly.contains(p))
    }

    /// Distance along `dir` to the nearest obstacle or bounds edge,
    /// saturated at `max_range`.
    pub fn ray_cast(&self, origin: Vec2, dir: Dir2, max_range: f64) -> f64 {
        debug_assert!(max_range > 0.0);
        let d = dir.vec();
        let mut best = max_range;
        for poly in &self.obstacles {
            for (a, b) in poly.edges() {
                if let Some(t) = ray_segment_intersection(origin, d, a, b) {
                    best = best.min(t);
                }
            }
        }
        for (a, b) in self.bounds.edges() {
            if let Some(t) = ray_segment_intersection(origin, d, a, b) {
                best = best.min(t);
            }
        }
        best
    }

    /// Distance from `p` to the nearest obstacle or bounds edge.
    pub fn boundary_distance(&self, p: Vec2) -> f64 {
        let mut best = f64::INFINITY;
        for poly in &self.obstacles {
            best = best.min(poly.boundary_distance(p));
        }
        for (a, b) in self.bounds.edges() {
            best = best.min(point_segment_distance(p, a, b));
        }
        best
    }

    /// Clearance of a robot disc at `p`: distance to the nearest surface
    /// minus the radius, negated when the centre is inside an obstacle or
    /// out of bounds.
    pub fn signed_clearance(&self, p: Vec2, radius: f64) -> f64 {
        let d = self.boundary_distance(p);
        if self.point_in_obstacle(p) || !self.bounds.contains(p) {
            -d - radius
        } else {
            d - radius
        }
    }

    pub fn disc_collides(&self, p: Vec2, radius: f64) -> bool {
        self.signed_clearance(p, radius) <= 0.0
    }
}
