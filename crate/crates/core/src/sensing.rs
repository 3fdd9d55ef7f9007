//! Rangefinder model: a ring of single-beam sensors rigidly mounted on the
//! robot, each returning the ray-cast distance to the nearest surface,
//! saturated at the sensor's maximum range.

use crate::world::{wrap_angle, Dir2, Vec2, World};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Readings are clamped below by this value so that an obstacle point can
/// never coincide with the robot position.
pub const MIN_READING: f64 = 0.01;

#[derive(Debug, Error, PartialEq)]
pub enum SensorError {
    #[error("sensor ring needs at least one mount angle")]
    NoSensors,
    #[error("mount angles must be distinct, angles {0} and {1} coincide")]
    DuplicateAngle(usize, usize),
    #[error("mount angle {0} is outside [-pi, pi)")]
    AngleOutOfRange(usize),
    #[error("max_range must be positive and finite")]
    BadMaxRange,
    #[error("noise_sigma must be non-negative and finite")]
    BadNoise,
}

/// Mount geometry and noise model for the rangefinder ring.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensorConfig {
    /// Beam directions relative to the robot heading, each in [-pi, pi).
    mount_angles: Vec<f64>,
    /// Saturation distance in metres.
    pub max_range: f64,
    /// Standard deviation of additive Gaussian reading noise; 0 disables
    /// noise entirely (no RNG draws).
    pub noise_sigma: f64,
}

impl SensorConfig {
    pub fn new(
        mount_angles: Vec<f64>,
        max_range: f64,
        noise_sigma: f64,
    ) -> Result<Self, SensorError> {
        if mount_angles.is_empty() {
            return Err(SensorError::NoSensors);
        }
        for (i, a) in mount_angles.iter().enumerate() {
            if !a.is_finite() || *a < -std::f64::consts::PI || *a >= std::f64::consts::PI {
                return Err(SensorError::AngleOutOfRange(i));
            }
        }
        for i in 0..mount_angles.len() {
            for j in i + 1..mount_angles.len() {
                if (mount_angles[i] - mount_angles[j]).abs() < 1e-12 {
                    return Err(SensorError::DuplicateAngle(i, j));
                }
            }
        }
        if !(max_range > 0.0 && max_range.is_finite()) {
            return Err(SensorError::BadMaxRange);
        }
        if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
            return Err(SensorError::BadNoise);
        }
        Ok(SensorConfig {
            mount_angles,
            max_range,
            noise_sigma,
        })
    }

    /// Eight beams on a 45 degree pitch, the ground-robot arrangement.
    pub fn ring8(max_range: f64, noise_sigma: f64) -> Self {
        let angles = (0..8)
            .map(|k| {
                let a = wrap_angle(k as f64 * std::f64::consts::FRAC_PI_4);
                // Mount angles live in [-pi, pi); fold the rear beam over.
                if a >= std::f64::consts::PI {
                    a - std::f64::consts::TAU
                } else {
                    a
                }
            })
            .collect();
        SensorConfig::new(angles, max_range, noise_sigma).expect("ring8 is valid")
    }

    /// Five forward beams at -90, -45, 0, 45, 90 degrees, the aerial-robot
    /// arrangement.
    pub fn uav5(max_range: f64, noise_sigma: f64) -> Self {
        let q = std::f64::consts::FRAC_PI_4;
        SensorConfig::new(vec![-2.0 * q, -q, 0.0, q, 2.0 * q], max_range, noise_sigma)
            .expect("uav5 is valid")
    }

    pub fn mount_angles(&self) -> &[f64] {
        &self.mount_angles
    }

    pub fn len(&self) -> usize {
        self.mount_angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mount_angles.is_empty()
    }
}

/// One reading per configured sensor, in mount order.
#[derive(Clone, Debug, PartialEq)]
pub struct SensorScan {
    readings: Vec<f64>,
}

impl SensorScan {
    pub fn readings(&self) -> &[f64] {
        &self.readings
    }

    pub fn min_reading(&self) -> f64 {
        self.readings.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// True when the reading saturated, i.e. nothing was seen in range.
    pub fn is_saturated(&self, i: usize, config: &SensorConfig) -> bool {
        self.readings[i] >= config.max_range
    }
}

// Standard normal via Box-Muller; only called when noise_sigma > 0 so a
// noiseless scan consumes no randomness.
fn sample_standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Cast every beam from `position` with the robot facing `heading`.
///
/// Scanning from inside an obstacle is permitted (it happens on the final
/// tick of a colliding run) and measures distance to the surface from
/// within.
pub fn scan<R: Rng>(
    world: &World,
    position: Vec2,
    heading: f64,
    config: &SensorConfig,
    rng: &mut R,
) -> SensorScan {
    let readings = config
        .mount_angles
        .iter()
        .map(|theta| {
            let dir = Dir2::from_angle(heading + theta).expect("finite angle");
            let d = world.ray_cast(position, dir, config.max_range);
            let d = if config.noise_sigma > 0.0 {
                d + config.noise_sigma * sample_standard_normal(rng)
            } else {
                d
            };
            d.clamp(MIN_READING, config.max_range)
        })
        .collect();
    SensorScan { readings }
}

/// World-frame surface points implied by the unsaturated readings.
pub fn obstacle_points(
    scan: &SensorScan,
    position: Vec2,
    heading: f64,
    config: &SensorConfig,
) -> Vec<Vec2> {
    scan.readings
        .iter()
        .zip(config.mount_angles.iter())
        .filter(|(d, _)| **d < config.max_range)
        .map(|(d, theta)| position + Vec2::from_angle(heading + theta) * *d)
        .collect()
}
