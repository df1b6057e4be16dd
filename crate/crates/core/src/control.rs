//! Frame transformation and the proportional waypoint-tracking controller.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Point;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControlError {
    #[error("point is in the {found:?} frame, expected {expected:?}")]
    FrameMismatch { expected: Frame, found: Frame },
    #[error("target coincides with the robot position; bearing undefined")]
    DegenerateBearing,
}

/// Wraps an angle into `[-pi, pi)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let mut a = (theta + PI).rem_euclid(TAU);
    if a >= TAU {
        a -= TAU;
    }
    let out = a - PI;
    if out >= PI {
        out - TAU
    } else {
        out
    }
}

/// Planar robot pose. `theta` is kept in `[-pi, pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: normalize_angle(theta),
        }
    }

    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }

    /// Transform parameters that carry map coordinates into a frame whose
    /// origin sits at `self`.
    pub fn inverse(&self) -> Pose {
        let (s, c) = self.theta.sin_cos();
        Pose::new(-(c * self.x + s * self.y), -(-s * self.x + c * self.y), -self.theta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    Map,
    Odom,
}

/// A point tagged with the frame it is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FramedPoint {
    pub x: f64,
    pub y: f64,
    pub frame: Frame,
}

impl FramedPoint {
    pub fn map(x: f64, y: f64) -> Self {
        Self { x, y, frame: Frame::Map }
    }

    pub fn odom(x: f64, y: f64) -> Self {
        Self { x, y, frame: Frame::Odom }
    }

    pub fn point(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

/// Rotates the map point by `transform.theta`, then translates by
/// `(transform.x, transform.y)`.
pub fn map_to_odom(p: FramedPoint, transform: &Pose) -> Result<FramedPoint, ControlError> {
    if p.frame != Frame::Map {
        return Err(ControlError::FrameMismatch {
            expected: Frame::Map,
            found: p.frame,
        });
    }
    let (s, c) = transform.theta.sin_cos();
    Ok(FramedPoint::odom(
        c * p.x - s * p.y + transform.x,
        s * p.x + c * p.y + transform.y,
    ))
}

/// Exact inverse of [`map_to_odom`] for the same transform.
pub fn odom_to_map(p: FramedPoint, transform: &Pose) -> Result<FramedPoint, ControlError> {
    if p.frame != Frame::Odom {
        return Err(ControlError::FrameMismatch {
            expected: Frame::Odom,
            found: p.frame,
        });
    }
    let (s, c) = transform.theta.sin_cos();
    let dx = p.x - transform.x;
    let dy = p.y - transform.y;
    Ok(FramedPoint::map(c * dx + s * dy, -s * dx + c * dy))
}

pub fn distance_to(p: Point, q: Point) -> f64 {
    p.distance(q)
}

/// Bearing to `target` relative to the robot heading, in `[-pi, pi)`.
pub fn angular_error(pose: &Pose, target: Point) -> Result<f64, ControlError> {
    let dx = target.x - pose.x;
    let dy = target.y - pose.y;
    if dx.abs() < 1e-12 && dy.abs() < 1e-12 {
        return Err(ControlError::DegenerateBearing);
    }
    Ok(normalize_angle(dy.atan2(dx) - pose.theta))
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VelocityCommand {
    pub linear: f64,
    pub angular: f64,
}

impl VelocityCommand {
    pub const ZERO: VelocityCommand = VelocityCommand {
        linear: 0.0,
        angular: 0.0,
    };

    pub fn is_zero(&self) -> bool {
        self.linear == 0.0 && self.angular == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ControllerConfig {
    pub k_linear: f64,
    pub k_angular: f64,
    pub max_linear: f64,
    pub max_angular: f64,
    /// Waypoint reach tolerance.
    pub distance_threshold: f64,
    pub angle_threshold: f64,
    /// Linear speed is suppressed while `|alpha| > turn_gate_factor * angle_threshold`.
    pub turn_gate_factor: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            k_linear: 0.8,
            k_angular: 2.5,
            max_linear: 0.4,
            max_angular: 2.0,
            distance_threshold: 0.1,
            angle_threshold: 0.087,
            turn_gate_factor: 4.0,
        }
    }
}

impl ControllerConfig {
    pub fn turn_gate(&self) -> f64 {
        self.turn_gate_factor * self.angle_threshold
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOutput {
    pub command: VelocityCommand,
    pub reached: bool,
    pub distance: f64,
    pub alpha: f64,
}

/// One tick of the proportional law. Both outputs are clamped, never rejected.
pub fn control_step(pose: &Pose, target: Point, cfg: &ControllerConfig) -> ControlOutput {
    let distance = distance_to(pose.position(), target);
    let alpha = match angular_error(pose, target) {
        Ok(a) => a,
        Err(_) => {
            return ControlOutput {
                command: VelocityCommand::ZERO,
                reached: true,
                distance,
                alpha: 0.0,
            }
        }
    };
    if distance <= cfg.distance_threshold {
        return ControlOutput {
            command: VelocityCommand::ZERO,
            reached: true,
            distance,
            alpha,
        };
    }
    let mut linear = (cfg.k_linear * distance).clamp(0.0, cfg.max_linear);
    if alpha.abs() > cfg.turn_gate() {
        linear = 0.0;
    }
    let angular = (cfg.k_angular * alpha).clamp(-cfg.max_angular, cfg.max_angular);
    ControlOutput {
        command: VelocityCommand { linear, angular },
        reached: false,
        distance,
        alpha,
    }
}
