//! Environment model: corridors, target objects, junctions and walls, plus
//! point-membership queries and a simulated LIDAR.

use std::collections::{HashMap, HashSet};
use std::f64::consts::{PI, TAU};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::control::Pose;
use crate::geometry::{ray_circle, ray_segment, Circle, Point, Segment};

const ENV_A: &str = include_str!("../data/environments/env_a.json");
const ENV_B: &str = include_str!("../data/environments/env_b.json");
const ENV_C: &str = include_str!("../data/environments/env_c.json");

/// Names accepted by [`builtin_environment`].
pub const BUILTIN_ENVIRONMENTS: [&str; 3] = ["env_a", "env_b", "env_c"];

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("unknown environment `{0}` (expected one of env_a, env_b, env_c)")]
    UnknownEnvironment(String),
    #[error("invalid environment: {0}")]
    Invalid(String),
    #[error("environment file: {0}")]
    Io(#[from] std::io::Error),
    #[error("environment JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// Axis-aligned corridor rectangle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corridor {
    pub name: String,
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Corridor {
    pub fn contains(&self, p: Point) -> bool {
        self.x_min <= p.x && p.x <= self.x_max && self.y_min <= p.y && p.y <= self.y_max
    }

    /// Membership in the rectangle shrunk by `margin` on every side (closed).
    pub fn contains_with_margin(&self, p: Point, margin: f64) -> bool {
        self.x_min + margin <= p.x
            && p.x <= self.x_max - margin
            && self.y_min + margin <= p.y
            && p.y <= self.y_max - margin
    }

    /// Nearest point of the margin-shrunk interior.
    pub fn clamp_into(&self, p: Point, margin: f64) -> Point {
        Point::new(
            p.x.clamp(self.x_min + margin, self.x_max - margin),
            p.y.clamp(self.y_min + margin, self.y_max - margin),
        )
    }

    pub fn center(&self) -> Point {
        Point::new(
            0.5 * (self.x_min + self.x_max),
            0.5 * (self.y_min + self.y_max),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetObject {
    pub name: String,
    pub position: Point,
    pub corridor: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Junction {
    pub position: Point,
    pub connects: [String; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentMap {
    pub name: String,
    pub safe_margin: f64,
    pub start_pose: Pose,
    pub corridors: Vec<Corridor>,
    pub objects: Vec<TargetObject>,
    pub junctions: Vec<Junction>,
    pub walls: Vec<Segment>,
    #[serde(default)]
    pub dynamic_obstacles: Vec<Circle>,
}

/// Loads one of the shipped environments.
pub fn builtin_environment(name: &str) -> Result<EnvironmentMap, WorldError> {
    builtin_source(name)
        .ok_or_else(|| WorldError::UnknownEnvironment(name.to_string()))
        .and_then(EnvironmentMap::from_json)
}

/// Raw JSON of a shipped environment.
pub fn builtin_source(name: &str) -> Option<&'static str> {
    match name {
        "env_a" => Some(ENV_A),
        "env_b" => Some(ENV_B),
        "env_c" => Some(ENV_C),
        _ => None,
    }
}

impl EnvironmentMap {
    pub fn from_json(text: &str) -> Result<Self, WorldError> {
        let map: EnvironmentMap = serde_json::from_str(text)?;
        map.check()?;
        Ok(map)
    }

    pub fn load(path: &Path) -> Result<Self, WorldError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Built-in name or a path to an environment file.
    pub fn resolve(name_or_path: &str) -> Result<Self, WorldError> {
        if builtin_source(name_or_path).is_some() {
            return builtin_environment(name_or_path);
        }
        let path = Path::new(name_or_path);
        if path.exists() {
            Self::load(path)
        } else {
            Err(WorldError::UnknownEnvironment(name_or_path.to_string()))
        }
    }

    pub fn corridor(&self, name: &str) -> Option<&Corridor> {
        self.corridors.iter().find(|c| c.name == name)
    }

    pub fn corridor_index(&self, name: &str) -> Option<usize> {
        self.corridors.iter().position(|c| c.name == name)
    }

    pub fn object(&self, name: &str) -> Option<&TargetObject> {
        self.objects.iter().find(|o| o.name == name)
    }

    /// First corridor (declaration order) whose closed rectangle holds `p`.
    pub fn containing_corridor(&self, p: Point) -> Option<&str> {
        self.corridors
            .iter()
            .find(|c| c.contains(p))
            .map(|c| c.name.as_str())
    }

    pub fn within_margin(&self, p: Point) -> bool {
        self.corridors
            .iter()
            .any(|c| c.contains_with_margin(p, self.safe_margin))
    }

    /// Point lies in the corridor union, allowing `slack` meters outside.
    pub fn in_free_space(&self, p: Point, slack: f64) -> bool {
        self.corridors.iter().any(|c| c.contains_with_margin(p, -slack))
    }

    pub fn cast_scan(&self, pose: &Pose, beam_count: usize, max_range: f64) -> ScanData {
        self.cast_scan_at(pose, beam_count, max_range, 0.0)
    }

    /// Synthesized sweep with evenly spaced body-frame bearings over `[-pi, pi)`.
    pub fn cast_scan_at(
        &self,
        pose: &Pose,
        beam_count: usize,
        max_range: f64,
        stamp: f64,
    ) -> ScanData {
        let beam_count = beam_count.max(1);
        let origin = pose.position();
        let step = TAU / beam_count as f64;
        let mut ranges = Vec::with_capacity(beam_count);
        let mut bearings = Vec::with_capacity(beam_count);
        for i in 0..beam_count {
            let bearing = -PI + step * i as f64;
            let (s, c) = (pose.theta + bearing).sin_cos();
            let dir = Point::new(c, s);
            let mut range = max_range;
            for wall in &self.walls {
                if let Some(t) = ray_segment(origin, dir, wall) {
                    range = range.min(t);
                }
            }
            for obstacle in &self.dynamic_obstacles {
                if let Some(t) = ray_circle(origin, dir, obstacle) {
                    range = range.min(t);
                }
            }
            bearings.push(bearing);
            ranges.push(range.max(1e-9));
        }
        ScanData {
            ranges,
            bearings,
            stamp,
        }
    }

    /// Corridor adjacency through junctions, indexed like `corridors`.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.corridors.len()];
        for (j, junction) in self.junctions.iter().enumerate() {
            let (Some(a), Some(b)) = (
                self.corridor_index(&junction.connects[0]),
                self.corridor_index(&junction.connects[1]),
            ) else {
                continue;
            };
            adj[a].push((b, j));
            adj[b].push((a, j));
        }
        adj
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("environment serializes")
    }

    fn check(&self) -> Result<(), WorldError> {
        let bad = |msg: String| Err(WorldError::Invalid(msg));
        let m = self.safe_margin;
        if m.is_nan() || m <= 0.0 {
            return bad(format!("safe_margin must be positive, got {m}"));
        }
        if self.corridors.is_empty() {
            return bad("no corridors".into());
        }
        let mut names = HashSet::new();
        for c in &self.corridors {
            if !(c.x_min < c.x_max && c.y_min < c.y_max) {
                return bad(format!("corridor `{}` has empty extent", c.name));
            }
            if !(c.x_max - c.x_min > 2.0 * m && c.y_max - c.y_min > 2.0 * m) {
                return bad(format!("corridor `{}` is narrower than twice the margin", c.name));
            }
            if !names.insert(c.name.as_str()) {
                return bad(format!("duplicate corridor `{}`", c.name));
            }
        }
        let mut object_names = HashSet::new();
        for o in &self.objects {
            let Some(c) = self.corridor(&o.corridor) else {
                return bad(format!("object `{}` references unknown corridor `{}`", o.name, o.corridor));
            };
            if !c.contains_with_margin(o.position, m) {
                return bad(format!("object `{}` lies outside the margin of `{}`", o.name, c.name));
            }
            if !object_names.insert(o.name.as_str()) {
                return bad(format!("duplicate object `{}`", o.name));
            }
        }
        for j in &self.junctions {
            for name in &j.connects {
                let Some(c) = self.corridor(name) else {
                    return bad(format!("junction references unknown corridor `{name}`"));
                };
                if !c.contains_with_margin(j.position, m) {
                    return bad(format!(
                        "junction at ({}, {}) lies outside the margin of `{name}`",
                        j.position.x, j.position.y
                    ));
                }
            }
        }
        // closed boundary: every wall endpoint is shared by an even number of walls
        let mut ends: HashMap<(u64, u64), usize> = HashMap::new();
        for w in &self.walls {
            for p in [w.a, w.b] {
                *ends.entry((p.x.to_bits(), p.y.to_bits())).or_default() += 1;
            }
        }
        if self.walls.is_empty() || ends.values().any(|n| n % 2 != 0) {
            return bad("walls do not form a closed boundary".into());
        }
        Ok(())
    }
}

/// One LIDAR sweep: ranges at body-frame bearings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanData {
    pub ranges: Vec<f64>,
    pub bearings: Vec<f64>,
    pub stamp: f64,
}
