//! Obstacle assessment from scans and the replanning gate.

use serde::{Deserialize, Serialize};

use crate::clock::Clock;
use crate::control::Pose;
use crate::geometry::{Circle, Point};
use crate::planning::{
    plan_request, ClearanceRule, Path, PlanContext, PlanFailure, PlanRequest, PlannerConfig,
    PlanningStats, PromptTemplates,
};
use crate::providers::WaypointProvider;
use crate::world::{EnvironmentMap, TargetObject};
pub use crate::world::ScanData;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SafetyConfig {
    /// Frontal range below which the robot slows and evaluates.
    pub d_slowstop: f64,
    /// Frontal range below which the robot stops and replans.
    pub d_emergency: f64,
    /// Half-width of the frontal cone, radians.
    pub frontal_half_angle: f64,
    pub max_replans: u32,
    /// Minimum sim-seconds between replans.
    pub cooldown: f64,
    /// Assumed radius of an obstacle seen by the emergency beam.
    pub obstacle_radius: f64,
    /// Linear speed cap while in the slow-stop band.
    pub slow_speed: f64,
}

impl Default for SafetyConfig {
    fn default() -> Self {
        Self {
            d_slowstop: 0.5,
            d_emergency: 0.35,
            frontal_half_angle: 15f64.to_radians(),
            max_replans: 5,
            cooldown: 5.0,
            obstacle_radius: 0.3,
            slow_speed: 0.1,
        }
    }
}

impl SafetyConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0 < self.d_emergency && self.d_emergency <= self.d_slowstop) {
            return Err("require 0 < d_emergency <= d_slowstop".into());
        }
        if !(self.frontal_half_angle > 0.0 && self.frontal_half_angle < std::f64::consts::PI) {
            return Err("frontal_half_angle must lie in (0, pi)".into());
        }
        if self.max_replans < 1 || self.cooldown.is_nan() || self.cooldown <= 0.0 {
            return Err("max_replans >= 1 and cooldown > 0 required".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Assessment {
    Clear,
    SlowStop { min_range: f64 },
    Emergency { min_range: f64, bearing: f64 },
}

impl Assessment {
    pub fn is_emergency(&self) -> bool {
        matches!(self, Assessment::Emergency { .. })
    }
}

/// Smallest range inside the frontal cone with its bearing.
pub fn min_frontal(scan: &ScanData, half_angle: f64) -> Option<(f64, f64)> {
    scan.ranges
        .iter()
        .zip(&scan.bearings)
        .filter(|(_, b)| b.abs() < half_angle)
        .fold(None, |best: Option<(f64, f64)>, (&r, &b)| match best {
            Some((br, _)) if br <= r => best,
            _ => Some((r, b)),
        })
}

pub fn assess(scan: &ScanData, cfg: &SafetyConfig) -> Assessment {
    match min_frontal(scan, cfg.frontal_half_angle) {
        Some((r, bearing)) if r < cfg.d_emergency => Assessment::Emergency {
            min_range: r,
            bearing,
        },
        Some((r, _)) if r < cfg.d_slowstop => Assessment::SlowStop { min_range: r },
        _ => Assessment::Clear,
    }
}

/// Replan bookkeeping for one command.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ReplanLedger {
    pub attempts: u32,
    pub last_replan_time: Option<f64>,
}

pub fn should_replan(ledger: &ReplanLedger, now: f64, cfg: &SafetyConfig) -> bool {
    ledger.attempts < cfg.max_replans
        && ledger
            .last_replan_time
            .is_none_or(|t_lr| now - t_lr > cfg.cooldown)
}

pub fn record_attempt(ledger: &ReplanLedger, now: f64, cfg: &SafetyConfig) -> ReplanLedger {
    debug_assert!(
        should_replan(ledger, now, cfg),
        "replan recorded while the gate is closed: {ledger:?} at t={now}"
    );
    ReplanLedger {
        attempts: ledger.attempts + 1,
        last_replan_time: Some(now),
    }
}

/// Disc estimate for the obstacle seen at `range` along body bearing `bearing`.
///
/// The beam hit is taken as the near surface, so the center lies one
/// radius further along the ray.
pub fn obstacle_estimate(pose: &Pose, range: f64, bearing: f64, radius: f64) -> Circle {
    let (s, c) = (pose.theta + bearing).sin_cos();
    let reach = range + radius;
    Circle::new(
        Point::new(pose.x + reach * c, pose.y + reach * s),
        radius,
    )
}

/// Inputs for one replanning request.
pub struct ReplanRequest<'a> {
    pub map: &'a EnvironmentMap,
    pub pose: Pose,
    pub target: &'a TargetObject,
    pub command_text: &'a str,
    /// Obstacle estimates known for this command, newest last.
    pub estimates: &'a [Circle],
    pub planner: &'a PlannerConfig,
    pub safety: &'a SafetyConfig,
    pub templates: &'a PromptTemplates,
    /// Valid candidates to collect; the shortest is kept.
    pub candidates: u32,
}

/// New path from `pose` whose every waypoint clears each estimate by more
/// than `d_slowstop`.
pub fn replan_around(
    req: &ReplanRequest<'_>,
    provider: &mut dyn WaypointProvider,
    clock: &dyn Clock,
) -> Result<(Path, PlanningStats), PlanFailure> {
    let plan = PlanRequest {
        context: PlanContext {
            map: req.map,
            pose: req.pose,
            target: req.target,
            cfg: req.planner,
            rule: ClearanceRule {
                obstacles: req.estimates,
                min_clearance: req.safety.d_slowstop,
            },
        },
        command_text: req.command_text,
        templates: req.templates,
        obstacle_notes: req.estimates,
        candidates: req.candidates,
    };
    plan_request(&plan, provider, clock)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scan_with(front: f64, side: f64) -> ScanData {
        // bearings: -pi/2, 0, +pi/2, pi - small
        ScanData {
            ranges: vec![3.5, front, side, 3.5],
            bearings: vec![-std::f64::consts::FRAC_PI_2, 0.0, std::f64::consts::FRAC_PI_2, 3.0],
            stamp: 0.0,
        }
    }

    #[test]
    fn frontal_bands() {
        let cfg = SafetyConfig::default();
        assert_eq!(
            assess(&scan_with(0.30, 3.5), &cfg),
            Assessment::Emergency {
                min_range: 0.30,
                bearing: 0.0
            }
        );
        assert_eq!(
            assess(&scan_with(0.45, 3.5), &cfg),
            Assessment::SlowStop { min_range: 0.45 }
        );
        assert_eq!(assess(&scan_with(0.60, 3.5), &cfg), Assessment::Clear);
    }

    #[test]
    fn side_beams_are_ignored() {
        let cfg = SafetyConfig::default();
        assert_eq!(assess(&scan_with(3.0, 0.2), &cfg), Assessment::Clear);
    }

    #[test]
    fn gate_examples() {
        let cfg = SafetyConfig::default();
        let full = ReplanLedger {
            attempts: 5,
            last_replan_time: None,
        };
        assert!(!should_replan(&full, 100.0, &cfg));
        assert!(should_replan(&ReplanLedger::default(), 0.0, &cfg));
        let recent = ReplanLedger {
            attempts: 1,
            last_replan_time: Some(10.0),
        };
        assert!(!should_replan(&recent, 14.0, &cfg));
        assert!(!should_replan(&recent, 15.0, &cfg));
        assert!(should_replan(&recent, 15.0 + 1e-9, &cfg));
    }

    #[test]
    fn record_examples() {
        let cfg = SafetyConfig::default();
        let l = record_attempt(&ReplanLedger::default(), 3.0, &cfg);
        assert_eq!(l, ReplanLedger { attempts: 1, last_replan_time: Some(3.0) });
        let l2 = record_attempt(&l, 9.0, &cfg);
        assert_eq!(l2.attempts, 2);
    }

    #[test]
    #[should_panic]
    #[cfg(debug_assertions)]
    fn record_past_the_limit_panics() {
        let cfg = SafetyConfig::default();
        let full = ReplanLedger {
            attempts: 5,
            last_replan_time: None,
        };
        record_attempt(&full, 0.0, &cfg);
    }

    fn replan(
        estimates: &[Circle],
        provider: &mut dyn WaypointProvider,
        pose: Pose,
    ) -> Result<(Path, PlanningStats), PlanFailure> {
        let map = crate::world::builtin_environment("env_a").unwrap();
        let target = map.object("Window").unwrap().clone();
        let req = ReplanRequest {
            map: &map,
            pose,
            target: &target,
            command_text: "go to the window",
            estimates,
            planner: &PlannerConfig::default(),
            safety: &SafetyConfig::default(),
            templates: &PromptTemplates::default(),
            candidates: 1,
        };
        replan_around(&req, provider, &crate::clock::FrozenClock)
    }

    #[test]
    fn oracle_detour_clears_estimate() {
        let pose = Pose::new(3.35, 0.0, 0.0);
        let est = [obstacle_estimate(&pose, 0.35, 0.0, 0.3)];
        let (path, _) = replan(&est, &mut crate::providers::OracleProvider, pose).unwrap();
        for p in &path.waypoints {
            assert!(est[0].clearance(*p) > 0.5, "{p:?}");
        }
    }

    #[test]
    fn off_path_estimate_changes_nothing() {
        let pose = Pose::new(3.0, 0.0, 0.0);
        let est = [Circle::new(Point::new(6.0, 1.9), 0.3)];
        let (with, _) = replan(&est, &mut crate::providers::OracleProvider, pose).unwrap();
        let (without, _) = replan(&[], &mut crate::providers::OracleProvider, pose).unwrap();
        let start = pose.position();
        assert!((with.length_from(start) - without.length_from(start)).abs() < 1e-6);
    }

    #[test]
    fn invalid_provider_fails_and_prompt_names_obstacle() {
        let mut stub = crate::providers::StubProvider::new(vec!["[]".into()]).unwrap();
        let est = [Circle::new(Point::new(5.0, 0.0), 0.3)];
        let err = replan(&est, &mut stub, Pose::new(4.0, 0.0, 0.0)).unwrap_err();
        assert_eq!(err.stats.successes, 0);
        assert!(stub.seen_prompts()[0].user_prompt.contains("x = 5, y = 0"));
    }

    #[test]
    fn estimate_sits_one_radius_past_the_hit() {
        let c = obstacle_estimate(&Pose::new(1.0, 0.0, 0.0), 0.35, 0.0, 0.3);
        assert!((c.center.x - 1.65).abs() < 1e-12 && c.center.y.abs() < 1e-12);
    }
}
