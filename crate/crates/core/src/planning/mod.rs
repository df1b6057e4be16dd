//! Command to validated path: target resolution, prompt construction,
//! provider invocation, waypoint parsing, validation and bounded retry.

mod command;
mod oracle;
mod prompt;
mod validate;
mod waypoints;

use std::collections::BTreeMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use command::{parse_command, Command, CommandError};
pub use oracle::{corridor_route, oracle_plan, oracle_plan_avoiding};
pub use prompt::{add_obstacle, add_regenerate, build_prompts, fmt_num, PromptPair, PromptTemplates};
pub use validate::{
    validate_waypoints, ClearanceRule, RejectReason, Rejection, ValidatedWaypoints,
    ValidationFailure, ValidationReport,
};
pub use waypoints::{parse_waypoints, parse_waypoints_bytes, waypoints_to_json};

use crate::clock::Clock;
use crate::control::Pose;
use crate::geometry::{polyline_length, Circle, Point};
use crate::providers::{GenerationRequest, ProviderDescriptor, ProviderError, WaypointProvider};
use crate::world::{EnvironmentMap, TargetObject};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanningError {
    #[error("could not parse waypoints: {0}")]
    ParseFailure(String),
    #[error("waypoints rejected:\n{0}")]
    Validation(ValidationReport),
    #[error("target unreachable: {0}")]
    TargetUnreachable(String),
    #[error("provider unavailable: {0}")]
    ProviderUnavailable(String),
    #[error("provider returned HTTP {status}: {body}")]
    ProviderError { status: u16, body: String },
    #[error("planning failed after {attempts} attempts: {last}")]
    PlanningFailed { attempts: u32, last: String },
    #[error("unknown target object `{0}`")]
    UnknownTarget(String),
}

impl From<ProviderError> for PlanningError {
    fn from(e: ProviderError) -> Self {
        match e {
            ProviderError::Unavailable(msg) => PlanningError::ProviderUnavailable(msg),
            ProviderError::Status { status, body } => PlanningError::ProviderError { status, body },
            ProviderError::Protocol(msg) => PlanningError::ProviderUnavailable(msg),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerConfig {
    pub min_spacing: f64,
    /// Final-waypoint tolerance to the target.
    pub tolerance: f64,
    /// Waypoint limit stated in the prompt, per environment name.
    pub max_waypoints: BTreeMap<String, usize>,
    pub default_max_waypoints: usize,
    /// Total provider calls allowed for one planning request.
    pub max_parse_retries: u32,
    /// Seconds.
    pub provider_timeout: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            min_spacing: 0.7,
            tolerance: 0.05,
            max_waypoints: [("env_a", 4), ("env_b", 5), ("env_c", 6)]
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
            default_max_waypoints: 6,
            max_parse_retries: 3,
            provider_timeout: 60.0,
        }
    }
}

impl PlannerConfig {
    pub fn max_waypoints_for(&self, env: &str) -> usize {
        self.max_waypoints
            .get(env)
            .copied()
            .unwrap_or(self.default_max_waypoints)
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.min_spacing > 0.0 && self.tolerance > 0.0 && self.provider_timeout > 0.0) {
            return Err("planner distances and timeout must be positive".into());
        }
        if self.tolerance >= self.min_spacing {
            return Err("tolerance must be smaller than min_spacing".into());
        }
        if self.max_parse_retries == 0 {
            return Err("max_parse_retries must be at least 1".into());
        }
        Ok(())
    }
}

/// Waypoints in the map frame, ready for execution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub waypoints: Vec<Point>,
    pub provider: ProviderDescriptor,
    pub validated: bool,
    pub target: TargetObject,
    pub discarded: Vec<Rejection>,
    pub appended_target: bool,
}

impl Path {
    /// Polyline length from `start` through every waypoint.
    pub fn length_from(&self, start: Point) -> f64 {
        let mut pts = vec![start];
        pts.extend(&self.waypoints);
        polyline_length(&pts)
    }
}

/// Runs the margin, spacing, tolerance and clearance checks and wraps the
/// survivors as a validated [`Path`].
pub fn validate_path(
    points: &[Point],
    map: &EnvironmentMap,
    target: &TargetObject,
    cfg: &PlannerConfig,
    rule: ClearanceRule<'_>,
    provider: ProviderDescriptor,
) -> Result<Path, ValidationReport> {
    let v = validate_waypoints(points, map, target, cfg, rule)?;
    Ok(Path {
        waypoints: v.waypoints,
        provider,
        validated: true,
        target: target.clone(),
        discarded: v.discarded,
        appended_target: v.appended_target,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub response: String,
    /// `None` on success.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PlanningStats {
    /// Provider calls made.
    pub attempts: u32,
    /// Calls that produced a validated path.
    pub successes: u32,
    pub started_at: f64,
    pub finished_at: f64,
    pub log: Vec<AttemptRecord>,
}

impl PlanningStats {
    pub fn planning_time(&self) -> f64 {
        (self.finished_at - self.started_at).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanFailure {
    pub error: PlanningError,
    pub stats: PlanningStats,
}

/// Everything a provider may consult for one planning request.
#[derive(Debug, Clone, Copy)]
pub struct PlanContext<'a> {
    pub map: &'a EnvironmentMap,
    pub pose: Pose,
    pub target: &'a TargetObject,
    pub cfg: &'a PlannerConfig,
    pub rule: ClearanceRule<'a>,
}

/// One planning request: the prompt seed plus retry and candidate policy.
pub struct PlanRequest<'a> {
    pub context: PlanContext<'a>,
    pub command_text: &'a str,
    pub templates: &'a PromptTemplates,
    /// Obstacle notes appended to the user prompt.
    pub obstacle_notes: &'a [Circle],
    /// Valid candidates to collect before keeping the shortest.
    pub candidates: u32,
}

/// Invokes the provider until a path validates or the attempt budget runs out.
pub fn plan_request(
    req: &PlanRequest<'_>,
    provider: &mut dyn WaypointProvider,
    clock: &dyn Clock,
) -> Result<(Path, PlanningStats), PlanFailure> {
    let ctx = &req.context;
    let mut stats = PlanningStats {
        started_at: clock.now(),
        ..PlanningStats::default()
    };
    let mut prompts = build_prompts(
        ctx.map,
        &ctx.pose,
        ctx.target,
        req.command_text,
        ctx.cfg,
        req.templates,
    );
    for obstacle in req.obstacle_notes {
        add_obstacle(&mut prompts, obstacle, ctx.rule.min_clearance, req.templates);
    }
    let timeout = Duration::from_secs_f64(ctx.cfg.provider_timeout);
    let wanted = req.candidates.max(1);
    let mut best: Option<(f64, Path)> = None;
    let mut valid = 0;
    let mut last_error = String::new();

    while stats.attempts < ctx.cfg.max_parse_retries && valid < wanted {
        stats.attempts += 1;
        let request = GenerationRequest {
            prompts: &prompts,
            context: *ctx,
        };
        let text = match provider.generate(&request, timeout) {
            Ok(text) => text,
            Err(e) => {
                stats.finished_at = clock.now();
                stats.log.push(AttemptRecord {
                    response: String::new(),
                    error: Some(e.to_string()),
                });
                return Err(PlanFailure {
                    error: e.into(),
                    stats,
                });
            }
        };
        let outcome = parse_waypoints(&text).and_then(|points| {
            validate_path(&points, ctx.map, ctx.target, ctx.cfg, ctx.rule, provider.descriptor())
                .map_err(PlanningError::Validation)
        });
        match outcome {
            Ok(path) => {
                stats.successes += 1;
                valid += 1;
                let length = path.length_from(ctx.pose.position());
                if best.as_ref().is_none_or(|(l, _)| length < *l) {
                    best = Some((length, path));
                }
                stats.log.push(AttemptRecord {
                    response: text,
                    error: None,
                });
            }
            Err(e) => {
                let report = match &e {
                    PlanningError::Validation(r) => r.to_string(),
                    other => format!("- {other}"),
                };
                add_regenerate(&mut prompts, &report, req.templates);
                last_error = e.to_string();
                stats.log.push(AttemptRecord {
                    response: text,
                    error: Some(last_error.clone()),
                });
            }
        }
    }
    stats.finished_at = clock.now();
    match best {
        Some((_, path)) => Ok((path, stats)),
        None => Err(PlanFailure {
            error: PlanningError::PlanningFailed {
                attempts: stats.attempts,
                last: last_error,
            },
            stats,
        }),
    }
}

/// Plans a path for a resolved command from `pose`.
pub fn plan(
    command: &Command,
    pose: &Pose,
    map: &EnvironmentMap,
    provider: &mut dyn WaypointProvider,
    cfg: &PlannerConfig,
    templates: &PromptTemplates,
    clock: &dyn Clock,
) -> Result<(Path, PlanningStats), PlanFailure> {
    let Some(target) = map.object(&command.target_name) else {
        return Err(PlanFailure {
            error: PlanningError::UnknownTarget(command.target_name.clone()),
            stats: PlanningStats::default(),
        });
    };
    let req = PlanRequest {
        context: PlanContext {
            map,
            pose: *pose,
            target,
            cfg,
            rule: ClearanceRule::NONE,
        },
        command_text: &command.raw_text,
        templates,
        obstacle_notes: &[],
        candidates: 1,
    };
    plan_request(&req, provider, clock)
}
