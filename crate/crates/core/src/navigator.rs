//! The navigation state machine and the kinematic simulator around it.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::clock::Clock;
use crate::control::{control_step, map_to_odom, ControllerConfig, FramedPoint, Pose, VelocityCommand};
use crate::geometry::{Circle, Point};
use crate::metrics::{CommandLog, Event};
use crate::planning::{plan_request, ClearanceRule, Command, Path, PlanContext, PlanFailure, PlanRequest, PlannerConfig, PlanningError, PlanningStats, PromptTemplates};
use crate::providers::WaypointProvider;
use crate::safety::{assess, obstacle_estimate, record_attempt, replan_around, should_replan, Assessment, ReplanLedger, ReplanRequest, SafetyConfig};
use crate::world::EnvironmentMap;

/// Penetration depth past a wall or obstacle edge that counts as a collision.
pub const COLLISION_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailReason {
    UnknownTarget,
    PlanningFailed,
    ProviderError,
    ReplanFailed,
    ReplanLimit,
    Collision,
    Timeout,
}

impl fmt::Display for FailReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FailReason::UnknownTarget => "unknown_target",
            FailReason::PlanningFailed => "planning_failed",
            FailReason::ProviderError => "provider_error",
            FailReason::ReplanFailed => "replan_failed",
            FailReason::ReplanLimit => "replan_limit",
            FailReason::Collision => "collision",
            FailReason::Timeout => "timeout",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum NavState {
    Idle,
    Planning,
    Navigating { waypoint: usize },
    EmergencyStop,
    Replanning,
    Completed,
    Failed { reason: FailReason },
}

impl NavState {
    pub fn is_terminal(&self) -> bool {
        matches!(self, NavState::Completed | NavState::Failed { .. })
    }

    /// Whether `self -> next` is an allowed transition.
    ///
    /// Navigating may also fail directly, on timeout or wall contact.
    pub fn can_become(&self, next: &NavState) -> bool {
        use NavState::*;
        match (self, next) {
            (Idle, Planning) => true,
            (Planning, Navigating { waypoint: 0 }) | (Planning, Failed { .. }) => true,
            (Navigating { waypoint: i }, Navigating { waypoint: j }) => *j == i + 1,
            (Navigating { .. }, EmergencyStop | Completed | Failed { .. }) => true,
            (EmergencyStop, Replanning | Failed { .. }) => true,
            (Replanning, Navigating { waypoint: 0 } | Failed { .. }) => true,
            _ => false,
        }
    }
}

impl fmt::Display for NavState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NavState::Idle => f.write_str("Idle"),
            NavState::Planning => f.write_str("Planning"),
            NavState::Navigating { waypoint } => write!(f, "Navigating({waypoint})"),
            NavState::EmergencyStop => f.write_str("EmergencyStop"),
            NavState::Replanning => f.write_str("Replanning"),
            NavState::Completed => f.write_str("Completed"),
            NavState::Failed { reason } => write!(f, "Failed({reason})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub dt: f64,
    pub lidar_beams: usize,
    pub lidar_max_range: f64,
    /// Per command, sim seconds.
    pub max_sim_time: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 0.05,
            lidar_beams: 360,
            lidar_max_range: 3.5,
            max_sim_time: 300.0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.dt > 0.0 && self.max_sim_time > 0.0 && self.lidar_max_range > 0.0) {
            return Err("dt, max_sim_time and lidar_max_range must be positive".into());
        }
        if self.lidar_beams == 0 {
            return Err("lidar_beams must be at least 1".into());
        }
        Ok(())
    }
}

/// Every tunable the navigator consults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NavConfig {
    pub planner: PlannerConfig,
    pub controller: ControllerConfig,
    pub safety: SafetyConfig,
    pub sim: SimConfig,
    /// Valid replan candidates to collect before keeping the shortest.
    pub replan_candidates: u32,
}

impl Default for NavConfig {
    fn default() -> Self {
        Self {
            planner: PlannerConfig::default(),
            controller: ControllerConfig::default(),
            safety: SafetyConfig::default(),
            sim: SimConfig::default(),
            replan_candidates: 1,
        }
    }
}

impl NavConfig {
    pub fn validate(&self) -> Result<(), String> {
        self.planner.validate()?;
        self.safety.validate()?;
        self.sim.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    /// Ground truth in the map frame.
    pub pose: Pose,
    /// Integrated odometry in the current command's odom frame.
    pub odom_pose: Pose,
    pub commanded: VelocityCommand,
    pub sim_time: f64,
}

impl RobotState {
    pub fn at(pose: Pose) -> Self {
        Self {
            pose,
            odom_pose: pose,
            commanded: VelocityCommand::ZERO,
            sim_time: 0.0,
        }
    }
}

fn integrate(pose: &Pose, cmd: &VelocityCommand, dt: f64) -> Pose {
    let (s, c) = pose.theta.sin_cos();
    Pose::new(
        pose.x + cmd.linear * c * dt,
        pose.y + cmd.linear * s * dt,
        pose.theta + cmd.angular * dt,
    )
}

/// Unicycle integration of both the map and odom poses.
pub fn step_kinematics(state: &RobotState, cmd: VelocityCommand, dt: f64) -> RobotState {
    debug_assert!(dt > 0.0);
    RobotState {
        pose: integrate(&state.pose, &cmd, dt),
        odom_pose: integrate(&state.odom_pose, &cmd, dt),
        commanded: cmd,
        sim_time: state.sim_time + dt,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Placement {
    Fixed { x: f64, y: f64 },
    /// Center this far ahead of the robot along its heading.
    Ahead { ahead: f64 },
}

/// A dynamic obstacle added (and optionally removed) during one command.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObstacleInjection {
    /// Zero-based index of the command during which it appears.
    #[serde(default)]
    pub command: usize,
    /// Sim seconds after the command starts.
    pub at: f64,
    pub radius: f64,
    #[serde(flatten)]
    pub place: Placement,
    /// Sim seconds after the command starts; the obstacle otherwise stays.
    #[serde(default)]
    pub remove_at: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub sim_time: f64,
    pub pose: Pose,
    pub state: NavState,
    pub command: VelocityCommand,
}

pub type Trajectory = Vec<TrajectorySample>;

/// Everything one command produced.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutcome {
    pub command: Command,
    pub state: NavState,
    pub trajectory: Trajectory,
    /// Every path executed, initial plan first.
    pub paths: Vec<Path>,
    pub log: CommandLog,
    /// Human-readable failure detail.
    pub report: Option<String>,
}

impl CommandOutcome {
    pub fn completed(&self) -> bool {
        self.state == NavState::Completed
    }

    pub fn state_trace(&self) -> Vec<NavState> {
        let mut trace = vec![NavState::Idle];
        for e in &self.log.events {
            if let Event::StateChange { to, .. } = e {
                trace.push(*to);
            }
        }
        trace
    }
}

/// Owns the map and robot for a sequence of commands.
pub struct Navigator {
    pub map: EnvironmentMap,
    pub robot: RobotState,
    pub config: NavConfig,
    pub templates: PromptTemplates,
    clock: Box<dyn Clock>,
}

struct Run<'a> {
    log: CommandLog,
    state: NavState,
    trajectory: Trajectory,
    nav: &'a mut Navigator,
}

impl Run<'_> {
    fn go(&mut self, next: NavState) {
        assert!(
            self.state.can_become(&next),
            "illegal transition {} -> {}",
            self.state,
            next
        );
        self.log.events.push(Event::StateChange {
            sim_time: self.nav.robot.sim_time,
            from: self.state,
            to: next,
        });
        self.state = next;
    }

    fn record_planning(&mut self, stats: &PlanningStats, replan: bool) {
        self.log.events.push(Event::Planned {
            clock_start: stats.started_at,
            clock_end: stats.finished_at,
            attempts: stats.attempts,
            successes: stats.successes,
            replan,
            errors: stats.log.iter().filter_map(|a| a.error.clone()).collect(),
        });
    }

    fn record_path(&mut self, path: &Path, replan: bool, clock: f64) {
        self.log.events.push(Event::PathReady {
            clock,
            sim_time: self.nav.robot.sim_time,
            waypoints: path.waypoints.clone(),
            provider: path.provider.to_string(),
            replan,
        });
    }

    fn sample(&mut self) {
        let r = &self.nav.robot;
        self.trajectory.push(TrajectorySample {
            sim_time: r.sim_time,
            pose: r.pose,
            state: self.state,
            command: r.commanded,
        });
    }
}

fn plan_failure_reason(e: &PlanningError) -> FailReason {
    match e {
        PlanningError::ProviderUnavailable(_) | PlanningError::ProviderError { .. } => FailReason::ProviderError,
        PlanningError::UnknownTarget(_) => FailReason::UnknownTarget,
        _ => FailReason::PlanningFailed,
    }
}

impl Navigator {
    pub fn new(map: EnvironmentMap, config: NavConfig, templates: PromptTemplates, clock: Box<dyn Clock>) -> Self {
        let robot = RobotState::at(map.start_pose);
        Self {
            map,
            robot,
            config,
            templates,
            clock,
        }
    }

    pub fn clock(&self) -> &dyn Clock {
        self.clock.as_ref()
    }

    /// Adds a dynamic obstacle between commands.
    pub fn inject(&mut self, obstacle: Circle) {
        self.map.dynamic_obstacles.push(obstacle);
    }

    /// Runs one command from the current robot pose to a terminal state.
    ///
    /// `from` labels the start point in reports; `injections` are the
    /// scheduled obstacles for this command, times relative to its start.
    pub fn run_command(
        &mut self,
        command: &Command,
        from: &str,
        provider: &mut dyn WaypointProvider,
        injections: &[ObstacleInjection],
    ) -> CommandOutcome {
        // each command gets a fresh odom frame anchored at its start pose
        let anchor = self.robot.pose;
        let transform = anchor.inverse();
        self.robot = RobotState {
            pose: anchor,
            odom_pose: Pose::new(0.0, 0.0, 0.0),
            commanded: VelocityCommand::ZERO,
            sim_time: 0.0,
        };
        let cfg = self.config.clone();
        let mut run = Run {
            log: CommandLog::default(),
            state: NavState::Idle,
            trajectory: Vec::new(),
            nav: self,
        };
        run.log.events.push(Event::CommandAccepted {
            clock: command.issued_at,
            text: command.raw_text.clone(),
            target: command.target_name.clone(),
            from: from.to_string(),
            provider: provider.descriptor().to_string(),
            start: anchor,
        });
        run.sample();
        let mut paths = Vec::new();
        let mut report = None;

        run.go(NavState::Planning);
        let target = run.nav.map.object(&command.target_name).cloned();
        let planned = match &target {
            None => Err(PlanFailure {
                error: PlanningError::UnknownTarget(command.target_name.clone()),
                stats: PlanningStats::default(),
            }),
            Some(target) => {
                let req = PlanRequest {
                    context: PlanContext {
                        map: &run.nav.map,
                        pose: anchor,
                        target,
                        cfg: &cfg.planner,
                        rule: ClearanceRule::NONE,
                    },
                    command_text: &command.raw_text,
                    templates: &run.nav.templates,
                    obstacle_notes: &[],
                    candidates: 1,
                };
                plan_request(&req, provider, run.nav.clock.as_ref())
            }
        };
        let mut path = match planned {
            Ok((path, stats)) => {
                run.record_planning(&stats, false);
                run.record_path(&path, false, stats.finished_at);
                run.go(NavState::Navigating { waypoint: 0 });
                path
            }
            Err(failure) => {
                run.record_planning(&failure.stats, false);
                report = Some(failure.error.to_string());
                run.go(NavState::Failed {
                    reason: plan_failure_reason(&failure.error),
                });
                return finish(run, command, paths, report);
            }
        };
        let target = target.expect("planning succeeded so the target exists");
        paths.push(path.clone());

        let mut odom_waypoints = to_odom(&path, &transform);
        let mut ledger = ReplanLedger::default();
        let mut estimates: Vec<Circle> = Vec::new();
        let mut injected: Vec<(usize, Option<f64>)> = Vec::new();
        let mut pending: Vec<&ObstacleInjection> = injections.iter().collect();
        let mut moved = false;
        let mut ticks: u64 = 0;

        loop {
            let now = run.nav.robot.sim_time;
            // scheduled world changes land before sensing
            pending.retain(|inj| {
                if inj.at <= now + 1e-9 {
                    let center = match inj.place {
                        Placement::Fixed { x, y } => Point::new(x, y),
                        Placement::Ahead { ahead } => {
                            let p = run.nav.robot.pose;
                            let (s, c) = p.theta.sin_cos();
                            Point::new(p.x + ahead * c, p.y + ahead * s)
                        }
                    };
                    let circle = Circle::new(center, inj.radius);
                    run.nav.map.dynamic_obstacles.push(circle);
                    injected.push((run.nav.map.dynamic_obstacles.len() - 1, inj.remove_at));
                    run.log.events.push(Event::ObstacleAdded { sim_time: now, obstacle: circle });
                    false
                } else {
                    true
                }
            });
            let mut removed = Vec::new();
            injected.retain(|&(idx, remove_at)| match remove_at {
                Some(t) if t <= now + 1e-9 => {
                    removed.push(idx);
                    false
                }
                _ => true,
            });
            removed.sort_unstable_by(|a, b| b.cmp(a));
            for idx in removed {
                let obstacle = run.nav.map.dynamic_obstacles.remove(idx);
                for entry in &mut injected {
                    if entry.0 > idx {
                        entry.0 -= 1;
                    }
                }
                run.log.events.push(Event::ObstacleRemoved { sim_time: now, obstacle });
            }

            // sense
            let pose = run.nav.robot.pose;
            let scan = run.nav.map.cast_scan_at(&pose, cfg.sim.lidar_beams, cfg.sim.lidar_max_range, now);
            let assessment = assess(&scan, &cfg.safety);
            let min_frontal = crate::safety::min_frontal(&scan, cfg.safety.frontal_half_angle).map(|(r, _)| r);

            // decide
            let mut cmd = VelocityCommand::ZERO;
            match run.state {
                NavState::Navigating { waypoint } => {
                    let mut i = waypoint;
                    let mut out = control_step(&run.nav.robot.odom_pose, odom_waypoints[i], &cfg.controller);
                    while out.reached && i + 1 < odom_waypoints.len() {
                        i += 1;
                        run.go(NavState::Navigating { waypoint: i });
                        out = control_step(&run.nav.robot.odom_pose, odom_waypoints[i], &cfg.controller);
                    }
                    if out.reached {
                        run.go(NavState::Completed);
                    } else {
                        cmd = out.command;
                        match assessment {
                            // turning in place stays allowed so the robot can face a detour
                            Assessment::Emergency { min_range, bearing } if cmd.linear > 0.0 => {
                                cmd = VelocityCommand::ZERO;
                                let estimate = obstacle_estimate(&pose, min_range, bearing, cfg.safety.obstacle_radius);
                                estimates.push(estimate);
                                run.log.events.push(Event::EmergencyStop {
                                    sim_time: now,
                                    range: min_range,
                                    bearing,
                                    estimate,
                                });
                                run.go(NavState::EmergencyStop);
                            }
                            Assessment::SlowStop { .. } | Assessment::Emergency { .. } => {
                                cmd.linear = cmd.linear.min(cfg.safety.slow_speed);
                            }
                            Assessment::Clear => {}
                        }
                    }
                }
                NavState::EmergencyStop => {
                    if ledger.attempts >= cfg.safety.max_replans {
                        report = Some(format!("replan limit of {} reached", cfg.safety.max_replans));
                        run.go(NavState::Failed {
                            reason: FailReason::ReplanLimit,
                        });
                    } else if should_replan(&ledger, now, &cfg.safety) {
                        ledger = record_attempt(&ledger, now, &cfg.safety);
                        run.log.events.push(Event::ReplanAttempt {
                            sim_time: now,
                            attempt: ledger.attempts,
                        });
                        run.go(NavState::Replanning);
                        let req = ReplanRequest {
                            map: &run.nav.map,
                            pose,
                            target: &target,
                            command_text: &command.raw_text,
                            estimates: &estimates,
                            planner: &cfg.planner,
                            safety: &cfg.safety,
                            templates: &run.nav.templates,
                            candidates: cfg.replan_candidates.max(1),
                        };
                        match replan_around(&req, provider, run.nav.clock.as_ref()) {
                            Ok((new_path, stats)) => {
                                run.record_planning(&stats, true);
                                run.record_path(&new_path, true, stats.finished_at);
                                path = new_path;
                                paths.push(path.clone());
                                odom_waypoints = to_odom(&path, &transform);
                                run.go(NavState::Navigating { waypoint: 0 });
                            }
                            Err(failure) => {
                                run.record_planning(&failure.stats, true);
                                report = Some(failure.error.to_string());
                                let reason = match plan_failure_reason(&failure.error) {
                                    FailReason::ProviderError => FailReason::ProviderError,
                                    _ => FailReason::ReplanFailed,
                                };
                                run.go(NavState::Failed { reason });
                            }
                        }
                    }
                }
                _ => {}
            }
            if run.state.is_terminal() {
                break;
            }
            debug_assert!(run.state != NavState::EmergencyStop || cmd.is_zero());

            // act and integrate
            if !moved && !cmd.is_zero() {
                moved = true;
                run.log.events.push(Event::MotionStarted { sim_time: now });
            }
            run.nav.robot = step_kinematics(&run.nav.robot, cmd, cfg.sim.dt);
            // tick count times dt, so sim times do not drift from accumulation
            ticks += 1;
            run.nav.robot.sim_time = ticks as f64 * cfg.sim.dt;
            let p = run.nav.robot.pose.position();
            run.log.events.push(Event::Tick {
                sim_time: run.nav.robot.sim_time,
                pose: run.nav.robot.pose,
                command: cmd,
                min_frontal,
            });
            let hit_obstacle = run
                .nav
                .map
                .dynamic_obstacles
                .iter()
                .any(|o| o.clearance(p) < -COLLISION_TOLERANCE);
            if !run.nav.map.in_free_space(p, COLLISION_TOLERANCE) || hit_obstacle {
                run.log.events.push(Event::Collision {
                    sim_time: run.nav.robot.sim_time,
                    position: p,
                });
                report = Some(format!("collision at ({}, {})", p.x, p.y));
                run.go(NavState::Failed {
                    reason: FailReason::Collision,
                });
                break;
            }
            if run.nav.robot.sim_time >= cfg.sim.max_sim_time {
                report = Some(format!("no arrival within {} s", cfg.sim.max_sim_time));
                run.go(NavState::Failed {
                    reason: FailReason::Timeout,
                });
                break;
            }
            run.sample();
        }
        finish(run, command, paths, report)
    }

    /// Runs commands back to back from each terminal pose.
    pub fn run_sequence(
        &mut self,
        commands: &[Command],
        provider: &mut dyn WaypointProvider,
        injections: &[ObstacleInjection],
        continue_on_failure: bool,
    ) -> Vec<CommandOutcome> {
        let mut out = Vec::with_capacity(commands.len());
        let mut from = "SP".to_string();
        for (k, command) in commands.iter().enumerate() {
            let mine: Vec<ObstacleInjection> = injections.iter().filter(|i| i.command == k).copied().collect();
            let command = command.clone().stamped(self.clock.now());
            let outcome = self.run_command(&command, &from, provider, &mine);
            from = command.target_name.clone();
            let failed = !outcome.completed();
            out.push(outcome);
            if failed && !continue_on_failure {
                break;
            }
        }
        out
    }
}

fn to_odom(path: &Path, transform: &Pose) -> Vec<Point> {
    path.waypoints
        .iter()
        .map(|p| {
            map_to_odom(FramedPoint::map(p.x, p.y), transform)
                .expect("map-frame input")
                .point()
        })
        .collect()
}

fn finish(mut run: Run<'_>, command: &Command, paths: Vec<Path>, report: Option<String>) -> CommandOutcome {
    run.sample();
    run.log.events.push(Event::Finished {
        sim_time: run.nav.robot.sim_time,
        state: run.state,
        report: report.clone(),
    });
    run.nav.robot.commanded = VelocityCommand::ZERO;
    CommandOutcome {
        command: command.clone(),
        state: run.state,
        trajectory: run.trajectory,
        paths,
        log: run.log,
        report,
    }
}

/// CSV with columns `sim_time,x,y,theta,state,v_linear,v_angular`.
pub fn trajectory_csv(trajectory: &[TrajectorySample]) -> String {
    let mut s = String::from("sim_time,x,y,theta,state,v_linear,v_angular\n");
    for t in trajectory {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            t.sim_time, t.pose.x, t.pose.y, t.pose.theta, t.state, t.command.linear, t.command.angular
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::FrozenClock;
    use crate::planning::parse_command;
    use crate::providers::{OracleProvider, StubProvider};
    use crate::world::builtin_environment;
    use std::f64::consts::PI;

    fn navigator(env: &str) -> Navigator {
        let map = builtin_environment(env).unwrap();
        Navigator::new(map, NavConfig::default(), PromptTemplates::default(), Box::new(FrozenClock))
    }

    #[test]
    fn kinematics_examples() {
        let s = RobotState::at(Pose::new(1.0, 2.0, 0.5));
        let z = step_kinematics(&s, VelocityCommand::ZERO, 0.05);
        assert_eq!(z.pose, s.pose);
        assert!((z.sim_time - 0.05).abs() < 1e-15);
        let s = RobotState::at(Pose::new(0.0, 0.0, 0.0));
        let f = step_kinematics(&s, VelocityCommand { linear: 0.4, angular: 0.0 }, 1.0);
        assert!((f.pose.x - 0.4).abs() < 1e-12);
        let r = step_kinematics(&s, VelocityCommand { linear: 0.0, angular: 2.0 }, PI / 2.0);
        assert!((r.pose.theta.abs() - PI).abs() < 1e-12);
    }

    #[test]
    fn transition_table() {
        use NavState::*;
        assert!(Idle.can_become(&Planning));
        assert!(!Idle.can_become(&Navigating { waypoint: 0 }));
        assert!(Navigating { waypoint: 1 }.can_become(&Navigating { waypoint: 2 }));
        assert!(!Navigating { waypoint: 1 }.can_become(&Navigating { waypoint: 3 }));
        assert!(!EmergencyStop.can_become(&Navigating { waypoint: 0 }));
        assert!(Replanning.can_become(&Navigating { waypoint: 0 }));
        assert!(!Completed.can_become(&Planning));
    }

    #[test]
    fn window_from_start() {
        let mut nav = navigator("env_a");
        let cmd = parse_command("go to the window", &nav.map).unwrap();
        let out = nav.run_command(&cmd, "SP", &mut OracleProvider, &[]);
        assert_eq!(out.state, NavState::Completed, "{:?}", out.report);
        let window = nav.map.object("Window").unwrap().position;
        assert!(nav.robot.pose.position().distance(window) <= 0.1);
    }

    #[test]
    fn garbage_provider_never_moves() {
        let mut nav = navigator("env_a");
        let cmd = parse_command("go to the window", &nav.map).unwrap();
        let mut stub = StubProvider::new(vec!["nope".into()]).unwrap();
        let out = nav.run_command(&cmd, "SP", &mut stub, &[]);
        assert_eq!(out.state, NavState::Failed { reason: FailReason::PlanningFailed });
        assert!(out.trajectory.iter().all(|s| s.pose == nav.map.start_pose));
    }

    #[test]
    fn obstacle_ahead_triggers_replan() {
        let mut nav = navigator("env_a");
        let cmd = parse_command("go to the window", &nav.map).unwrap();
        let inj = [ObstacleInjection {
            command: 0,
            at: 10.0,
            radius: 0.3,
            place: Placement::Ahead { ahead: 2.0 },
            remove_at: None,
        }];
        let out = nav.run_command(&cmd, "SP", &mut OracleProvider, &inj);
        assert_eq!(out.state, NavState::Completed, "{:?}", out.report);
        let trace = out.state_trace();
        let pos = |s: &NavState| trace.iter().position(|t| t == s).unwrap();
        let e = pos(&NavState::EmergencyStop);
        let r = pos(&NavState::Replanning);
        assert!(e < r);
        assert!(matches!(trace[r + 1], NavState::Navigating { waypoint: 0 }));
        for w in trace.windows(2) {
            assert!(w[0].can_become(&w[1]));
        }
    }

    #[test]
    fn empty_sequence() {
        let mut nav = navigator("env_a");
        assert!(nav.run_sequence(&[], &mut OracleProvider, &[], false).is_empty());
    }

    #[test]
    fn env_c_start_pose_honoured() {
        let mut nav = navigator("env_c");
        assert_eq!(nav.robot.pose.position(), Point::new(0.0, -3.0));
        let cmd = parse_command("go to RNP 107", &nav.map).unwrap();
        let out = nav.run_sequence(&[cmd], &mut OracleProvider, &[], false);
        assert_eq!(out[0].trajectory[0].pose.position(), Point::new(0.0, -3.0));
        assert!(out[0].completed(), "{:?}", out[0].report);
    }
}
