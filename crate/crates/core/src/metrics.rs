//! Run event logs and the evaluation metrics computed from them.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::control::{Pose, VelocityCommand};
use crate::geometry::{Circle, Point};
use crate::navigator::NavState;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("event log line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("event log is empty")]
    Empty,
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// One entry of a command's event log. `clock` fields are planning-clock
/// seconds; `sim_time` fields are simulator seconds since the command began.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    CommandAccepted {
        clock: f64,
        text: String,
        target: String,
        from: String,
        provider: String,
        start: Pose,
    },
    Planned {
        clock_start: f64,
        clock_end: f64,
        attempts: u32,
        successes: u32,
        replan: bool,
        errors: Vec<String>,
    },
    PathReady {
        clock: f64,
        sim_time: f64,
        waypoints: Vec<Point>,
        provider: String,
        replan: bool,
    },
    StateChange {
        sim_time: f64,
        from: NavState,
        to: NavState,
    },
    MotionStarted {
        sim_time: f64,
    },
    Tick {
        sim_time: f64,
        pose: Pose,
        command: VelocityCommand,
        min_frontal: Option<f64>,
    },
    EmergencyStop {
        sim_time: f64,
        range: f64,
        bearing: f64,
        estimate: Circle,
    },
    ReplanAttempt {
        sim_time: f64,
        attempt: u32,
    },
    ObstacleAdded {
        sim_time: f64,
        obstacle: Circle,
    },
    ObstacleRemoved {
        sim_time: f64,
        obstacle: Circle,
    },
    Collision {
        sim_time: f64,
        position: Point,
    },
    Finished {
        sim_time: f64,
        state: NavState,
        report: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CommandLog {
    pub events: Vec<Event>,
}

/// Run-level metadata written as the first log line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub generated_unix: u64,
    pub environment: String,
    pub provider: String,
    pub seed: u64,
    pub dt: f64,
    /// Frontal range below which a tick counts toward collision events.
    pub d_critical: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub meta: RunMeta,
    pub commands: Vec<CommandLog>,
}

#[derive(Serialize, Deserialize)]
struct LogLine {
    command: usize,
    event: Event,
}

impl RunLog {
    /// JSON Lines: the metadata object, then one `{command, event}` per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::to_string(&self.meta).expect("meta serializes");
        out.push('\n');
        for (command, log) in self.commands.iter().enumerate() {
            for event in &log.events {
                let line = LogLine {
                    command,
                    event: event.clone(),
                };
                out.push_str(&serde_json::to_string(&line).expect("event serializes"));
                out.push('\n');
            }
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, MetricsError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, first) = lines.next().ok_or(MetricsError::Empty)?;
        let meta: RunMeta = serde_json::from_str(first).map_err(|source| MetricsError::Parse { line: 1, source })?;
        let mut commands: Vec<CommandLog> = Vec::new();
        for (i, line) in lines {
            let parsed: LogLine =
                serde_json::from_str(line).map_err(|source| MetricsError::Parse { line: i + 1, source })?;
            if commands.len() <= parsed.command {
                commands.resize_with(parsed.command + 1, CommandLog::default);
            }
            commands[parsed.command].events.push(parsed.event);
        }
        Ok(Self { meta, commands })
    }

    pub fn metrics(&self) -> Vec<RunMetrics> {
        self.commands
            .iter()
            .enumerate()
            .map(|(i, log)| RunMetrics::from_log(i, log, self.meta.d_critical))
            .collect()
    }
}

/// Per-command metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub index: usize,
    pub command: String,
    /// `from → to` row label.
    pub route: String,
    pub provider: String,
    pub outcome: NavState,
    pub planning_time: f64,
    pub execution_time: f64,
    /// Φ: provider calls that produced a validated path.
    pub wp_successes: u32,
    /// Ψ: provider calls made.
    pub wp_attempts: u32,
    pub path_length: f64,
    /// Debounced frontal encounters below `d_critical`.
    pub collision_events: u32,
    /// Raw ticks below `d_critical`.
    pub collision_ticks: u32,
    /// Wall or obstacle penetrations.
    pub penetrations: u32,
    /// μ.
    pub replan_attempts: u32,
}

impl RunMetrics {
    pub fn completed(&self) -> bool {
        self.outcome == NavState::Completed
    }

    /// `None` when Ψ = 0.
    pub fn wgsr(&self) -> Option<f64> {
        wgsr(self.wp_successes, self.wp_attempts)
    }

    /// μ/Γ; `None` when Γ = 0.
    pub fn replanning_rate(&self) -> Option<f64> {
        (self.execution_time > 0.0).then(|| self.replan_attempts as f64 / self.execution_time)
    }

    pub fn from_log(index: usize, log: &CommandLog, d_critical: f64) -> Self {
        let mut m = RunMetrics {
            index,
            command: String::new(),
            route: String::new(),
            provider: String::new(),
            outcome: NavState::Idle,
            planning_time: 0.0,
            execution_time: 0.0,
            wp_successes: 0,
            wp_attempts: 0,
            path_length: 0.0,
            collision_events: 0,
            collision_ticks: 0,
            penetrations: 0,
            replan_attempts: 0,
        };
        let mut t_x = 0.0;
        let mut t_eps = None;
        let mut t_rho = None;
        let mut t_phi = None;
        let mut last_tick = 0.0;
        let mut poses: Vec<Point> = Vec::new();
        let mut frontal = Vec::new();
        for e in &log.events {
            match e {
                Event::CommandAccepted {
                    clock,
                    text,
                    target,
                    from,
                    provider,
                    start,
                } => {
                    t_x = *clock;
                    m.command = text.clone();
                    m.route = format!("{from} → {target}");
                    m.provider = provider.clone();
                    poses.push(start.position());
                }
                Event::Planned {
                    clock_end,
                    attempts,
                    successes,
                    replan,
                    ..
                } => {
                    m.wp_attempts += attempts;
                    m.wp_successes += successes;
                    if !replan && t_eps.is_none() {
                        t_eps = Some(*clock_end);
                    }
                }
                Event::MotionStarted { sim_time } => t_rho = Some(*sim_time),
                Event::Tick {
                    sim_time,
                    pose,
                    min_frontal,
                    ..
                } => {
                    poses.push(pose.position());
                    frontal.push(min_frontal.unwrap_or(f64::INFINITY));
                    last_tick = *sim_time;
                }
                Event::ReplanAttempt { .. } => m.replan_attempts += 1,
                Event::Collision { .. } => m.penetrations += 1,
                Event::Finished { sim_time, state, .. } => {
                    m.outcome = *state;
                    t_phi = Some(*sim_time);
                }
                _ => {}
            }
        }
        m.planning_time = (t_eps.unwrap_or(t_x) - t_x).max(0.0);
        if let Some(start) = t_rho {
            m.execution_time = (t_phi.unwrap_or(last_tick) - start).max(0.0);
        }
        m.path_length = path_length(&poses);
        m.collision_events = collision_events(&frontal, d_critical);
        m.collision_ticks = frontal.iter().filter(|&&r| r < d_critical).count() as u32;
        m
    }
}

/// Sum of distances between consecutive positions.
pub fn path_length(points: &[Point]) -> f64 {
    crate::geometry::polyline_length(points)
}

/// Encounters where the frontal range drops below `d_critical`; a run of
/// consecutive sub-threshold ticks counts once.
pub fn collision_events(min_frontal: &[f64], d_critical: f64) -> u32 {
    let mut below = false;
    let mut count = 0;
    for &r in min_frontal {
        let now_below = r < d_critical;
        if now_below && !below {
            count += 1;
        }
        below = now_below;
    }
    count
}

/// Waypoint generation success rate in percent; `None` when Ψ = 0.
pub fn wgsr(successes: u32, attempts: u32) -> Option<f64> {
    (attempts > 0).then(|| 100.0 * successes as f64 / attempts as f64)
}

/// Means over completed runs; failures are counted, not averaged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub runs: usize,
    pub completed: usize,
    pub failed: usize,
    pub planning_time: Option<f64>,
    pub execution_time: Option<f64>,
    pub wgsr: Option<f64>,
    pub path_length: Option<f64>,
    pub collision_events: Option<f64>,
    pub replan_attempts: Option<f64>,
    pub replanning_rate: Option<f64>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

pub fn aggregate(rows: &[RunMetrics]) -> Aggregate {
    let ok: Vec<&RunMetrics> = rows.iter().filter(|r| r.completed()).collect();
    Aggregate {
        runs: rows.len(),
        completed: ok.len(),
        failed: rows.len() - ok.len(),
        planning_time: mean(ok.iter().map(|r| r.planning_time)),
        execution_time: mean(ok.iter().map(|r| r.execution_time)),
        wgsr: mean(ok.iter().filter_map(|r| r.wgsr())),
        path_length: mean(ok.iter().map(|r| r.path_length)),
        collision_events: mean(ok.iter().map(|r| r.collision_events as f64)),
        replan_attempts: mean(ok.iter().map(|r| r.replan_attempts as f64)),
        replanning_rate: mean(ok.iter().filter_map(|r| r.replanning_rate())),
    }
}

impl Aggregate {
    /// Metric name and value cells, with `(n*)` appended when runs failed.
    pub fn cells(&self) -> Vec<(&'static str, String)> {
        let note = if self.failed > 0 {
            format!(" ({}*)", self.failed)
        } else {
            String::new()
        };
        let cell = |v: Option<f64>| match v {
            Some(v) => format!("{v:.2}{note}"),
            None => format!("n/a{note}"),
        };
        vec![
            ("planning_time_s", cell(self.planning_time)),
            ("execution_time_s", cell(self.execution_time)),
            ("wgsr_percent", cell(self.wgsr)),
            ("path_length_m", cell(self.path_length)),
            ("collision_events", cell(self.collision_events)),
            ("replan_attempts", cell(self.replan_attempts)),
            ("replanning_rate_per_s", cell(self.replanning_rate)),
        ]
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub const METRICS_HEADER: [&str; 17] = [
    "index",
    "command",
    "route",
    "provider",
    "outcome",
    "planning_time",
    "execution_time",
    "wp_successes",
    "wp_attempts",
    "wgsr",
    "path_length",
    "collision_events",
    "collision_ticks",
    "penetrations",
    "replan_attempts",
    "replanning_rate",
    "completed",
];

/// `#` metadata line followed by one CSV row per command.
pub fn metrics_csv(meta: &RunMeta, rows: &[RunMetrics]) -> Result<String, MetricsError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(METRICS_HEADER)?;
    for r in rows {
        w.write_record([
            r.index.to_string(),
            r.command.clone(),
            r.route.clone(),
            r.provider.clone(),
            r.outcome.to_string(),
            r.planning_time.to_string(),
            r.execution_time.to_string(),
            r.wp_successes.to_string(),
            r.wp_attempts.to_string(),
            opt(r.wgsr()),
            r.path_length.to_string(),
            r.collision_events.to_string(),
            r.collision_ticks.to_string(),
            r.penetrations.to_string(),
            r.replan_attempts.to_string(),
            opt(r.replanning_rate()),
            r.completed().to_string(),
        ])?;
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?).expect("csv is utf-8");
    Ok(format!("{}\n{body}", metadata_line(meta)))
}

pub fn metadata_line(meta: &RunMeta) -> String {
    format!(
        "# generated_unix={} environment={} provider={} seed={} dt={}",
        meta.generated_unix, meta.environment, meta.provider, meta.seed, meta.dt
    )
}

pub fn aggregate_csv(agg: &Aggregate) -> Result<String, MetricsError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["metric", "value"])?;
    for (k, v) in agg.cells() {
        w.write_record([k, v.as_str()])?;
    }
    w.write_record(["runs", agg.runs.to_string().as_str()])?;
    w.write_record(["failed", agg.failed.to_string().as_str()])?;
    Ok(String::from_utf8(w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?).expect("csv is utf-8"))
}

fn table(out: &mut String, header: &[&str], rows: &[Vec<String>]) {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |out: &mut String, cells: &mut dyn Iterator<Item = &str>| {
        let parts: Vec<String> = cells
            .zip(&widths)
            .map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
            .collect();
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(out, &mut header.iter().copied());
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    let _ = writeln!(out, "{}", rule.join("  "));
    for row in rows {
        line(out, &mut row.iter().map(String::as_str));
    }
}

/// Aligned-text report: a per-command table followed by the aggregate.
pub fn render_report(meta: &RunMeta, rows: &[RunMetrics]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "environment: {}  provider: {}  seed: {}", meta.environment, meta.provider, meta.seed);
    let _ = writeln!(out);
    let per: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.route.clone(),
                r.outcome.to_string(),
                format!("{:.2}", r.planning_time),
                format!("{:.2}", r.execution_time),
                r.wgsr().map(|v| format!("{v:.0}%")).unwrap_or_else(|| "n/a".into()),
                format!("{:.2}", r.path_length),
                if r.collision_events > 0 { "Yes".into() } else { "No".into() },
                r.replan_attempts.to_string(),
            ]
        })
        .collect();
    table(
        &mut out,
        &["route", "outcome", "plan_s", "exec_s", "wgsr", "length_m", "collision", "replans"],
        &per,
    );
    let _ = writeln!(out);
    let agg = aggregate(rows);
    let cells: Vec<Vec<String>> = agg.cells().into_iter().map(|(k, v)| vec![k.to_string(), v]).collect();
    table(&mut out, &["metric", "mean"], &cells);
    let _ = writeln!(out, "completed {}/{}", agg.completed, agg.runs);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_length_examples() {
        assert_eq!(path_length(&[Point::new(1.0, 1.0)]), 0.0);
        let pts = [Point::new(0.0, 0.0), Point::new(3.0, 4.0), Point::new(3.0, 5.0)];
        assert!((path_length(&pts) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn debounce_examples() {
        assert_eq!(collision_events(&[1.0, 0.9, 2.0], 0.5), 0);
        let mut one = vec![1.0; 5];
        one.extend(vec![0.4; 40]);
        one.extend(vec![1.0; 5]);
        assert_eq!(collision_events(&one, 0.5), 1);
        assert_eq!(collision_events(&[0.4, 0.4, 0.8, 0.3], 0.5), 2);
    }

    #[test]
    fn wgsr_examples() {
        assert_eq!(wgsr(1, 1), Some(100.0));
        assert_eq!(wgsr(1, 2), Some(50.0));
        assert!((wgsr(1, 3).unwrap() - 100.0 / 3.0).abs() < 1e-12);
        assert_eq!(format!("{:.2}", wgsr(1, 3).unwrap()), "33.33");
        assert_eq!(wgsr(0, 0), None);
    }
}
