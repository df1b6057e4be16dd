//! Scenario replay, artifact emission and the interactive REPL.

mod repl;
mod scenario;
mod svg;

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use thiserror::Error;

pub use repl::repl;
pub use scenario::{builtin_scenario, Scenario, BUILTIN_SCENARIOS};
pub use svg::render_svg;

use crate::clock::{Clock, FrozenClock, WallClock};
use crate::metrics::{aggregate, aggregate_csv, metrics_csv, render_report, RunLog, RunMeta, RunMetrics};
use crate::navigator::{trajectory_csv, CommandOutcome, FailReason, NavConfig, NavState, Navigator};
use crate::planning::{parse_command, PromptTemplates};
use crate::providers::{LlmEndpointConfig, LlmProvider, OracleProvider, StubProvider, WaypointProvider};
use crate::world::EnvironmentMap;

pub const EXIT_OK: i32 = 0;
pub const EXIT_COMMAND_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_PROVIDER: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("provider error: {0}")]
    Provider(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Provider(_) => EXIT_PROVIDER,
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ProviderKind {
    Oracle,
    Llm,
    Stub,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProviderSettings {
    pub kind: ProviderKind,
    pub llm_url: Option<String>,
    pub model: Option<String>,
    /// JSON file holding an array of canned responses.
    pub stub_script: Option<PathBuf>,
    pub seed: u64,
}

impl ProviderSettings {
    pub fn oracle() -> Self {
        Self {
            kind: ProviderKind::Oracle,
            llm_url: None,
            model: None,
            stub_script: None,
            seed: 0,
        }
    }

    pub fn build(&self) -> Result<Box<dyn WaypointProvider>, CliError> {
        match self.kind {
            ProviderKind::Oracle => Ok(Box::new(OracleProvider)),
            ProviderKind::Llm => {
                let url = self
                    .llm_url
                    .clone()
                    .ok_or_else(|| CliError::Config("--llm-url (or NAV_LLM_URL) is required for the llm provider".into()))?;
                let model = self
                    .model
                    .clone()
                    .ok_or_else(|| CliError::Config("--model (or NAV_LLM_MODEL) is required for the llm provider".into()))?;
                let mut cfg = LlmEndpointConfig::new(url, model);
                cfg.seed = Some(self.seed);
                Ok(Box::new(LlmProvider::new(cfg)))
            }
            ProviderKind::Stub => {
                let path = self
                    .stub_script
                    .as_ref()
                    .ok_or_else(|| CliError::Config("--stub-script is required for the stub provider".into()))?;
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                let script: Vec<String> = serde_json::from_str(&text)
                    .map_err(|e| CliError::Config(format!("stub script must be a JSON array of strings: {e}")))?;
                StubProvider::new(script)
                    .map(|s| Box::new(s) as Box<dyn WaypointProvider>)
                    .map_err(|e| CliError::Config(e.to_string()))
            }
        }
    }

    /// Oracle and stub runs use a frozen clock so artifacts are reproducible.
    pub fn clock(&self) -> Box<dyn Clock> {
        match self.kind {
            ProviderKind::Llm => Box::new(WallClock::new()),
            ProviderKind::Oracle | ProviderKind::Stub => Box::new(FrozenClock),
        }
    }

    pub fn label(&self) -> &'static str {
        match self.kind {
            ProviderKind::Oracle => "oracle",
            ProviderKind::Llm => "llm",
            ProviderKind::Stub => "stub",
        }
    }
}

/// Everything a scenario run produced.
pub struct ScenarioRun {
    pub map: EnvironmentMap,
    pub outcomes: Vec<CommandOutcome>,
    pub log: RunLog,
    pub metrics: Vec<RunMetrics>,
}

impl ScenarioRun {
    pub fn exit_code(&self) -> i32 {
        let provider_failed = self.outcomes.iter().any(|o| {
            o.state
                == NavState::Failed {
                    reason: FailReason::ProviderError,
                }
        });
        if provider_failed {
            EXIT_PROVIDER
        } else if self.all_completed() {
            EXIT_OK
        } else {
            EXIT_COMMAND_FAILED
        }
    }

    pub fn all_completed(&self) -> bool {
        self.outcomes.iter().all(CommandOutcome::completed)
    }
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Runs every scenario command in order.
pub fn run_scenario(
    scenario: &Scenario,
    settings: &ProviderSettings,
    config: &NavConfig,
    templates: &PromptTemplates,
    continue_on_failure: bool,
) -> Result<ScenarioRun, CliError> {
    config.validate().map_err(CliError::Config)?;
    let map = scenario.environment()?;
    let commands = scenario
        .commands
        .iter()
        .map(|c| parse_command(c, &map).map_err(|e| CliError::Config(format!("`{c}`: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let mut provider = settings.build()?;
    let mut nav = Navigator::new(map.clone(), config.clone(), templates.clone(), settings.clock());
    let outcomes = nav.run_sequence(&commands, provider.as_mut(), &scenario.obstacle_script, continue_on_failure);
    let meta = RunMeta {
        generated_unix: unix_now(),
        environment: map.name.clone(),
        provider: provider.descriptor().to_string(),
        seed: settings.seed,
        dt: config.sim.dt,
        d_critical: config.safety.d_slowstop,
    };
    let log = RunLog {
        meta,
        commands: outcomes.iter().map(|o| o.log.clone()).collect(),
    };
    let metrics = log.metrics();
    Ok(ScenarioRun {
        map,
        outcomes,
        log,
        metrics,
    })
}

/// Writes `trajectory_<k>.csv`, `metrics.csv`, `aggregate.txt`,
/// `aggregate.csv`, `events.jsonl` and `path_plot.svg` into `dir`.
pub fn write_artifacts(run: &ScenarioRun, dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    for (k, o) in run.outcomes.iter().enumerate() {
        std::fs::write(dir.join(format!("trajectory_{}.csv", k + 1)), trajectory_csv(&o.trajectory))?;
    }
    std::fs::write(dir.join("events.jsonl"), run.log.to_jsonl())?;
    write_reports(&run.log, dir)?;
    std::fs::write(dir.join("path_plot.svg"), render_svg(&run.map, &run.outcomes))?;
    Ok(())
}

/// Metric files derived from the event log alone.
pub fn write_reports(log: &RunLog, dir: &Path) -> Result<(), CliError> {
    let rows = log.metrics();
    let metrics = metrics_csv(&log.meta, &rows).map_err(|e| CliError::Config(e.to_string()))?;
    std::fs::write(dir.join("metrics.csv"), metrics)?;
    std::fs::write(dir.join("aggregate.txt"), render_report(&log.meta, &rows))?;
    let agg = aggregate_csv(&aggregate(&rows)).map_err(|e| CliError::Config(e.to_string()))?;
    std::fs::write(dir.join("aggregate.csv"), agg)?;
    Ok(())
}

/// Regenerates the metric files from a persisted `events.jsonl`.
pub fn report_from_log(events: &Path, dir: &Path) -> Result<RunLog, CliError> {
    let text = std::fs::read_to_string(events).map_err(|e| CliError::Config(format!("{}: {e}", events.display())))?;
    let log = RunLog::from_jsonl(&text).map_err(|e| CliError::Config(e.to_string()))?;
    std::fs::create_dir_all(dir)?;
    write_reports(&log, dir)?;
    Ok(log)
}

/// One-line per-command summary used by the CLI and REPL.
pub fn summary_line(m: &RunMetrics) -> String {
    format!(
        "{}  {}  plan {:.2} s  exec {:.2} s  wgsr {}  length {:.2} m  collisions {}  replan_attempts={}",
        m.outcome,
        m.route,
        m.planning_time,
        m.execution_time,
        m.wgsr().map(|w| format!("{w:.2}%")).unwrap_or_else(|| "n/a".into()),
        m.path_length,
        m.collision_events,
        m.replan_attempts
    )
}
