//! Python bindings: environments, command parsing, waypoint parsing and
//! validation, the oracle planner, the controller, the safety monitor and
//! whole scenario runs.

use pyo3::exceptions::{PyKeyError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use corridor_nav::cli::{run_scenario as run_scenario_core, CliError, ProviderKind, ProviderSettings, Scenario};
use corridor_nav::control::{self, ControllerConfig, FramedPoint, Pose};
use corridor_nav::geometry::Point;
use corridor_nav::metrics;
use corridor_nav::navigator::NavConfig;
use corridor_nav::planning::{self, ClearanceRule, PlannerConfig, PromptTemplates};
use corridor_nav::safety::{self, Assessment, SafetyConfig};
use corridor_nav::world::{EnvironmentMap, ScanData};

fn to_py(py: Python<'_>, value: &impl serde::Serialize) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn points(list: Vec<(f64, f64)>) -> Vec<Point> {
    list.into_iter().map(|(x, y)| Point::new(x, y)).collect()
}

fn tuples(points: &[Point]) -> Vec<(f64, f64)> {
    points.iter().map(|p| (p.x, p.y)).collect()
}

/// A corridor map, built in (`env_a`, `env_b`, `env_c`) or loaded from JSON.
#[pyclass(name = "Environment", frozen)]
struct PyEnvironment {
    map: EnvironmentMap,
}

impl PyEnvironment {
    fn target(&self, name: &str) -> PyResult<&corridor_nav::world::TargetObject> {
        self.map
            .object(name)
            .ok_or_else(|| PyKeyError::new_err(format!("no object named {name:?}")))
    }
}

#[pymethods]
impl PyEnvironment {
    #[new]
    fn new(name_or_path: &str) -> PyResult<Self> {
        EnvironmentMap::resolve(name_or_path)
            .map(|map| Self { map })
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[getter]
    fn name(&self) -> String {
        self.map.name.clone()
    }

    #[getter]
    fn start_pose(&self) -> (f64, f64, f64) {
        let p = self.map.start_pose;
        (p.x, p.y, p.theta)
    }

    /// `{name: (x, y)}` for every target object.
    fn objects(&self) -> Vec<(String, f64, f64)> {
        self.map
            .objects
            .iter()
            .map(|o| (o.name.clone(), o.position.x, o.position.y))
            .collect()
    }

    fn corridor_at(&self, x: f64, y: f64) -> Option<String> {
        self.map.containing_corridor(Point::new(x, y)).map(str::to_string)
    }

    fn within_margin(&self, x: f64, y: f64) -> bool {
        self.map.within_margin(Point::new(x, y))
    }

    /// Synthetic 2-D scan from `pose` as `(ranges, bearings)`.
    #[pyo3(signature = (pose, beams = 360, max_range = 3.5))]
    fn scan(&self, pose: (f64, f64, f64), beams: usize, max_range: f64) -> (Vec<f64>, Vec<f64>) {
        let scan = self.map.cast_scan(&Pose::new(pose.0, pose.1, pose.2), beams, max_range);
        (scan.ranges, scan.bearings)
    }

    fn to_json(&self) -> String {
        self.map.to_json()
    }

    fn __repr__(&self) -> String {
        format!(
            "Environment({:?}, corridors={}, objects={})",
            self.map.name,
            self.map.corridors.len(),
            self.map.objects.len()
        )
    }
}

/// Resolves a natural-language command to `(target_name, x, y)`.
#[pyfunction]
fn parse_command(text: &str, env: &PyEnvironment) -> PyResult<(String, f64, f64)> {
    let cmd = planning::parse_command(text, &env.map).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let target = env.target(&cmd.target_name)?;
    Ok((cmd.target_name, target.position.x, target.position.y))
}

/// Extracts a waypoint list from free-form model output.
#[pyfunction]
fn parse_waypoints(text: &str) -> PyResult<Vec<(f64, f64)>> {
    planning::parse_waypoints(text)
        .map(|p| tuples(&p))
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Runs the validation pipeline; returns the accepted waypoints.
#[pyfunction]
fn validate_waypoints(points_in: Vec<(f64, f64)>, env: &PyEnvironment, target: &str) -> PyResult<Vec<(f64, f64)>> {
    let target = env.target(target)?;
    let cfg = PlannerConfig::default();
    planning::validate_waypoints(&points(points_in), &env.map, target, &cfg, ClearanceRule::NONE)
        .map(|v| tuples(&v.waypoints))
        .map_err(|report| PyValueError::new_err(report.to_string()))
}

/// Deterministic corridor-graph plan from `(x, y)` to the named target.
#[pyfunction]
fn oracle_plan(env: &PyEnvironment, start: (f64, f64), target: &str) -> PyResult<Vec<(f64, f64)>> {
    let target = env.target(target)?;
    planning::oracle_plan(&env.map, Point::new(start.0, start.1), target, &PlannerConfig::default())
        .map(|p| tuples(&p))
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Transforms a map-frame point into the odometry frame given the
/// map-to-odom transform `(x, y, theta)`.
#[pyfunction]
fn map_to_odom(point: (f64, f64), transform: (f64, f64, f64)) -> PyResult<(f64, f64)> {
    let t = Pose::new(transform.0, transform.1, transform.2);
    control::map_to_odom(FramedPoint::map(point.0, point.1), &t)
        .map(|p| (p.x, p.y))
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pyfunction]
fn normalize_angle(theta: f64) -> f64 {
    control::normalize_angle(theta)
}

/// One controller tick: `(linear, angular, reached)`.
#[pyfunction]
fn control_step(pose: (f64, f64, f64), target: (f64, f64)) -> (f64, f64, bool) {
    let out = control::control_step(
        &Pose::new(pose.0, pose.1, pose.2),
        Point::new(target.0, target.1),
        &ControllerConfig::default(),
    );
    (out.command.linear, out.command.angular, out.reached)
}

/// Safety assessment of a scan: `"clear"`, `"slow_stop"` or `"emergency"`
/// with the closest frontal range.
#[pyfunction]
fn assess(ranges: Vec<f64>, bearings: Vec<f64>) -> PyResult<(String, Option<f64>)> {
    if ranges.len() != bearings.len() {
        return Err(PyValueError::new_err("ranges and bearings differ in length"));
    }
    let scan = ScanData {
        ranges,
        bearings,
        stamp: 0.0,
    };
    Ok(match safety::assess(&scan, &SafetyConfig::default()) {
        Assessment::Clear => ("clear".into(), None),
        Assessment::SlowStop { min_range } => ("slow_stop".into(), Some(min_range)),
        Assessment::Emergency { min_range, .. } => ("emergency".into(), Some(min_range)),
    })
}

/// Waypoint generation success rate in percent, `None` without attempts.
#[pyfunction]
fn wgsr(successes: u32, attempts: u32) -> Option<f64> {
    metrics::wgsr(successes, attempts)
}

#[pyfunction]
fn path_length(points_in: Vec<(f64, f64)>) -> f64 {
    metrics::path_length(&points(points_in))
}

/// Runs a built-in scenario name or scenario file and returns one metrics
/// dict per command.
#[pyfunction]
#[pyo3(signature = (scenario, provider = "oracle", llm_url = None, model = None, seed = None))]
fn run_scenario(
    py: Python<'_>,
    scenario: &str,
    provider: &str,
    llm_url: Option<String>,
    model: Option<String>,
    seed: Option<u64>,
) -> PyResult<Py<PyAny>> {
    let kind = match provider {
        "oracle" => ProviderKind::Oracle,
        "llm" => ProviderKind::Llm,
        other => return Err(PyValueError::new_err(format!("unsupported provider {other:?}"))),
    };
    let scenario = Scenario::resolve(scenario).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let settings = ProviderSettings {
        kind,
        llm_url,
        model,
        stub_script: None,
        seed: seed.unwrap_or(scenario.seed),
    };
    let run = py
        .detach(|| run_scenario_core(&scenario, &settings, &NavConfig::default(), &PromptTemplates::default(), true))
        .map_err(|e| match e {
            CliError::Config(m) => PyValueError::new_err(m),
            other => PyRuntimeError::new_err(other.to_string()),
        })?;
    to_py(py, &run.metrics)
}

#[pymodule]
fn corridor_nav_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyEnvironment>()?;
    m.add_function(wrap_pyfunction!(parse_command, m)?)?;
    m.add_function(wrap_pyfunction!(parse_waypoints, m)?)?;
    m.add_function(wrap_pyfunction!(validate_waypoints, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_plan, m)?)?;
    m.add_function(wrap_pyfunction!(map_to_odom, m)?)?;
    m.add_function(wrap_pyfunction!(normalize_angle, m)?)?;
    m.add_function(wrap_pyfunction!(control_step, m)?)?;
    m.add_function(wrap_pyfunction!(assess, m)?)?;
    m.add_function(wrap_pyfunction!(wgsr, m)?)?;
    m.add_function(wrap_pyfunction!(path_length, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    Ok(())
}
