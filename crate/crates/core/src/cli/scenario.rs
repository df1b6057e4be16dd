use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::navigator::ObstacleInjection;
use crate::world::EnvironmentMap;

use super::CliError;

const ENV_A_TOUR: &str = include_str!("../../data/scenarios/env_a_tour.json");
const ENV_B_TOUR: &str = include_str!("../../data/scenarios/env_b_tour.json");
const ENV_C_TOUR: &str = include_str!("../../data/scenarios/env_c_tour.json");

pub const BUILTIN_SCENARIOS: [&str; 3] = ["env_a_tour", "env_b_tour", "env_c_tour"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    /// Built-in environment name or path to an environment file.
    pub environment: String,
    pub commands: Vec<String>,
    #[serde(default)]
    pub obstacle_script: Vec<ObstacleInjection>,
    #[serde(default)]
    pub seed: u64,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| CliError::Config(format!("scenario: {e}")))?;
        if s.commands.is_empty() {
            return Err(CliError::Config("scenario has no commands".into()));
        }
        for inj in &s.obstacle_script {
            if inj.command >= s.commands.len() || inj.radius.is_nan() || inj.radius <= 0.0 || inj.at.is_nan() || inj.at < 0.0 {
                return Err(CliError::Config(format!("bad obstacle injection {inj:?}")));
            }
        }
        Ok(s)
    }

    /// Built-in scenario name or a path to a scenario file.
    pub fn resolve(name_or_path: &str) -> Result<Self, CliError> {
        if let Some(text) = builtin_scenario(name_or_path) {
            return Self::from_json(text);
        }
        let text = std::fs::read_to_string(Path::new(name_or_path))
            .map_err(|e| CliError::Config(format!("{name_or_path}: {e}")))?;
        Self::from_json(&text)
    }

    pub fn environment(&self) -> Result<EnvironmentMap, CliError> {
        EnvironmentMap::resolve(&self.environment).map_err(|e| CliError::Config(e.to_string()))
    }
}

pub fn builtin_scenario(name: &str) -> Option<&'static str> {
    match name {
        "env_a_tour" => Some(ENV_A_TOUR),
        "env_b_tour" => Some(ENV_B_TOUR),
        "env_c_tour" => Some(ENV_C_TOUR),
        _ => None,
    }
}
