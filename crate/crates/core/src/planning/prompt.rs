use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::control::Pose;
use crate::geometry::Circle;
use crate::world::{EnvironmentMap, TargetObject};

use super::PlannerConfig;

const SYSTEM: &str = include_str!("../../data/prompts/system.txt");
const USER: &str = include_str!("../../data/prompts/user.txt");
const REGENERATE: &str = include_str!("../../data/prompts/regenerate.txt");
const OBSTACLE: &str = include_str!("../../data/prompts/obstacle.txt");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptPair {
    pub system_prompt: String,
    pub user_prompt: String,
}

/// Prompt text with `{placeholder}` slots.
///
/// The shipped templates are compiled in; [`PromptTemplates::load_dir`]
/// overrides any of `system.txt`, `user.txt`, `regenerate.txt` and
/// `obstacle.txt` found in a directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplates {
    pub system: String,
    pub user: String,
    pub regenerate: String,
    pub obstacle: String,
}

impl Default for PromptTemplates {
    fn default() -> Self {
        Self {
            system: SYSTEM.to_string(),
            user: USER.to_string(),
            regenerate: REGENERATE.to_string(),
            obstacle: OBSTACLE.to_string(),
        }
    }
}

impl PromptTemplates {
    pub fn load_dir(dir: &Path) -> std::io::Result<Self> {
        let mut t = Self::default();
        for (file, slot) in [
            ("system.txt", &mut t.system),
            ("user.txt", &mut t.user),
            ("regenerate.txt", &mut t.regenerate),
            ("obstacle.txt", &mut t.obstacle),
        ] {
            let path = dir.join(file);
            if path.exists() {
                *slot = std::fs::read_to_string(path)?;
            }
        }
        Ok(t)
    }
}

/// Shortest round-trip decimal, with `-0` printed as `0`.
pub fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v}")
    }
}

/// Single pass over the template; unknown `{...}` runs are copied verbatim.
pub(crate) fn render(template: &str, slots: &[(&str, String)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let slot = after.find('}').and_then(|close| {
            let key = &after[..close];
            slots
                .iter()
                .find(|(k, _)| *k == key)
                .map(|(_, v)| (v, close))
        });
        match slot {
            Some((value, close)) => {
                out.push_str(value);
                rest = &after[close + 1..];
            }
            None => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

pub fn build_prompts(
    map: &EnvironmentMap,
    pose: &Pose,
    target: &TargetObject,
    command_text: &str,
    cfg: &PlannerConfig,
    templates: &PromptTemplates,
) -> PromptPair {
    let corridors = map
        .corridors
        .iter()
        .map(|c| {
            format!(
                "- {}: [{}, {}] x [{}, {}]",
                c.name,
                fmt_num(c.x_min),
                fmt_num(c.x_max),
                fmt_num(c.y_min),
                fmt_num(c.y_max)
            )
        })
        .collect::<Vec<_>>()
        .join("\n");
    let junctions = if map.junctions.is_empty() {
        "- none".to_string()
    } else {
        map.junctions
            .iter()
            .map(|j| {
                format!(
                    "- ({}, {}) connecting {} and {}",
                    fmt_num(j.position.x),
                    fmt_num(j.position.y),
                    j.connects[0],
                    j.connects[1]
                )
            })
            .collect::<Vec<_>>()
            .join("\n")
    };
    let system_prompt = render(
        &templates.system,
        &[
            ("corridors", corridors),
            ("junctions", junctions),
            ("safe_margin", fmt_num(map.safe_margin)),
            ("pose_x", fmt_num(pose.x)),
            ("pose_y", fmt_num(pose.y)),
            ("pose_theta", fmt_num(pose.theta)),
        ],
    );
    let user_prompt = render(
        &templates.user,
        &[
            ("command", command_text.trim().to_string()),
            ("target_name", target.name.clone()),
            ("target_x", fmt_num(target.position.x)),
            ("target_y", fmt_num(target.position.y)),
            ("max_waypoints", cfg.max_waypoints_for(&map.name).to_string()),
            ("min_spacing", fmt_num(cfg.min_spacing)),
            ("tolerance", fmt_num(cfg.tolerance)),
        ],
    );
    PromptPair {
        system_prompt,
        user_prompt,
    }
}

/// Appends the obstacle clearance requirement to the user prompt.
pub fn add_obstacle(
    prompts: &mut PromptPair,
    obstacle: &Circle,
    clearance: f64,
    templates: &PromptTemplates,
) {
    let text = render(
        &templates.obstacle,
        &[
            ("obstacle_x", fmt_num(obstacle.center.x)),
            ("obstacle_y", fmt_num(obstacle.center.y)),
            ("obstacle_radius", fmt_num(obstacle.radius)),
            ("clearance", fmt_num(clearance)),
        ],
    );
    append_block(&mut prompts.user_prompt, &text);
}

/// Appends a regenerate request carrying the rejection report.
pub fn add_regenerate(prompts: &mut PromptPair, report: &str, templates: &PromptTemplates) {
    let text = render(&templates.regenerate, &[("report", report.to_string())]);
    append_block(&mut prompts.user_prompt, &text);
}

fn append_block(prompt: &mut String, block: &str) {
    if !prompt.ends_with('\n') {
        prompt.push('\n');
    }
    prompt.push('\n');
    prompt.push_str(block);
}
