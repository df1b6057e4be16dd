//! Waypoint sources: an HTTP chat endpoint, the deterministic oracle, and a
//! scripted stub for tests.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::planning::{oracle_plan_avoiding, waypoints_to_json, PlanContext, PromptPair};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProviderError {
    #[error("{0}")]
    Unavailable(String),
    #[error("HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed provider response: {0}")]
    Protocol(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProviderDescriptor {
    Llm { endpoint: String, model: String },
    Oracle,
    Stub,
}

impl std::fmt::Display for ProviderDescriptor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProviderDescriptor::Llm { endpoint, model } => write!(f, "llm:{model}@{endpoint}"),
            ProviderDescriptor::Oracle => f.write_str("oracle"),
            ProviderDescriptor::Stub => f.write_str("stub"),
        }
    }
}

pub struct GenerationRequest<'a> {
    pub prompts: &'a PromptPair,
    pub context: PlanContext<'a>,
}

pub trait WaypointProvider {
    fn descriptor(&self) -> ProviderDescriptor;

    /// Returns the raw model text; parsing happens in the planner.
    fn generate(&mut self, req: &GenerationRequest<'_>, timeout: Duration) -> Result<String, ProviderError>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmEndpointConfig {
    /// Base URL; the client posts to `{base_url}/api/chat`.
    pub base_url: String,
    pub model: String,
    pub temperature: f64,
    pub seed: Option<u64>,
}

impl LlmEndpointConfig {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            model: model.into(),
            temperature: 0.0,
            seed: None,
        }
    }

    pub fn chat_url(&self) -> String {
        format!("{}/api/chat", self.base_url.trim_end_matches('/'))
    }
}

/// Chat-completion client. Accepts both `message.content` and
/// `choices[0].message.content` response shapes.
pub struct LlmProvider {
    config: LlmEndpointConfig,
}

impl LlmProvider {
    pub fn new(config: LlmEndpointConfig) -> Self {
        Self { config }
    }

    pub fn config(&self) -> &LlmEndpointConfig {
        &self.config
    }

    pub fn request_body(&self, prompts: &PromptPair) -> Value {
        let mut options = json!({ "temperature": self.config.temperature });
        if let Some(seed) = self.config.seed {
            options["seed"] = json!(seed);
        }
        json!({
            "model": self.config.model,
            "messages": [
                { "role": "system", "content": prompts.system_prompt },
                { "role": "user", "content": prompts.user_prompt },
            ],
            "stream": false,
            "options": options,
        })
    }
}

pub fn extract_content(body: &str) -> Result<String, ProviderError> {
    let v: Value = serde_json::from_str(body).map_err(|e| ProviderError::Protocol(e.to_string()))?;
    v.pointer("/message/content")
        .or_else(|| v.pointer("/choices/0/message/content"))
        .and_then(Value::as_str)
        .map(str::to_owned)
        .ok_or_else(|| ProviderError::Protocol("no message content in response".into()))
}

impl WaypointProvider for LlmProvider {
    fn descriptor(&self) -> ProviderDescriptor {
        ProviderDescriptor::Llm {
            endpoint: self.config.base_url.clone(),
            model: self.config.model.clone(),
        }
    }

    fn generate(&mut self, req: &GenerationRequest<'_>, timeout: Duration) -> Result<String, ProviderError> {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        let body = self.request_body(req.prompts).to_string();
        let mut resp = agent
            .post(&self.config.chat_url())
            .header("Content-Type", "application/json")
            .send(body)
            .map_err(|e| ProviderError::Unavailable(e.to_string()))?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| ProviderError::Unavailable(e.to_string()))?;
        if !(200..300).contains(&status) {
            return Err(ProviderError::Status { status, body: text });
        }
        extract_content(&text)
    }
}

/// Ground-truth geometric planner behind the provider interface.
#[derive(Debug, Clone, Copy, Default)]
pub struct OracleProvider;

impl WaypointProvider for OracleProvider {
    fn descriptor(&self) -> ProviderDescriptor {
        ProviderDescriptor::Oracle
    }

    fn generate(&mut self, req: &GenerationRequest<'_>, _timeout: Duration) -> Result<String, ProviderError> {
        let ctx = &req.context;
        // an unreachable target is reported as model text the parser rejects
        match oracle_plan_avoiding(ctx.map, ctx.pose.position(), ctx.target, ctx.cfg, ctx.rule) {
            Ok(points) => Ok(waypoints_to_json(&points)),
            Err(e) => Ok(format!("cannot plan: {e}")),
        }
    }
}

/// Replays canned responses in order, repeating the last one.
#[derive(Debug, Clone)]
pub struct StubProvider {
    script: Vec<String>,
    next: usize,
    seen: Vec<PromptPair>,
}

impl StubProvider {
    pub fn new(script: Vec<String>) -> Result<Self, ProviderError> {
        if script.is_empty() {
            return Err(ProviderError::Protocol("stub script is empty".into()));
        }
        Ok(Self {
            script,
            next: 0,
            seen: Vec::new(),
        })
    }

    pub fn seen_prompts(&self) -> &[PromptPair] {
        &self.seen
    }
}

impl WaypointProvider for StubProvider {
    fn descriptor(&self) -> ProviderDescriptor {
        ProviderDescriptor::Stub
    }

    fn generate(&mut self, req: &GenerationRequest<'_>, _timeout: Duration) -> Result<String, ProviderError> {
        self.seen.push(req.prompts.clone());
        let i = self.next.min(self.script.len() - 1);
        self.next += 1;
        Ok(self.script[i].clone())
    }
}
