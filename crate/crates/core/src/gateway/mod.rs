//! Natural-language boundary.
//!
//! Everything that needs a language model goes through [`Gateway`]: turning
//! free text into [`ParsedReflection`]s, generating Socratic follow-ups for
//! the experimental agent, and generating questions for the baseline agent.
//! The gateway renders prompts into chat messages and hands them to a
//! [`ChatBackend`]. Two backends exist: [`MockBackend`] (deterministic,
//! rule-based) and [`HttpBackend`] (chat-completions over HTTP).

mod http;
mod mock;
pub mod prompts;

use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::ThoughtCategory;

pub use http::HttpBackend;
pub use mock::{mock_parse, MockBackend};

pub const ENV_ENDPOINT: &str = "REFLECT_LLM_ENDPOINT";
pub const ENV_MODEL: &str = "REFLECT_LLM_MODEL";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        Self { role: Role::System, content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self { role: Role::User, content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self { role: Role::Assistant, content: content.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseMode {
    /// Main thoughts with categories and nested elaborations.
    Full,
    /// Only elaboration texts; the parent thought is already known.
    ElaborationsOnly,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedThought {
    pub text: String,
    pub category: ThoughtCategory,
    #[serde(default)]
    pub elaborations: Vec<String>,
}

/// Structured extraction of one piece of user text.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedReflection {
    #[serde(default)]
    pub thoughts: Vec<ParsedThought>,
    /// Filled in [`ParseMode::ElaborationsOnly`].
    #[serde(default)]
    pub elaborations: Vec<String>,
    #[serde(default)]
    pub deliberate_optouts: Vec<ThoughtCategory>,
}

impl ParsedReflection {
    pub fn is_empty(&self) -> bool {
        self.thoughts.is_empty() && self.elaborations.is_empty() && self.deliberate_optouts.is_empty()
    }
}

/// The kind of work a completion request carries. Live backends only look
/// at the rendered messages; the mock answers from the task itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case")]
pub enum Task {
    Extract { text: String, topic: String, mode: ParseMode },
    ExploitQuestion { span: String, topic: String },
    BaselineQuestion { topic: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompletionRequest {
    pub task: Task,
    pub model: String,
    pub temperature: f64,
    pub messages: Vec<ChatMessage>,
}

#[derive(Debug, thiserror::Error)]
pub enum BackendError {
    #[error("transport: {0}")]
    Transport(String),
    #[error("bad response: {0}")]
    BadResponse(String),
}

pub trait ChatBackend: Send + Sync {
    fn complete(&self, request: &CompletionRequest) -> Result<String, BackendError>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BackendConfig {
    pub endpoint_url: String,
    /// Phi-4 14B served locally (Q4_K_M) is the reference model.
    pub model_name: String,
    pub temperature: f64,
    #[serde(with = "secs")]
    pub timeout: Duration,
    pub max_retries: u32,
    pub max_in_flight: usize,
}

mod secs {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let v = f64::deserialize(d)?;
        Duration::try_from_secs_f64(v).map_err(serde::de::Error::custom)
    }
}

impl Default for BackendConfig {
    fn default() -> Self {
        Self {
            endpoint_url: "http://127.0.0.1:11434/v1/chat/completions".to_string(),
            model_name: "phi-4".to_string(),
            temperature: 0.0,
            timeout: Duration::from_secs(60),
            max_retries: 2,
            max_in_flight: 4,
        }
    }
}

impl BackendConfig {
    pub fn validate(&self) -> Result<()> {
        if self.temperature.is_nan() || self.temperature < 0.0 {
            return Err(Error::Config("temperature must be >= 0".into()));
        }
        if self.max_in_flight == 0 {
            return Err(Error::Config("max_in_flight must be >= 1".into()));
        }
        Ok(())
    }

    /// Applies `REFLECT_LLM_ENDPOINT` / `REFLECT_LLM_MODEL` when set.
    pub fn with_env_overrides(mut self) -> Self {
        if let Ok(v) = std::env::var(ENV_ENDPOINT) {
            if !v.is_empty() {
                self.endpoint_url = v;
            }
        }
        if let Ok(v) = std::env::var(ENV_MODEL) {
            if !v.is_empty() {
                self.model_name = v;
            }
        }
        self
    }
}

/// Stateless front door to the language backend; every call carries its own history.
#[derive(Clone)]
pub struct Gateway {
    backend: Arc<dyn ChatBackend>,
    config: BackendConfig,
}

impl std::fmt::Debug for Gateway {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Gateway").field("config", &self.config).finish_non_exhaustive()
    }
}

impl Gateway {
    pub fn new(backend: Arc<dyn ChatBackend>, config: BackendConfig) -> Self {
        Self { backend, config }
    }

    pub fn mock() -> Self {
        Self::new(Arc::new(MockBackend), BackendConfig::default())
    }

    pub fn http(config: BackendConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self::new(Arc::new(HttpBackend::new(&config)), config))
    }

    pub fn config(&self) -> &BackendConfig {
        &self.config
    }

    fn request(&self, task: Task, messages: Vec<ChatMessage>) -> CompletionRequest {
        CompletionRequest {
            task,
            model: self.config.model_name.clone(),
            temperature: self.config.temperature,
            messages,
        }
    }

    fn call(&self, request: &CompletionRequest) -> Result<String> {
        let mut attempt = 0;
        loop {
            match self.backend.complete(request) {
                Ok(text) => return Ok(text),
                Err(err) if attempt < self.config.max_retries => {
                    tracing::warn!(attempt, %err, "backend call failed, retrying");
                    attempt += 1;
                }
                Err(err) => return Err(Error::Gateway(err.to_string())),
            }
        }
    }

    pub fn parse_reflection(&self, text: &str, topic: &str, mode: ParseMode) -> Result<ParsedReflection> {
        if text.trim().is_empty() {
            return Err(Error::validation("reflection text must not be empty"));
        }
        let task = Task::Extract { text: text.to_string(), topic: topic.to_string(), mode };
        let mut messages = vec![
            ChatMessage::system(prompts::render_extraction_prompt(topic, mode)),
            ChatMessage::user(text),
        ];
        let raw = self.call(&self.request(task.clone(), messages.clone()))?;
        match parse_model_output(&raw, mode) {
            Ok(parsed) => Ok(parsed),
            Err(first) => {
                tracing::warn!(error = %first, "extraction output invalid, requesting repair");
                messages.push(ChatMessage::assistant(raw));
                messages.push(ChatMessage::user(prompts::JSON_REPAIR_INSTRUCTION));
                let repaired = self.call(&self.request(task, messages))?;
                parse_model_output(&repaired, mode).map_err(|e| Error::Parse {
                    message: e.to_string(),
                    raw: repaired,
                })
            }
        }
    }

    pub fn generate_exploitation_question(
        &self,
        span: &str,
        topic: &str,
        history: &[ChatMessage],
    ) -> Result<String> {
        let span = prompts::normalize_span(span);
        if span.is_empty() {
            return Err(Error::validation("exploitation span must not be empty"));
        }
        let mut messages = vec![ChatMessage::system(prompts::render_exploitation_prompt(topic, &span))];
        messages.extend_from_slice(history);
        let request = self.request(
            Task::ExploitQuestion { span: span.clone(), topic: topic.to_string() },
            messages,
        );
        self.generate_validated(&request, |q| is_single_question(q) && mentions_span(q, &span))
            .map(|q| q.unwrap_or_else(|| prompts::exploitation_fallback(&span, topic)))
    }

    pub fn generate_baseline_question(&self, topic: &str, history: &[ChatMessage]) -> Result<String> {
        let mut messages = vec![ChatMessage::system(prompts::render_baseline_prompt(topic))];
        messages.extend_from_slice(history);
        let request = self.request(Task::BaselineQuestion { topic: topic.to_string() }, messages);
        self.generate_validated(&request, is_single_question)
            .map(|q| q.unwrap_or_else(|| prompts::baseline_fallback(topic)))
    }

    /// One generation plus one regeneration; `None` when both fail validation.
    fn generate_validated(
        &self,
        request: &CompletionRequest,
        valid: impl Fn(&str) -> bool,
    ) -> Result<Option<String>> {
        for _ in 0..2 {
            let out = self.call(request)?;
            let out = out.trim();
            if valid(out) {
                return Ok(Some(out.to_string()));
            }
            tracing::warn!(output = out, "generated question failed validation");
        }
        Ok(None)
    }
}

pub fn is_single_question(text: &str) -> bool {
    !text.trim().is_empty() && text.matches('?').count() == 1
}

fn mentions_span(text: &str, span: &str) -> bool {
    text.to_lowercase().contains(&span.to_lowercase())
}

#[derive(Deserialize)]
struct RawOutput {
    #[serde(default)]
    thoughts: Vec<RawThought>,
    #[serde(default)]
    elaborations: Vec<String>,
    #[serde(default)]
    deliberate_optouts: Vec<String>,
}

#[derive(Deserialize)]
struct RawThought {
    text: String,
    #[serde(default)]
    category: String,
    #[serde(default)]
    elaborations: Vec<String>,
}

fn json_slice(raw: &str) -> Option<&str> {
    let start = raw.find('{')?;
    let end = raw.rfind('}')?;
    (start < end).then(|| &raw[start..=end])
}

/// Reads model output into a [`ParsedReflection`].
///
/// Tolerates code fences and chatter around the JSON object. Unknown thought
/// categories become `Other`; unknown opt-out labels are dropped. Blank texts
/// are discarded.
pub fn parse_model_output(raw: &str, mode: ParseMode) -> Result<ParsedReflection> {
    let body = json_slice(raw).ok_or_else(|| Error::Parse {
        message: "no JSON object in model output".into(),
        raw: raw.to_string(),
    })?;
    let out: RawOutput = serde_json::from_str(body).map_err(|e| Error::Parse {
        message: e.to_string(),
        raw: raw.to_string(),
    })?;
    let clean = |v: Vec<String>| -> Vec<String> {
        v.into_iter()
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect()
    };
    let mut optouts = Vec::new();
    for label in &out.deliberate_optouts {
        if let Ok(k) = label.parse::<ThoughtCategory>() {
            if !optouts.contains(&k) {
                optouts.push(k);
            }
        }
    }
    let thoughts: Vec<ParsedThought> = out
        .thoughts
        .into_iter()
        .filter(|t| !t.text.trim().is_empty())
        .map(|t| ParsedThought {
            text: t.text.trim().to_string(),
            category: ThoughtCategory::from_label_lenient(&t.category),
            elaborations: clean(t.elaborations),
        })
        .collect();
    let mut elaborations = clean(out.elaborations);
    let parsed = match mode {
        ParseMode::Full => ParsedReflection { thoughts, elaborations, deliberate_optouts: optouts },
        ParseMode::ElaborationsOnly => {
            for t in thoughts {
                elaborations.push(t.text);
                elaborations.extend(t.elaborations);
            }
            ParsedReflection { thoughts: Vec::new(), elaborations, deliberate_optouts: optouts }
        }
    };
    Ok(parsed)
}
