//! Structured-output client interface and its mock and HTTP backends.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Why the model stopped producing output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FinishReason {
    Completed,
    /// The output token limit was reached; the text may be cut mid-array.
    OutputLimit,
    /// The backend's content filter refused the volume.
    ContentFilter,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelResponse {
    pub text: String,
    pub finish_reason: FinishReason,
}

/// What a client receives for one volume.
#[derive(Debug, Clone, Copy)]
pub struct ModelRequest<'a> {
    pub volume_id: &'a str,
    pub prompt: &'a str,
    pub schema: &'a Value,
    pub max_output_tokens: u64,
}

/// A backend that accepts a prompt plus a JSON schema and returns text.
///
/// `Err` is a transport-level failure (connection, HTTP status, undecodable
/// body). Implementations are shared across worker threads.
pub trait StructuredClient: Send + Sync {
    fn submit(&self, request: &ModelRequest<'_>) -> Result<ModelResponse, String>;
}

impl<T: StructuredClient + ?Sized> StructuredClient for &T {
    fn submit(&self, request: &ModelRequest<'_>) -> Result<ModelResponse, String> {
        (**self).submit(request)
    }
}

impl<T: StructuredClient + ?Sized> StructuredClient for Box<T> {
    fn submit(&self, request: &ModelRequest<'_>) -> Result<ModelResponse, String> {
        (**self).submit(request)
    }
}

/// One scripted reply in a mock fixture.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "finish_reason", rename_all = "snake_case")]
pub enum ScriptedReply {
    Completed { response: String },
    OutputLimit { response: String },
    ContentFilter,
    Error {
        #[serde(default)]
        response: String,
    },
    /// Simulates a failed request (no response at all).
    TransportError { detail: String },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum FixtureEntry {
    One(ScriptedReply),
    Sequence(Vec<ScriptedReply>),
}

/// Replays scripted replies keyed by volume id.
///
/// Each volume has a sequence of replies consumed in order; the last one
/// repeats once the sequence is exhausted.
#[derive(Debug, Default)]
pub struct MockClient {
    script: HashMap<String, Vec<ScriptedReply>>,
    cursor: Mutex<HashMap<String, usize>>,
}

impl MockClient {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_reply(mut self, volume_id: impl Into<String>, reply: ScriptedReply) -> Self {
        self.script.entry(volume_id.into()).or_default().push(reply);
        self
    }

    /// Loads a fixture file: a JSON object mapping each volume id to either
    /// one reply or an array of replies, e.g.
    /// `{"vol1": {"finish_reason": "completed", "response": "[...]"}}`.
    pub fn from_fixture_file(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("reading {}: {e}", path.display()))?;
        Self::from_fixture_json(&text)
    }

    pub fn from_fixture_json(text: &str) -> Result<Self, String> {
        let entries: HashMap<String, FixtureEntry> =
            serde_json::from_str(text).map_err(|e| format!("invalid mock fixture: {e}"))?;
        let script = entries
            .into_iter()
            .map(|(id, entry)| match entry {
                FixtureEntry::One(r) => (id, vec![r]),
                FixtureEntry::Sequence(rs) => (id, rs),
            })
            .collect();
        Ok(Self {
            script,
            cursor: Mutex::default(),
        })
    }
}

impl StructuredClient for MockClient {
    fn submit(&self, request: &ModelRequest<'_>) -> Result<ModelResponse, String> {
        let replies = self
            .script
            .get(request.volume_id)
            .filter(|r| !r.is_empty())
            .ok_or_else(|| format!("no scripted reply for volume {}", request.volume_id))?;
        let index = {
            let mut cursor = self.cursor.lock().expect("mock cursor poisoned");
            let slot = cursor.entry(request.volume_id.to_string()).or_insert(0);
            let index = (*slot).min(replies.len() - 1);
            *slot += 1;
            index
        };
        let (text, finish_reason) = match &replies[index] {
            ScriptedReply::Completed { response } => (response.clone(), FinishReason::Completed),
            ScriptedReply::OutputLimit { response } => {
                (response.clone(), FinishReason::OutputLimit)
            }
            ScriptedReply::ContentFilter => (String::new(), FinishReason::ContentFilter),
            ScriptedReply::Error { response } => (response.clone(), FinishReason::Error),
            ScriptedReply::TransportError { detail } => return Err(detail.clone()),
        };
        Ok(ModelResponse {
            text,
            finish_reason,
        })
    }
}

/// Connection settings for [`HttpClient`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HttpConfig {
    pub api_url: String,
    #[serde(skip_serializing)]
    pub api_key: Option<String>,
    pub model: String,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
}

fn default_timeout_secs() -> u64 {
    600
}

#[derive(Debug, Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    prompt: &'a str,
    schema: &'a Value,
    max_output_tokens: u64,
}

/// Generic JSON-over-HTTP structured-output backend.
///
/// Request: `POST {api_url}` with body
/// `{"model", "prompt", "schema", "max_output_tokens"}` and an optional
/// `Authorization: Bearer` header. Response body:
/// `{"text": "...", "finish_reason": "completed" | "output_limit" | "content_filter" | "error"}`.
pub struct HttpClient {
    config: HttpConfig,
    agent: ureq::Agent,
}

impl HttpClient {
    pub fn new(config: HttpConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .build()
            .into();
        Self { config, agent }
    }

    pub fn config(&self) -> &HttpConfig {
        &self.config
    }
}

impl StructuredClient for HttpClient {
    fn submit(&self, request: &ModelRequest<'_>) -> Result<ModelResponse, String> {
        let body = WireRequest {
            model: &self.config.model,
            prompt: request.prompt,
            schema: request.schema,
            max_output_tokens: request.max_output_tokens,
        };
        let mut call = self.agent.post(&self.config.api_url);
        if let Some(key) = &self.config.api_key {
            call = call.header("Authorization", &format!("Bearer {key}"));
        }
        let mut response = call.send_json(&body).map_err(|e| e.to_string())?;
        response
            .body_mut()
            .read_json::<ModelResponse>()
            .map_err(|e| format!("undecodable response body: {e}"))
    }
}
