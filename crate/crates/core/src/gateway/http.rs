//! Chat-completions client for a locally hosted model server.

use std::sync::{Condvar, Mutex};

use serde::Serialize;

use super::{BackendConfig, BackendError, ChatBackend, ChatMessage, CompletionRequest};

#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    messages: &'a [ChatMessage],
    temperature: f64,
    stream: bool,
}

/// Counting semaphore bounding in-flight requests to one model server.
struct Limiter {
    available: Mutex<usize>,
    freed: Condvar,
}

impl Limiter {
    fn new(permits: usize) -> Self {
        Self { available: Mutex::new(permits), freed: Condvar::new() }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut n = self.available.lock().unwrap_or_else(|e| e.into_inner());
        while *n == 0 {
            n = self.freed.wait(n).unwrap_or_else(|e| e.into_inner());
        }
        *n -= 1;
        Permit(self)
    }
}

struct Permit<'a>(&'a Limiter);

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.available.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        self.0.freed.notify_one();
    }
}

pub struct HttpBackend {
    agent: ureq::Agent,
    endpoint: String,
    limiter: Limiter,
}

impl HttpBackend {
    pub fn new(config: &BackendConfig) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .http_status_as_error(true)
            .build()
            .into();
        Self {
            agent,
            endpoint: config.endpoint_url.clone(),
            limiter: Limiter::new(config.max_in_flight.max(1)),
        }
    }
}

/// Pulls `choices[0].message.content` out of a chat-completions response.
pub(crate) fn extract_content(body: &serde_json::Value) -> Result<String, BackendError> {
    body.pointer("/choices/0/message/content")
        .and_then(|v| v.as_str())
        .map(str::to_string)
        .ok_or_else(|| BackendError::BadResponse("missing choices[0].message.content".into()))
}

impl ChatBackend for HttpBackend {
    fn complete(&self, request: &CompletionRequest) -> Result<String, BackendError> {
        let _permit = self.limiter.acquire();
        let wire = WireRequest {
            model: &request.model,
            messages: &request.messages,
            temperature: request.temperature,
            stream: false,
        };
        let body: serde_json::Value = self
            .agent
            .post(&self.endpoint)
            .send_json(&wire)
            .map_err(|e| BackendError::Transport(e.to_string()))?
            .body_mut()
            .read_json()
            .map_err(|e| BackendError::BadResponse(e.to_string()))?;
        extract_content(&body)
    }
}
