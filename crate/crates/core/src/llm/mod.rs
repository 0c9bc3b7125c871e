//! Chat-completion client abstraction: an HTTP backend for any compatible
//! endpoint and a scripted mock for hermetic runs.

mod http;
mod mock;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use http::{HttpLlm, HttpLlmConfig};
pub use mock::{fingerprint, MockLlm, MockRule, MockScript, SubstringMatcher};

pub const DEFAULT_MAX_TOKENS: u32 = 512;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmRequest {
    pub system: Option<String>,
    pub user: String,
    pub max_tokens: u32,
    pub temperature: f64,
}

impl LlmRequest {
    pub fn new(user: impl Into<String>) -> Self {
        Self {
            system: None,
            user: user.into(),
            max_tokens: DEFAULT_MAX_TOKENS,
            temperature: 0.0,
        }
    }

    pub fn with_system(mut self, system: impl Into<String>) -> Self {
        self.system = Some(system.into());
        self
    }

    pub fn with_max_tokens(mut self, max_tokens: u32) -> Self {
        self.max_tokens = max_tokens;
        self
    }

    pub fn validate(&self) -> Result<(), LlmError> {
        if self.user.trim().is_empty() {
            return Err(LlmError::InvalidRequest("user prompt is empty".into()));
        }
        if self.max_tokens == 0 {
            return Err(LlmError::InvalidRequest("max_tokens must be positive".into()));
        }
        if !(self.temperature >= 0.0) {
            return Err(LlmError::InvalidRequest("temperature must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: u32,
    pub completion_tokens: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmResponse {
    pub text: String,
    pub usage: Option<Usage>,
}

#[derive(Debug, thiserror::Error)]
pub enum LlmError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),

    #[error("transport failed after {attempts} attempt(s): {last}")]
    Transport { attempts: u32, last: String },

    #[error("endpoint returned HTTP {status}: {body}")]
    Http { status: u16, body: String },

    #[error("unexpected response payload: {0}")]
    Protocol(String),

    #[error("no scripted response for prompt fingerprint {fingerprint}")]
    Script { fingerprint: String },

    #[error("configuration error: {0}")]
    Config(String),
}

pub trait LlmClient: Send + Sync {
    fn complete(&self, req: &LlmRequest) -> Result<LlmResponse, LlmError>;
}

impl<T: LlmClient + ?Sized> LlmClient for &T {
    fn complete(&self, req: &LlmRequest) -> Result<LlmResponse, LlmError> {
        (**self).complete(req)
    }
}

impl<T: LlmClient + ?Sized> LlmClient for Arc<T> {
    fn complete(&self, req: &LlmRequest) -> Result<LlmResponse, LlmError> {
        (**self).complete(req)
    }
}

impl<T: LlmClient + ?Sized> LlmClient for Box<T> {
    fn complete(&self, req: &LlmRequest) -> Result<LlmResponse, LlmError> {
        (**self).complete(req)
    }
}
