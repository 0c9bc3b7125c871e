use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{LlmClient, LlmError, LlmRequest, LlmResponse, Usage};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HttpLlmConfig {
    /// Base URL or full `/chat/completions` URL.
    pub endpoint: String,
    pub model: String,
    /// Environment variable holding the bearer token.
    pub api_key_env: String,
    pub timeout_secs: f64,
    pub max_attempts: u32,
    pub base_delay_secs: f64,
    pub max_in_flight: usize,
}

impl Default for HttpLlmConfig {
    fn default() -> Self {
        Self {
            endpoint: "http://localhost:8000/v1".into(),
            model: "default".into(),
            api_key_env: "GRAPHRAG_API_KEY".into(),
            timeout_secs: 120.0,
            max_attempts: 3,
            base_delay_secs: 0.5,
            max_in_flight: 4,
        }
    }
}

impl HttpLlmConfig {
    pub fn chat_url(&self) -> String {
        let base = self.endpoint.trim_end_matches('/');
        if base.ends_with("/chat/completions") {
            base.to_string()
        } else {
            format!("{base}/chat/completions")
        }
    }
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: Vec<ChatMessage<'a>>,
    temperature: f64,
    max_tokens: u32,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
    #[serde(default)]
    usage: Option<Usage>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatResponseMessage,
}

#[derive(Deserialize)]
struct ChatResponseMessage {
    #[serde(default)]
    content: Option<String>,
}

/// Counting semaphore bounding concurrent requests.
#[derive(Debug)]
struct InFlight {
    limit: usize,
    active: Mutex<usize>,
    freed: Condvar,
}

struct InFlightGuard<'a>(&'a InFlight);

impl InFlight {
    fn new(limit: usize) -> Self {
        Self {
            limit: limit.max(1),
            active: Mutex::new(0),
            freed: Condvar::new(),
        }
    }

    fn acquire(&self) -> InFlightGuard<'_> {
        let mut n = self.active.lock().expect("limiter poisoned");
        while *n >= self.limit {
            n = self.freed.wait(n).expect("limiter poisoned");
        }
        *n += 1;
        InFlightGuard(self)
    }
}

impl Drop for InFlightGuard<'_> {
    fn drop(&mut self) {
        *self.0.active.lock().expect("limiter poisoned") -= 1;
        self.0.freed.notify_one();
    }
}

/// Chat-completion client with bounded retries and an in-flight limit.
#[derive(Debug)]
pub struct HttpLlm {
    cfg: HttpLlmConfig,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
    in_flight: InFlight,
}

enum Failure {
    Transient(String),
    Fatal(LlmError),
}

impl HttpLlm {
    /// Reads the API key from `cfg.api_key_env` if set.
    pub fn new(cfg: HttpLlmConfig) -> Result<Self, LlmError> {
        let api_key = std::env::var(&cfg.api_key_env).ok().filter(|k| !k.is_empty());
        Self::with_api_key(cfg, api_key)
    }

    pub fn with_api_key(cfg: HttpLlmConfig, api_key: Option<String>) -> Result<Self, LlmError> {
        if cfg.max_attempts == 0 {
            return Err(LlmError::Config("max_attempts must be at least 1".into()));
        }
        if !(cfg.timeout_secs > 0.0) || !(cfg.base_delay_secs >= 0.0) {
            return Err(LlmError::Config("timeouts and delays must be positive".into()));
        }
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs_f64(cfg.timeout_secs))
            .build()
            .map_err(|e| LlmError::Config(e.to_string()))?;
        Ok(Self {
            in_flight: InFlight::new(cfg.max_in_flight),
            cfg,
            api_key,
            client,
        })
    }

    pub fn config(&self) -> &HttpLlmConfig {
        &self.cfg
    }

    fn attempt(&self, url: &str, body: &ChatRequest<'_>) -> Result<LlmResponse, Failure> {
        let mut rb = self.client.post(url).json(body);
        if let Some(key) = &self.api_key {
            rb = rb.bearer_auth(key);
        }
        let resp = rb.send().map_err(|e| Failure::Transient(e.to_string()))?;
        let status = resp.status().as_u16();
        if status == 408 || status == 429 || status >= 500 {
            return Err(Failure::Transient(format!("HTTP {status}")));
        }
        let text = resp.text().map_err(|e| Failure::Transient(e.to_string()))?;
        if !(200..300).contains(&status) {
            return Err(Failure::Fatal(LlmError::Http { status, body: text }));
        }
        let parsed: ChatResponse = serde_json::from_str(&text)
            .map_err(|e| Failure::Fatal(LlmError::Protocol(e.to_string())))?;
        let choice = parsed
            .choices
            .into_iter()
            .next()
            .ok_or_else(|| Failure::Fatal(LlmError::Protocol("no choices in response".into())))?;
        Ok(LlmResponse {
            text: choice.message.content.unwrap_or_default(),
            usage: parsed.usage,
        })
    }
}

impl LlmClient for HttpLlm {
    fn complete(&self, req: &LlmRequest) -> Result<LlmResponse, LlmError> {
        req.validate()?;
        let mut messages = Vec::with_capacity(2);
        if let Some(system) = &req.system {
            messages.push(ChatMessage {
                role: "system",
                content: system,
            });
        }
        messages.push(ChatMessage {
            role: "user",
            content: &req.user,
        });
        let body = ChatRequest {
            model: &self.cfg.model,
            messages,
            temperature: req.temperature,
            max_tokens: req.max_tokens,
        };
        let url = self.cfg.chat_url();
        let _slot = self.in_flight.acquire();
        let mut last = String::new();
        for attempt in 1..=self.cfg.max_attempts {
            match self.attempt(&url, &body) {
                Ok(r) => return Ok(r),
                Err(Failure::Fatal(e)) => return Err(e),
                Err(Failure::Transient(msg)) => {
                    tracing::warn!(attempt, error = %msg, "chat completion failed");
                    last = msg;
                    if attempt < self.cfg.max_attempts {
                        let delay = self.cfg.base_delay_secs * f64::from(1u32 << (attempt - 1));
                        std::thread::sleep(Duration::from_secs_f64(delay));
                    }
                }
            }
        }
        Err(LlmError::Transport {
            attempts: self.cfg.max_attempts,
            last,
        })
    }
}
