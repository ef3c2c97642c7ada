//! HTTP clients.
//!
//! Generation speaks the chat-completions contract:
//! `POST {model, messages: [{role: "user", content}], temperature, ...}`
//! answered by `{choices: [{message: {content}}]}`.
//!
//! Embedding: `POST {model, input: [text]}` answered by
//! `{data: [{embedding: [f64], index?}]}`.
//!
//! NLI: `POST {model, pairs: [{premise, hypothesis}]}` answered by
//! `{scores: [{entailment, contradiction, neutral}]}`.
//!
//! Connection failures, timeouts, 429 and 5xx are transient; any other
//! non-success status or an unexpected body is a protocol error.

use std::time::Duration;

use reqwest::blocking::Client;
use serde::Deserialize;
use serde_json::{json, Value};
use url::Url;

use crate::error::BackendError;
use crate::traits::{DecodeParams, EmbeddingBackend, GenerationBackend, NliBackend, NliScores};

#[derive(Debug, Clone)]
struct Transport {
    client: Client,
    url: Url,
    model: String,
    token: Option<String>,
}

impl Transport {
    fn new(url: Url, model: String, token: Option<String>, timeout: Duration) -> Result<Self, BackendError> {
        let client = Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| BackendError::Config(format!("http client: {e}")))?;
        Ok(Transport { client, url, model, token })
    }

    fn post(&self, body: &Value) -> Result<Value, BackendError> {
        let mut req = self.client.post(self.url.clone()).json(body);
        if let Some(t) = &self.token {
            req = req.bearer_auth(t);
        }
        let resp = req.send().map_err(|e| BackendError::Transient(format!("{}: {e}", self.url)))?;
        let status = resp.status();
        if status.as_u16() == 429 || status.is_server_error() {
            return Err(BackendError::Transient(format!("{}: HTTP {status}", self.url)));
        }
        let text = resp.text().map_err(|e| BackendError::Transient(format!("{}: {e}", self.url)))?;
        if !status.is_success() {
            return Err(BackendError::Protocol(format!("{}: HTTP {status}: {}", self.url, truncate(&text))));
        }
        serde_json::from_str(&text)
            .map_err(|e| BackendError::Protocol(format!("{}: response is not JSON: {e}", self.url)))
    }
}

fn truncate(s: &str) -> &str {
    match s.char_indices().nth(200) {
        Some((i, _)) => &s[..i],
        None => s,
    }
}

fn shape<T: for<'de> Deserialize<'de>>(v: Value, what: &str) -> Result<T, BackendError> {
    serde_json::from_value(v).map_err(|e| BackendError::Protocol(format!("unexpected {what} response: {e}")))
}

#[derive(Debug, Clone)]
pub struct HttpGenerator {
    t: Transport,
}

impl HttpGenerator {
    pub fn new(url: Url, model: impl Into<String>, token: Option<String>, timeout: Duration) -> Result<Self, BackendError> {
        Ok(HttpGenerator { t: Transport::new(url, model.into(), token, timeout)? })
    }
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatMessage,
}

#[derive(Deserialize)]
struct ChatMessage {
    content: Option<String>,
}

impl GenerationBackend for HttpGenerator {
    fn generate(&self, prompt: &str, params: &DecodeParams) -> Result<String, BackendError> {
        let mut body = json!({
            "model": self.t.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": params.temperature,
        });
        if let Some(m) = params.max_tokens {
            body["max_tokens"] = json!(m);
        }
        if let Some(p) = params.top_p {
            body["top_p"] = json!(p);
        }
        if let Some(s) = params.seed {
            body["seed"] = json!(s);
        }
        let resp: ChatResponse = shape(self.t.post(&body)?, "chat completion")?;
        resp.choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| BackendError::Protocol("chat completion without content".into()))
    }

    fn identifier(&self) -> String {
        format!("{}@{}", self.t.model, self.t.url)
    }
}

#[derive(Debug, Clone)]
pub struct HttpEmbedder {
    t: Transport,
}

impl HttpEmbedder {
    pub fn new(url: Url, model: impl Into<String>, token: Option<String>, timeout: Duration) -> Result<Self, BackendError> {
        Ok(HttpEmbedder { t: Transport::new(url, model.into(), token, timeout)? })
    }
}

#[derive(Deserialize)]
struct EmbeddingResponse {
    data: Vec<EmbeddingItem>,
}

#[derive(Deserialize)]
struct EmbeddingItem {
    embedding: Vec<f64>,
    index: Option<usize>,
}

impl EmbeddingBackend for HttpEmbedder {
    type Scalar = f64;

    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, BackendError> {
        let body = json!({"model": self.t.model, "input": texts});
        let mut resp: EmbeddingResponse = shape(self.t.post(&body)?, "embedding")?;
        if resp.data.len() != texts.len() {
            return Err(BackendError::Protocol(format!(
                "asked for {} embeddings, got {}",
                texts.len(),
                resp.data.len()
            )));
        }
        if resp.data.iter().all(|d| d.index.is_some()) {
            resp.data.sort_by_key(|d| d.index);
        }
        Ok(resp.data.into_iter().map(|d| d.embedding).collect())
    }

    fn identifier(&self) -> String {
        format!("{}@{}", self.t.model, self.t.url)
    }
}

#[derive(Debug, Clone)]
pub struct HttpNli {
    t: Transport,
}

impl HttpNli {
    pub fn new(url: Url, model: impl Into<String>, token: Option<String>, timeout: Duration) -> Result<Self, BackendError> {
        Ok(HttpNli { t: Transport::new(url, model.into(), token, timeout)? })
    }
}

#[derive(Deserialize)]
struct NliResponse {
    scores: Vec<NliItem>,
}

#[derive(Deserialize)]
struct NliItem {
    entailment: f64,
    contradiction: f64,
    neutral: f64,
}

impl NliBackend for HttpNli {
    type Scalar = f64;

    fn nli_score(&self, premise: &str, hypothesis: &str) -> Result<NliScores<f64>, BackendError> {
        let body = json!({
            "model": self.t.model,
            "pairs": [{"premise": premise, "hypothesis": hypothesis}],
        });
        let resp: NliResponse = shape(self.t.post(&body)?, "NLI")?;
        let item = resp
            .scores
            .into_iter()
            .next()
            .ok_or_else(|| BackendError::Protocol("NLI response without scores".into()))?;
        NliScores::normalized(item.entailment, item.contradiction, item.neutral)
            .ok_or_else(|| BackendError::Protocol("NLI scores are not a probability distribution".into()))
    }

    fn identifier(&self) -> String {
        format!("{}@{}", self.t.model, self.t.url)
    }
}
