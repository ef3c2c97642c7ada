//! Backend configuration file.
//!
//! ```toml
//! [cache]
//! dir = "cache"
//!
//! [backends.gpt]
//! kind = "GENERATION"
//! endpoint = "https://gateway.example/v1/chat/completions"
//! model_name = "gpt-4o"
//! auth_env = "GATEWAY_KEY"
//! timeout_secs = 60
//! max_retries = 3
//! requests_per_minute = 500
//!
//! [backends.lexical]
//! kind = "EMBEDDING"
//! endpoint = "stub:lexical"
//! model_name = "lexical"
//! ```
//!
//! Secrets are never written inline; `auth_env` names the environment
//! variable that holds the bearer token.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use url::Url;

use crate::error::BackendError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BackendKind {
    Embedding,
    Nli,
    Generation,
}

impl BackendKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BackendKind::Embedding => "EMBEDDING",
            BackendKind::Nli => "NLI",
            BackendKind::Generation => "GENERATION",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendSpec {
    pub kind: BackendKind,
    pub endpoint: String,
    pub model_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auth_env: Option<String>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    /// Absent means unlimited.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub requests_per_minute: Option<u32>,
    /// Backend-specific settings (decode parameters, stub options).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, toml::Value>,
}

fn default_timeout() -> f64 {
    60.0
}

fn default_retries() -> u32 {
    3
}

/// Where a spec's requests go.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Endpoint {
    Http(Url),
    Stub(String),
}

impl BackendSpec {
    pub fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.timeout_secs)
    }

    pub fn endpoint(&self) -> Result<Endpoint, BackendError> {
        if let Some(name) = self.endpoint.strip_prefix("stub:") {
            if name.is_empty() {
                return Err(BackendError::Config("stub endpoint needs a name, e.g. stub:lexical".into()));
            }
            return Ok(Endpoint::Stub(name.to_string()));
        }
        let url = Url::parse(&self.endpoint)
            .map_err(|e| BackendError::Config(format!("endpoint {:?}: {e}", self.endpoint)))?;
        match url.scheme() {
            "http" | "https" => Ok(Endpoint::Http(url)),
            other => Err(BackendError::Config(format!("endpoint scheme {other:?} is not supported"))),
        }
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        if !(self.timeout_secs.is_finite() && self.timeout_secs > 0.0) {
            return Err(BackendError::Config(format!("timeout must be positive, got {}", self.timeout_secs)));
        }
        if self.requests_per_minute == Some(0) {
            return Err(BackendError::Config("requests_per_minute must be positive".into()));
        }
        if self.model_name.trim().is_empty() {
            return Err(BackendError::Config("model_name is empty".into()));
        }
        self.endpoint().map(|_| ())
    }

    /// Reads the secret named by `auth_env`, if any.
    pub fn auth_token(&self) -> Result<Option<String>, BackendError> {
        match &self.auth_env {
            None => Ok(None),
            Some(var) => std::env::var(var)
                .map(Some)
                .map_err(|_| BackendError::Config(format!("environment variable {var} is not set"))),
        }
    }

    pub fn param_f64(&self, name: &str) -> Option<f64> {
        match self.params.get(name)? {
            toml::Value::Float(f) => Some(*f),
            toml::Value::Integer(i) => Some(*i as f64),
            _ => None,
        }
    }

    pub fn param_u64(&self, name: &str) -> Option<u64> {
        match self.params.get(name)? {
            toml::Value::Integer(i) if *i >= 0 => Some(*i as u64),
            _ => None,
        }
    }

    pub fn param_str(&self, name: &str) -> Option<&str> {
        self.params.get(name)?.as_str()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CacheConfig {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendsConfig {
    #[serde(default)]
    pub cache: CacheConfig,
    #[serde(default)]
    pub backends: BTreeMap<String, BackendSpec>,
}

impl BackendsConfig {
    pub fn parse(text: &str) -> Result<Self, BackendError> {
        let cfg: BackendsConfig = toml::from_str(text).map_err(|e| BackendError::Config(e.to_string()))?;
        for (name, spec) in &cfg.backends {
            spec.validate().map_err(|e| BackendError::Config(format!("backend {name}: {e}")))?;
        }
        Ok(cfg)
    }

    /// Loads a config file; a relative cache dir is resolved against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, BackendError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BackendError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        if let (Some(dir), Some(base)) = (&cfg.cache.dir, path.parent()) {
            if dir.is_relative() {
                cfg.cache.dir = Some(base.join(dir));
            }
        }
        Ok(cfg)
    }

    pub fn get(&self, name: &str, kind: BackendKind) -> Result<&BackendSpec, BackendError> {
        let spec = self
            .backends
            .get(name)
            .ok_or_else(|| BackendError::Config(format!("no backend named {name:?}")))?;
        if spec.kind != kind {
            return Err(BackendError::Config(format!(
                "backend {name:?} is {}, expected {}",
                spec.kind.as_str(),
                kind.as_str()
            )));
        }
        Ok(spec)
    }
}
