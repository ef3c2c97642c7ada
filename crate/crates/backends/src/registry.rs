//! Builds ready-to-use backends from a [`BackendsConfig`].
//!
//! Stub endpoints understood here:
//! - `stub:lexical` (EMBEDDING): params `dim` (default 256) or `vocabulary`
//!   (array of words)
//! - `stub:nli` (NLI): params `table` (path to a line-delimited table) and
//!   `fallback` (`"uniform"` or `"overlap"`)
//! - `stub:overlap` (GENERATION)
//!
//! HTTP backends are wrapped with the shared cache, their retry budget and
//! rate limit. Stubs only get call accounting.

use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use crate::cache::{DiskCache, Fingerprint, ResponseCache};
use crate::config::{BackendKind, BackendSpec, BackendsConfig, Endpoint};
use crate::error::BackendError;
use crate::http::{HttpEmbedder, HttpGenerator, HttpNli};
use crate::managed::{CallStats, Managed, StatsSnapshot};
use crate::policy::{Clock, RetryPolicy, SystemClock};
use crate::stub::{LexicalEmbedder, NliFallback, OverlapGenerator, TableNli};
use crate::traits::{DecodeParams, EmbeddingBackend, GenerationBackend, NliBackend};

pub type SharedEmbedding = Arc<dyn EmbeddingBackend<Scalar = f64>>;
pub type SharedNli = Arc<dyn NliBackend<Scalar = f64>>;
pub type SharedGeneration = Arc<dyn GenerationBackend>;

pub struct Registry {
    config: BackendsConfig,
    base_dir: PathBuf,
    cache: Option<Arc<dyn ResponseCache>>,
    clock: Arc<dyn Clock>,
    stats: Mutex<Vec<(String, Arc<CallStats>)>>,
}

impl Registry {
    /// `base_dir` resolves relative stub table paths.
    pub fn new(config: BackendsConfig, base_dir: impl Into<PathBuf>) -> Self {
        let cache = config
            .cache
            .dir
            .clone()
            .map(|d| Arc::new(DiskCache::new(d)) as Arc<dyn ResponseCache>);
        Registry { config, base_dir: base_dir.into(), cache, clock: Arc::new(SystemClock::default()), stats: Mutex::default() }
    }

    pub fn with_cache(mut self, cache: Option<Arc<dyn ResponseCache>>) -> Self {
        self.cache = cache;
        self
    }

    pub fn with_clock(mut self, clock: Arc<dyn Clock>) -> Self {
        self.clock = clock;
        self
    }

    pub fn config(&self) -> &BackendsConfig {
        &self.config
    }

    /// Call counters of every backend built so far, by name.
    pub fn stats(&self) -> Vec<(String, StatsSnapshot)> {
        self.stats.lock().unwrap().iter().map(|(n, s)| (n.clone(), s.snapshot())).collect()
    }

    fn wrap<B>(&self, name: &str, spec: &BackendSpec, inner: B, template_hash: Option<String>, remote: bool) -> Managed<B> {
        let fp = Fingerprint { kind: spec.kind, model_name: spec.model_name.clone(), template_hash };
        let mut m = Managed::new(inner, name, fp).with_clock(self.clock.clone());
        if remote {
            m = m.with_retry(RetryPolicy { max_retries: spec.max_retries, ..RetryPolicy::default() });
            if let Some(c) = &self.cache {
                m = m.with_cache(c.clone());
            }
            if let Some(rpm) = spec.requests_per_minute {
                m = m.with_rate_limit(rpm);
            }
        } else {
            m = m.with_retry(RetryPolicy::none());
        }
        self.stats.lock().unwrap().push((name.to_string(), m.shared_stats()));
        m
    }

    pub fn embedding(&self, name: &str) -> Result<SharedEmbedding, BackendError> {
        let spec = self.config.get(name, BackendKind::Embedding)?;
        match spec.endpoint()? {
            Endpoint::Http(url) => {
                let b = HttpEmbedder::new(url, &spec.model_name, spec.auth_token()?, spec.timeout())?;
                Ok(Arc::new(self.wrap(name, spec, b, None, true)))
            }
            Endpoint::Stub(kind) if kind == "lexical" => {
                let b = match spec.params.get("vocabulary") {
                    Some(toml::Value::Array(words)) => {
                        let words: Vec<&str> = words.iter().filter_map(|w| w.as_str()).collect();
                        if words.is_empty() {
                            return Err(BackendError::Config(format!("backend {name}: empty vocabulary")));
                        }
                        LexicalEmbedder::<f64>::with_vocabulary(words)
                    }
                    Some(_) => return Err(BackendError::Config(format!("backend {name}: vocabulary must be an array"))),
                    None => {
                        let dim = spec.param_u64("dim").unwrap_or(256);
                        if dim == 0 {
                            return Err(BackendError::Config(format!("backend {name}: dim must be positive")));
                        }
                        LexicalEmbedder::hashed(dim as usize)
                    }
                };
                Ok(Arc::new(self.wrap(name, spec, b, None, false)))
            }
            Endpoint::Stub(other) => Err(unknown_stub(name, &other, spec.kind)),
        }
    }

    pub fn nli(&self, name: &str) -> Result<SharedNli, BackendError> {
        let spec = self.config.get(name, BackendKind::Nli)?;
        match spec.endpoint()? {
            Endpoint::Http(url) => {
                let b = HttpNli::new(url, &spec.model_name, spec.auth_token()?, spec.timeout())?;
                Ok(Arc::new(self.wrap(name, spec, b, None, true)))
            }
            Endpoint::Stub(kind) if kind == "nli" => {
                let table = match spec.param_str("table") {
                    Some(p) => TableNli::load(&self.base_dir.join(p))?,
                    None => TableNli::new(),
                };
                let fallback = match spec.param_str("fallback").unwrap_or("uniform") {
                    "uniform" => NliFallback::Uniform,
                    "overlap" => NliFallback::Overlap,
                    other => return Err(BackendError::Config(format!("backend {name}: unknown fallback {other:?}"))),
                };
                Ok(Arc::new(self.wrap(name, spec, table.with_fallback(fallback), None, false)))
            }
            Endpoint::Stub(other) => Err(unknown_stub(name, &other, spec.kind)),
        }
    }

    /// `template_hash` becomes part of every cache key of this backend.
    pub fn generation(&self, name: &str, template_hash: Option<String>) -> Result<SharedGeneration, BackendError> {
        let spec = self.config.get(name, BackendKind::Generation)?;
        match spec.endpoint()? {
            Endpoint::Http(url) => {
                let b = HttpGenerator::new(url, &spec.model_name, spec.auth_token()?, spec.timeout())?;
                Ok(Arc::new(self.wrap(name, spec, b, template_hash, true)))
            }
            Endpoint::Stub(kind) if kind == "overlap" => {
                Ok(Arc::new(self.wrap(name, spec, OverlapGenerator, template_hash, false)))
            }
            Endpoint::Stub(other) => Err(unknown_stub(name, &other, spec.kind)),
        }
    }

    /// Decode parameters declared in a generation backend's `params`
    /// (`temperature`, `max_tokens`, `top_p`, `seed`); temperature defaults
    /// to 0.
    pub fn decode_params(&self, name: &str) -> Result<DecodeParams, BackendError> {
        let spec = self.config.get(name, BackendKind::Generation)?;
        Ok(DecodeParams {
            temperature: spec.param_f64("temperature").unwrap_or(0.0),
            max_tokens: spec.param_u64("max_tokens").map(|m| m.min(u32::MAX as u64) as u32),
            top_p: spec.param_f64("top_p"),
            seed: spec.param_u64("seed"),
        })
    }

    pub fn timeout(&self, name: &str) -> Option<Duration> {
        self.config.backends.get(name).map(BackendSpec::timeout)
    }
}

fn unknown_stub(name: &str, stub: &str, kind: BackendKind) -> BackendError {
    BackendError::Config(format!("backend {name}: no {} stub named {stub:?}", kind.as_str()))
}
