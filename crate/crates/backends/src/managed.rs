//! Caching, retry and rate limiting around any backend.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use evirank_core::Scalar;
use serde_json::{json, Value};

use crate::cache::{CacheKey, Fingerprint, ResponseCache};
use crate::error::BackendError;
use crate::policy::{Clock, RateLimiter, RetryPolicy, SystemClock};
use crate::traits::{DecodeParams, EmbeddingBackend, GenerationBackend, NliBackend, NliScores};

/// Counters shared by clones of a managed backend.
#[derive(Debug, Default)]
pub struct CallStats {
    requests: AtomicU64,
    upstream_calls: AtomicU64,
    cache_hits: AtomicU64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StatsSnapshot {
    /// Logical requests made by callers.
    pub requests: u64,
    /// Requests actually sent upstream, retries included.
    pub upstream_calls: u64,
    pub cache_hits: u64,
}

impl CallStats {
    pub fn snapshot(&self) -> StatsSnapshot {
        StatsSnapshot {
            requests: self.requests.load(Ordering::Relaxed),
            upstream_calls: self.upstream_calls.load(Ordering::Relaxed),
            cache_hits: self.cache_hits.load(Ordering::Relaxed),
        }
    }
}

pub struct Managed<B> {
    inner: B,
    name: String,
    fingerprint: Fingerprint,
    cache: Option<Arc<dyn ResponseCache>>,
    retry: RetryPolicy,
    limiter: Option<Arc<RateLimiter>>,
    clock: Arc<dyn Clock>,
    stats: Arc<CallStats>,
}

impl<B> Managed<B> {
    /// No cache, no limit, default retry policy.
    pub fn new(inner: B, name: impl Into<String>, fingerprint: Fingerprint) -> Self {
        Managed {
            inner,
            name: name.into(),
            fingerprint,
            cache: None,
            retry: RetryPolicy::default(),
            limiter: None,
            clock: Arc::new(SystemClock::default()),
            stats: Arc::default(),
        }
    }

    pub fn with_cache(mut self, cache: Arc<dyn ResponseCache>) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    /// The clock is used both for backoff sleeps and the limiter window.
    pub fn with_clock(mut self, clock: Arc<dyn Clock>) -> Self {
        self.clock = clock;
        self
    }

    pub fn with_rate_limit(mut self, per_minute: u32) -> Self {
        self.limiter = Some(Arc::new(RateLimiter::new(per_minute, self.clock.clone())));
        self
    }

    pub fn stats(&self) -> StatsSnapshot {
        self.stats.snapshot()
    }

    pub fn shared_stats(&self) -> Arc<CallStats> {
        self.stats.clone()
    }

    pub fn inner(&self) -> &B {
        &self.inner
    }

    fn dispatch<T>(&self, mut op: impl FnMut(&B) -> Result<T, BackendError>) -> Result<T, BackendError> {
        let (v, _attempts) = self.retry.run(&self.name, self.clock.as_ref(), || {
            if let Some(l) = &self.limiter {
                l.acquire();
            }
            self.stats.upstream_calls.fetch_add(1, Ordering::Relaxed);
            op(&self.inner)
        })?;
        Ok(v)
    }

    fn lookup(&self, key: &CacheKey) -> Option<Vec<u8>> {
        let hit = self.cache.as_ref()?.get(key)?;
        self.stats.cache_hits.fetch_add(1, Ordering::Relaxed);
        Some(hit)
    }

    fn store(&self, key: &CacheKey, bytes: &[u8]) {
        if let Some(c) = &self.cache {
            c.put(key, bytes);
        }
    }

    fn key(&self, payload: Value) -> CacheKey {
        CacheKey::new(&self.fingerprint, &payload)
    }
}

impl<B: GenerationBackend> GenerationBackend for Managed<B> {
    fn generate(&self, prompt: &str, params: &DecodeParams) -> Result<String, BackendError> {
        self.stats.requests.fetch_add(1, Ordering::Relaxed);
        let key = params
            .is_deterministic()
            .then(|| self.key(json!({"op": "generate", "prompt": prompt, "params": params})));
        if let Some(k) = &key {
            if let Some(hit) = self.lookup(k) {
                if let Ok(s) = String::from_utf8(hit) {
                    return Ok(s);
                }
            }
        }
        let text = self.dispatch(|b| b.generate(prompt, params))?;
        if let Some(k) = &key {
            self.store(k, text.as_bytes());
        }
        Ok(text)
    }

    fn identifier(&self) -> String {
        self.inner.identifier()
    }
}

fn decode_vector<T: Scalar>(bytes: &[u8]) -> Option<Vec<T>> {
    let v: Vec<f64> = serde_json::from_slice(bytes).ok()?;
    Some(v.into_iter().map(T::from_f64_lossy).collect())
}

impl<B: EmbeddingBackend> EmbeddingBackend for Managed<B> {
    type Scalar = B::Scalar;

    /// Texts are cached individually; misses go upstream as one batch.
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<B::Scalar>>, BackendError> {
        if texts.is_empty() {
            return Err(BackendError::Protocol("embed called with no texts".into()));
        }
        self.stats.requests.fetch_add(1, Ordering::Relaxed);
        let keys: Vec<CacheKey> = texts.iter().map(|t| self.key(json!({"op": "embed", "text": t}))).collect();
        let mut out: Vec<Option<Vec<B::Scalar>>> =
            keys.iter().map(|k| self.lookup(k).and_then(|b| decode_vector(&b))).collect();
        let missing: Vec<usize> = (0..texts.len()).filter(|i| out[*i].is_none()).collect();
        if !missing.is_empty() {
            let batch: Vec<String> = missing.iter().map(|i| texts[*i].clone()).collect();
            let fresh = self.dispatch(|b| b.embed(&batch))?;
            if fresh.len() != batch.len() {
                return Err(BackendError::Protocol(format!(
                    "asked for {} embeddings, got {}",
                    batch.len(),
                    fresh.len()
                )));
            }
            for (i, v) in missing.into_iter().zip(fresh) {
                let as_f64: Vec<f64> = v.iter().map(|x| x.to_f64_lossy()).collect();
                self.store(&keys[i], &serde_json::to_vec(&as_f64).expect("finite floats serialize"));
                out[i] = Some(v);
            }
        }
        let out: Vec<Vec<B::Scalar>> = out.into_iter().map(|v| v.expect("every slot filled")).collect();
        let dim = out[0].len();
        if let Some(bad) = out.iter().find(|v| v.len() != dim) {
            return Err(BackendError::Protocol(format!(
                "embedding dimension mismatch: {} vs {}",
                dim,
                bad.len()
            )));
        }
        Ok(out)
    }

    fn identifier(&self) -> String {
        self.inner.identifier()
    }
}

fn check_nli<T: Scalar>(s: &NliScores<T>) -> Result<(), BackendError> {
    let parts = [s.entails, s.contradicts, s.neutral];
    let sum = s.sum().to_f64_lossy();
    if parts.iter().any(|p| !p.is_finite() || *p < T::zero()) || (sum - 1.0).abs() > 1e-6 {
        return Err(BackendError::Protocol(format!(
            "NLI probabilities must be non-negative and sum to 1, got {:?}",
            parts.map(|p| p.to_f64_lossy())
        )));
    }
    Ok(())
}

impl<B: NliBackend> NliBackend for Managed<B> {
    type Scalar = B::Scalar;

    fn nli_score(&self, premise: &str, hypothesis: &str) -> Result<NliScores<B::Scalar>, BackendError> {
        self.stats.requests.fetch_add(1, Ordering::Relaxed);
        let key = self.key(json!({"op": "nli", "premise": premise, "hypothesis": hypothesis}));
        if let Some(hit) = self.lookup(&key) {
            if let Ok(s) = serde_json::from_slice::<NliScores<f64>>(&hit) {
                return Ok(NliScores {
                    entails: B::Scalar::from_f64_lossy(s.entails),
                    contradicts: B::Scalar::from_f64_lossy(s.contradicts),
                    neutral: B::Scalar::from_f64_lossy(s.neutral),
                });
            }
        }
        let s = self.dispatch(|b| b.nli_score(premise, hypothesis))?;
        check_nli(&s)?;
        let as_f64 = NliScores {
            entails: s.entails.to_f64_lossy(),
            contradicts: s.contradicts.to_f64_lossy(),
            neutral: s.neutral.to_f64_lossy(),
        };
        self.store(&key, &serde_json::to_vec(&as_f64).expect("finite floats serialize"));
        Ok(s)
    }

    fn identifier(&self) -> String {
        self.inner.identifier()
    }
}
