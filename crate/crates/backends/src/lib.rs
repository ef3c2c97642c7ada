//! Client layer for embedding, NLI and generation services.
//!
//! Strategies talk to the traits in [`traits`]; [`registry::Registry`] turns
//! a configuration file into concrete clients, either HTTP services wrapped
//! with caching, retry and rate limiting ([`managed::Managed`]) or the
//! deterministic offline stubs in [`stub`].

pub mod cache;
pub mod config;
pub mod error;
pub mod http;
pub mod managed;
pub mod policy;
pub mod registry;
pub mod stub;
pub mod traits;

pub use cache::{CacheKey, DiskCache, Fingerprint, MemoryCache, ResponseCache};
pub use config::{BackendKind, BackendSpec, BackendsConfig};
pub use error::BackendError;
pub use managed::{Managed, StatsSnapshot};
pub use policy::{Clock, ManualClock, RateLimiter, RetryPolicy, SystemClock};
pub use registry::{Registry, SharedEmbedding, SharedGeneration, SharedNli};
pub use traits::{DecodeParams, EmbeddingBackend, GenerationBackend, NliBackend, NliScores};
