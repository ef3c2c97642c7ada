//! Content-addressed response cache.
//!
//! On disk each entry lives at `<root>/<first two hex digits>/<digest>` and
//! holds the raw response bytes. Entries are written to a temporary sibling
//! and renamed into place, so concurrent writers of the same key are safe.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::BackendKind;

/// Identifies the model a request was served by.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Fingerprint {
    pub kind: BackendKind,
    pub model_name: String,
    pub template_hash: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CacheKey {
    digest: String,
}

impl CacheKey {
    /// Digest over the canonical serialization of fingerprint and payload.
    /// `serde_json` sorts map keys (no `preserve_order`), so logically equal
    /// payloads always serialize to the same bytes.
    pub fn new(fingerprint: &Fingerprint, payload: &Value) -> Self {
        let canonical = serde_json::json!({
            "fingerprint": fingerprint,
            "payload": payload,
        });
        let bytes = serde_json::to_vec(&canonical).expect("json values always serialize");
        CacheKey { digest: hex::encode(Sha256::digest(&bytes)) }
    }

    pub fn digest(&self) -> &str {
        &self.digest
    }

    /// Path of this entry below `root`.
    pub fn relative_path(&self) -> PathBuf {
        PathBuf::from(&self.digest[..2]).join(&self.digest)
    }
}

pub trait ResponseCache: Send + Sync {
    fn get(&self, key: &CacheKey) -> Option<Vec<u8>>;
    fn put(&self, key: &CacheKey, value: &[u8]);
}

#[derive(Debug, Default)]
pub struct MemoryCache {
    entries: Mutex<HashMap<CacheKey, Vec<u8>>>,
}

impl MemoryCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl ResponseCache for MemoryCache {
    fn get(&self, key: &CacheKey) -> Option<Vec<u8>> {
        self.entries.lock().unwrap().get(key).cloned()
    }

    fn put(&self, key: &CacheKey, value: &[u8]) {
        self.entries.lock().unwrap().insert(key.clone(), value.to_vec());
    }
}

#[derive(Debug, Clone)]
pub struct DiskCache {
    root: PathBuf,
}

impl DiskCache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        DiskCache { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path_for(&self, key: &CacheKey) -> PathBuf {
        self.root.join(key.relative_path())
    }
}

impl ResponseCache for DiskCache {
    fn get(&self, key: &CacheKey) -> Option<Vec<u8>> {
        fs::read(self.path_for(key)).ok()
    }

    fn put(&self, key: &CacheKey, value: &[u8]) {
        let path = self.path_for(key);
        let result = (|| -> std::io::Result<()> {
            fs::create_dir_all(path.parent().expect("entry path has a parent"))?;
            let tmp = tempfile_name(&path);
            {
                let mut f = fs::File::create(&tmp)?;
                f.write_all(value)?;
                f.sync_all()?;
            }
            fs::rename(&tmp, &path)
        })();
        // A failed write only costs a future cache miss.
        if let Err(e) = result {
            tracing::warn!(path = %path.display(), error = %e, "could not write cache entry");
        }
    }
}

fn tempfile_name(path: &Path) -> PathBuf {
    static COUNTER: std::sync::atomic::AtomicU64 = std::sync::atomic::AtomicU64::new(0);
    let n = COUNTER.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(format!(".{}.{n}.tmp", std::process::id()));
    path.with_file_name(name)
}
