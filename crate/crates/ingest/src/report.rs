use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use evirank_core::{validate_instance, ClaimInstance, RawInstance, Source};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("no adapter for source {0}")]
    Unsupported(Source),
}

/// Per-file counters. `dropped` is keyed by reason.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub source: Option<Source>,
    pub read: usize,
    pub kept: usize,
    pub dropped: BTreeMap<String, usize>,
    /// Evidence groups discarded because they cite sentences outside the pool.
    pub dangling_groups: usize,
    pub pruned_supersets: usize,
    pub pruned_duplicates: usize,
    pub capped_sets: usize,
}

impl IngestReport {
    pub fn new(source: Source) -> Self {
        IngestReport { source: Some(source), ..Default::default() }
    }

    pub fn drop(&mut self, reason: &str) {
        *self.dropped.entry(reason.to_string()).or_insert(0) += 1;
    }

    pub fn dropped_total(&self) -> usize {
        self.dropped.values().sum()
    }

    pub fn log(&self) {
        let source = self.source.map(Source::as_str).unwrap_or("?");
        tracing::info!(source, read = self.read, kept = self.kept, dropped = self.dropped_total(), "ingest finished");
        for (reason, n) in &self.dropped {
            tracing::info!(source, reason = reason.as_str(), count = n, "dropped records");
        }
    }
}

/// Why a single source record was not turned into an instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Drop {
    pub reason: &'static str,
    pub detail: String,
}

impl Drop {
    pub fn new(reason: &'static str, detail: impl Into<String>) -> Self {
        Drop { reason, detail: detail.into() }
    }
}

/// Runs `convert` over every non-blank line, validates the result and keeps
/// the first instance per id.
pub(crate) fn ingest_file<F>(path: &Path, source: Source, convert: F) -> Result<(Vec<ClaimInstance>, IngestReport), IngestError>
where
    F: FnMut(&str, &mut IngestReport) -> Result<RawInstance, Drop>,
{
    let text = fs::read_to_string(path).map_err(|source| IngestError::Io { path: path.to_path_buf(), source })?;
    let out = ingest_text(&text, source, convert);
    out.1.log();
    Ok(out)
}

pub(crate) fn ingest_text<F>(text: &str, source: Source, mut convert: F) -> (Vec<ClaimInstance>, IngestReport)
where
    F: FnMut(&str, &mut IngestReport) -> Result<RawInstance, Drop>,
{
    let mut report = IngestReport::new(source);
    let mut out: Vec<ClaimInstance> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        report.read += 1;
        let raw = match convert(line, &mut report) {
            Ok(raw) => raw,
            Err(d) => {
                tracing::debug!(line = i + 1, reason = d.reason, detail = d.detail.as_str(), "record skipped");
                report.drop(d.reason);
                continue;
            }
        };
        match validate_instance(raw) {
            Ok(inst) => {
                if seen.insert(inst.id().to_string()) {
                    out.push(inst);
                } else {
                    tracing::debug!(line = i + 1, id = inst.id(), "duplicate id");
                    report.drop("duplicate_id");
                }
            }
            Err(e) => {
                tracing::debug!(line = i + 1, error = %e, "record failed validation");
                report.drop("invalid");
            }
        }
    }
    report.kept = out.len();
    (out, report)
}

/// Source ids may be numbers or strings.
pub(crate) fn id_string(v: &serde_json::Value) -> Option<String> {
    match v {
        serde_json::Value::String(s) if !s.trim().is_empty() => Some(s.trim().to_string()),
        serde_json::Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}
