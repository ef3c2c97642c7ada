//! HoVer-shaped JSONL.
//!
//! ```json
//! {
//!   "uid": "330ab5a8-...",            // emitted as "hover-330ab5a8-..."
//!   "claim": "...",
//!   "label": "SUPPORTED",             // SUPPORTED | NOT_SUPPORTED (mapped to REFUTED)
//!   "supporting_facts": [["Skagen Painters", 0], ["Christian Krohg", 2]],  // [title, sentence]
//!   "documents": [                    // the pool, documents in listed order
//!     {"title": "Skagen Painters", "sentences": ["...", "..."]},
//!     {"title": "Christian Krohg", "sentences": ["...", "...", "..."]}
//!   ]
//! }
//! ```
//!
//! All supporting facts form one gold set. The flattened pool keeps document
//! order, then sentence order; `metadata.documents` records
//! `[{"title", "first", "count"}]` so every candidate can be traced back.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use evirank_core::{ClaimInstance, RawInstance, RawSentence, Source, Verdict};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::report::{id_string, ingest_file, ingest_text, Drop, IngestError, IngestReport};

#[derive(Debug, Deserialize)]
struct HoverRecord {
    uid: Value,
    claim: String,
    label: String,
    supporting_facts: Vec<(String, i64)>,
    documents: Vec<HoverDocument>,
}

#[derive(Debug, Deserialize)]
struct HoverDocument {
    title: String,
    sentences: Vec<String>,
}

#[derive(Debug, Serialize)]
struct DocumentSpan<'a> {
    title: &'a str,
    first: usize,
    count: usize,
}

pub fn ingest_hover(path: &Path) -> Result<(Vec<ClaimInstance>, IngestReport), IngestError> {
    ingest_file(path, Source::Hover, convert)
}

pub fn ingest_hover_str(text: &str) -> (Vec<ClaimInstance>, IngestReport) {
    ingest_text(text, Source::Hover, convert)
}

fn convert(line: &str, report: &mut IngestReport) -> Result<RawInstance, Drop> {
    let rec: HoverRecord = serde_json::from_str(line).map_err(|e| Drop::new("malformed", e.to_string()))?;
    let id = id_string(&rec.uid).ok_or_else(|| Drop::new("malformed", "missing uid"))?;
    let verdict = match rec.label.trim().to_ascii_uppercase().as_str() {
        "SUPPORTED" => Verdict::Supported,
        "NOT_SUPPORTED" | "REFUTED" => Verdict::Refuted,
        other => return Err(Drop::new("unknown_label", other.to_string())),
    };

    let mut spans = Vec::with_capacity(rec.documents.len());
    let mut candidates = Vec::new();
    for doc in &rec.documents {
        spans.push(DocumentSpan { title: &doc.title, first: candidates.len(), count: doc.sentences.len() });
        candidates.extend(doc.sentences.iter().cloned().map(RawSentence::Text));
    }

    let mut set = BTreeSet::new();
    for (title, sent) in &rec.supporting_facts {
        // First document with the title wins if a title repeats.
        let span = spans.iter().find(|s| s.title == title);
        match span {
            Some(s) if *sent >= 0 && (*sent as usize) < s.count => {
                set.insert(s.first + *sent as usize);
            }
            _ => {
                report.dangling_groups += 1;
                return Err(Drop::new("dangling_evidence", format!("{title}:{sent}")));
            }
        }
    }
    if set.is_empty() {
        return Err(Drop::new("no_gold_sets", id));
    }

    let mut metadata = BTreeMap::new();
    metadata.insert("original_id".to_string(), id.clone());
    metadata.insert("documents".to_string(), serde_json::to_string(&spans).expect("serializable"));

    Ok(RawInstance {
        id: format!("hover-{id}"),
        claim: rec.claim,
        candidates,
        gold_sets: vec![set.into_iter().map(|i| i as i64).collect()],
        verdict: verdict.as_str().to_string(),
        source: Source::Hover.as_str().to_string(),
        metadata,
    })
}
