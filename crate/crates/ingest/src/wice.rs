//! WICE-shaped JSONL.
//!
//! ```json
//! {
//!   "id": "dev02986",                 // emitted as "wice-dev02986"
//!   "claim": "...",
//!   "label": "supported",             // supported | partially_supported -> SUPPORTED,
//!                                     // not_supported -> REFUTED
//!   "evidence": ["s0", "s1", "s2"],   // the pool, in reading order
//!   "subclaims": [
//!     {"text": "...", "supporting_sentences": [0, 1]},  // alternatives: 0 or 1
//!     {"text": "...", "supporting_sentences": [[2, 3]]} // one alternative needing both
//!   ]
//! }
//! ```
//!
//! Claim-level gold sets take one alternative per sub-claim and union them,
//! then go through superset pruning, deduplication and a cap of
//! [`MAX_GOLD_SETS`] (smallest first). A sub-claim with no usable alternative
//! drops the record. The source label is kept as `metadata.original_label`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use evirank_core::{ClaimInstance, RawInstance, RawSentence, Source, Verdict};
use serde::Deserialize;
use serde_json::Value;

use crate::gold;
use crate::report::{id_string, ingest_file, ingest_text, Drop, IngestError, IngestReport};

pub const MAX_GOLD_SETS: usize = 16;
/// Bound on intermediate combinations while expanding the cross product.
const EXPANSION_LIMIT: usize = 4096;

#[derive(Debug, Deserialize)]
struct WiceRecord {
    id: Value,
    claim: String,
    label: String,
    evidence: Vec<String>,
    subclaims: Vec<Subclaim>,
}

#[derive(Debug, Deserialize)]
struct Subclaim {
    #[serde(default)]
    supporting_sentences: Vec<Alternative>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Alternative {
    One(i64),
    Many(Vec<i64>),
}

pub fn ingest_wice(path: &Path) -> Result<(Vec<ClaimInstance>, IngestReport), IngestError> {
    ingest_file(path, Source::Wice, convert)
}

pub fn ingest_wice_str(text: &str) -> (Vec<ClaimInstance>, IngestReport) {
    ingest_text(text, Source::Wice, convert)
}

fn convert(line: &str, report: &mut IngestReport) -> Result<RawInstance, Drop> {
    let rec: WiceRecord = serde_json::from_str(line).map_err(|e| Drop::new("malformed", e.to_string()))?;
    let id = id_string(&rec.id).ok_or_else(|| Drop::new("malformed", "missing id"))?;
    let original = rec.label.trim().to_ascii_lowercase();
    let verdict = match original.as_str() {
        "supported" | "partially_supported" => Verdict::Supported,
        "not_supported" => Verdict::Refuted,
        other => return Err(Drop::new("unknown_label", other.to_string())),
    };
    if rec.subclaims.is_empty() {
        return Err(Drop::new("no_subclaims", id));
    }

    let n = rec.evidence.len() as i64;
    let mut alternatives = Vec::with_capacity(rec.subclaims.len());
    for sub in &rec.subclaims {
        let mut alts = Vec::new();
        for alt in &sub.supporting_sentences {
            let members: Vec<i64> = match alt {
                Alternative::One(i) => vec![*i],
                Alternative::Many(v) => v.clone(),
            };
            if members.is_empty() || members.iter().any(|&i| i < 0 || i >= n) {
                report.dangling_groups += 1;
                continue;
            }
            alts.push(members.into_iter().map(|i| i as usize).collect::<BTreeSet<_>>());
        }
        alternatives.push(alts);
    }
    let sets = gold::cross_product(&alternatives, EXPANSION_LIMIT)
        .ok_or_else(|| Drop::new("unsupported_subclaim", id.clone()))?;
    let cleaned = gold::normalize(sets, Some(MAX_GOLD_SETS));
    report.pruned_supersets += cleaned.supersets;
    report.pruned_duplicates += cleaned.duplicates;
    report.capped_sets += cleaned.capped;

    let mut metadata = BTreeMap::new();
    metadata.insert("original_id".to_string(), id.clone());
    metadata.insert("original_label".to_string(), original);

    Ok(RawInstance {
        id: format!("wice-{id}"),
        claim: rec.claim,
        candidates: rec.evidence.into_iter().map(RawSentence::Text).collect(),
        gold_sets: cleaned.sets.iter().map(|s| s.iter().map(|&i| i as i64).collect()).collect(),
        verdict: verdict.as_str().to_string(),
        source: Source::Wice.as_str().to_string(),
        metadata,
    })
}
