//! FEVER-shaped JSONL.
//!
//! One record per line:
//!
//! ```json
//! {
//!   "id": 75397,                       // number or string; emitted as "fever-75397"
//!   "label": "SUPPORTS",               // SUPPORTS | REFUTES | NOT ENOUGH INFO
//!   "claim": "Nikolaj Coster-Waldau worked with the Fox Broadcasting Company.",
//!   "evidence": [                      // list of groups; each group is one gold set
//!     [[92206, 104971, "Nikolaj_Coster-Waldau", 7],   // [annotation, evidence, page, sentence]
//!      [92206, 104971, "Fox_Broadcasting_Company", 0]]
//!   ],
//!   "candidates": [                    // the candidate pool, in reading order
//!     {"page": "Nikolaj_Coster-Waldau", "sentence_id": 7, "text": "..."},
//!     {"page": "Fox_Broadcasting_Company", "sentence_id": 0, "text": "..."}
//!   ]
//! }
//! ```
//!
//! NOT ENOUGH INFO records are dropped. A group citing a sentence that is not
//! in the pool is discarded; the record is dropped only when no group
//! survives. Superset and duplicate groups are pruned before validation.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use evirank_core::{ClaimInstance, RawInstance, RawSentence, Source, Verdict};
use serde::Deserialize;
use serde_json::Value;

use crate::gold;
use crate::report::{id_string, ingest_file, ingest_text, Drop, IngestError, IngestReport};

#[derive(Debug, Deserialize)]
struct FeverRecord {
    id: Value,
    label: String,
    claim: String,
    #[serde(default)]
    evidence: Vec<Vec<(Value, Value, Option<String>, Option<i64>)>>,
    #[serde(default)]
    candidates: Vec<FeverCandidate>,
}

#[derive(Debug, Deserialize)]
struct FeverCandidate {
    page: String,
    sentence_id: i64,
    text: String,
}

pub fn ingest_fever(path: &Path) -> Result<(Vec<ClaimInstance>, IngestReport), IngestError> {
    ingest_file(path, Source::Fever, convert)
}

pub fn ingest_fever_str(text: &str) -> (Vec<ClaimInstance>, IngestReport) {
    ingest_text(text, Source::Fever, convert)
}

fn convert(line: &str, report: &mut IngestReport) -> Result<RawInstance, Drop> {
    let rec: FeverRecord = serde_json::from_str(line).map_err(|e| Drop::new("malformed", e.to_string()))?;
    let id = id_string(&rec.id).ok_or_else(|| Drop::new("malformed", "missing id"))?;
    let verdict = match rec.label.trim().to_ascii_uppercase().as_str() {
        "SUPPORTS" => Verdict::Supported,
        "REFUTES" => Verdict::Refuted,
        "NOT ENOUGH INFO" => return Err(Drop::new("not_enough_info", id)),
        other => return Err(Drop::new("unknown_label", other.to_string())),
    };

    let mut position: HashMap<(&str, i64), usize> = HashMap::new();
    for (i, c) in rec.candidates.iter().enumerate() {
        position.entry((c.page.as_str(), c.sentence_id)).or_insert(i);
    }

    let mut groups = Vec::new();
    for group in &rec.evidence {
        let mut set = BTreeSet::new();
        let mut ok = !group.is_empty();
        for (_, _, page, sent) in group {
            match (page.as_deref(), sent) {
                (Some(p), Some(s)) => match position.get(&(p, *s)) {
                    Some(&i) => {
                        set.insert(i);
                    }
                    None => ok = false,
                },
                _ => ok = false,
            }
        }
        if ok {
            groups.push(set);
        } else {
            report.dangling_groups += 1;
        }
    }
    if groups.is_empty() {
        return Err(Drop::new("no_gold_sets", id));
    }
    let cleaned = gold::normalize(groups, None);
    report.pruned_supersets += cleaned.supersets;
    report.pruned_duplicates += cleaned.duplicates;

    let provenance: Vec<(String, i64)> = rec.candidates.iter().map(|c| (c.page.clone(), c.sentence_id)).collect();
    let mut metadata = BTreeMap::new();
    metadata.insert("original_id".to_string(), id.clone());
    metadata.insert("sentences".to_string(), serde_json::to_string(&provenance).expect("serializable"));

    Ok(RawInstance {
        id: format!("fever-{id}"),
        claim: rec.claim,
        candidates: rec.candidates.into_iter().map(|c| RawSentence::Text(c.text)).collect(),
        gold_sets: cleaned.sets.iter().map(|s| s.iter().map(|&i| i as i64).collect()).collect(),
        verdict: verdict.as_str().to_string(),
        source: Source::Fever.as_str().to_string(),
        metadata,
    })
}
