#![allow(dead_code)]

pub mod adversarial;

use std::collections::HashMap;

use evirank_backends::{BackendError, EmbeddingBackend};
use evirank_core::model::{RawInstance, RawSentence};
use evirank_core::{validate_instance, ClaimInstance, RankingRecord};

pub fn instance(id: &str, claim: &str, texts: &[&str], gold: &[&[i64]]) -> ClaimInstance {
    validate_instance(RawInstance {
        id: id.into(),
        claim: claim.into(),
        candidates: texts.iter().map(|t| RawSentence::Text(t.to_string())).collect(),
        gold_sets: gold.iter().map(|g| g.to_vec()).collect(),
        verdict: "SUPPORTED".into(),
        source: "FEVER".into(),
        metadata: Default::default(),
    })
    .expect("fixture is valid")
}

/// Embedder answering from a fixed text -> vector table.
pub struct FixedEmbedder(pub HashMap<String, Vec<f64>>);

impl FixedEmbedder {
    pub fn new(pairs: &[(&str, Vec<f64>)]) -> Self {
        FixedEmbedder(pairs.iter().map(|(t, v)| (t.to_string(), v.clone())).collect())
    }
}

impl EmbeddingBackend for FixedEmbedder {
    type Scalar = f64;

    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, BackendError> {
        texts
            .iter()
            .map(|t| self.0.get(t).cloned().ok_or_else(|| BackendError::Protocol(format!("no vector for {t:?}"))))
            .collect()
    }

    fn identifier(&self) -> String {
        "fixed".into()
    }
}

pub fn record_line(r: &evirank_core::Ranking) -> String {
    let rec = RankingRecord::from(r);
    serde_json::to_string(&rec).unwrap()
}

pub fn golden(name: &str) -> String {
    std::fs::read_to_string(format!("{}/tests/golden/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}
