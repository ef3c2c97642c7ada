//! Random valid instances and rankings.

#![allow(dead_code)]

use std::collections::BTreeMap;

use evirank_core::{validate_instance, ClaimInstance, RawInstance, RawSentence};
use rand::seq::SliceRandom;
use rand::Rng;

/// Random instance with `n` candidates and up to `max_sets` gold sets.
/// Sets that would break minimality are regenerated.
pub fn instance<R: Rng>(rng: &mut R, id: &str, n: usize, max_sets: usize) -> ClaimInstance {
    loop {
        let k = rng.gen_range(1..=max_sets);
        let mut sets: Vec<Vec<i64>> = Vec::new();
        for _ in 0..k {
            let size = rng.gen_range(1..=n.min(4));
            let mut idx: Vec<i64> = (0..n as i64).collect();
            idx.shuffle(rng);
            idx.truncate(size);
            sets.push(idx);
        }
        let raw = RawInstance {
            id: id.to_string(),
            claim: format!("claim {id}"),
            candidates: (0..n).map(|i| RawSentence::Text(format!("sentence {i} of {id}"))).collect(),
            gold_sets: sets,
            verdict: if rng.gen_bool(0.5) { "SUPPORTED" } else { "REFUTED" }.into(),
            source: "OTHER".into(),
            metadata: BTreeMap::new(),
        };
        if let Ok(inst) = validate_instance(raw) {
            return inst;
        }
    }
}

pub fn permutation<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}
