//! Domain types for the evidence ranking task.
//!
//! A [`ClaimInstance`] can only be obtained through [`validate_instance`], so
//! every instance in circulation satisfies the structural invariants the
//! metrics rely on: gold sets are non-empty, minimal with respect to each
//! other, and drawn from the candidate pool.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Supported,
    Refuted,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Supported => "SUPPORTED",
            Verdict::Refuted => "REFUTED",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Verdict {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "SUPPORTED" => Ok(Verdict::Supported),
            "REFUTED" => Ok(Verdict::Refuted),
            other => Err(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Source {
    Fever,
    Hover,
    Wice,
    Other,
}

impl Source {
    pub const ALL: [Source; 4] = [Source::Fever, Source::Hover, Source::Wice, Source::Other];

    pub fn as_str(self) -> &'static str {
        match self {
            Source::Fever => "FEVER",
            Source::Hover => "HOVER",
            Source::Wice => "WICE",
            Source::Other => "OTHER",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Source {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "FEVER" => Ok(Source::Fever),
            "HOVER" => Ok(Source::Hover),
            "WICE" => Ok(Source::Wice),
            "OTHER" => Ok(Source::Other),
            other => Err(other.to_string()),
        }
    }
}

/// One candidate evidence sentence. `index` is its 0-based reading-order
/// position inside the owning instance.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sentence {
    pub index: usize,
    pub text: String,
}

/// A minimal set of candidate indices that jointly verifies or refutes the
/// claim.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GoldEvidenceSet(BTreeSet<usize>);

impl GoldEvidenceSet {
    pub fn members(&self) -> impl ExactSizeIterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_set(&self) -> &BTreeSet<usize> {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0.contains(&index)
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.0.iter().copied().collect()
    }

    fn canonical_key(&self) -> (usize, Vec<usize>) {
        (self.0.len(), self.to_vec())
    }
}

impl FromIterator<usize> for GoldEvidenceSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        GoldEvidenceSet(iter.into_iter().collect())
    }
}

/// A validated claim with its candidate pool and gold evidence.
///
/// Gold sets are held in canonical order (by size, then members) so two
/// records that differ only in how they list gold sets compare equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClaimInstance {
    id: String,
    claim: String,
    candidates: Vec<Sentence>,
    gold_sets: Vec<GoldEvidenceSet>,
    verdict: Verdict,
    source: Source,
    metadata: BTreeMap<String, String>,
}

impl ClaimInstance {
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn claim(&self) -> &str {
        &self.claim
    }

    pub fn candidates(&self) -> &[Sentence] {
        &self.candidates
    }

    pub fn candidate_count(&self) -> usize {
        self.candidates.len()
    }

    pub fn sentence(&self, index: usize) -> Option<&Sentence> {
        self.candidates.get(index)
    }

    pub fn texts(&self) -> impl ExactSizeIterator<Item = &str> + '_ {
        self.candidates.iter().map(|s| s.text.as_str())
    }

    pub fn gold_sets(&self) -> &[GoldEvidenceSet] {
        &self.gold_sets
    }

    pub fn verdict(&self) -> Verdict {
        self.verdict
    }

    pub fn source(&self) -> Source {
        self.source
    }

    pub fn metadata(&self) -> &BTreeMap<String, String> {
        &self.metadata
    }

    /// Size of the smallest gold set.
    pub fn optimal_gold_size(&self) -> usize {
        self.gold_sets.iter().map(GoldEvidenceSet::len).min().unwrap_or(0)
    }

    pub fn to_raw(&self) -> RawInstance {
        RawInstance {
            id: self.id.clone(),
            claim: self.claim.clone(),
            candidates: self
                .candidates
                .iter()
                .map(|s| RawSentence::Text(s.text.clone()))
                .collect(),
            gold_sets: self
                .gold_sets
                .iter()
                .map(|g| g.members().map(|i| i as i64).collect())
                .collect(),
            verdict: self.verdict.as_str().to_string(),
            source: self.source.as_str().to_string(),
            metadata: self.metadata.clone(),
        }
    }
}

/// A candidate as it appears in a benchmark line. Writers always emit plain
/// strings; readers also accept `{"index": .., "text": ..}` objects.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RawSentence {
    Text(String),
    Indexed { index: i64, text: String },
}

/// One benchmark line before validation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawInstance {
    pub id: String,
    pub claim: String,
    pub candidates: Vec<RawSentence>,
    pub gold_sets: Vec<Vec<i64>>,
    pub verdict: String,
    pub source: String,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Error)]
pub enum ValidationError {
    #[error("instance id is empty")]
    EmptyId,
    #[error("claim text is empty")]
    EmptyClaim,
    #[error("candidate {index} has empty text")]
    EmptySentence { index: usize },
    #[error("candidate at position {position} carries index {found}, expected {position}")]
    NonContiguousSentenceIndices { position: usize, found: i64 },
    #[error("instance has no gold evidence sets")]
    EmptyGoldSets,
    #[error("gold set #{set} has no members")]
    EmptyGoldSet { set: usize },
    #[error("gold set {members:?} references index {index}, but only {candidates} candidates exist")]
    DanglingGoldIndex { members: Vec<i64>, index: i64, candidates: usize },
    #[error("gold set {members:?} is listed more than once")]
    DuplicateGoldSet { members: Vec<usize> },
    #[error("gold set {superset:?} is a strict superset of gold set {subset:?}")]
    SupersetGoldSet { superset: Vec<usize>, subset: Vec<usize> },
    #[error("unsupported verdict {0:?}")]
    InvalidVerdict(String),
    #[error("unknown source {0:?}")]
    InvalidSource(String),
}

/// Every violation found in one record, sorted.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ValidationErrors(pub Vec<ValidationError>);

impl ValidationErrors {
    pub fn iter(&self) -> impl Iterator<Item = &ValidationError> {
        self.0.iter()
    }

    pub fn contains(&self, pred: impl Fn(&ValidationError) -> bool) -> bool {
        self.0.iter().any(pred)
    }
}

impl fmt::Display for ValidationErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

/// Checks a raw record against every structural invariant and returns either
/// the validated instance or the full list of violations.
pub fn validate_instance(raw: RawInstance) -> Result<ClaimInstance, ValidationErrors> {
    let mut errors = Vec::new();

    if raw.id.trim().is_empty() {
        errors.push(ValidationError::EmptyId);
    }
    if raw.claim.trim().is_empty() {
        errors.push(ValidationError::EmptyClaim);
    }

    let n = raw.candidates.len();
    let mut candidates = Vec::with_capacity(n);
    for (position, c) in raw.candidates.into_iter().enumerate() {
        let text = match c {
            RawSentence::Text(t) => t,
            RawSentence::Indexed { index, text } => {
                if index != position as i64 {
                    errors.push(ValidationError::NonContiguousSentenceIndices { position, found: index });
                }
                text
            }
        };
        if text.trim().is_empty() {
            errors.push(ValidationError::EmptySentence { index: position });
        }
        candidates.push(Sentence { index: position, text });
    }

    if raw.gold_sets.is_empty() {
        errors.push(ValidationError::EmptyGoldSets);
    }

    let mut gold_sets: Vec<GoldEvidenceSet> = Vec::with_capacity(raw.gold_sets.len());
    for (set_no, members) in raw.gold_sets.iter().enumerate() {
        if members.is_empty() {
            errors.push(ValidationError::EmptyGoldSet { set: set_no });
            continue;
        }
        let mut sorted = members.clone();
        sorted.sort_unstable();
        sorted.dedup();
        let mut ok = true;
        for &index in &sorted {
            if index < 0 || index as usize >= n {
                errors.push(ValidationError::DanglingGoldIndex { members: sorted.clone(), index, candidates: n });
                ok = false;
            }
        }
        if ok {
            gold_sets.push(sorted.iter().map(|&i| i as usize).collect());
        }
    }
    gold_sets.sort_by_key(GoldEvidenceSet::canonical_key);

    for pair in gold_sets.windows(2) {
        if pair[0] == pair[1] {
            errors.push(ValidationError::DuplicateGoldSet { members: pair[0].to_vec() });
        }
    }
    for (i, small) in gold_sets.iter().enumerate() {
        for large in &gold_sets[i + 1..] {
            if small.len() < large.len() && small.as_set().is_subset(large.as_set()) {
                errors.push(ValidationError::SupersetGoldSet { superset: large.to_vec(), subset: small.to_vec() });
            }
        }
    }

    let verdict = raw.verdict.parse::<Verdict>().map_err(|_| {
        errors.push(ValidationError::InvalidVerdict(raw.verdict.clone()));
    });
    let source = raw.source.parse::<Source>().map_err(|_| {
        errors.push(ValidationError::InvalidSource(raw.source.clone()));
    });

    if !errors.is_empty() {
        errors.sort();
        errors.dedup();
        return Err(ValidationErrors(errors));
    }

    Ok(ClaimInstance {
        id: raw.id,
        claim: raw.claim,
        candidates,
        gold_sets,
        verdict: verdict.expect("checked"),
        source: source.expect("checked"),
        metadata: raw.metadata,
    })
}

/// Per-run record of how a ranking was produced.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub strategy: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub backends: Vec<String>,
    pub attempts: u32,
    pub fallback_applied: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template_hash: Option<String>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub unknown_ids: u32,
}

fn is_zero(v: &u32) -> bool {
    *v == 0
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RankingError {
    #[error("ranking for {instance_id} has {got} entries, instance has {expected} candidates")]
    WrongLength { instance_id: String, expected: usize, got: usize },
    #[error("ranking for {instance_id} contains index {index} more than once or out of range")]
    NotAPermutation { instance_id: String, index: usize },
    #[error("ranking is for {got}, not {expected}")]
    InstanceMismatch { expected: String, got: String },
}

/// A permutation of candidate indices for one instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ranking {
    pub instance_id: String,
    pub order: Vec<usize>,
    pub provenance: Provenance,
}

impl Ranking {
    /// Builds a ranking and checks it is a permutation of the instance's
    /// candidates.
    pub fn for_instance(
        instance: &ClaimInstance,
        order: Vec<usize>,
        provenance: Provenance,
    ) -> Result<Self, RankingError> {
        let r = Ranking { instance_id: instance.id().to_string(), order, provenance };
        r.check(instance)?;
        Ok(r)
    }

    pub fn check(&self, instance: &ClaimInstance) -> Result<(), RankingError> {
        if self.instance_id != instance.id() {
            return Err(RankingError::InstanceMismatch {
                expected: instance.id().to_string(),
                got: self.instance_id.clone(),
            });
        }
        check_permutation(&self.instance_id, &self.order, instance.candidate_count())
    }

    /// 1-based rank of every candidate, indexed by candidate.
    pub fn positions(&self) -> Vec<usize> {
        positions_of(&self.order)
    }
}

pub fn check_permutation(instance_id: &str, order: &[usize], n: usize) -> Result<(), RankingError> {
    if order.len() != n {
        return Err(RankingError::WrongLength { instance_id: instance_id.to_string(), expected: n, got: order.len() });
    }
    let mut seen = vec![false; n];
    for &i in order {
        if i >= n || std::mem::replace(&mut seen[i], true) {
            return Err(RankingError::NotAPermutation { instance_id: instance_id.to_string(), index: i });
        }
    }
    Ok(())
}

pub(crate) fn positions_of(order: &[usize]) -> Vec<usize> {
    let mut pos = vec![0; order.len()];
    for (rank, &idx) in order.iter().enumerate() {
        pos[idx] = rank + 1;
    }
    pos
}

/// The on-disk shape of one ranking line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankingRecord {
    pub instance_id: String,
    pub order: Vec<usize>,
    pub strategy: String,
    pub attempts: u32,
    pub fallback_applied: bool,
}

impl From<&Ranking> for RankingRecord {
    fn from(r: &Ranking) -> Self {
        RankingRecord {
            instance_id: r.instance_id.clone(),
            order: r.order.clone(),
            strategy: r.provenance.strategy.clone(),
            attempts: r.provenance.attempts,
            fallback_applied: r.provenance.fallback_applied,
        }
    }
}

impl From<RankingRecord> for Ranking {
    fn from(r: RankingRecord) -> Self {
        Ranking {
            instance_id: r.instance_id,
            order: r.order,
            provenance: Provenance {
                strategy: r.strategy,
                attempts: r.attempts,
                fallback_applied: r.fallback_applied,
                ..Provenance::default()
            },
        }
    }
}
