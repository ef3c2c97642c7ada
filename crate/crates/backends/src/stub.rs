//! Deterministic offline backends.
//!
//! These make every strategy runnable without network access. None of them
//! is a model; they exist for tests, smoke runs and fixtures.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::marker::PhantomData;
use std::sync::Mutex;

use evirank_core::Scalar;
use serde::Deserialize;

use crate::error::BackendError;
use crate::traits::{DecodeParams, EmbeddingBackend, GenerationBackend, NliBackend, NliScores};

/// Lowercased alphanumeric tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

fn fnv1a(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

enum Vocabulary {
    Hashed(usize),
    Fixed(HashMap<String, usize>),
}

/// Bag-of-words embedder: an L2-normalized token-count vector. With an
/// explicit vocabulary each word owns one dimension and unknown words are
/// ignored; otherwise tokens are hashed (FNV-1a) into `dim` buckets.
/// A text without counted tokens embeds to the zero vector.
pub struct LexicalEmbedder<T = f64> {
    vocab: Vocabulary,
    _scalar: PhantomData<fn() -> T>,
}

impl<T: Scalar> LexicalEmbedder<T> {
    pub fn hashed(dim: usize) -> Self {
        assert!(dim > 0, "embedding dimension must be positive");
        LexicalEmbedder { vocab: Vocabulary::Hashed(dim), _scalar: PhantomData }
    }

    pub fn with_vocabulary<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut map = HashMap::new();
        for w in words {
            let w = w.as_ref().to_lowercase();
            let next = map.len();
            map.entry(w).or_insert(next);
        }
        assert!(!map.is_empty(), "vocabulary must not be empty");
        LexicalEmbedder { vocab: Vocabulary::Fixed(map), _scalar: PhantomData }
    }

    pub fn dim(&self) -> usize {
        match &self.vocab {
            Vocabulary::Hashed(d) => *d,
            Vocabulary::Fixed(m) => m.len(),
        }
    }

    pub fn embed_one(&self, text: &str) -> Vec<T> {
        let mut counts = vec![0usize; self.dim()];
        for tok in tokenize(text) {
            let slot = match &self.vocab {
                Vocabulary::Hashed(d) => Some((fnv1a(&tok) % *d as u64) as usize),
                Vocabulary::Fixed(m) => m.get(&tok).copied(),
            };
            if let Some(i) = slot {
                counts[i] += 1;
            }
        }
        let mut v: Vec<T> = counts.into_iter().map(T::from_usize_lossy).collect();
        evirank_core::vector::normalize(&mut v);
        v
    }
}

impl<T: Scalar> EmbeddingBackend for LexicalEmbedder<T> {
    type Scalar = T;

    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<T>>, BackendError> {
        Ok(texts.iter().map(|t| self.embed_one(t)).collect())
    }

    fn identifier(&self) -> String {
        match &self.vocab {
            Vocabulary::Hashed(d) => format!("stub:lexical/hashed-{d}"),
            Vocabulary::Fixed(m) => format!("stub:lexical/vocab-{}", m.len()),
        }
    }
}

/// What [`TableNli`] answers for pairs it has no entry for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NliFallback {
    #[default]
    Uniform,
    /// Entailment grows with the share of hypothesis tokens found in the
    /// premise; the rest is split evenly between the other two labels.
    Overlap,
}

#[derive(Debug, Clone, Deserialize)]
pub struct NliTableEntry {
    pub premise: String,
    pub hypothesis: String,
    pub entails: f64,
    pub contradicts: f64,
    pub neutral: f64,
}

/// Lookup-table NLI stub.
pub struct TableNli<T = f64> {
    table: HashMap<(String, String), NliScores<T>>,
    fallback: NliFallback,
}

impl<T: Scalar> Default for TableNli<T> {
    fn default() -> Self {
        TableNli { table: HashMap::new(), fallback: NliFallback::Uniform }
    }
}

impl<T: Scalar> TableNli<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_fallback(mut self, fallback: NliFallback) -> Self {
        self.fallback = fallback;
        self
    }

    /// Registers a pair. Weights are renormalized to sum to one.
    pub fn insert(&mut self, premise: &str, hypothesis: &str, entails: T, contradicts: T, neutral: T) -> Result<(), BackendError> {
        let scores = NliScores::normalized(entails, contradicts, neutral).ok_or_else(|| {
            BackendError::Config(format!("invalid NLI weights for premise {premise:?}"))
        })?;
        self.table.insert((premise.to_string(), hypothesis.to_string()), scores);
        Ok(())
    }

    /// Loads a line-delimited table of [`NliTableEntry`] records.
    pub fn load(path: &std::path::Path) -> Result<Self, BackendError> {
        let entries: Vec<NliTableEntry> =
            evirank_core::io::read_records(path).map_err(|e| BackendError::Config(e.to_string()))?;
        let mut t = Self::new();
        for e in entries {
            t.insert(
                &e.premise,
                &e.hypothesis,
                T::from_f64_lossy(e.entails),
                T::from_f64_lossy(e.contradicts),
                T::from_f64_lossy(e.neutral),
            )?;
        }
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    fn fallback_scores(&self, premise: &str, hypothesis: &str) -> NliScores<T> {
        match self.fallback {
            NliFallback::Uniform => NliScores::uniform(),
            NliFallback::Overlap => {
                let p: BTreeSet<String> = tokenize(premise).into_iter().collect();
                let h: BTreeSet<String> = tokenize(hypothesis).into_iter().collect();
                if h.is_empty() {
                    return NliScores::uniform();
                }
                let share = h.intersection(&p).count() as f64 / h.len() as f64;
                let e = 0.05 + 0.9 * share;
                let rest = (1.0 - e) / 2.0;
                NliScores { entails: T::from_f64_lossy(e), contradicts: T::from_f64_lossy(rest), neutral: T::from_f64_lossy(rest) }
            }
        }
    }
}

impl<T: Scalar> NliBackend for TableNli<T> {
    type Scalar = T;

    fn nli_score(&self, premise: &str, hypothesis: &str) -> Result<NliScores<T>, BackendError> {
        Ok(self
            .table
            .get(&(premise.to_string(), hypothesis.to_string()))
            .copied()
            .unwrap_or_else(|| self.fallback_scores(premise, hypothesis)))
    }

    fn identifier(&self) -> String {
        format!("stub:nli/{}", self.table.len())
    }
}

/// Replays queued responses in order and records every prompt it saw.
/// When the queue runs dry it repeats the last response if so configured,
/// otherwise it fails with a protocol error.
#[derive(Debug, Default)]
pub struct ScriptedGenerator {
    queue: Mutex<VecDeque<Result<String, BackendError>>>,
    last: Mutex<Option<String>>,
    repeat_last: bool,
    prompts: Mutex<Vec<String>>,
}

impl ScriptedGenerator {
    pub fn new<I, S>(responses: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ScriptedGenerator {
            queue: Mutex::new(responses.into_iter().map(|s| Ok(s.into())).collect()),
            ..Self::default()
        }
    }

    /// Queue mixing responses and errors.
    pub fn with_results(results: Vec<Result<String, BackendError>>) -> Self {
        ScriptedGenerator { queue: Mutex::new(results.into()), ..Self::default() }
    }

    pub fn repeat_last(mut self) -> Self {
        self.repeat_last = true;
        self
    }

    pub fn prompts(&self) -> Vec<String> {
        self.prompts.lock().unwrap().clone()
    }

    pub fn remaining(&self) -> usize {
        self.queue.lock().unwrap().len()
    }
}

impl GenerationBackend for ScriptedGenerator {
    fn generate(&self, prompt: &str, _params: &DecodeParams) -> Result<String, BackendError> {
        self.prompts.lock().unwrap().push(prompt.to_string());
        let next = self.queue.lock().unwrap().pop_front();
        match next {
            Some(Ok(s)) => {
                *self.last.lock().unwrap() = Some(s.clone());
                Ok(s)
            }
            Some(Err(e)) => Err(e),
            None => match (self.repeat_last, self.last.lock().unwrap().clone()) {
                (true, Some(s)) => Ok(s),
                _ => Err(BackendError::Protocol("scripted generator exhausted".into())),
            },
        }
    }

    fn identifier(&self) -> String {
        "stub:scripted".into()
    }
}

/// Generator backed by a closure, for tests that need to look at the prompt.
pub struct FnGenerator<F> {
    f: F,
    name: String,
}

impl<F> FnGenerator<F>
where
    F: Fn(&str) -> Result<String, BackendError> + Send + Sync,
{
    pub fn new(name: impl Into<String>, f: F) -> Self {
        FnGenerator { f, name: name.into() }
    }
}

impl<F> GenerationBackend for FnGenerator<F>
where
    F: Fn(&str) -> Result<String, BackendError> + Send + Sync,
{
    fn generate(&self, prompt: &str, _params: &DecodeParams) -> Result<String, BackendError> {
        (self.f)(prompt)
    }

    fn identifier(&self) -> String {
        self.name.clone()
    }
}

/// The parts of a ranking prompt the overlap generator needs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PromptView {
    pub statement: String,
    /// `(id, text)` in listed order.
    pub sentences: Vec<(usize, String)>,
    pub used: Vec<String>,
}

/// Extracts the statement, numbered sentences and used-sentence block from
/// a prompt rendered with the default templates.
pub fn parse_prompt(prompt: &str) -> PromptView {
    let mut view = PromptView::default();
    let mut section = "";
    for line in prompt.lines() {
        let trimmed = line.trim();
        if let Some(s) = trimmed.strip_prefix("Factual Statement:").or_else(|| trimmed.strip_prefix("Statement:")) {
            view.statement = s.trim().to_string();
            section = "";
            continue;
        }
        match trimmed {
            "Sentences:" => {
                section = "sentences";
                continue;
            }
            "Used sentences:" => {
                section = "used";
                continue;
            }
            "" => {
                section = "";
                continue;
            }
            _ => {}
        }
        match section {
            "sentences" => {
                if let Some((id, text)) = trimmed.split_once(". ") {
                    if let Ok(id) = id.parse::<usize>() {
                        view.sentences.push((id, text.to_string()));
                    }
                }
            }
            "used" => {
                if let Some(t) = trimmed.strip_prefix("- ") {
                    view.used.push(t.to_string());
                }
            }
            _ => {}
        }
    }
    view
}

/// Answers ranking prompts by lexical overlap with the statement, in the
/// output format each prompt asks for:
/// a JSON object for one-shot ranking, `[k]` for incremental selection and
/// `<think>..</think> <answer>[a] > [b]</answer>` for the reranker.
#[derive(Debug, Default, Clone, Copy)]
pub struct OverlapGenerator;

impl OverlapGenerator {
    fn ranked(view: &PromptView) -> Vec<(usize, String)> {
        let claim: BTreeSet<String> = tokenize(&view.statement).into_iter().collect();
        let mut scored: Vec<(usize, usize, String)> = view
            .sentences
            .iter()
            .map(|(id, text)| {
                let toks: BTreeSet<String> = tokenize(text).into_iter().collect();
                (toks.intersection(&claim).count(), *id, text.clone())
            })
            .collect();
        scored.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        scored.into_iter().map(|(_, id, t)| (id, t)).collect()
    }
}

impl GenerationBackend for OverlapGenerator {
    fn generate(&self, prompt: &str, _params: &DecodeParams) -> Result<String, BackendError> {
        let view = parse_prompt(prompt);
        let ranked = Self::ranked(&view);
        if prompt.contains("<answer>") {
            let order: Vec<String> = ranked.iter().map(|(id, _)| format!("[{id}]")).collect();
            return Ok(format!("<think> lexical overlap </think> <answer> {} </answer>", order.join(" > ")));
        }
        if prompt.contains("JSON object") {
            let mut out = String::from("{");
            for (i, (id, text)) in ranked.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(&serde_json::to_string(&id.to_string()).expect("string"));
                out.push_str(": ");
                out.push_str(&serde_json::to_string(text).expect("string"));
            }
            out.push('}');
            return Ok(out);
        }
        let used: BTreeSet<&str> = view.used.iter().map(String::as_str).collect();
        let pick = ranked
            .iter()
            .find(|(_, t)| !used.contains(t.as_str()))
            .or(ranked.first())
            .ok_or_else(|| BackendError::Protocol("prompt lists no sentences".into()))?;
        Ok(format!("[{}]", pick.0))
    }

    fn identifier(&self) -> String {
        "stub:overlap".into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use evirank_core::vector::cosine;

    #[test]
    fn vocabulary_embedding_is_normalized_counts() {
        let e = LexicalEmbedder::<f64>::with_vocabulary(["a", "b", "c"]);
        let v = e.embed_one("a a b");
        let n = 5f64.sqrt();
        assert_eq!(v, vec![2.0 / n, 1.0 / n, 0.0]);
        assert_eq!(e.embed_one("zzz"), vec![0.0; 3]);
    }

    #[test]
    fn hashed_self_similarity() {
        let e = LexicalEmbedder::<f64>::hashed(64);
        let a = e.embed_one("a b");
        assert!((cosine(&a, &a) - 1.0).abs() < 1e-12);
        assert_eq!(a, e.embed_one("A, b"));
    }

    #[test]
    fn table_lookup_and_default() {
        let mut t = TableNli::<f64>::new();
        t.insert("p", "h", 0.7, 0.2, 0.1).unwrap();
        let s = t.nli_score("p", "h").unwrap();
        assert_eq!((s.entails, s.contradicts, s.neutral), (0.7, 0.2, 0.1));
        let u = t.nli_score("h", "p").unwrap();
        assert_eq!(u, NliScores::uniform());
        assert!(t.insert("p", "h", -1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn scripted_in_order_then_exhausted() {
        let g = ScriptedGenerator::new(["one", "two"]);
        let p = DecodeParams::default();
        assert_eq!(g.generate("x", &p).unwrap(), "one");
        assert_eq!(g.generate("y", &p).unwrap(), "two");
        assert!(g.generate("z", &p).is_err());
        assert_eq!(g.prompts(), vec!["x", "y", "z"]);
    }

    #[test]
    fn prompt_view_reads_blocks() {
        let p = "Statement: red apple\n\nSentences:\n1. an apple\n2. red apple pie\n\nUsed sentences:\n- red apple pie\n";
        let v = parse_prompt(p);
        assert_eq!(v.statement, "red apple");
        assert_eq!(v.sentences, vec![(1, "an apple".into()), (2, "red apple pie".into())]);
        assert_eq!(v.used, vec!["red apple pie"]);
        assert_eq!(OverlapGenerator.generate(p, &DecodeParams::default()).unwrap(), "[1]");
    }
}
