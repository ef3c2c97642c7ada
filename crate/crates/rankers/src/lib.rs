//! Evidence ranking strategies.
//!
//! Every strategy turns a [`ClaimInstance`](evirank_core::ClaimInstance)
//! into a complete permutation of its candidates:
//!
//! - [`SimilarityRanker`]: cosine similarity to the claim, one-shot or
//!   greedy against the mean of the selected sentences
//! - [`NliRanker`]: NLI retrieve-and-rerank
//! - [`TournamentRanker`]: windowed listwise reranking
//! - [`LlmOneshotRanker`], [`LlmIncrementalRanker`]: prompted LLM ranking
//!
//! Ties in scores go to the lower sentence index. Generation-backed
//! strategies never fail on malformed output: they retry, then fill the
//! ranking in reading order and mark the result with `fallback_applied`.

mod build;
pub mod llm;
pub mod nli;
pub mod order;
pub mod parse;
pub mod prompt;
pub mod similarity;
mod strategy;

pub use build::{build_ranker, template_hash};
pub use llm::{LlmIncrementalRanker, LlmOneshotRanker, LlmSettings, TournamentRanker};
pub use nli::{NliDecision, NliLabel, NliRanker};
pub use prompt::{PromptTemplates, TemplateKind};
pub use similarity::SimilarityRanker;
pub use strategy::{Ranker, RankerError, Strategy, StrategyConfig};
