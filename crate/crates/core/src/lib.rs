//! Core of the evidence ranking toolkit: the claim/evidence data model, the
//! unified benchmark file format, and sufficiency-aware ranking metrics.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix it to `f64`, which is what score files and reports use.

pub mod io;
pub mod metrics;
pub mod model;
pub mod report;
pub mod scalar;
pub mod vector;

pub use io::{read_benchmark, write_benchmark, BenchmarkError};
pub use metrics::{
    aggregate, covering_gold_set, imsr, is_sufficient, msr, ndcg, reciprocal_rank, score_instance, success,
    MetricsError, ReciprocalRank, SizeBucket,
};
pub use model::{
    validate_instance, ClaimInstance, GoldEvidenceSet, Provenance, Ranking, RankingError, RankingRecord,
    RawInstance, RawSentence, Sentence, Source, ValidationError, ValidationErrors, Verdict,
};
pub use scalar::Scalar;

/// Per-instance scores in `f64`.
pub type InstanceScore = metrics::InstanceScore<f64>;
/// Dataset-level report in `f64`.
pub type AggregateReport = metrics::AggregateReport<f64>;
pub type MetricSummary = metrics::MetricSummary<f64>;
/// Per-instance scores in `f32`.
pub type InstanceScoreF32 = metrics::InstanceScore<f32>;
pub type AggregateReportF32 = metrics::AggregateReport<f32>;
