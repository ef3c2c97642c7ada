//! Source-dataset adapters, benchmark sampling and benchmark statistics.

pub mod fever;
pub mod gold;
pub mod hover;
mod report;
pub mod sampler;
pub mod stats;
pub mod wice;

use std::path::Path;

use evirank_core::{ClaimInstance, Source};

pub use fever::{ingest_fever, ingest_fever_str};
pub use hover::{ingest_hover, ingest_hover_str};
pub use report::{IngestError, IngestReport};
pub use sampler::{sample_benchmark, Sample, SampleError, SampleManifest, SamplingConstraints, Shortfall, StratumReport};
pub use stats::{benchmark_stats, BenchmarkStats, SourceStats};
pub use wice::{ingest_wice, ingest_wice_str};

/// Dispatches to the adapter for `source`. `Source::Other` has no adapter.
pub fn ingest(source: Source, path: &Path) -> Result<(Vec<ClaimInstance>, IngestReport), IngestError> {
    match source {
        Source::Fever => ingest_fever(path),
        Source::Hover => ingest_hover(path),
        Source::Wice => ingest_wice(path),
        Source::Other => Err(IngestError::Unsupported(source)),
    }
}
