//! Scoring rankings produced outside of `evirank run`.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use evirank_core::io::read_records;
use evirank_core::metrics::score_instance;
use evirank_core::{aggregate, read_benchmark, AggregateReport, ClaimInstance, InstanceScore, Ranking, RankingRecord};

use crate::RunError;

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredStrategy {
    /// The `strategy` field of the ranking records.
    pub strategy: String,
    pub scores: Vec<InstanceScore>,
    pub report: AggregateReport,
}

/// Scores every ranking in `rankings` against `benchmark`, grouped by
/// strategy name. Rankings for unknown instances or that are not
/// permutations are input errors.
pub fn score_rankings(rankings: &Path, benchmark: &Path) -> Result<Vec<ScoredStrategy>, RunError> {
    let instances = read_benchmark(benchmark)
        .map_err(|e| RunError::Input { path: benchmark.to_path_buf(), message: e.to_string() })?;
    let by_id: HashMap<&str, &ClaimInstance> = instances.iter().map(|i| (i.id(), i)).collect();
    let records: Vec<RankingRecord> = read_records(rankings)?;

    let mut grouped: BTreeMap<String, Vec<InstanceScore>> = BTreeMap::new();
    for rec in records {
        let input = |message: String| RunError::Input { path: rankings.to_path_buf(), message };
        let inst = by_id
            .get(rec.instance_id.as_str())
            .ok_or_else(|| input(format!("unknown instance {}", rec.instance_id)))?;
        let strategy = rec.strategy.clone();
        let score = score_instance(&Ranking::from(rec), inst).map_err(|e| input(e.to_string()))?;
        grouped.entry(strategy).or_default().push(score);
    }
    grouped
        .into_iter()
        .map(|(strategy, scores)| {
            let report = aggregate(&scores).map_err(|e| RunError::Config(e.to_string()))?;
            Ok(ScoredStrategy { strategy, scores, report })
        })
        .collect()
}
