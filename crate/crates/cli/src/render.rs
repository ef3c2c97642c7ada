//! Report rendering from persisted score files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use evirank_core::io::read_records;
use evirank_core::report::{cumulative_csv, histogram_csv, main_table, ndcg_table, segmentation_table, Row};
use evirank_core::{aggregate, AggregateReport, InstanceScore};
use evirank_rankers::Strategy;

use crate::run::{read_manifest, scores_path};
use crate::{write_atomic, RunError};

/// Rendered report texts, as written under `report/`.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderedReport {
    pub dir: PathBuf,
    pub main: String,
    pub segmentation: String,
    pub ndcg: String,
    pub verified_at_k: String,
    pub cumulative_recall: String,
    pub summary: BTreeMap<String, AggregateReport>,
}

/// Re-renders `report/` from the score files of a run directory. Rendering
/// the same directory twice produces identical files.
pub fn render_run(run_dir: &Path) -> Result<RenderedReport, RunError> {
    let manifest = read_manifest(run_dir)?;
    let mut strategies: Vec<Strategy> = manifest.strategies.iter().map(|s| s.strategy).collect();
    strategies.sort();

    let missing: Vec<String> = strategies
        .iter()
        .filter(|s| !scores_path(run_dir, **s).is_file())
        .map(|s| s.as_str().to_string())
        .collect();
    if !missing.is_empty() {
        return Err(RunError::MissingScores(missing));
    }

    let mut reports: Vec<(Strategy, AggregateReport)> = Vec::new();
    for s in strategies {
        let scores: Vec<InstanceScore> = read_records(&scores_path(run_dir, s))?;
        match aggregate(&scores) {
            Ok(r) => reports.push((s, r)),
            Err(_) => tracing::warn!(strategy = s.as_str(), "no scored instances, left out of the report"),
        }
    }
    let rows: Vec<Row<'_>> = reports.iter().map(|(s, r)| Row { label: s.display_name(), report: r }).collect();

    let dir = run_dir.join("report");
    let out = RenderedReport {
        main: main_table(&rows),
        segmentation: segmentation_table(&rows),
        ndcg: ndcg_table(&rows),
        verified_at_k: histogram_csv(&rows),
        cumulative_recall: cumulative_csv(&rows),
        summary: reports.iter().map(|(s, r)| (s.as_str().to_string(), r.clone())).collect(),
        dir: dir.clone(),
    };
    let mut summary = serde_json::to_string_pretty(&out.summary).expect("summary serializes");
    summary.push('\n');
    write_atomic(&dir.join("main.txt"), &out.main)?;
    write_atomic(&dir.join("segmentation.txt"), &out.segmentation)?;
    write_atomic(&dir.join("ndcg.txt"), &out.ndcg)?;
    write_atomic(&dir.join("verified_at_k.csv"), &out.verified_at_k)?;
    write_atomic(&dir.join("cumulative_recall.csv"), &out.cumulative_recall)?;
    write_atomic(&dir.join("summary.json"), &summary)?;
    Ok(out)
}
