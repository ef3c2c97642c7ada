//! Per-source benchmark statistics.
//!
//! Every mean is over instances. Gold-set size is first averaged within an
//! instance, so the union of two benchmarks has the instance-weighted mean of
//! their rows.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use evirank_core::{ClaimInstance, Source};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourceStats {
    pub source: Source,
    pub instances: usize,
    pub mean_candidates: f64,
    pub mean_gold_sets: f64,
    pub mean_gold_size: f64,
    pub mean_optimal_size: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkStats {
    pub rows: Vec<SourceStats>,
}

#[derive(Default)]
struct Sums {
    n: usize,
    candidates: f64,
    gold_sets: f64,
    gold_size: f64,
    optimal: f64,
}

pub fn benchmark_stats(instances: &[ClaimInstance]) -> BenchmarkStats {
    let mut by_source: BTreeMap<Source, Sums> = BTreeMap::new();
    for inst in instances {
        let s = by_source.entry(inst.source()).or_default();
        let sets = inst.gold_sets();
        s.n += 1;
        s.candidates += inst.candidate_count() as f64;
        s.gold_sets += sets.len() as f64;
        s.gold_size += sets.iter().map(|g| g.len()).sum::<usize>() as f64 / sets.len() as f64;
        s.optimal += inst.optimal_gold_size() as f64;
    }
    let rows = by_source
        .into_iter()
        .map(|(source, s)| {
            let n = s.n as f64;
            SourceStats {
                source,
                instances: s.n,
                mean_candidates: s.candidates / n,
                mean_gold_sets: s.gold_sets / n,
                mean_gold_size: s.gold_size / n,
                mean_optimal_size: s.optimal / n,
            }
        })
        .collect();
    BenchmarkStats { rows }
}

impl BenchmarkStats {
    pub fn get(&self, source: Source) -> Option<&SourceStats> {
        self.rows.iter().find(|r| r.source == source)
    }

    /// Metrics as rows, sources as columns.
    pub fn render(&self) -> String {
        let metrics: [(&str, fn(&SourceStats) -> String); 5] = [
            ("Number of Instances", |r| r.instances.to_string()),
            ("Avg. Candidate Evidence Set Size (Sents)", |r| format!("{:.1}", r.mean_candidates)),
            ("Avg. Number of Gold Evidence Sets", |r| format!("{:.1}", r.mean_gold_sets)),
            ("Avg. Gold Set Size (Sents)", |r| format!("{:.1}", r.mean_gold_size)),
            ("Avg. Optimal Gold Evidence Set Size (Sents)", |r| format!("{:.1}", r.mean_optimal_size)),
        ];
        let label_w = metrics.iter().map(|(l, _)| l.len()).max().unwrap_or(0);
        let cells: Vec<Vec<String>> = metrics.iter().map(|(_, f)| self.rows.iter().map(f).collect()).collect();
        let col_w: Vec<usize> = self
            .rows
            .iter()
            .enumerate()
            .map(|(j, r)| cells.iter().map(|c| c[j].len()).max().unwrap_or(0).max(r.source.as_str().len()))
            .collect();

        let mut out = String::new();
        let _ = write!(out, "{:label_w$}", "Statistic");
        for (r, w) in self.rows.iter().zip(&col_w) {
            let _ = write!(out, "  {:>w$}", r.source.as_str());
        }
        out.push('\n');
        out.push_str(&"-".repeat(label_w + col_w.iter().map(|w| w + 2).sum::<usize>()));
        out.push('\n');
        for ((label, _), row) in metrics.iter().zip(&cells) {
            let _ = write!(out, "{label:label_w$}");
            for (c, w) in row.iter().zip(&col_w) {
                let _ = write!(out, "  {c:>w$}");
            }
            out.push('\n');
        }
        out
    }
}
