//! Aligned text tables and curve series for aggregate reports.
//!
//! MRR and NDCG are printed with two decimals, success rate as a percentage
//! with one decimal; the SEM uses the same precision as its mean.

use std::fmt::Write as _;

use crate::metrics::{AggregateReport, MetricSummary, SizeBucket};

/// One labelled row (a strategy) of a report table.
pub struct Row<'a> {
    pub label: &'a str,
    pub report: &'a AggregateReport<f64>,
}

fn fmt2(m: &MetricSummary<f64>) -> String {
    format!("{:.2} ±{:.2}", m.mean, m.sem)
}

fn fmt_pct(m: &MetricSummary<f64>) -> String {
    format!("{:.1} ±{:.1}", m.mean * 100.0, m.sem * 100.0)
}

/// `"<mrr> / <sr%>"`, e.g. `0.75 / 62.9`.
pub fn summary_line(report: &AggregateReport<f64>) -> String {
    format!("{:.2} / {:.1}", report.mrr.mean, report.sr.mean * 100.0)
}

fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, cell) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, cells: &[String]| {
        for (i, cell) in cells.iter().enumerate() {
            let pad = widths[i] - cell.chars().count();
            if i == 0 {
                out.push_str(cell);
                out.push_str(&" ".repeat(pad));
            } else {
                out.push_str("  ");
                out.push_str(&" ".repeat(pad));
                out.push_str(cell);
            }
        }
        while out.ends_with(' ') {
            out.pop();
        }
        out.push('\n');
    };
    line(&mut out, &header.iter().map(|s| s.to_string()).collect::<Vec<_>>());
    let total: usize = widths.iter().sum::<usize>() + 2 * (cols - 1);
    out.push_str(&"-".repeat(total));
    out.push('\n');
    for r in rows {
        line(&mut out, r);
    }
    out
}

/// Method / MRR / SR (%) with SEMs.
pub fn main_table(rows: &[Row<'_>]) -> String {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![r.label.to_string(), fmt2(&r.report.mrr), fmt_pct(&r.report.sr), r.report.n.to_string()])
        .collect();
    table(&["Ranking Method", "MRR", "SR (%)", "n"], &body)
}

/// MRR segmented by optimal gold set size (1 / 2 / 3+).
pub fn segmentation_table(rows: &[Row<'_>]) -> String {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut cells = vec![r.label.to_string()];
            for b in SizeBucket::ALL {
                cells.push(r.report.mrr_by_optimal_size.get(&b).map(fmt2).unwrap_or_else(|| "-".to_string()));
            }
            cells
        })
        .collect();
    table(&["Method", "1", "2", "3+"], &body)
}

pub fn ndcg_table(rows: &[Row<'_>]) -> String {
    let body: Vec<Vec<String>> =
        rows.iter().map(|r| vec![r.label.to_string(), fmt2(&r.report.ndcg)]).collect();
    table(&["Ranking Method", "NDCG"], &body)
}

/// Verified-at-k histogram as CSV: `k,<label>,...`.
pub fn histogram_csv(rows: &[Row<'_>]) -> String {
    curve_csv(rows, |r| &r.verified_at_k, false)
}

/// Cumulative recall curve as CSV: `k,<label>,...`.
pub fn cumulative_csv(rows: &[Row<'_>]) -> String {
    curve_csv(rows, |r| &r.cumulative_recall, true)
}

fn curve_csv<F>(rows: &[Row<'_>], series: F, saturate: bool) -> String
where
    F: Fn(&AggregateReport<f64>) -> &Vec<f64>,
{
    let max_k = rows.iter().map(|r| series(r.report).len()).max().unwrap_or(0);
    let mut out = String::from("k");
    for r in rows {
        out.push(',');
        out.push_str(r.label);
    }
    out.push('\n');
    for k in 0..max_k {
        let _ = write!(out, "{}", k + 1);
        for r in rows {
            let s = series(r.report);
            let v = match s.get(k) {
                Some(v) => *v,
                None if saturate => s.last().copied().unwrap_or(0.0),
                None => 0.0,
            };
            let _ = write!(out, ",{:.6}", crate::scalar::round6(v));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{aggregate, InstanceScore};

    fn score(id: usize, rank: usize, imsr: usize) -> InstanceScore<f64> {
        InstanceScore {
            instance_id: format!("i{id:04}"),
            msr: rank + imsr - 1,
            imsr,
            rank,
            rr: 1.0 / rank as f64,
            sr: rank == 1,
            ndcg: 1.0,
            covering_gold_set: vec![0],
            optimal_gold_size: imsr,
            candidate_count: 10,
        }
    }

    #[test]
    fn summary_line_matches_table_precision() {
        // 629 successes, 339 at rank 3 and 32 at rank 4: MRR = 750/1000.
        let mut scores = Vec::new();
        for i in 0..629 {
            scores.push(score(i, 1, 1));
        }
        for i in 629..968 {
            scores.push(score(i, 3, 1));
        }
        for i in 968..1000 {
            scores.push(score(i, 4, 1));
        }
        let rep = aggregate(&scores).unwrap();
        assert_eq!(summary_line(&rep), "0.75 / 62.9");
        let t = main_table(&[Row { label: "Incremental LLM", report: &rep }]);
        assert!(t.contains("0.75 ±0.01"), "{t}");
        assert!(t.contains("62.9 ±1.5"), "{t}");
    }

    #[test]
    fn segmentation_marks_missing_buckets() {
        let rep = aggregate(&[score(0, 1, 1), score(1, 2, 2)]).unwrap();
        let t = segmentation_table(&[Row { label: "m", report: &rep }]);
        let last = t.lines().last().unwrap();
        assert!(last.ends_with('-'), "{t}");
    }
}
