//! Study outcome analysis, computed only from trial definitions, the served
//! instances and persisted event logs.
//!
//! Rates are over completed trials of a condition. A trial over-reads when a
//! RANKING participant revealed more sentences than the minimal sufficient
//! rank of the ranking they were shown, or when a SELECTION trial showed more
//! sentences than the instance's ideal minimal sufficient rank.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use evirank_core::metrics::{imsr, msr};
use evirank_core::{ClaimInstance, Verdict};
use serde::{Deserialize, Serialize};

use crate::error::StudyError;
use crate::plan::Condition;
use crate::trial::{Decision, TrialDef, TrialEvent, TrialState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Correct,
    Wrong,
    /// Can't decide with unread evidence left.
    GaveUp,
    /// Can't decide after everything available was shown.
    UndecidedExhausted,
}

pub fn classify(decision: Decision, verdict: Verdict, revealed: usize, available: usize) -> Option<Outcome> {
    let matches = |v: Verdict| if v == verdict { Outcome::Correct } else { Outcome::Wrong };
    match decision {
        Decision::Pending => None,
        Decision::Supported => Some(matches(Verdict::Supported)),
        Decision::Refuted => Some(matches(Verdict::Refuted)),
        Decision::CantDecide if revealed < available => Some(Outcome::GaveUp),
        Decision::CantDecide => Some(Outcome::UndecidedExhausted),
    }
}

/// Whether a completed trial read more than necessary.
pub fn over_read(def: &TrialDef, revealed: usize, instance: &ClaimInstance) -> bool {
    match def.condition {
        Condition::Ranking => revealed > msr(&def.shown, instance),
        Condition::Selection => def.shown.len() > imsr(instance),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub assigned: usize,
    pub completed: usize,
    pub correct: usize,
    pub wrong: usize,
    pub gave_up: usize,
    pub undecided_exhausted: usize,
    pub over_read: usize,
    pub sentences_read: usize,
    pub success_rate: f64,
    pub wrong_rate: f64,
    pub undecided_rate: f64,
    pub avg_sentences_read: f64,
    pub over_read_rate: f64,
    /// Mean ideal minimal sufficient rank over this condition's completed trials.
    pub gold_average: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub study_id: String,
    pub conditions: BTreeMap<Condition, ConditionReport>,
    /// Mean ideal minimal sufficient rank over distinct served instances
    /// with at least one completed trial.
    pub gold_average: f64,
    pub table: String,
}

pub fn analyze(
    study_id: &str,
    trials: &[TrialDef],
    instances: &BTreeMap<String, ClaimInstance>,
    logs: &BTreeMap<String, Vec<TrialEvent>>,
) -> Result<StudyReport, StudyError> {
    let mut reports: BTreeMap<Condition, ConditionReport> =
        Condition::ALL.iter().map(|c| (*c, ConditionReport::default())).collect();
    let mut gold_sum: BTreeMap<Condition, usize> = BTreeMap::new();
    let mut served = BTreeSet::new();

    for def in trials {
        let r = reports.get_mut(&def.condition).expect("all conditions present");
        r.assigned += 1;
        let inst = instances
            .get(&def.instance_id)
            .ok_or_else(|| StudyError::Corrupt(format!("instance {} missing from study snapshot", def.instance_id)))?;
        let empty = Vec::new();
        let st = TrialState::replay(def, logs.get(&def.trial_id).unwrap_or(&empty)).map_err(StudyError::Corrupt)?;
        let Some(outcome) = classify(st.decision, inst.verdict(), st.revealed_count, def.shown.len()) else {
            continue;
        };
        r.completed += 1;
        r.sentences_read += st.revealed_count;
        match outcome {
            Outcome::Correct => r.correct += 1,
            Outcome::Wrong => r.wrong += 1,
            Outcome::GaveUp => r.gave_up += 1,
            Outcome::UndecidedExhausted => r.undecided_exhausted += 1,
        }
        if over_read(def, st.revealed_count, inst) {
            r.over_read += 1;
        }
        *gold_sum.entry(def.condition).or_default() += imsr(inst);
        served.insert(def.instance_id.as_str());
    }

    if reports.values().all(|r| r.completed == 0) {
        return Err(StudyError::EmptyStudy(study_id.to_string()));
    }
    for (c, r) in reports.iter_mut() {
        if r.completed == 0 {
            continue;
        }
        let n = r.completed as f64;
        r.success_rate = r.correct as f64 / n;
        r.wrong_rate = r.wrong as f64 / n;
        r.undecided_rate = (r.gave_up + r.undecided_exhausted) as f64 / n;
        r.avg_sentences_read = r.sentences_read as f64 / n;
        r.over_read_rate = r.over_read as f64 / n;
        r.gold_average = gold_sum.get(c).copied().unwrap_or(0) as f64 / n;
    }
    let gold_average = served.iter().map(|id| imsr(&instances[*id])).sum::<usize>() as f64 / served.len() as f64;
    let table = render(&reports, gold_average);
    Ok(StudyReport { study_id: study_id.to_string(), conditions: reports, gold_average, table })
}

fn pct(v: f64) -> String {
    format!("{:.0}%", v * 100.0)
}

/// Metric rows against condition columns, then the gold average.
pub fn render(reports: &BTreeMap<Condition, ConditionReport>, gold_average: f64) -> String {
    let rows: [(&str, fn(&ConditionReport) -> String); 5] = [
        ("Success rate", |r| pct(r.success_rate)),
        ("Wrong decision rate", |r| pct(r.wrong_rate)),
        ("Undecided rate", |r| pct(r.undecided_rate)),
        ("Average sentences read", |r| format!("{:.2}", r.avg_sentences_read)),
        ("Examples over-read", |r| pct(r.over_read_rate)),
    ];
    let cols: Vec<(Condition, &ConditionReport)> = reports.iter().map(|(c, r)| (*c, r)).collect();
    let label_w = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(0).max("Metric".len());
    let cell = |c: &ConditionReport, f: fn(&ConditionReport) -> String| if c.completed == 0 { "-".to_string() } else { f(c) };
    let widths: Vec<usize> = cols
        .iter()
        .map(|(c, r)| rows.iter().map(|(_, f)| cell(r, *f).len()).max().unwrap_or(0).max(c.label().len()))
        .collect();

    let mut out = String::new();
    let _ = write!(out, "{:label_w$}", "Metric");
    for ((c, _), w) in cols.iter().zip(&widths) {
        let _ = write!(out, "  {:>w$}", c.label());
    }
    out.push('\n');
    out.push_str(&"-".repeat(label_w + widths.iter().map(|w| w + 2).sum::<usize>()));
    out.push('\n');
    for (label, f) in rows {
        let _ = write!(out, "{label:label_w$}");
        for ((_, r), w) in cols.iter().zip(&widths) {
            let _ = write!(out, "  {:>w$}", cell(r, f));
        }
        out.push('\n');
    }
    let _ = writeln!(out, "Gold average sentences: {gold_average:.2}");
    out
}
