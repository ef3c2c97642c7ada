use std::collections::BTreeMap;

use evirank_core::{validate_instance, ClaimInstance, RawInstance, RawSentence};
use evirank_study::{analyze, Condition, Decision, EventKind, TrialDef, TrialEvent};

fn inst(id: &str, optimal: usize, verdict: &str) -> ClaimInstance {
    validate_instance(RawInstance {
        id: id.into(),
        claim: "c".into(),
        candidates: (0..6).map(|k| RawSentence::Text(format!("s{k}"))).collect(),
        gold_sets: vec![(0..optimal as i64).collect()],
        verdict: verdict.into(),
        source: "HOVER".into(),
        metadata: BTreeMap::new(),
    })
    .unwrap()
}

fn log(revealed: usize, decision: Decision) -> Vec<TrialEvent> {
    let mut v: Vec<TrialEvent> =
        (1..=revealed).map(|p| TrialEvent { seq: p - 1, at_ms: 0, kind: EventKind::Reveal { position: p } }).collect();
    v.push(TrialEvent { seq: revealed, at_ms: 0, kind: EventKind::Decide { decision, revealed_count: revealed } });
    v
}

/// 25 ranked trials: optimal sizes summing to 47 (mean 1.88) and reveals
/// summing to 62 (mean 2.48).
#[test]
fn table_row_shape() {
    let mut instances = BTreeMap::new();
    let mut trials = Vec::new();
    let mut logs = BTreeMap::new();
    for k in 0..25 {
        let optimal = if k < 22 { 2 } else { 1 };
        let id = format!("i{k:02}");
        instances.insert(id.clone(), inst(&id, optimal, "SUPPORTED"));
        let revealed = if k < 12 { 3 } else { 2 };
        let t = TrialDef { trial_id: format!("t{k:02}"), instance_id: id, condition: Condition::Ranking, shown: (0..6).collect() };
        let decision = if k == 24 { Decision::CantDecide } else { Decision::Supported };
        logs.insert(t.trial_id.clone(), log(revealed, decision));
        trials.push(t);
    }
    let sizes: usize = instances.values().map(|i| i.optimal_gold_size()).sum();
    assert_eq!(sizes, 47);

    let rep = analyze("s", &trials, &instances, &logs).unwrap();
    let r = &rep.conditions[&Condition::Ranking];
    assert_eq!(r.sentences_read, 62);
    assert!((r.avg_sentences_read - 2.48).abs() < 1e-12);
    assert!((rep.gold_average - 1.88).abs() < 1e-12);

    let lines: Vec<&str> = rep.table.lines().collect();
    assert_eq!(lines[0], "Metric                  Evidence Ranking  Evidence Selection");
    assert_eq!(lines[2], "Success rate                         96%                   -");
    assert_eq!(lines[4], "Undecided rate                        4%                   -");
    assert_eq!(lines[5], "Average sentences read              2.48                   -");
    assert_eq!(lines[7], "Gold average sentences: 1.88");
}
