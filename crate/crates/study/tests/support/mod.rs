#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use evirank_core::{validate_instance, ClaimInstance, RankingRecord, RawInstance, RawSentence};
use evirank_study::{Condition, Decision, SelectionRecord, StepClock, StudyMaterials, StudyService, TrialDef};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `n` instances with 4-8 candidates, one or two gold sets, a shuffled
/// ranking and a selection of 1-5 sentences each.
pub fn materials(n: usize, seed: u64) -> (Vec<ClaimInstance>, Vec<RankingRecord>, Vec<SelectionRecord>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut insts = Vec::new();
    let mut ranks = Vec::new();
    let mut sels = Vec::new();
    for i in 0..n {
        let m = rng.gen_range(4..=8usize);
        let a = rng.gen_range(1..=2usize);
        let first: Vec<i64> = (0..a as i64).collect();
        let mut gold = vec![first];
        if rng.gen_bool(0.5) {
            gold.push(vec![m as i64 - 1]);
        }
        let inst = validate_instance(RawInstance {
            id: format!("c{i:03}"),
            claim: format!("claim {i}"),
            candidates: (0..m).map(|k| RawSentence::Text(format!("claim {i} sentence {k}"))).collect(),
            gold_sets: gold,
            verdict: if i % 3 == 0 { "REFUTED" } else { "SUPPORTED" }.into(),
            source: "FEVER".into(),
            metadata: BTreeMap::new(),
        })
        .unwrap();
        let mut order: Vec<usize> = (0..m).collect();
        for k in (1..m).rev() {
            order.swap(k, rng.gen_range(0..=k));
        }
        ranks.push(RankingRecord {
            instance_id: inst.id().into(),
            order,
            strategy: "LLM_INCREMENTAL".into(),
            attempts: 1,
            fallback_applied: false,
        });
        let k = rng.gen_range(1..=m.min(5));
        sels.push(SelectionRecord { instance_id: inst.id().into(), selected: (m - k..m).collect() });
        insts.push(inst);
    }
    (insts, ranks, sels)
}

pub fn service(dir: &std::path::Path, n: usize) -> StudyService {
    let (i, r, s) = materials(n, 11);
    StudyService::open(dir, StudyMaterials::new(i, r, s).unwrap(), Arc::new(StepClock::default())).unwrap()
}

/// One finished trial as the tally sees it.
pub struct Trace {
    pub condition: Condition,
    pub shown: Vec<usize>,
    pub revealed: usize,
    pub decision: Decision,
    pub supported: bool,
    pub gold: Vec<BTreeSet<usize>>,
}

#[derive(Debug, Default, PartialEq)]
pub struct Tally {
    pub completed: usize,
    pub correct: usize,
    pub wrong: usize,
    pub gave_up: usize,
    pub exhausted: usize,
    pub over_read: usize,
    pub read: usize,
    pub gold: usize,
}

/// Independent tally: prefix scan for the shortest sufficient prefix,
/// smallest gold set for the ideal.
pub fn tally(traces: &[Trace]) -> BTreeMap<Condition, Tally> {
    let mut out: BTreeMap<Condition, Tally> = BTreeMap::new();
    for t in traces {
        let e = out.entry(t.condition).or_default();
        e.completed += 1;
        e.read += t.revealed;
        let ideal = t.gold.iter().map(|g| g.len()).min().unwrap();
        e.gold += ideal;
        match t.decision {
            Decision::Supported if t.supported => e.correct += 1,
            Decision::Refuted if !t.supported => e.correct += 1,
            Decision::Supported | Decision::Refuted => e.wrong += 1,
            Decision::CantDecide => {
                if t.revealed < t.shown.len() {
                    e.gave_up += 1
                } else {
                    e.exhausted += 1
                }
            }
            Decision::Pending => unreachable!(),
        }
        let necessary = match t.condition {
            Condition::Ranking => {
                let mut seen = BTreeSet::new();
                let mut k = 0;
                for (pos, i) in t.shown.iter().enumerate() {
                    seen.insert(*i);
                    if t.gold.iter().any(|g| g.is_subset(&seen)) {
                        k = pos + 1;
                        break;
                    }
                }
                k
            }
            Condition::Selection => ideal,
        };
        if t.revealed > necessary {
            e.over_read += 1;
        }
    }
    out
}

pub fn trace_for(def: &TrialDef, inst: &ClaimInstance, revealed: usize, decision: Decision) -> Trace {
    Trace {
        condition: def.condition,
        shown: def.shown.clone(),
        revealed,
        decision,
        supported: inst.verdict() == evirank_core::Verdict::Supported,
        gold: inst.gold_sets().iter().map(|g| g.as_set().clone()).collect(),
    }
}
