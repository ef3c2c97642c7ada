mod support;

use std::collections::BTreeMap;
use std::sync::Arc;

use evirank_core::metrics::imsr;
use evirank_study::{
    analyze_dir, Condition, Decision, EventKind, StepClock, StudyError, StudyMaterials, StudyPlan, StudyService,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small_plan() -> StudyPlan {
    StudyPlan { claim_pool_size: 8, participants: 2, trials_per_participant: 8, seed: 1, ..StudyPlan::default() }
}

#[test]
fn ranking_trial_reveals_then_ends() {
    let dir = tempfile::tempdir().unwrap();
    let svc = support::service(dir.path(), 20);
    let m = svc.create_study(small_plan()).unwrap();
    let def = m.trials().find(|t| t.condition == Condition::Ranking).unwrap();
    let n = def.shown.len();

    let v = svc.trial_view(&def.trial_id).unwrap();
    assert_eq!(v.revealed_count, 1);
    assert_eq!(v.sentences.len(), 1);
    assert_eq!(v.sentences[0].position, 1);
    assert!(v.sentences[0].text.ends_with(&format!("sentence {}", def.shown[0])));
    assert!(v.can_reveal);

    for k in 2..=n {
        let r = svc.reveal(&def.trial_id).unwrap();
        assert!(!r.end_of_evidence);
        assert_eq!(r.sentence.unwrap().position, k);
        assert_eq!(r.revealed_count, k);
    }
    let end = svc.reveal(&def.trial_id).unwrap();
    assert!(end.end_of_evidence && end.sentence.is_none());
    assert_eq!(svc.events(&def.trial_id).unwrap().len(), n);
    assert!(!svc.trial_view(&def.trial_id).unwrap().can_reveal);

    svc.decide(&def.trial_id, Decision::CantDecide).unwrap();
    assert!(matches!(svc.decide(&def.trial_id, Decision::Supported), Err(StudyError::Conflict(_))));
    assert!(matches!(svc.reveal(&def.trial_id), Err(StudyError::Conflict(_))));
    assert_eq!(svc.events(&def.trial_id).unwrap().len(), n + 1);
}

#[test]
fn selection_trial_shows_everything() {
    let dir = tempfile::tempdir().unwrap();
    let svc = support::service(dir.path(), 20);
    let m = svc.create_study(small_plan()).unwrap();
    let def = m.trials().find(|t| t.condition == Condition::Selection).unwrap();
    let v = svc.trial_view(&def.trial_id).unwrap();
    assert_eq!(v.sentences.len(), def.shown.len());
    assert!(!v.can_reveal);
    assert!(matches!(svc.reveal(&def.trial_id), Err(StudyError::MethodNotAllowed(_))));
    let d = svc.decide(&def.trial_id, Decision::Refuted).unwrap();
    assert_eq!(d.revealed_count, def.shown.len());
    assert!(matches!(svc.decide(&def.trial_id, Decision::Supported), Err(StudyError::Conflict(_))));
}

#[test]
fn pending_is_not_a_decision() {
    let dir = tempfile::tempdir().unwrap();
    let svc = support::service(dir.path(), 20);
    let m = svc.create_study(small_plan()).unwrap();
    let t = &m.participants[0].trials[0].trial_id;
    assert!(matches!(svc.decide(t, Decision::Pending), Err(StudyError::BadRequest(_))));
}

#[test]
fn next_trial_walks_the_sequence() {
    let dir = tempfile::tempdir().unwrap();
    let svc = support::service(dir.path(), 20);
    let m = svc.create_study(small_plan()).unwrap();
    let p = &m.participants[1];
    for (k, def) in p.trials.iter().enumerate() {
        let next = svc.next_trial(&p.token).unwrap();
        assert_eq!(next.completed, k);
        let t = next.trial.unwrap();
        assert_eq!(t.trial_id, def.trial_id);
        assert_eq!(t.number, k + 1);
        svc.decide(&def.trial_id, Decision::Supported).unwrap();
    }
    let done = svc.next_trial(&p.token).unwrap();
    assert!(done.complete && done.trial.is_none());
    assert_eq!(done.completed, p.trials.len());
    assert!(matches!(svc.next_trial("nobody"), Err(StudyError::NotFound(_))));
}

#[test]
fn state_survives_restart() {
    let dir = tempfile::tempdir().unwrap();
    let (i, r, s) = support::materials(20, 11);
    let mats = StudyMaterials::new(i, r, s).unwrap();
    let svc = StudyService::open(dir.path(), mats.clone(), Arc::new(StepClock::default())).unwrap();
    let m = svc.create_study(small_plan()).unwrap();
    let def = m.trials().find(|t| t.condition == Condition::Ranking).unwrap().clone();
    svc.reveal(&def.trial_id).unwrap();
    let before = svc.report(&m.study_id);
    drop(svc);

    let svc = StudyService::open(dir.path(), mats, Arc::new(StepClock::default())).unwrap();
    assert_eq!(svc.study_ids(), vec![m.study_id.clone()]);
    assert_eq!(svc.trial_view(&def.trial_id).unwrap().revealed_count, 2);
    assert!(matches!(before, Err(StudyError::EmptyStudy(_))));
    svc.decide(&def.trial_id, Decision::Supported).unwrap();
    let report = svc.report(&m.study_id).unwrap();
    assert_eq!(report, analyze_dir(&dir.path().join("studies").join(&m.study_id)).unwrap());
    assert_eq!(report, svc.report(&m.study_id).unwrap());

    // A second study gets a fresh id.
    let m2 = svc.create_study(small_plan()).unwrap();
    assert_ne!(m2.study_id, m.study_id);
}

#[test]
fn torn_event_log_is_truncated_on_open() {
    let dir = tempfile::tempdir().unwrap();
    let (i, r, s) = support::materials(20, 11);
    let mats = StudyMaterials::new(i, r, s).unwrap();
    let svc = StudyService::open(dir.path(), mats.clone(), Arc::new(StepClock::default())).unwrap();
    let m = svc.create_study(small_plan()).unwrap();
    let def = m.trials().find(|t| t.condition == Condition::Ranking).unwrap().clone();
    drop(svc);
    let log = dir.path().join("studies").join(&m.study_id).join("events").join(format!("{}.ldrec", def.trial_id));
    let mut text = std::fs::read_to_string(&log).unwrap();
    text.push_str("{\"seq\":1,\"at_m");
    std::fs::write(&log, text).unwrap();

    let svc = StudyService::open(dir.path(), mats, Arc::new(StepClock::default())).unwrap();
    assert_eq!(svc.events(&def.trial_id).unwrap().len(), 1);
    svc.reveal(&def.trial_id).unwrap();
    assert_eq!(svc.events(&def.trial_id).unwrap().len(), 2);
}

#[test]
fn classification_examples() {
    use evirank_core::Verdict;
    use evirank_study::{classify, Outcome};
    assert_eq!(classify(Decision::Supported, Verdict::Supported, 2, 5), Some(Outcome::Correct));
    assert_eq!(classify(Decision::Refuted, Verdict::Supported, 2, 5), Some(Outcome::Wrong));
    assert_eq!(classify(Decision::CantDecide, Verdict::Supported, 2, 5), Some(Outcome::GaveUp));
    assert_eq!(classify(Decision::CantDecide, Verdict::Refuted, 5, 5), Some(Outcome::UndecidedExhausted));
    assert_eq!(classify(Decision::Pending, Verdict::Refuted, 1, 5), None);
}

/// Reads exactly to the minimal sufficient rank and answers correctly.
#[test]
fn perfect_readers_never_over_read() {
    let dir = tempfile::tempdir().unwrap();
    let svc = support::service(dir.path(), 20);
    let m = svc.create_study(small_plan()).unwrap();
    let snapshot = evirank_core::read_benchmark(&dir.path().join("studies").join(&m.study_id).join("instances.ldrec")).unwrap();
    let by_id: BTreeMap<_, _> = snapshot.iter().map(|i| (i.id().to_string(), i)).collect();
    for def in m.trials().filter(|t| t.condition == Condition::Ranking) {
        let inst = by_id[&def.instance_id];
        let need = evirank_core::metrics::msr(&def.shown, inst);
        for _ in 1..need {
            svc.reveal(&def.trial_id).unwrap();
        }
        let d = if inst.verdict() == evirank_core::Verdict::Supported { Decision::Supported } else { Decision::Refuted };
        svc.decide(&def.trial_id, d).unwrap();
    }
    let rep = svc.report(&m.study_id).unwrap();
    let r = &rep.conditions[&Condition::Ranking];
    assert_eq!((r.success_rate, r.over_read_rate), (1.0, 0.0));
    assert_eq!(rep.conditions[&Condition::Selection].completed, 0);
    assert!(rep.table.contains("Success rate"));
}

/// Drives random traces and checks the reveal and decision rules hold in
/// every persisted log.
fn drive(svc: &StudyService, trial_ids: &[String], ops: &[(usize, u8)]) {
    for &(t, op) in ops {
        let id = &trial_ids[t % trial_ids.len()];
        let before = svc.trial_view(id).unwrap();
        match op % 4 {
            0 | 1 => match svc.reveal(id) {
                Ok(r) => {
                    assert_eq!(before.condition, Condition::Ranking);
                    assert_eq!(before.decision, Decision::Pending);
                    assert_eq!(r.end_of_evidence, r.revealed_count == before.revealed_count);
                }
                Err(StudyError::Conflict(_)) => assert_ne!(before.decision, Decision::Pending),
                Err(StudyError::MethodNotAllowed(_)) => assert_eq!(before.condition, Condition::Selection),
                Err(e) => panic!("{e}"),
            },
            2 => {
                let r = svc.decide(id, Decision::CantDecide);
                assert_eq!(r.is_ok(), before.decision == Decision::Pending);
            }
            _ => {
                let r = svc.decide(id, Decision::Supported);
                assert_eq!(r.is_ok(), before.decision == Decision::Pending);
            }
        }
    }
    for id in trial_ids {
        let log = svc.events(id).unwrap();
        let view = svc.trial_view(id).unwrap();
        let reveals = log.iter().filter(|e| matches!(e.kind, EventKind::Reveal { .. })).count();
        let decides: Vec<usize> =
            log.iter().enumerate().filter(|(_, e)| matches!(e.kind, EventKind::Decide { .. })).map(|(i, _)| i).collect();
        assert!(decides.len() <= 1);
        if let Some(&d) = decides.first() {
            assert_eq!(d, log.len() - 1, "nothing after the decision");
        }
        if view.condition == Condition::Ranking {
            assert_eq!(reveals, view.revealed_count);
        } else {
            assert_eq!(reveals, 0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn fuzzed_traces_keep_invariants(ops in prop::collection::vec((0usize..16, any::<u8>()), 0..80)) {
        let dir = tempfile::tempdir().unwrap();
        let svc = support::service(dir.path(), 20);
        let m = svc.create_study(small_plan()).unwrap();
        let ids: Vec<String> = m.trials().map(|t| t.trial_id.clone()).collect();
        drive(&svc, &ids, &ops);
    }
}

#[test]
fn analysis_matches_independent_tally() {
    let dir = tempfile::tempdir().unwrap();
    let svc = support::service(dir.path(), 130);
    let m = svc.create_study(StudyPlan { seed: 2, ..StudyPlan::default() }).unwrap();
    let snapshot = evirank_core::read_benchmark(&dir.path().join("studies").join(&m.study_id).join("instances.ldrec")).unwrap();
    let by_id: BTreeMap<_, _> = snapshot.iter().map(|i| (i.id().to_string(), i)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut traces = Vec::new();
    for def in m.trials() {
        let inst = by_id[&def.instance_id];
        let mut revealed = if def.condition == Condition::Ranking { 1 } else { def.shown.len() };
        if def.condition == Condition::Ranking {
            for _ in 0..rng.gen_range(0..def.shown.len() + 1) {
                let r = svc.reveal(&def.trial_id).unwrap();
                revealed = r.revealed_count;
            }
        }
        let decision = [Decision::Supported, Decision::Refuted, Decision::CantDecide][rng.gen_range(0..3)];
        svc.decide(&def.trial_id, decision).unwrap();
        traces.push(support::trace_for(def, inst, revealed, decision));
    }
    assert_eq!(traces.len(), 200);

    let expect = support::tally(&traces);
    let rep = svc.report(&m.study_id).unwrap();
    for (c, t) in &expect {
        let r = &rep.conditions[c];
        let got = support::Tally {
            completed: r.completed,
            correct: r.correct,
            wrong: r.wrong,
            gave_up: r.gave_up,
            exhausted: r.undecided_exhausted,
            over_read: r.over_read,
            read: r.sentences_read,
            gold: (r.gold_average * r.completed as f64).round() as usize,
        };
        assert_eq!(&got, t, "{c:?}");
        assert_eq!(r.success_rate, t.correct as f64 / t.completed as f64);
        assert_eq!(r.undecided_rate, (t.gave_up + t.exhausted) as f64 / t.completed as f64);
    }
    let served: f64 = by_id.values().map(|i| imsr(i) as f64).sum::<f64>() / by_id.len() as f64;
    assert!((rep.gold_average - served).abs() < 1e-12);
}
