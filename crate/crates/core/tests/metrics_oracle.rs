mod support;

use std::collections::BTreeMap;

use evirank_core::metrics::{covering_gold_set, is_sufficient, ndcg, ReciprocalRank};
use evirank_core::{imsr, msr, score_instance, success, validate_instance, Provenance, Ranking, RawInstance, RawSentence};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::{gen, oracle};

fn ranking(id: &str, order: Vec<usize>) -> Ranking {
    Ranking { instance_id: id.to_string(), order, provenance: Provenance::default() }
}

/// The five-sentence example: sentences 1+3 or 3+5 (1-based) are each
/// sufficient, and reading in order needs three sentences.
fn telos() -> evirank_core::ClaimInstance {
    validate_instance(RawInstance {
        id: "telos".into(),
        claim: "Telos was an album by a band who formed in New York City.".into(),
        candidates: vec![
            RawSentence::Text("Telos is the second studio album by the band Forevermore.".into()),
            RawSentence::Text("The album was recorded over the summer.".into()),
            RawSentence::Text("Forevermore is a band formed in Indianapolis, Indiana.".into()),
            RawSentence::Text("The band toured extensively after the release.".into()),
            RawSentence::Text("Forevermore released Telos through Bullet Tooth Records.".into()),
        ],
        gold_sets: vec![vec![0, 2], vec![2, 4]],
        verdict: "REFUTED".into(),
        source: "OTHER".into(),
        metadata: BTreeMap::new(),
    })
    .unwrap()
}

#[test]
fn telos_example_values() {
    let inst = telos();
    let r = ranking("telos", vec![0, 1, 2, 3, 4]);
    assert!(is_sufficient([0, 1, 2], &inst));
    assert_eq!(msr(&r, &inst), 3);
    assert_eq!(imsr(&inst), 2);
    let rr = ReciprocalRank::from_ranks(3, 2);
    assert_eq!(rr.value::<f64>(), 0.5);
    assert_eq!(rr.extra_reading, 1);
    assert!(!success(&r, &inst));
}

#[test]
fn msr_matches_prefix_scan_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for t in 0..300 {
        let inst = gen::instance(&mut rng, &format!("r{t}"), 8, 3);
        let order = gen::permutation(&mut rng, 8);
        assert_eq!(msr(&order, &inst), oracle::msr_scan(&order, &inst));
    }
}

#[test]
fn all_metrics_match_brute_force_small() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for t in 0..300 {
        let n = 1 + t % 6;
        let inst = gen::instance(&mut rng, "b", n, 3);
        let order = gen::permutation(&mut rng, n);
        let want = oracle::score(&order, &inst);
        let got = score_instance::<f64>(&ranking("b", order.clone()), &inst).unwrap();
        assert_eq!(got.msr, want.msr);
        assert_eq!(got.imsr, want.imsr);
        assert_eq!(got.sr, want.sr);
        assert!((got.rr - want.rr).abs() <= 1e-9);
        assert!((got.ndcg - want.ndcg).abs() <= 1e-9, "{} vs {}", got.ndcg, want.ndcg);
        assert_eq!(covering_gold_set(&order, &inst).as_set(), &want.g);
    }
}

#[test]
fn ndcg_is_one_exactly_when_msr_equals_g_size() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let n = rng_n(&mut rng);
        let inst = gen::instance(&mut rng, "p", n, 3);
        for order in oracle::permutations(n) {
            let v: f64 = ndcg(&order, &inst);
            let g = covering_gold_set(&order, &inst).len();
            assert_eq!((v - 1.0).abs() < 1e-12, msr(&order, &inst) == g);
        }
    }
}

fn rng_n(rng: &mut ChaCha8Rng) -> usize {
    use rand::Rng;
    rng.gen_range(1..=5)
}
