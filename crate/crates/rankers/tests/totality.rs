mod support;

use evirank_core::model::check_permutation;
use evirank_rankers::{LlmIncrementalRanker, LlmOneshotRanker, LlmSettings, NliRanker, Ranker, SimilarityRanker, TournamentRanker};
use proptest::prelude::*;
use support::adversarial::{with_retries, ChaosEmbedder, ChaosGenerator, ChaosNli};
use support::instance;

fn texts(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("sentence {i} about topic {}", i % 3)).collect()
}

fn check(r: &dyn Ranker, n: usize, tag: &str) -> Result<(), TestCaseError> {
    let t = texts(n);
    let refs: Vec<&str> = t.iter().map(String::as_str).collect();
    let inst = instance(tag, "topic 1 claim", &refs, &[&[0]]);
    let ranking = r.rank(&inst).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert!(check_permutation(tag, &ranking.order, n).is_ok(), "{:?}", ranking.order);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn generation_strategies_always_permute(seed in any::<u64>(), n in 1usize..12, window in 2usize..6, attempts in 1u32..4) {
        let settings = LlmSettings { max_attempts: attempts, ..LlmSettings::default() };
        check(&LlmOneshotRanker::new(with_retries(ChaosGenerator::new(seed)), settings.clone()), n, "oneshot")?;
        check(&LlmIncrementalRanker::new(with_retries(ChaosGenerator::new(seed)), settings.clone()), n, "incr")?;
        check(&TournamentRanker::new(with_retries(ChaosGenerator::new(seed)), settings, window), n, "tour")?;
    }

    #[test]
    fn score_strategies_always_permute(seed in any::<u64>(), n in 1usize..12, k in 1usize..4) {
        check(&SimilarityRanker::oneshot(ChaosEmbedder::new(seed)), n, "sim")?;
        check(&SimilarityRanker::incremental(ChaosEmbedder::new(seed)), n, "simi")?;
        check(&NliRanker::new(ChaosNli::new(seed), k), n, "nli")?;
    }
}
