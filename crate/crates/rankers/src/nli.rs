//! Retrieve-and-rerank over NLI scores.
//!
//! 1. Score every candidate (premise) against the claim (hypothesis).
//! 2. Take the top-k candidates by entailment and by contradiction.
//! 3. Build two texts: entail-top-k then contradict-top-k, and the reverse,
//!    each joined with a single space.
//! 4. Score both texts against the claim and average each label's
//!    probability over them.
//! 5. Keep the label with the higher average (entailment wins ties;
//!    neutral never competes).
//! 6. Rank all candidates by their own score under that label.

use evirank_backends::{NliBackend, NliScores};
use evirank_core::{ClaimInstance, Provenance, Ranking, Scalar};
use serde::{Deserialize, Serialize};

use crate::order::rank_desc;
use crate::strategy::{Ranker, RankerError, Strategy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum NliLabel {
    Entails,
    Contradicts,
}

/// Intermediate results of one NLI ranking.
#[derive(Debug, Clone, PartialEq)]
pub struct NliDecision<T> {
    pub label: NliLabel,
    pub entail_top: Vec<usize>,
    pub contradict_top: Vec<usize>,
    pub entail_first_text: String,
    pub contradict_first_text: String,
    pub mean_entails: T,
    pub mean_contradicts: T,
}

pub struct NliRanker<N> {
    backend: N,
    top_k: usize,
}

impl<N: NliBackend> NliRanker<N> {
    pub fn new(backend: N, top_k: usize) -> Self {
        assert!(top_k >= 1, "top_k must be positive");
        NliRanker { backend, top_k }
    }

    /// The ranking together with the label decision behind it.
    pub fn rank_detailed(&self, instance: &ClaimInstance) -> Result<(Ranking, NliDecision<N::Scalar>), RankerError> {
        let claim = instance.claim();
        let err = |e| RankerError::backend(instance, e);
        let scores: Vec<NliScores<N::Scalar>> = instance
            .texts()
            .map(|t| self.backend.nli_score(t, claim))
            .collect::<Result<_, _>>()
            .map_err(err)?;
        let entails: Vec<N::Scalar> = scores.iter().map(|s| s.entails).collect();
        let contradicts: Vec<N::Scalar> = scores.iter().map(|s| s.contradicts).collect();
        let entail_top: Vec<usize> = rank_desc(&entails).into_iter().take(self.top_k).collect();
        let contradict_top: Vec<usize> = rank_desc(&contradicts).into_iter().take(self.top_k).collect();

        let join = |first: &[usize], second: &[usize]| -> String {
            first.iter().chain(second).filter_map(|i| instance.sentence(*i)).map(|s| s.text.as_str()).collect::<Vec<_>>().join(" ")
        };
        let entail_first_text = join(&entail_top, &contradict_top);
        let contradict_first_text = join(&contradict_top, &entail_top);

        let mut sum_e = N::Scalar::from_usize_lossy(0);
        let mut sum_c = N::Scalar::from_usize_lossy(0);
        let mut used = 0usize;
        let mut calls = scores.len() as u32;
        for text in [&entail_first_text, &contradict_first_text] {
            // An empty text has nothing to score; the other one stands alone.
            if text.is_empty() {
                continue;
            }
            let s = self.backend.nli_score(text, claim).map_err(err)?;
            calls += 1;
            sum_e = sum_e + s.entails;
            sum_c = sum_c + s.contradicts;
            used += 1;
        }
        let denom = N::Scalar::from_usize_lossy(used.max(1));
        let (mean_entails, mean_contradicts) = (sum_e / denom, sum_c / denom);
        let label = if mean_contradicts > mean_entails { NliLabel::Contradicts } else { NliLabel::Entails };
        let order = match label {
            NliLabel::Entails => rank_desc(&entails),
            NliLabel::Contradicts => rank_desc(&contradicts),
        };
        let ranking = Ranking {
            instance_id: instance.id().to_string(),
            order,
            provenance: Provenance {
                strategy: Strategy::NliOneshot.as_str().to_string(),
                backends: vec![self.backend.identifier()],
                attempts: calls,
                fallback_applied: false,
                template_hash: None,
                unknown_ids: 0,
            },
        };
        let decision = NliDecision {
            label,
            entail_top,
            contradict_top,
            entail_first_text,
            contradict_first_text,
            mean_entails,
            mean_contradicts,
        };
        Ok((ranking, decision))
    }
}

impl<N: NliBackend> Ranker for NliRanker<N> {
    fn strategy(&self) -> Strategy {
        Strategy::NliOneshot
    }

    fn rank(&self, instance: &ClaimInstance) -> Result<Ranking, RankerError> {
        self.rank_detailed(instance).map(|(r, _)| r)
    }
}
