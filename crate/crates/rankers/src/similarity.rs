//! Embedding-similarity rankers.

use evirank_backends::{BackendError, EmbeddingBackend};
use evirank_core::vector::cosine;
use evirank_core::{ClaimInstance, Provenance, Ranking, Scalar};

use crate::order::rank_desc;
use crate::strategy::{Ranker, RankerError, Strategy};

/// Ranks by cosine similarity to the claim, either independently per
/// sentence or greedily against the mean of the already selected ones.
pub struct SimilarityRanker<E> {
    backend: E,
    incremental: bool,
}

impl<E: EmbeddingBackend> SimilarityRanker<E> {
    pub fn oneshot(backend: E) -> Self {
        SimilarityRanker { backend, incremental: false }
    }

    pub fn incremental(backend: E) -> Self {
        SimilarityRanker { backend, incremental: true }
    }

    /// Claim vector and one vector per candidate, from a single batch.
    fn embed(&self, instance: &ClaimInstance) -> Result<(Vec<E::Scalar>, Vec<Vec<E::Scalar>>), RankerError> {
        let mut texts = Vec::with_capacity(instance.candidate_count() + 1);
        texts.push(instance.claim().to_string());
        texts.extend(instance.texts().map(str::to_string));
        let mut vecs = self.backend.embed(&texts).map_err(|e| RankerError::backend(instance, e))?;
        if vecs.len() != texts.len() {
            let e = BackendError::Protocol(format!("asked for {} embeddings, got {}", texts.len(), vecs.len()));
            return Err(RankerError::backend(instance, e));
        }
        let claim = vecs.remove(0);
        Ok((claim, vecs))
    }
}

/// Greedy order maximizing cosine(claim, mean(selected + candidate)).
/// Ties go to the lower index; NaN scores never win.
pub fn incremental_order<T: Scalar>(claim: &[T], candidates: &[Vec<T>]) -> Vec<usize> {
    let n = candidates.len();
    let dim = claim.len();
    let mut selected = vec![false; n];
    let mut sum = vec![T::zero(); dim];
    let mut order = Vec::with_capacity(n);
    for step in 0..n {
        let count = T::from_usize_lossy(step + 1);
        let mut best: Option<(usize, T)> = None;
        for (i, emb) in candidates.iter().enumerate() {
            if selected[i] {
                continue;
            }
            let avg: Vec<T> = sum.iter().zip(emb).map(|(s, e)| (*s + *e) / count).collect();
            let score = cosine(claim, &avg);
            match best {
                None => best = Some((i, score)),
                Some((_, b)) if score > b || (b.is_nan() && !score.is_nan()) => best = Some((i, score)),
                _ => {}
            }
        }
        let (pick, _) = best.expect("an unselected candidate remains");
        selected[pick] = true;
        for (s, e) in sum.iter_mut().zip(&candidates[pick]) {
            *s = *s + *e;
        }
        order.push(pick);
    }
    order
}

impl<E: EmbeddingBackend> Ranker for SimilarityRanker<E> {
    fn strategy(&self) -> Strategy {
        if self.incremental {
            Strategy::SimIncremental
        } else {
            Strategy::SimOneshot
        }
    }

    fn rank(&self, instance: &ClaimInstance) -> Result<Ranking, RankerError> {
        let (claim, cands) = self.embed(instance)?;
        let order = if self.incremental {
            incremental_order(&claim, &cands)
        } else {
            let scores: Vec<E::Scalar> = cands.iter().map(|c| cosine(&claim, c)).collect();
            rank_desc(&scores)
        };
        let provenance = Provenance {
            strategy: self.strategy().as_str().to_string(),
            backends: vec![self.backend.identifier()],
            attempts: 1,
            fallback_applied: false,
            template_hash: None,
            unknown_ids: 0,
        };
        Ok(Ranking { instance_id: instance.id().to_string(), order, provenance })
    }
}
