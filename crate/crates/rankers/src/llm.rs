//! Generation-backed rankers: one-shot JSON ranking, incremental
//! selection and the tournament reranker.

use std::sync::Arc;

use evirank_backends::{DecodeParams, GenerationBackend};
use evirank_core::{ClaimInstance, Provenance, Ranking};

use crate::order::complete_with_reading_order;
use crate::parse::{arrow_order, bracketed_ids, json_key_order, strip_think, ParsedOrder};
use crate::prompt::{PromptTemplates, TemplateKind};
use crate::strategy::{Ranker, RankerError, Strategy};

/// Shared settings of the generation-backed rankers.
#[derive(Clone)]
pub struct LlmSettings {
    pub templates: Arc<PromptTemplates>,
    pub params: DecodeParams,
    /// Backend calls allowed per ranking request (or per incremental step).
    pub max_attempts: u32,
}

impl Default for LlmSettings {
    fn default() -> Self {
        LlmSettings { templates: Arc::new(PromptTemplates::default()), params: DecodeParams::default(), max_attempts: 5 }
    }
}

#[derive(Default)]
struct Tally {
    calls: u32,
    fallback: bool,
    unknown: u32,
}

impl Tally {
    fn provenance(self, strategy: Strategy, backend: String, template_hash: String) -> Provenance {
        Provenance {
            strategy: strategy.as_str().to_string(),
            backends: vec![backend],
            attempts: self.calls,
            fallback_applied: self.fallback,
            template_hash: Some(template_hash),
            unknown_ids: self.unknown,
        }
    }
}

fn call<G: GenerationBackend>(
    backend: &G,
    instance: &ClaimInstance,
    prompt: &str,
    params: &DecodeParams,
    tally: &mut Tally,
) -> Result<String, RankerError> {
    tally.calls += 1;
    backend.generate(prompt, params).map_err(|e| RankerError::backend(instance, e))
}

/// Asks for a full ranking as a JSON object keyed by sentence id. Retries
/// while the answer does not cover every sentence; after the last attempt
/// the sentences that attempt left out follow in reading order.
pub struct LlmOneshotRanker<G> {
    backend: G,
    settings: LlmSettings,
}

impl<G: GenerationBackend> LlmOneshotRanker<G> {
    pub fn new(backend: G, settings: LlmSettings) -> Self {
        assert!(settings.max_attempts >= 1, "max_attempts must be positive");
        LlmOneshotRanker { backend, settings }
    }
}

impl<G: GenerationBackend> Ranker for LlmOneshotRanker<G> {
    fn strategy(&self) -> Strategy {
        Strategy::LlmOneshot
    }

    fn rank(&self, instance: &ClaimInstance) -> Result<Ranking, RankerError> {
        let n = instance.candidate_count();
        let texts: Vec<&str> = instance.texts().collect();
        let prompt = self.settings.templates.llm_oneshot(instance.claim(), &texts);
        let mut tally = Tally::default();
        let mut last = ParsedOrder::default();
        for _ in 0..self.settings.max_attempts {
            let reply = call(&self.backend, instance, &prompt, &self.settings.params, &mut tally)?;
            last = json_key_order(&reply, n).unwrap_or_default();
            if last.is_complete(n) {
                break;
            }
            tracing::debug!(instance = instance.id(), got = last.order.len(), n, "incomplete ranking, asking again");
        }
        tally.unknown = last.unknown;
        tally.fallback = !last.is_complete(n);
        let order = complete_with_reading_order(last.order, n);
        let hash = self.settings.templates.hash(TemplateKind::LlmOneshot);
        let provenance = tally.provenance(self.strategy(), self.backend.identifier(), hash);
        Ok(Ranking { instance_id: instance.id().to_string(), order, provenance })
    }
}

/// Selects one sentence per call, conditioning later calls on the texts
/// already selected. A step that yields no new valid id within
/// `max_attempts` calls ends the ranking: the rest follow in reading order.
pub struct LlmIncrementalRanker<G> {
    backend: G,
    settings: LlmSettings,
}

impl<G: GenerationBackend> LlmIncrementalRanker<G> {
    pub fn new(backend: G, settings: LlmSettings) -> Self {
        assert!(settings.max_attempts >= 1, "max_attempts must be positive");
        LlmIncrementalRanker { backend, settings }
    }
}

impl<G: GenerationBackend> Ranker for LlmIncrementalRanker<G> {
    fn strategy(&self) -> Strategy {
        Strategy::LlmIncremental
    }

    fn rank(&self, instance: &ClaimInstance) -> Result<Ranking, RankerError> {
        let n = instance.candidate_count();
        let texts: Vec<&str> = instance.texts().collect();
        let t = &self.settings.templates;
        let mut tally = Tally::default();
        let mut selected = vec![false; n];
        let mut order: Vec<usize> = Vec::with_capacity(n);
        'steps: while order.len() < n {
            let prompt = if order.is_empty() {
                t.incremental_first(instance.claim(), &texts)
            } else {
                let used: Vec<&str> = order.iter().map(|i| texts[*i]).collect();
                t.incremental_next(instance.claim(), &texts, &used)
            };
            for _ in 0..self.settings.max_attempts {
                let reply = call(&self.backend, instance, &prompt, &self.settings.params, &mut tally)?;
                let ids = bracketed_ids(&strip_think(&reply));
                let fresh = ids.iter().map(|k| k.wrapping_sub(1)).find(|i| *i < n && !selected[*i]);
                match fresh {
                    Some(i) => {
                        selected[i] = true;
                        order.push(i);
                        continue 'steps;
                    }
                    None => tally.unknown += ids.iter().filter(|k| **k == 0 || **k > n).count() as u32,
                }
            }
            tracing::debug!(instance = instance.id(), step = order.len() + 1, "no valid selection, falling back");
            tally.fallback = true;
            break;
        }
        let order = complete_with_reading_order(order, n);
        let hash = t.combined_hash(&[TemplateKind::IncrementalFirst, TemplateKind::IncrementalNext]);
        let provenance = tally.provenance(self.strategy(), self.backend.identifier(), hash);
        Ok(Ranking { instance_id: instance.id().to_string(), order, provenance })
    }
}

/// Listwise reranker limited to `window` sentences per call.
///
/// With at most `window` candidates one call ranks everything. Otherwise
/// the window starts as the first `window` candidates; for each further
/// candidate the window is ranked, its last member evicted and the newcomer
/// appended. The final ranking of the surviving window is the head of the
/// result; evicted candidates follow, most recently evicted first.
pub struct TournamentRanker<G> {
    backend: G,
    settings: LlmSettings,
    window: usize,
}

impl<G: GenerationBackend> TournamentRanker<G> {
    pub fn new(backend: G, settings: LlmSettings, window: usize) -> Self {
        assert!(window >= 2, "window must hold at least two sentences");
        assert!(settings.max_attempts >= 1, "max_attempts must be positive");
        TournamentRanker { backend, settings, window }
    }

    /// Ranks `members` (candidate indices) with one listwise exchange,
    /// re-asking while the answer is incomplete. Local ids are 1-based
    /// positions in `members`.
    fn listwise(&self, instance: &ClaimInstance, members: &[usize], tally: &mut Tally) -> Result<Vec<usize>, RankerError> {
        let texts: Vec<&str> = members.iter().map(|i| instance.candidates()[*i].text.as_str()).collect();
        let prompt = self.settings.templates.tournament(instance.claim(), &texts);
        let m = members.len();
        let mut last = ParsedOrder::default();
        for _ in 0..self.settings.max_attempts {
            let reply = call(&self.backend, instance, &prompt, &self.settings.params, tally)?;
            last = arrow_order(&reply, m);
            if last.is_complete(m) {
                break;
            }
        }
        tally.unknown += last.unknown;
        if !last.is_complete(m) {
            tally.fallback = true;
        }
        // Members missing from the answer follow in reading order.
        let mut local = last.order;
        let mut missing: Vec<usize> = (0..m).filter(|p| !local.contains(p)).collect();
        missing.sort_by_key(|p| members[*p]);
        local.extend(missing);
        Ok(local.into_iter().map(|p| members[p]).collect())
    }
}

impl<G: GenerationBackend> Ranker for TournamentRanker<G> {
    fn strategy(&self) -> Strategy {
        Strategy::RerankTournament
    }

    fn rank(&self, instance: &ClaimInstance) -> Result<Ranking, RankerError> {
        let n = instance.candidate_count();
        let mut tally = Tally::default();
        let w = self.window.min(n);
        let mut window: Vec<usize> = (0..w).collect();
        let mut evicted = Vec::new();
        for newcomer in w..n {
            let mut ranked = self.listwise(instance, &window, &mut tally)?;
            evicted.push(ranked.pop().expect("window is never empty"));
            ranked.push(newcomer);
            window = ranked;
        }
        let mut order = self.listwise(instance, &window, &mut tally)?;
        order.extend(evicted.into_iter().rev());
        let hash = self.settings.templates.hash(TemplateKind::Tournament);
        let provenance = tally.provenance(self.strategy(), self.backend.identifier(), hash);
        Ok(Ranking { instance_id: instance.id().to_string(), order, provenance })
    }
}
