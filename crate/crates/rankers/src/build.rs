use std::sync::Arc;

use evirank_backends::{BackendError, Registry};

use crate::llm::{LlmIncrementalRanker, LlmOneshotRanker, LlmSettings, TournamentRanker};
use crate::nli::NliRanker;
use crate::prompt::{PromptTemplates, TemplateKind};
use crate::similarity::SimilarityRanker;
use crate::strategy::{Ranker, Strategy, StrategyConfig};

/// Template hash a strategy's generation backend is keyed by.
pub fn template_hash(strategy: Strategy, templates: &PromptTemplates) -> Option<String> {
    match strategy {
        Strategy::LlmOneshot => Some(templates.hash(TemplateKind::LlmOneshot)),
        Strategy::LlmIncremental => {
            Some(templates.combined_hash(&[TemplateKind::IncrementalFirst, TemplateKind::IncrementalNext]))
        }
        Strategy::RerankTournament => Some(templates.hash(TemplateKind::Tournament)),
        _ => None,
    }
}

/// Instantiates the ranker a config entry describes.
pub fn build_ranker(
    config: &StrategyConfig,
    registry: &Registry,
    templates: Arc<PromptTemplates>,
) -> Result<Box<dyn Ranker>, BackendError> {
    config.validate().map_err(BackendError::Config)?;
    let need = |b: &Option<String>| b.clone().expect("validated binding");
    let ranker: Box<dyn Ranker> = match config.strategy {
        Strategy::SimOneshot => Box::new(SimilarityRanker::oneshot(registry.embedding(&need(&config.embedding))?)),
        Strategy::SimIncremental => {
            Box::new(SimilarityRanker::incremental(registry.embedding(&need(&config.embedding))?))
        }
        Strategy::NliOneshot => Box::new(NliRanker::new(registry.nli(&need(&config.nli))?, config.top_k_nli)),
        s => {
            let name = need(&config.generation);
            let backend = registry.generation(&name, template_hash(s, &templates))?;
            let settings =
                LlmSettings { templates, params: registry.decode_params(&name)?, max_attempts: config.max_attempts };
            match s {
                Strategy::LlmOneshot => Box::new(LlmOneshotRanker::new(backend, settings)),
                Strategy::LlmIncremental => Box::new(LlmIncrementalRanker::new(backend, settings)),
                _ => Box::new(TournamentRanker::new(backend, settings, config.window_size)),
            }
        }
    };
    Ok(ranker)
}
