use std::fmt;
use std::str::FromStr;

use evirank_backends::BackendError;
use evirank_core::{ClaimInstance, Ranking};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Strategy {
    SimOneshot,
    SimIncremental,
    NliOneshot,
    RerankTournament,
    LlmOneshot,
    LlmIncremental,
}

impl Strategy {
    pub const ALL: [Strategy; 6] = [
        Strategy::SimOneshot,
        Strategy::SimIncremental,
        Strategy::NliOneshot,
        Strategy::RerankTournament,
        Strategy::LlmOneshot,
        Strategy::LlmIncremental,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::SimOneshot => "SIM_ONESHOT",
            Strategy::SimIncremental => "SIM_INCREMENTAL",
            Strategy::NliOneshot => "NLI_ONESHOT",
            Strategy::RerankTournament => "RERANK_TOURNAMENT",
            Strategy::LlmOneshot => "LLM_ONESHOT",
            Strategy::LlmIncremental => "LLM_INCREMENTAL",
        }
    }

    /// Row label used in report tables.
    pub fn display_name(self) -> &'static str {
        match self {
            Strategy::SimOneshot => "One-Shot Similarity",
            Strategy::SimIncremental => "Incremental Similarity",
            Strategy::NliOneshot => "One-Shot Fine-tuned NLI",
            Strategy::RerankTournament => "One-Shot Fine-tuned Reranker",
            Strategy::LlmOneshot => "One-Shot LLM",
            Strategy::LlmIncremental => "Incremental LLM",
        }
    }

    pub fn uses_generation(self) -> bool {
        matches!(self, Strategy::RerankTournament | Strategy::LlmOneshot | Strategy::LlmIncremental)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown strategy {s:?}"))
    }
}

/// Strategy parameters and backend bindings (backend names from the
/// backend configuration file).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyConfig {
    pub strategy: Strategy,
    #[serde(default = "default_top_k")]
    pub top_k_nli: usize,
    #[serde(default = "default_window")]
    pub window_size: usize,
    #[serde(default = "default_attempts")]
    pub max_attempts: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nli: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generation: Option<String>,
}

fn default_top_k() -> usize {
    2
}

fn default_window() -> usize {
    20
}

fn default_attempts() -> u32 {
    5
}

impl StrategyConfig {
    pub fn new(strategy: Strategy) -> Self {
        StrategyConfig {
            strategy,
            top_k_nli: default_top_k(),
            window_size: default_window(),
            max_attempts: default_attempts(),
            embedding: None,
            nli: None,
            generation: None,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.max_attempts < 1 {
            return Err("max_attempts must be at least 1".into());
        }
        if self.window_size < 2 {
            return Err("window_size must be at least 2".into());
        }
        if self.top_k_nli < 1 {
            return Err("top_k_nli must be at least 1".into());
        }
        let (needs, binding) = match self.strategy {
            Strategy::SimOneshot | Strategy::SimIncremental => ("embedding", &self.embedding),
            Strategy::NliOneshot => ("nli", &self.nli),
            _ => ("generation", &self.generation),
        };
        if binding.is_none() {
            return Err(format!("{} needs a `{needs}` backend", self.strategy));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RankerError {
    #[error("instance {instance_id}: {source}")]
    Backend {
        instance_id: String,
        #[source]
        source: BackendError,
    },
}

impl RankerError {
    pub fn backend(instance: &ClaimInstance, source: BackendError) -> Self {
        RankerError::Backend { instance_id: instance.id().to_string(), source }
    }

    pub fn instance_id(&self) -> &str {
        match self {
            RankerError::Backend { instance_id, .. } => instance_id,
        }
    }
}

/// A ranking strategy bound to its backends.
pub trait Ranker: Send + Sync {
    fn strategy(&self) -> Strategy;

    /// Always returns a complete permutation of the instance's candidates
    /// unless a backend fails outright.
    fn rank(&self, instance: &ClaimInstance) -> Result<Ranking, RankerError>;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in Strategy::ALL {
            assert_eq!(s.as_str().parse::<Strategy>().unwrap(), s);
            assert_eq!(serde_json::to_string(&s).unwrap(), format!("\"{}\"", s.as_str()));
        }
    }

    #[test]
    fn config_defaults_and_bounds() {
        let c: StrategyConfig = serde_json::from_str(r#"{"strategy":"LLM_ONESHOT","generation":"gpt"}"#).unwrap();
        assert_eq!((c.top_k_nli, c.window_size, c.max_attempts), (2, 20, 5));
        assert!(c.validate().is_ok());
        let mut bad = c.clone();
        bad.window_size = 1;
        assert!(bad.validate().is_err());
        bad = c.clone();
        bad.max_attempts = 0;
        assert!(bad.validate().is_err());
        assert!(StrategyConfig::new(Strategy::NliOneshot).validate().is_err());
    }
}
