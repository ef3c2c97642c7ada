use evirank_core::Scalar;
use serde::{Deserialize, Serialize};

use crate::error::BackendError;

/// Sentence embedding service.
pub trait EmbeddingBackend: Send + Sync {
    type Scalar: Scalar;

    /// One vector per input text, all of the same dimension.
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<Self::Scalar>>, BackendError>;

    fn identifier(&self) -> String;
}

/// Label probabilities from an NLI model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NliScores<T> {
    pub entails: T,
    pub contradicts: T,
    pub neutral: T,
}

impl<T: Scalar> NliScores<T> {
    pub fn uniform() -> Self {
        let third = T::one() / T::from_usize_lossy(3);
        NliScores { entails: third, contradicts: third, neutral: third }
    }

    /// Rescales non-negative weights to sum to one. Weights that already do
    /// (within 1e-9) are kept exactly as given.
    pub fn normalized(entails: T, contradicts: T, neutral: T) -> Option<Self> {
        let parts = [entails, contradicts, neutral];
        if parts.iter().any(|p| !p.is_finite() || *p < T::zero()) {
            return None;
        }
        let sum = entails + contradicts + neutral;
        if sum <= T::zero() {
            return None;
        }
        if (sum - T::one()).abs() <= T::from_f64_lossy(1e-9) {
            return Some(NliScores { entails, contradicts, neutral });
        }
        Some(NliScores { entails: entails / sum, contradicts: contradicts / sum, neutral: neutral / sum })
    }

    pub fn sum(&self) -> T {
        self.entails + self.contradicts + self.neutral
    }
}

/// Natural language inference service scoring `premise` against
/// `hypothesis`.
pub trait NliBackend: Send + Sync {
    type Scalar: Scalar;

    fn nli_score(&self, premise: &str, hypothesis: &str) -> Result<NliScores<Self::Scalar>, BackendError>;

    fn identifier(&self) -> String;
}

/// Decoding parameters sent with every generation request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeParams {
    #[serde(default)]
    pub temperature: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_tokens: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top_p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Default for DecodeParams {
    fn default() -> Self {
        DecodeParams { temperature: 0.0, max_tokens: None, top_p: None, seed: None }
    }
}

impl DecodeParams {
    /// Greedy decoding; only such requests are cached.
    pub fn is_deterministic(&self) -> bool {
        self.temperature == 0.0
    }
}

/// Text generation (chat completion) service.
pub trait GenerationBackend: Send + Sync {
    fn generate(&self, prompt: &str, params: &DecodeParams) -> Result<String, BackendError>;

    fn identifier(&self) -> String;
}

macro_rules! forward {
    ($($ptr:ty),*) => {$(
        impl<B: EmbeddingBackend + ?Sized> EmbeddingBackend for $ptr {
            type Scalar = B::Scalar;
            fn embed(&self, texts: &[String]) -> Result<Vec<Vec<Self::Scalar>>, BackendError> {
                (**self).embed(texts)
            }
            fn identifier(&self) -> String {
                (**self).identifier()
            }
        }

        impl<B: NliBackend + ?Sized> NliBackend for $ptr {
            type Scalar = B::Scalar;
            fn nli_score(&self, premise: &str, hypothesis: &str) -> Result<NliScores<Self::Scalar>, BackendError> {
                (**self).nli_score(premise, hypothesis)
            }
            fn identifier(&self) -> String {
                (**self).identifier()
            }
        }

        impl<B: GenerationBackend + ?Sized> GenerationBackend for $ptr {
            fn generate(&self, prompt: &str, params: &DecodeParams) -> Result<String, BackendError> {
                (**self).generate(prompt, params)
            }
            fn identifier(&self) -> String {
                (**self).identifier()
            }
        }
    )*};
}

forward!(&B, Box<B>, std::sync::Arc<B>);
