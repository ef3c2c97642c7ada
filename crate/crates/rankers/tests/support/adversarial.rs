//! Backends that misbehave in seeded, reproducible ways.

use std::sync::{Arc, Mutex};

use evirank_backends::stub::{parse_prompt, OverlapGenerator};
use evirank_backends::{
    BackendError, BackendKind, DecodeParams, EmbeddingBackend, Fingerprint, GenerationBackend, Managed, ManualClock,
    NliBackend, NliScores, RetryPolicy,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Transient failures in a row never exceed this, so a retry budget of
/// this size always gets through.
pub const MAX_CONSECUTIVE_FAILURES: u32 = 3;

pub struct ChaosGenerator {
    rng: Mutex<ChaCha8Rng>,
    failures_in_row: Mutex<u32>,
}

impl ChaosGenerator {
    pub fn new(seed: u64) -> Self {
        ChaosGenerator { rng: Mutex::new(ChaCha8Rng::seed_from_u64(seed)), failures_in_row: Mutex::new(0) }
    }

    fn random_ids(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
        let len = rng.gen_range(0..=n + 2);
        (0..len).map(|_| rng.gen_range(0..=n + 2)).collect()
    }
}

impl GenerationBackend for ChaosGenerator {
    fn generate(&self, prompt: &str, params: &DecodeParams) -> Result<String, BackendError> {
        let mut rng = self.rng.lock().unwrap();
        let n = parse_prompt(prompt).sentences.len();
        let mut fails = self.failures_in_row.lock().unwrap();
        let kind = rng.gen_range(0..10);
        if kind == 0 && *fails < MAX_CONSECUTIVE_FAILURES {
            *fails += 1;
            return Err(BackendError::Transient("simulated timeout".into()));
        }
        *fails = 0;
        let out = match kind {
            1 => {
                let ids = Self::random_ids(&mut rng, n);
                let body: Vec<String> = ids.iter().map(|i| format!("\"{i}\": \"s\"")).collect();
                format!("{{{}}}", body.join(", "))
            }
            2 => ["", "I cannot rank these.", "{\"1\": ", "}{", "[]", "<answer></answer>", "null", "[[1]]"]
                .choose(&mut *rng)
                .unwrap()
                .to_string(),
            3 => format!("[{}]", rng.gen_range(0..=n + 2)),
            4 => {
                let ids = Self::random_ids(&mut rng, n);
                let body: Vec<String> = ids.iter().map(|i| format!("[{i}]")).collect();
                format!("<think>[1] > [2]</think><answer>{}</answer>", body.join(" > "))
            }
            5 => "[1]".to_string(),
            6 => {
                let mut ids: Vec<usize> = (1..=n).collect();
                ids.shuffle(&mut *rng);
                let body: Vec<String> = ids.iter().map(|i| format!("\"{i}\": \"x\"")).collect();
                format!("```json\n{{{}}}\n```", body.join(", "))
            }
            7 => "<think>unterminated [2] reasoning".to_string(),
            _ => OverlapGenerator.generate(prompt, params)?,
        };
        Ok(out)
    }

    fn identifier(&self) -> String {
        "chaos".into()
    }
}

/// Retry wrapper with a budget that absorbs every simulated timeout.
pub fn with_retries<G>(g: G) -> Managed<G> {
    Managed::new(g, "chaos", Fingerprint { kind: BackendKind::Generation, model_name: "chaos".into(), template_hash: None })
        .with_clock(Arc::new(ManualClock::new()))
        .with_retry(RetryPolicy { max_retries: MAX_CONSECUTIVE_FAILURES, ..RetryPolicy::default() })
}

/// Vectors of a fixed dimension with NaN, infinities, zeros and ties mixed in.
pub struct ChaosEmbedder {
    rng: Mutex<ChaCha8Rng>,
    dim: usize,
}

impl ChaosEmbedder {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = rng.gen_range(1..6);
        ChaosEmbedder { rng: Mutex::new(rng), dim }
    }
}

fn chaos_value(rng: &mut ChaCha8Rng) -> f64 {
    match rng.gen_range(0..8) {
        0 => f64::NAN,
        1 => f64::INFINITY,
        2 => f64::NEG_INFINITY,
        3 => 0.0,
        4 => 1.0,
        _ => rng.gen_range(-1.0..1.0),
    }
}

impl EmbeddingBackend for ChaosEmbedder {
    type Scalar = f64;

    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, BackendError> {
        let mut rng = self.rng.lock().unwrap();
        Ok(texts.iter().map(|_| (0..self.dim).map(|_| chaos_value(&mut rng)).collect()).collect())
    }

    fn identifier(&self) -> String {
        "chaos-embedding".into()
    }
}

pub struct ChaosNli {
    rng: Mutex<ChaCha8Rng>,
}

impl ChaosNli {
    pub fn new(seed: u64) -> Self {
        ChaosNli { rng: Mutex::new(ChaCha8Rng::seed_from_u64(seed)) }
    }
}

impl NliBackend for ChaosNli {
    type Scalar = f64;

    fn nli_score(&self, _premise: &str, _hypothesis: &str) -> Result<NliScores<f64>, BackendError> {
        let mut rng = self.rng.lock().unwrap();
        Ok(NliScores { entails: chaos_value(&mut rng), contradicts: chaos_value(&mut rng), neutral: chaos_value(&mut rng) })
    }

    fn identifier(&self) -> String {
        "chaos-nli".into()
    }
}
