//! End-to-end evaluation runs.
//!
//! Run directory layout:
//!
//! ```text
//! manifest.json                 inputs digest, strategies, template hashes
//! rankings/<STRATEGY>.ldrec     one ranking per instance, benchmark order
//! scores/<STRATEGY>.ldrec       one score per ranked instance
//! failures.ldrec                instances a strategy could not rank
//! report/                       rendered tables and curve data
//! ```
//!
//! Rankings are appended as each chunk of instances finishes, so an
//! interrupted run can be resumed; the file is rewritten in benchmark order
//! at the end. Nothing in the directory depends on timing or thread count.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use evirank_backends::{BackendsConfig, Registry};
use evirank_core::io::{append_records, read_records_lenient, write_records};
use evirank_core::metrics::score_instance;
use evirank_core::model::check_permutation;
use evirank_core::{read_benchmark, ClaimInstance, InstanceScore, Ranking, RankingRecord};
use evirank_rankers::{build_ranker, template_hash, PromptTemplates, Ranker, Strategy, StrategyConfig};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{io_err, render, sha256_hex, write_atomic, RunConfig, RunError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_digest: String,
    pub benchmark_sha256: String,
    pub backends_sha256: String,
    pub instances: usize,
    pub strategies: Vec<StrategyConfig>,
    pub template_hashes: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub strategy: String,
    pub instance_id: String,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StrategyOutcome {
    /// Rankings taken from a previous run.
    pub reused: usize,
    pub computed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub run_dir: PathBuf,
    pub instances: usize,
    pub strategies: BTreeMap<Strategy, StrategyOutcome>,
    pub report: render::RenderedReport,
}

impl RunOutcome {
    pub fn is_complete(&self) -> bool {
        self.strategies.values().all(|s| s.failed == 0)
    }
}

pub fn rankings_path(run_dir: &Path, s: Strategy) -> PathBuf {
    run_dir.join("rankings").join(format!("{}.ldrec", s.as_str()))
}

pub fn scores_path(run_dir: &Path, s: Strategy) -> PathBuf {
    run_dir.join("scores").join(format!("{}.ldrec", s.as_str()))
}

fn manifest_text(m: &RunManifest) -> String {
    let mut s = serde_json::to_string_pretty(m).expect("manifest serializes");
    s.push('\n');
    s
}

pub fn read_manifest(run_dir: &Path) -> Result<RunManifest, RunError> {
    let path = run_dir.join("manifest.json");
    let text = fs::read_to_string(&path).map_err(|_| RunError::NotARun(run_dir.to_path_buf()))?;
    serde_json::from_str(&text).map_err(|e| RunError::Input { path, message: e.to_string() })
}

/// Runs every configured strategy over the benchmark and renders the report.
pub fn run_eval(config: &RunConfig) -> Result<RunOutcome, RunError> {
    config.validate()?;
    let instances = read_benchmark(&config.benchmark)
        .map_err(|e| RunError::Input { path: config.benchmark.clone(), message: e.to_string() })?;
    let backends_cfg = BackendsConfig::load(&config.backends)?;
    let templates = match &config.templates {
        Some(dir) => PromptTemplates::load_dir(dir).map_err(io_err(dir))?,
        None => PromptTemplates::default(),
    };
    let templates = Arc::new(templates);
    let base = config.backends.parent().unwrap_or(Path::new("")).to_path_buf();
    let registry = Registry::new(backends_cfg, base);

    let manifest = build_manifest(config, &instances, &templates)?;
    let run_dir = &config.output;
    let manifest_path = run_dir.join("manifest.json");
    if config.resume {
        if let Ok(prev) = read_manifest(run_dir) {
            if prev.config_digest != manifest.config_digest {
                return Err(RunError::Resume(format!(
                    "{} was produced with different inputs (digest {}), refusing to resume",
                    run_dir.display(),
                    prev.config_digest
                )));
            }
        }
    }
    write_atomic(&manifest_path, &manifest_text(&manifest))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.parallelism)
        .build()
        .map_err(|e| RunError::Config(e.to_string()))?;

    let mut outcomes = BTreeMap::new();
    let mut failures = Vec::new();
    for sc in &config.strategies {
        let ranker = build_ranker(sc, &registry, templates.clone())?;
        let (outcome, mut fails) =
            pool.install(|| run_strategy(ranker.as_ref(), sc.strategy, &instances, run_dir, config.resume, config.parallelism))?;
        tracing::info!(
            strategy = sc.strategy.as_str(),
            reused = outcome.reused,
            computed = outcome.computed,
            failed = outcome.failed,
            "strategy finished"
        );
        failures.append(&mut fails);
        outcomes.insert(sc.strategy, outcome);
    }
    for (name, s) in registry.stats() {
        tracing::info!(backend = name.as_str(), requests = s.requests, upstream = s.upstream_calls, cache_hits = s.cache_hits, "backend usage");
    }
    write_records(&run_dir.join("failures.ldrec"), &failures)?;

    let report = render::render_run(run_dir)?;
    Ok(RunOutcome { run_dir: run_dir.clone(), instances: instances.len(), strategies: outcomes, report })
}

fn build_manifest(config: &RunConfig, instances: &[ClaimInstance], templates: &PromptTemplates) -> Result<RunManifest, RunError> {
    let bench = fs::read(&config.benchmark).map_err(io_err(&config.benchmark))?;
    let backends = fs::read(&config.backends).map_err(io_err(&config.backends))?;
    let mut strategies = config.strategies.clone();
    strategies.sort_by_key(|s| s.strategy);
    let template_hashes: BTreeMap<String, String> = strategies
        .iter()
        .filter_map(|s| template_hash(s.strategy, templates).map(|h| (s.strategy.as_str().to_string(), h)))
        .collect();
    let benchmark_sha256 = sha256_hex(&bench);
    let backends_sha256 = sha256_hex(&backends);
    let digest_input = serde_json::json!({
        "benchmark": benchmark_sha256,
        "backends": backends_sha256,
        "strategies": strategies,
        "templates": template_hashes,
    });
    Ok(RunManifest {
        config_digest: sha256_hex(digest_input.to_string().as_bytes()),
        benchmark_sha256,
        backends_sha256,
        instances: instances.len(),
        strategies,
        template_hashes,
    })
}

/// Reusable rankings from an earlier, possibly interrupted, run.
fn persisted(path: &Path, strategy: Strategy, instances: &[ClaimInstance]) -> Result<HashMap<String, RankingRecord>, RunError> {
    let by_id: HashMap<&str, &ClaimInstance> = instances.iter().map(|i| (i.id(), i)).collect();
    let records: Vec<RankingRecord> = read_records_lenient(path)?;
    let mut out = HashMap::new();
    for r in records {
        let Some(inst) = by_id.get(r.instance_id.as_str()) else { continue };
        if r.strategy != strategy.as_str() || check_permutation(&r.instance_id, &r.order, inst.candidate_count()).is_err() {
            continue;
        }
        out.entry(r.instance_id.clone()).or_insert(r);
    }
    Ok(out)
}

fn run_strategy(
    ranker: &dyn Ranker,
    strategy: Strategy,
    instances: &[ClaimInstance],
    run_dir: &Path,
    resume: bool,
    parallelism: usize,
) -> Result<(StrategyOutcome, Vec<FailureRecord>), RunError> {
    let rpath = rankings_path(run_dir, strategy);
    let mut done = if resume { persisted(&rpath, strategy, instances)? } else { HashMap::new() };
    let mut outcome = StrategyOutcome { reused: done.len(), ..Default::default() };

    // Start the file from the reusable records so a torn tail is dropped.
    let kept: Vec<&RankingRecord> = instances.iter().filter_map(|i| done.get(i.id())).collect();
    write_records(&rpath, kept.iter().copied())?;

    let pending: Vec<&ClaimInstance> = instances.iter().filter(|i| !done.contains_key(i.id())).collect();
    let mut failures = Vec::new();
    for chunk in pending.chunks(parallelism * 8) {
        let results: Vec<_> = chunk.par_iter().map(|inst| ranker.rank(inst)).collect();
        let mut fresh = Vec::new();
        for (inst, res) in chunk.iter().zip(results) {
            let res = res.map_err(|e| e.to_string()).and_then(|r| r.check(inst).map(|_| r).map_err(|e| e.to_string()));
            match res {
                Ok(r) => fresh.push(RankingRecord::from(&r)),
                Err(e) => {
                    tracing::warn!(strategy = strategy.as_str(), instance = inst.id(), error = %e, "ranking failed");
                    failures.push(FailureRecord {
                        strategy: strategy.as_str().to_string(),
                        instance_id: inst.id().to_string(),
                        error: e,
                    });
                }
            }
        }
        append_records(&rpath, &fresh)?;
        outcome.computed += fresh.len();
        for r in fresh {
            done.insert(r.instance_id.clone(), r);
        }
    }
    outcome.failed = failures.len();

    let ordered: Vec<&RankingRecord> = instances.iter().filter_map(|i| done.get(i.id())).collect();
    write_records(&rpath, ordered.iter().copied())?;

    let scores: Vec<InstanceScore> = instances
        .iter()
        .filter_map(|inst| done.get(inst.id()).map(|r| (inst, r)))
        .map(|(inst, r)| {
            score_instance(&Ranking::from(r.clone()), inst).map_err(|e| RunError::Input {
                path: rpath.clone(),
                message: e.to_string(),
            })
        })
        .collect::<Result<_, _>>()?;
    write_records(&scores_path(run_dir, strategy), &scores)?;
    Ok((outcome, failures))
}
