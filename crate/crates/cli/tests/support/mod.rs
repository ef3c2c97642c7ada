#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use evirank_cli::RunConfig;
use evirank_core::{validate_instance, ClaimInstance, RawInstance, RawSentence};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

/// The stub-backed six-strategy config, writing to `out`.
pub fn config(out: &Path) -> RunConfig {
    let mut c = RunConfig::load(&fixtures().join("run.toml")).unwrap();
    c.output = out.to_path_buf();
    c
}

pub fn instance(id: &str, n: usize, gold: &[&[usize]]) -> ClaimInstance {
    validate_instance(RawInstance {
        id: id.into(),
        claim: format!("claim {id}"),
        candidates: (0..n).map(|i| RawSentence::Text(format!("sentence {i} of {id}"))).collect(),
        gold_sets: gold.iter().map(|g| g.iter().map(|&i| i as i64).collect()).collect(),
        verdict: "SUPPORTED".into(),
        source: "FEVER".into(),
        metadata: BTreeMap::new(),
    })
    .unwrap()
}

/// Every file under `dir` with its bytes, keyed by relative path.
pub fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.insert(rel, fs::read(&p).unwrap());
            }
        }
    }
    out
}
