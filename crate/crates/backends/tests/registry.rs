use evirank_backends::{BackendError, BackendsConfig, DecodeParams, Registry};

const CONFIG: &str = r#"
[backends.lex]
kind = "EMBEDDING"
endpoint = "stub:lexical"
model_name = "lexical"
params = { vocabulary = ["red", "apple"] }

[backends.nli]
kind = "NLI"
endpoint = "stub:nli"
model_name = "table"
params = { table = "nli.ldrec", fallback = "uniform" }

[backends.llm]
kind = "GENERATION"
endpoint = "stub:overlap"
model_name = "overlap"
params = { temperature = 0.0, seed = 7 }

[backends.odd]
kind = "GENERATION"
endpoint = "stub:nonsense"
model_name = "x"
"#;

#[test]
fn builds_stub_backends_from_config() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("nli.ldrec"),
        "{\"premise\":\"p\",\"hypothesis\":\"h\",\"entails\":0.5,\"contradicts\":0.25,\"neutral\":0.25}\n",
    )
    .unwrap();
    let reg = Registry::new(BackendsConfig::parse(CONFIG).unwrap(), dir.path());

    let e = reg.embedding("lex").unwrap();
    assert_eq!(e.embed(&["apple".to_string()]).unwrap(), vec![vec![0.0, 1.0]]);

    let n = reg.nli("nli").unwrap();
    assert_eq!(n.nli_score("p", "h").unwrap().entails, 0.5);

    let g = reg.generation("llm", Some("hash".into())).unwrap();
    let out = g.generate("Statement: apple\n\nSentences:\n1. pear\n2. apple\n", &reg.decode_params("llm").unwrap()).unwrap();
    assert_eq!(out, "[2]");
    assert_eq!(reg.decode_params("llm").unwrap(), DecodeParams { seed: Some(7), ..DecodeParams::default() });

    assert!(matches!(reg.generation("odd", None), Err(BackendError::Config(_))));
    assert!(matches!(reg.nli("lex"), Err(BackendError::Config(_))));
    let names: Vec<String> = reg.stats().into_iter().map(|(n, _)| n).collect();
    assert_eq!(names, vec!["lex", "nli", "llm"]);
}

#[test]
fn missing_secret_is_a_config_error() {
    let cfg = BackendsConfig::parse(
        r#"
[backends.remote]
kind = "GENERATION"
endpoint = "https://example.invalid/v1/chat/completions"
model_name = "m"
auth_env = "EVIRANK_SURELY_UNSET_VARIABLE"
"#,
    )
    .unwrap();
    let reg = Registry::new(cfg, ".");
    assert!(matches!(reg.generation("remote", None), Err(BackendError::Config(_))));
}
