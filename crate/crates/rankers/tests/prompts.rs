mod support;

use evirank_backends::stub::ScriptedGenerator;
use evirank_core::model::RawInstance;
use evirank_core::{validate_instance, ClaimInstance};
use evirank_rankers::{LlmIncrementalRanker, LlmOneshotRanker, LlmSettings, PromptTemplates, Ranker, TournamentRanker};
use support::golden;

fn fixture() -> ClaimInstance {
    let text = std::fs::read_to_string(format!("{}/tests/fixtures/georgia_tech.json", env!("CARGO_MANIFEST_DIR"))).unwrap();
    let raw: RawInstance = serde_json::from_str(&text).unwrap();
    validate_instance(raw).unwrap()
}

#[test]
fn oneshot_prompt_matches_golden() {
    let g = ScriptedGenerator::new([r#"{"1": "a", "4": "b", "2": "c", "3": "d"}"#]);
    let r = LlmOneshotRanker::new(&g, LlmSettings::default()).rank(&fixture()).unwrap();
    assert_eq!(r.order, vec![0, 3, 1, 2]);
    assert_eq!(g.prompts(), vec![golden("prompt_llm_oneshot.txt")]);
}

#[test]
fn incremental_prompts_match_golden() {
    let g = ScriptedGenerator::new(["[1]", "[4]", "[2]", "[3]"]);
    let r = LlmIncrementalRanker::new(&g, LlmSettings::default()).rank(&fixture()).unwrap();
    assert_eq!(r.order, vec![0, 3, 1, 2]);
    let prompts = g.prompts();
    assert_eq!(prompts[0], golden("prompt_incremental_first.txt"));
    assert_eq!(prompts[1], golden("prompt_incremental_next.txt"));
    assert!(prompts[3].ends_with(
        "Used sentences:\n- The 1981 Georgia Tech Yellow Jackets football team represented the Georgia Institute of Technology during the 1981 NCAA Division I-A football season.\n- The Yellow Jackets were lead by head coach Bill Lewis through eight games, being fired after going 1-7.\n- The Yellow Jackets were led by second-year head coach Bill Curry, and played their home games at Grant Field in Atlanta, Georgia.\n"
    ));
}

#[test]
fn tournament_prompt_matches_golden() {
    let g = ScriptedGenerator::new(["<think> x </think> <answer> [1] > [4] > [2] > [3] </answer>"]);
    let r = TournamentRanker::new(&g, LlmSettings::default(), 20).rank(&fixture()).unwrap();
    assert_eq!(r.order, vec![0, 3, 1, 2]);
    assert_eq!(g.prompts(), vec![golden("prompt_tournament.txt")]);
}

#[test]
fn templates_can_be_overridden_from_a_directory() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("tournament.txt"), "{n}|{claim}|{numbered_sentences}").unwrap();
    let t = PromptTemplates::load_dir(dir.path()).unwrap();
    assert_eq!(t.tournament("c", &["a", "b"]), "2|c|1. a\n2. b");
    assert_eq!(t.llm_oneshot("c", &["a"]), PromptTemplates::default().llm_oneshot("c", &["a"]));
    let default = PromptTemplates::default();
    assert_ne!(
        t.hash(evirank_rankers::TemplateKind::Tournament),
        default.hash(evirank_rankers::TemplateKind::Tournament)
    );
}

#[test]
fn provenance_carries_template_hash() {
    let g = ScriptedGenerator::new(["[1]"]).repeat_last();
    let one = support::instance("x", "c", &["a"], &[&[0]]);
    let r = LlmIncrementalRanker::new(&g, LlmSettings::default()).rank(&one).unwrap();
    let t = PromptTemplates::default();
    let expected = t.combined_hash(&[evirank_rankers::TemplateKind::IncrementalFirst, evirank_rankers::TemplateKind::IncrementalNext]);
    assert_eq!(r.provenance.template_hash.as_deref(), Some(expected.as_str()));
}
