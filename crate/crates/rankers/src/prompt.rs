//! Prompt templates and rendering.

use std::fs;
use std::io;
use std::path::Path;

use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TemplateKind {
    LlmOneshot,
    IncrementalFirst,
    IncrementalNext,
    Tournament,
}

impl TemplateKind {
    pub const ALL: [TemplateKind; 4] =
        [TemplateKind::LlmOneshot, TemplateKind::IncrementalFirst, TemplateKind::IncrementalNext, TemplateKind::Tournament];

    pub fn file_name(self) -> &'static str {
        match self {
            TemplateKind::LlmOneshot => "llm_oneshot.txt",
            TemplateKind::IncrementalFirst => "llm_incremental_first.txt",
            TemplateKind::IncrementalNext => "llm_incremental_next.txt",
            TemplateKind::Tournament => "tournament.txt",
        }
    }

    fn builtin(self) -> &'static str {
        match self {
            TemplateKind::LlmOneshot => include_str!("../templates/llm_oneshot.txt"),
            TemplateKind::IncrementalFirst => include_str!("../templates/llm_incremental_first.txt"),
            TemplateKind::IncrementalNext => include_str!("../templates/llm_incremental_next.txt"),
            TemplateKind::Tournament => include_str!("../templates/tournament.txt"),
        }
    }
}

/// The four prompt templates in use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplates {
    texts: [String; 4],
}

impl Default for PromptTemplates {
    fn default() -> Self {
        PromptTemplates { texts: TemplateKind::ALL.map(|k| k.builtin().to_string()) }
    }
}

fn slot(kind: TemplateKind) -> usize {
    TemplateKind::ALL.iter().position(|k| *k == kind).expect("listed")
}

impl PromptTemplates {
    /// Built-in templates overridden by whichever files exist in `dir`.
    pub fn load_dir(dir: &Path) -> io::Result<Self> {
        let mut t = Self::default();
        for kind in TemplateKind::ALL {
            let path = dir.join(kind.file_name());
            match fs::read_to_string(&path) {
                Ok(text) => t.texts[slot(kind)] = text,
                Err(e) if e.kind() == io::ErrorKind::NotFound => {}
                Err(e) => return Err(io::Error::new(e.kind(), format!("{}: {e}", path.display()))),
            }
        }
        Ok(t)
    }

    pub fn get(&self, kind: TemplateKind) -> &str {
        &self.texts[slot(kind)]
    }

    pub fn set(&mut self, kind: TemplateKind, text: impl Into<String>) {
        self.texts[slot(kind)] = text.into();
    }

    /// SHA-256 of one template's bytes, hex encoded.
    pub fn hash(&self, kind: TemplateKind) -> String {
        hex::encode(Sha256::digest(self.get(kind).as_bytes()))
    }

    /// Combined hash over several templates, for strategies using more than
    /// one.
    pub fn combined_hash(&self, kinds: &[TemplateKind]) -> String {
        if let [one] = kinds {
            return self.hash(*one);
        }
        let mut h = Sha256::new();
        for k in kinds {
            h.update(k.file_name().as_bytes());
            h.update(b"\0");
            h.update(self.hash(*k).as_bytes());
            h.update(b"\n");
        }
        hex::encode(h.finalize())
    }
}

/// Keeps each sentence on one prompt line.
pub fn one_line(text: &str) -> String {
    if text.contains(['\n', '\r']) {
        text.split(['\n', '\r']).filter(|s| !s.is_empty()).collect::<Vec<_>>().join(" ")
    } else {
        text.to_string()
    }
}

/// `1. first\n2. second` (no trailing newline).
pub fn numbered<S: AsRef<str>>(sentences: &[S]) -> String {
    sentences
        .iter()
        .enumerate()
        .map(|(i, s)| format!("{}. {}", i + 1, one_line(s.as_ref())))
        .collect::<Vec<_>>()
        .join("\n")
}

/// `- first\n- second` (no trailing newline).
pub fn bulleted<S: AsRef<str>>(sentences: &[S]) -> String {
    sentences.iter().map(|s| format!("- {}", one_line(s.as_ref()))).collect::<Vec<_>>().join("\n")
}

/// Replaces `{name}` placeholders in one left-to-right pass. Unknown
/// placeholders and other braces are copied verbatim, and substituted values
/// are never scanned again.
pub fn render(template: &str, values: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len() + values.iter().map(|(_, v)| v.len()).sum::<usize>());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let hit = values.iter().find(|(name, _)| {
            after.strip_prefix(name).is_some_and(|tail| tail.starts_with('}'))
        });
        match hit {
            Some((name, value)) => {
                out.push_str(value);
                rest = &after[name.len() + 1..];
            }
            None => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

impl PromptTemplates {
    pub fn llm_oneshot(&self, claim: &str, sentences: &[&str]) -> String {
        let n = sentences.len().to_string();
        render(
            self.get(TemplateKind::LlmOneshot),
            &[("claim", &one_line(claim)), ("numbered_sentences", &numbered(sentences)), ("n", &n)],
        )
    }

    pub fn incremental_first(&self, claim: &str, sentences: &[&str]) -> String {
        let n = sentences.len().to_string();
        render(
            self.get(TemplateKind::IncrementalFirst),
            &[("claim", &one_line(claim)), ("numbered_sentences", &numbered(sentences)), ("n", &n)],
        )
    }

    pub fn incremental_next(&self, claim: &str, sentences: &[&str], used: &[&str]) -> String {
        let n = sentences.len().to_string();
        render(
            self.get(TemplateKind::IncrementalNext),
            &[
                ("claim", &one_line(claim)),
                ("numbered_sentences", &numbered(sentences)),
                ("used_sentences", &bulleted(used)),
                ("n", &n),
            ],
        )
    }

    pub fn tournament(&self, claim: &str, sentences: &[&str]) -> String {
        let n = sentences.len().to_string();
        render(
            self.get(TemplateKind::Tournament),
            &[("claim", &one_line(claim)), ("numbered_sentences", &numbered(sentences)), ("n", &n)],
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_is_single_pass() {
        let out = render("{a} and {b} {c} {", &[("a", "{b}"), ("b", "B")]);
        assert_eq!(out, "{b} and B {c} {");
    }

    #[test]
    fn example_json_braces_survive() {
        let t = PromptTemplates::default();
        let p = t.llm_oneshot("c", &["x"]);
        assert!(p.contains(r#"- Example: {"1": "Sentence text 1", "5": "Sentence text 5", "3": "Sentence text 3"} means"#));
        assert!(p.contains("A list of exactly 1 numbered sentences"));
        assert!(p.ends_with("Sentences:\n1. x\n"));
    }

    #[test]
    fn multi_line_sentences_are_flattened() {
        assert_eq!(numbered(&["a\nb", "c"]), "1. a b\n2. c");
    }

    #[test]
    fn hashes_change_with_content() {
        let mut t = PromptTemplates::default();
        let before = t.hash(TemplateKind::Tournament);
        t.set(TemplateKind::Tournament, "x");
        assert_ne!(before, t.hash(TemplateKind::Tournament));
        assert_eq!(t.hash(TemplateKind::Tournament).len(), 64);
    }
}
