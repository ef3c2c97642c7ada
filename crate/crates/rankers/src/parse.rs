//! Parsers for model output.

use std::collections::HashSet;
use std::fmt;
use std::sync::LazyLock;

use regex::Regex;
use serde::de::{Deserializer, IgnoredAny, MapAccess, Visitor};

static BRACKETED: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\[\s*(\d+)\s*\]").expect("valid regex"));
static THINK: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?s)<think>.*?</think>").expect("valid regex"));
static ANSWER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?s)<answer>(.*?)</answer>").expect("valid regex"));

/// Result of reading a listwise answer over `n` items.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParsedOrder {
    /// 0-based positions in output order, first occurrence only.
    pub order: Vec<usize>,
    /// Identifiers outside `1..=n`.
    pub unknown: u32,
}

impl ParsedOrder {
    pub fn is_complete(&self, n: usize) -> bool {
        self.order.len() == n
    }

    fn push(&mut self, id: Option<usize>, n: usize, seen: &mut HashSet<usize>) {
        match id {
            Some(k) if (1..=n).contains(&k) => {
                if seen.insert(k - 1) {
                    self.order.push(k - 1);
                }
            }
            _ => self.unknown += 1,
        }
    }
}

struct KeyOrder;

impl<'de> Visitor<'de> for KeyOrder {
    type Value = Vec<String>;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("a JSON object")
    }

    fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Vec<String>, A::Error> {
        let mut keys = Vec::new();
        while let Some(k) = map.next_key::<String>()? {
            map.next_value::<IgnoredAny>()?;
            keys.push(k);
        }
        Ok(keys)
    }
}

/// Object keys in document order, duplicates included.
fn object_keys(text: &str) -> Option<Vec<String>> {
    let start = text.find('{')?;
    let mut de = serde_json::Deserializer::from_str(&text[start..]);
    de.deserialize_map(KeyOrder).ok()
}

/// Reads a JSON object whose key order is the ranking (`{"3": "...",
/// "1": "..."}`). Text around the object, such as code fences, is ignored.
/// Returns `None` if no object parses.
pub fn json_key_order(text: &str, n: usize) -> Option<ParsedOrder> {
    let keys = object_keys(text)?;
    let mut out = ParsedOrder::default();
    let mut seen = HashSet::new();
    for k in keys {
        out.push(k.trim().parse::<usize>().ok(), n, &mut seen);
    }
    Some(out)
}

/// Drops `<think>..</think>` blocks.
pub fn strip_think(text: &str) -> String {
    let s = THINK.replace_all(text, "");
    // An unterminated block swallows the rest of the response.
    match s.find("<think>") {
        Some(i) => s[..i].to_string(),
        None => s.into_owned(),
    }
}

/// All bracketed integers (`[3]`) in order, as written (1-based).
pub fn bracketed_ids(text: &str) -> Vec<usize> {
    BRACKETED
        .captures_iter(text)
        .filter_map(|c| c[1].parse::<usize>().ok())
        .collect()
}

/// Reads `[i] > [j] > ...` from the `<answer>` block. Without an answer
/// block the text after any reasoning is used.
pub fn arrow_order(text: &str, n: usize) -> ParsedOrder {
    let body = match ANSWER.captures(text) {
        Some(c) => c[1].to_string(),
        None => strip_think(text),
    };
    let mut out = ParsedOrder::default();
    let mut seen = HashSet::new();
    for id in bracketed_ids(&body) {
        out.push(Some(id), n, &mut seen);
    }
    out
}
