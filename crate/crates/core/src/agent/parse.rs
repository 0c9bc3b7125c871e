//! Lenient parsers for the three structured LLM outputs: fact lists,
//! rewrite decisions and passage rankings.

use std::collections::HashSet;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::kg::Triple;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("output does not begin with a {{Yes}} or {{No}} group")]
    NoDecision,
    #[error("{{No}} decision without a follow-up query group")]
    MissingQuery,
    #[error("no bracketed passage identifiers and no `None`")]
    NoRanking,
}

// --- triples ---------------------------------------------------------------

const QUOTE_PAIRS: [(char, &[char]); 5] = [
    ('"', &['"']),
    ('\'', &['\'']),
    ('“', &['”', '"']),
    ('‘', &['’', '\'']),
    ('`', &['`', '\'']),
];

const QUOTE_CHARS: [char; 7] = ['"', '\'', '“', '”', '‘', '’', '`'];

struct Field {
    text: String,
    quoted: bool,
}

/// Extracts `(subject, predicate, object)` groups in textual order.
///
/// Fields may be quoted with straight or curly quotes, or bare. A bare group
/// with more than three comma-separated fields keeps the first two as
/// subject and predicate and joins the rest back into the object, which
/// covers dates and places such as `(X, born on, February 12, 1899)`.
/// Groups that do not yield three non-empty fields are dropped, and
/// repeated triples keep their first occurrence.
pub fn parse_triples(text: &str) -> Vec<Triple> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i] == '(' {
            if let Some((fields, end)) = parse_group(&chars, i) {
                if let Some(t) = fields_to_triple(fields) {
                    if seen.insert(t.clone()) {
                        out.push(t);
                    }
                    i = end + 1;
                    continue;
                }
            }
        }
        i += 1;
    }
    out
}

/// Parses the group opening at `start`; returns its fields and the index of
/// the closing parenthesis.
fn parse_group(c: &[char], start: usize) -> Option<(Vec<Field>, usize)> {
    let mut pos = start + 1;
    let mut fields = Vec::new();
    loop {
        pos = skip_spaces(c, pos);
        let (field, next) = quoted_field(c, pos).or_else(|| bare_field(c, pos))?;
        fields.push(field);
        pos = next;
        match c.get(pos)? {
            ',' => pos += 1,
            ')' => return Some((fields, pos)),
            _ => return None,
        }
    }
}

fn skip_spaces(c: &[char], mut pos: usize) -> usize {
    while pos < c.len() && c[pos].is_whitespace() && c[pos] != '\n' {
        pos += 1;
    }
    pos
}

/// A quoted field ends at a matching closing quote followed (after spaces)
/// by `,` or `)`, so apostrophes inside the value are tolerated.
fn quoted_field(c: &[char], pos: usize) -> Option<(Field, usize)> {
    let open = *c.get(pos)?;
    let closers = QUOTE_PAIRS.iter().find(|(o, _)| *o == open)?.1;
    let mut j = pos + 1;
    while j < c.len() && c[j] != '\n' {
        if closers.contains(&c[j]) {
            let after = skip_spaces(c, j + 1);
            if matches!(c.get(after), Some(',') | Some(')')) {
                let text: String = c[pos + 1..j].iter().collect();
                return Some((
                    Field {
                        text,
                        quoted: true,
                    },
                    after,
                ));
            }
        }
        j += 1;
    }
    None
}

fn bare_field(c: &[char], pos: usize) -> Option<(Field, usize)> {
    let mut depth = 0usize;
    let mut j = pos;
    while j < c.len() {
        match c[j] {
            '\n' => return None,
            '(' => depth += 1,
            ')' if depth == 0 => break,
            ')' => depth -= 1,
            ',' if depth == 0 => break,
            _ => {}
        }
        j += 1;
    }
    if j >= c.len() {
        return None;
    }
    let text: String = c[pos..j].iter().collect();
    Some((
        Field {
            text: text.trim_end().to_string(),
            quoted: false,
        },
        j,
    ))
}

fn clean(s: &str) -> &str {
    s.trim().trim_matches(&QUOTE_CHARS[..]).trim()
}

fn fields_to_triple(fields: Vec<Field>) -> Option<Triple> {
    let (s, p, o) = match fields.len() {
        3 => (
            clean(&fields[0].text).to_string(),
            clean(&fields[1].text).to_string(),
            clean(&fields[2].text).to_string(),
        ),
        n if n > 3 && fields.iter().all(|f| !f.quoted) => {
            let object = fields[2..]
                .iter()
                .map(|f| f.text.trim())
                .collect::<Vec<_>>()
                .join(", ");
            (
                clean(&fields[0].text).to_string(),
                clean(&fields[1].text).to_string(),
                clean(&object).to_string(),
            )
        }
        _ => return None,
    };
    Triple::new(s, p, o).ok()
}

// --- rewrite ---------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    Yes,
    No,
}

/// Answerability verdict plus the next query when more evidence is needed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewriteOutcome {
    pub decision: Decision,
    pub next_query: Option<String>,
}

impl RewriteOutcome {
    pub fn yes() -> Self {
        Self {
            decision: Decision::Yes,
            next_query: None,
        }
    }

    pub fn no(next_query: impl Into<String>) -> Self {
        Self {
            decision: Decision::No,
            next_query: Some(next_query.into()),
        }
    }

    pub fn is_terminal(&self) -> bool {
        self.decision == Decision::Yes
    }
}

/// Returns the content of the brace group opening at byte 0 of `s`, and the
/// remainder after its closing brace.
fn brace_group(s: &str) -> Option<(&str, &str)> {
    debug_assert!(s.starts_with('{'));
    let mut depth = 0usize;
    for (i, ch) in s.char_indices() {
        match ch {
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 {
                    return Some((&s[1..i], &s[i + 1..]));
                }
            }
            _ => {}
        }
    }
    None
}

/// `{Yes}` or `{No} {next query}`; leading whitespace and letter case are ignored.
pub fn parse_rewrite(text: &str) -> Result<RewriteOutcome, ParseError> {
    let s = text.trim_start();
    if !s.starts_with('{') {
        return Err(ParseError::NoDecision);
    }
    let (first, rest) = brace_group(s).ok_or(ParseError::NoDecision)?;
    match first.trim().to_lowercase().as_str() {
        "yes" => Ok(RewriteOutcome::yes()),
        "no" => {
            let open = rest.find('{').ok_or(ParseError::MissingQuery)?;
            let (q, _) = brace_group(&rest[open..]).ok_or(ParseError::MissingQuery)?;
            let q = q.trim();
            if q.is_empty() {
                Err(ParseError::MissingQuery)
            } else {
                Ok(RewriteOutcome::no(q))
            }
        }
        _ => Err(ParseError::NoDecision),
    }
}

// --- rerank ----------------------------------------------------------------

/// Parsed ranking: valid 1-based indices in order, plus out-of-range ones
/// that were dropped.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RerankParse {
    pub indices: Vec<usize>,
    pub out_of_range: Vec<String>,
}

fn bracket_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\[\s*(\d+)\s*\]").expect("valid regex"))
}

fn none_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)\bnone\b").expect("valid regex"))
}

/// `[i] > [j] > ...`; duplicates keep their first position. A bare `None`
/// (any case) means no relevant passage.
pub fn parse_rerank(text: &str, num_passages: usize) -> Result<RerankParse, ParseError> {
    let mut out = RerankParse::default();
    let mut seen = HashSet::new();
    let mut any = false;
    for cap in bracket_re().captures_iter(text) {
        any = true;
        let raw = &cap[1];
        match raw.parse::<usize>() {
            Ok(i) if (1..=num_passages).contains(&i) => {
                if seen.insert(i) {
                    out.indices.push(i);
                }
            }
            _ => out.out_of_range.push(raw.to_string()),
        }
    }
    if any || none_re().is_match(text) {
        Ok(out)
    } else {
        Err(ParseError::NoRanking)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str, p: &str, o: &str) -> Triple {
        Triple::new(s, p, o).unwrap()
    }

    #[test]
    fn single_group() {
        assert_eq!(parse_triples(r#"("a", "b", "c")"#), [t("a", "b", "c")]);
    }

    #[test]
    fn duplicate_groups_collapse() {
        assert_eq!(parse_triples(r#"("a","b","c"), ("a","b","c")"#), [t("a", "b", "c")]);
    }

    #[test]
    fn reader_example_line() {
        let out = parse_triples(
            r#"("Neville A. Stanton", "employer", "University of Southampton"), ("University of Southampton", "founded in", "1862")"#,
        );
        assert_eq!(
            out,
            [
                t("Neville A. Stanton", "employer", "University of Southampton"),
                t("University of Southampton", "founded in", "1862")
            ]
        );
    }

    #[test]
    fn prose_yields_nothing() {
        assert!(parse_triples("I could not find any relevant facts (sorry).").is_empty());
    }

    #[test]
    fn bare_object_with_commas() {
        assert_eq!(
            parse_triples("(Edward L. Cahn, born on, February 12, 1899)"),
            [t("Edward L. Cahn", "born on", "February 12, 1899")]
        );
    }

    #[test]
    fn rewrite_forms() {
        assert_eq!(parse_rewrite("{Yes}"), Ok(RewriteOutcome::yes()));
        assert_eq!(parse_rewrite(" {no} {find X}"), Ok(RewriteOutcome::no("find X")));
        assert_eq!(parse_rewrite("I think so"), Err(ParseError::NoDecision));
        assert_eq!(parse_rewrite("{No}"), Err(ParseError::MissingQuery));
        assert_eq!(parse_rewrite("{No} {  }"), Err(ParseError::MissingQuery));
        assert_eq!(parse_rewrite("{Maybe}"), Err(ParseError::NoDecision));
        assert_eq!(parse_rewrite("{Yes"), Err(ParseError::NoDecision));
    }

    #[test]
    fn rerank_forms() {
        assert_eq!(parse_rerank("[4] > [6] > [1]", 6).unwrap().indices, [4, 6, 1]);
        assert_eq!(parse_rerank("[2] > [2]", 3).unwrap().indices, [2]);
        assert!(parse_rerank("none", 3).unwrap().indices.is_empty());
        let r = parse_rerank("[2] > [9] > [0]", 5).unwrap();
        assert_eq!(r.indices, [2]);
        assert_eq!(r.out_of_range, ["9", "0"]);
        assert_eq!(parse_rerank("the first one", 3), Err(ParseError::NoRanking));
        assert_eq!(parse_rerank("[] > []", 3), Err(ParseError::NoRanking));
    }
}
