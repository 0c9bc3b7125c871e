//! Prompt templates and their rendering.
//!
//! Templates are plain UTF-8 text with named placeholders such as `{query}`.
//! Only known placeholder names are substituted; any other brace group
//! (`{Yes}`, `{xxx}`) is literal template text.

use std::path::Path;

use crate::kg::Triple;
use crate::retrieval::Passage;

use super::AgentError;

pub const PH_RETRIEVED_DOCS: &str = "retrieved_docs";
pub const PH_QUERY: &str = "query";
pub const PH_HISTORY: &str = "query_rewriting_history";
pub const PH_TRIPLES: &str = "triples";
pub const PH_NUM_DOCS: &str = "num_docs";

const KNOWN: [&str; 5] = [PH_RETRIEVED_DOCS, PH_QUERY, PH_HISTORY, PH_TRIPLES, PH_NUM_DOCS];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplates {
    pub reader: String,
    pub answer: String,
    pub rewrite: String,
    pub filter: String,
}

impl Default for PromptTemplates {
    fn default() -> Self {
        Self {
            reader: strip_final_newline(include_str!("../../prompts/reader.txt")),
            answer: strip_final_newline(include_str!("../../prompts/answer.txt")),
            rewrite: strip_final_newline(include_str!("../../prompts/rewrite.txt")),
            filter: strip_final_newline(include_str!("../../prompts/filter.txt")),
        }
    }
}

fn strip_final_newline(s: &str) -> String {
    s.strip_suffix('\n').unwrap_or(s).to_string()
}

impl PromptTemplates {
    /// Loads `reader.txt`, `answer.txt`, `rewrite.txt` and `filter.txt` from
    /// `dir`; missing files fall back to the built-in template.
    pub fn from_dir(dir: &Path) -> Result<Self, AgentError> {
        let defaults = Self::default();
        let load = |name: &str, fallback: String| -> Result<String, AgentError> {
            let path = dir.join(name);
            if !path.exists() {
                return Ok(fallback);
            }
            std::fs::read_to_string(&path)
                .map(|s| strip_final_newline(&s))
                .map_err(|e| AgentError::Config(format!("{}: {e}", path.display())))
        };
        let t = Self {
            reader: load("reader.txt", defaults.reader)?,
            answer: load("answer.txt", defaults.answer)?,
            rewrite: load("rewrite.txt", defaults.rewrite)?,
            filter: load("filter.txt", defaults.filter)?,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        let require = |name: &str, tpl: &str, phs: &[&str]| {
            for ph in phs {
                if !tpl.contains(&format!("{{{ph}}}")) {
                    return Err(AgentError::Config(format!(
                        "{name} template lacks placeholder {{{ph}}}"
                    )));
                }
            }
            Ok(())
        };
        require("reader", &self.reader, &[PH_RETRIEVED_DOCS, PH_QUERY])?;
        require("answer", &self.answer, &[PH_RETRIEVED_DOCS, PH_TRIPLES, PH_QUERY])?;
        require("rewrite", &self.rewrite, &[PH_QUERY, PH_HISTORY, PH_TRIPLES])?;
        require(
            "filter",
            &self.filter,
            &[PH_NUM_DOCS, PH_QUERY, PH_TRIPLES, PH_RETRIEVED_DOCS],
        )
    }

    pub fn render_reader(&self, passages: &[Passage], query: &str) -> String {
        render(
            &self.reader,
            &[(PH_RETRIEVED_DOCS, &format_documents(passages)), (PH_QUERY, query)],
        )
    }

    pub fn render_answer(&self, question: &str, passages: &[Passage], triples: &[Triple]) -> String {
        render(
            &self.answer,
            &[
                (PH_RETRIEVED_DOCS, &format_documents(passages)),
                (PH_TRIPLES, &format_triples(triples)),
                (PH_QUERY, question),
            ],
        )
    }

    pub fn render_rewrite(&self, history: &[String], triples: &[Triple]) -> String {
        let original = history.first().map(String::as_str).unwrap_or("");
        render(
            &self.rewrite,
            &[
                (PH_QUERY, original),
                (PH_HISTORY, &format_history(history)),
                (PH_TRIPLES, &format_triples(triples)),
            ],
        )
    }

    pub fn render_filter(&self, question: &str, passages: &[Passage], triples: &[Triple]) -> String {
        render(
            &self.filter,
            &[
                (PH_NUM_DOCS, &passages.len().to_string()),
                (PH_QUERY, question),
                (PH_TRIPLES, &format_triples(triples)),
                (PH_RETRIEVED_DOCS, &format_numbered(passages)),
            ],
        )
    }
}

/// Single-pass substitution of `{name}` for the given names. Substituted
/// values are never re-scanned.
pub fn render(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let replaced = after.find('}').and_then(|close| {
            let name = &after[..close];
            if !KNOWN.contains(&name) {
                return None;
            }
            vars.iter()
                .find(|(n, _)| *n == name)
                .map(|(_, v)| (*v, close))
        });
        match replaced {
            Some((value, close)) => {
                out.push_str(value);
                rest = &after[close + 1..];
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

pub fn format_triples(triples: &[Triple]) -> String {
    triples
        .iter()
        .map(Triple::to_string)
        .collect::<Vec<_>>()
        .join("\n")
}

fn format_documents(passages: &[Passage]) -> String {
    passages
        .iter()
        .map(|p| format!("Passage ID: {}\n{}", p.id, p.text.trim()))
        .collect::<Vec<_>>()
        .join("\n\n")
}

fn format_numbered(passages: &[Passage]) -> String {
    passages
        .iter()
        .enumerate()
        .map(|(i, p)| format!("[{}] {}", i + 1, p.text.trim()))
        .collect::<Vec<_>>()
        .join("\n\n")
}

/// `Rewrites:` block listing q(2)..q(n); empty before the first rewrite.
pub fn format_history(history: &[String]) -> String {
    if history.len() <= 1 {
        return String::new();
    }
    let mut s = String::from("Rewrites:");
    for (i, q) in history[1..].iter().enumerate() {
        s.push_str(&format!("\nRewrite {}: {q}", i + 1));
    }
    s
}
