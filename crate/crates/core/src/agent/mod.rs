//! The multi-step agentic retrieval loop: read, memory maintenance, KG
//! linking and expansion, rewrite/terminate, filter and answer.

mod memory;
mod parse;
mod pipeline;
pub mod prompts;

use serde::{Deserialize, Serialize};

use crate::expansion::ExpansionConfig;
use crate::kg::Triple;
use crate::llm::{LlmClient, LlmError, LlmRequest};
use crate::retrieval::{CorpusIndex, HybridParams, Passage};

pub use memory::AgentState;
pub use parse::{
    parse_rerank, parse_rewrite, parse_triples, Decision, ParseError, RerankParse, RewriteOutcome,
};
pub use pipeline::{
    run_pipeline, AlignmentTrace, LinkTrace, PipelineError, PipelineTrace, StepTrace,
};
pub use prompts::PromptTemplates;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentConfig {
    pub max_steps: usize,
    /// Passages retrieved per step by the hybrid retriever.
    pub k: usize,
    pub hybrid: HybridParams,
    pub expansion: ExpansionConfig,
    pub reader_passage_cap: usize,
    pub answer_passage_cap: usize,
    /// Minimum BM25 score for a triple link; `None` accepts any top-1 hit.
    pub link_min_score: Option<f64>,
    pub read_max_tokens: u32,
    pub rewrite_max_tokens: u32,
    pub filter_max_tokens: u32,
    pub answer_max_tokens: u32,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            max_steps: 2,
            k: 10,
            hybrid: HybridParams::default(),
            expansion: ExpansionConfig::default(),
            reader_passage_cap: 10,
            answer_passage_cap: 10,
            link_min_score: None,
            read_max_tokens: 512,
            rewrite_max_tokens: 512,
            filter_max_tokens: 512,
            answer_max_tokens: 1024,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<(), AgentError> {
        let positive = [
            ("max_steps", self.max_steps),
            ("k", self.k),
            ("reader_passage_cap", self.reader_passage_cap),
            ("answer_passage_cap", self.answer_passage_cap),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(AgentError::Config(format!("{name} must be at least 1")));
            }
        }
        if !(self.hybrid.kappa > 0.0) {
            return Err(AgentError::Config("kappa must be positive".into()));
        }
        self.expansion.validate().map_err(AgentError::Config)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum AgentError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Llm(#[from] LlmError),
}

/// Prompted steps bound to one LLM backend, prompt set and configuration.
#[derive(Debug, Clone)]
pub struct Agent<L> {
    llm: L,
    prompts: PromptTemplates,
    config: AgentConfig,
}

impl<L: LlmClient> Agent<L> {
    pub fn new(llm: L, config: AgentConfig) -> Self {
        Self {
            llm,
            prompts: PromptTemplates::default(),
            config,
        }
    }

    pub fn with_prompts(mut self, prompts: PromptTemplates) -> Self {
        self.prompts = prompts;
        self
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn prompts(&self) -> &PromptTemplates {
        &self.prompts
    }

    pub fn llm(&self) -> &L {
        &self.llm
    }

    fn call(&self, prompt: String, max_tokens: u32) -> Result<String, LlmError> {
        let req = LlmRequest::new(prompt).with_max_tokens(max_tokens);
        Ok(self.llm.complete(&req)?.text)
    }

    /// Reader: proximal triples supporting `query` given the passages.
    pub fn read_step(
        &self,
        passages: &[Passage],
        query: &str,
        warnings: &mut Vec<String>,
    ) -> Result<Vec<Triple>, LlmError> {
        let cap = self.config.reader_passage_cap;
        let passages = if passages.len() > cap {
            warnings.push(format!(
                "reader received {} passages; truncated to {cap}",
                passages.len()
            ));
            &passages[..cap]
        } else {
            passages
        };
        let raw = self.call(
            self.prompts.render_reader(passages, query),
            self.config.read_max_tokens,
        )?;
        let triples = parse_triples(&raw);
        if triples.is_empty() {
            warnings.push(format!("reader output contained no parsable facts: {raw:?}"));
        }
        Ok(triples)
    }

    /// Answerability decision over the triple memory and full rewrite
    /// history. Unparsable output terminates the loop.
    pub fn rewrite_step(
        &self,
        state: &AgentState,
        warnings: &mut Vec<String>,
    ) -> Result<RewriteOutcome, LlmError> {
        let raw = self.call(
            self.prompts
                .render_rewrite(state.rewrite_history(), state.triple_memory()),
            self.config.rewrite_max_tokens,
        )?;
        Ok(parse_rewrite(&raw).unwrap_or_else(|e| {
            warnings.push(format!("rewrite output unparsable ({e}); terminating: {raw:?}"));
            RewriteOutcome::yes()
        }))
    }

    /// Listwise filter over the passage memory. Returns ids in the model's
    /// order, capped at `answer_passage_cap`. Unparsable output keeps the
    /// memory order.
    pub fn filter_step(
        &self,
        state: &AgentState,
        corpus: &CorpusIndex,
        warnings: &mut Vec<String>,
    ) -> Result<Vec<String>, LlmError> {
        let passages: Vec<Passage> = state
            .passage_memory()
            .iter()
            .filter_map(|id| corpus.get(id).cloned())
            .collect();
        let cap = self.config.answer_passage_cap;
        if passages.is_empty() {
            warnings.push("passage memory is empty; filter skipped".into());
            return Ok(Vec::new());
        }
        let raw = self.call(
            self.prompts
                .render_filter(state.original_question(), &passages, state.triple_memory()),
            self.config.filter_max_tokens,
        )?;
        let mut ids: Vec<String> = match parse_rerank(&raw, passages.len()) {
            Ok(parsed) => {
                if !parsed.out_of_range.is_empty() {
                    warnings.push(format!(
                        "filter referenced out-of-range passages {:?} (have {})",
                        parsed.out_of_range,
                        passages.len()
                    ));
                }
                parsed
                    .indices
                    .into_iter()
                    .map(|i| passages[i - 1].id.clone())
                    .collect()
            }
            Err(e) => {
                warnings.push(format!("filter output unparsable ({e}); keeping memory order: {raw:?}"));
                passages.iter().map(|p| p.id.clone()).collect()
            }
        };
        ids.truncate(cap);
        Ok(ids)
    }

    /// Final answer from the filtered passages and the triple memory.
    pub fn answer_step(
        &self,
        question: &str,
        passages: &[Passage],
        triples: &[Triple],
    ) -> Result<String, LlmError> {
        self.call(
            self.prompts.render_answer(question, passages, triples),
            self.config.answer_max_tokens,
        )
    }
}
