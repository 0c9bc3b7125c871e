use serde::{Deserialize, Serialize};

use super::{Agent, AgentConfig, AgentError, AgentState, RewriteOutcome};
use crate::expansion::{expand_beams, flatten_beams, Beam};
use crate::kg::{align_triple_to_chunk, KgStore, Triple, TripleLink};
use crate::llm::LlmClient;
use crate::retrieval::{rrf_fuse, CorpusIndex, Passage, RankedList};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkTrace {
    pub proximal: Triple,
    pub linked: Option<TripleLink>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentTrace {
    pub triple: Triple,
    pub passage: Option<String>,
}

/// Everything one loop iteration did.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepTrace {
    pub step: usize,
    pub query: String,
    pub hybrid: RankedList,
    pub proximal_triples: Vec<Triple>,
    /// Link and expansion calls against the KG store in this step.
    pub kg_lookups: usize,
    pub links: Vec<LinkTrace>,
    pub beams: Vec<Beam>,
    pub flattened: Vec<Triple>,
    pub alignments: Vec<AlignmentTrace>,
    /// Unique aligned passages in flattening order.
    pub aligned_passages: Vec<String>,
    /// Fusion of aligned and hybrid passages; absent on the first step.
    pub fused: Option<RankedList>,
    /// Passage ids this step added to memory.
    pub appended: Vec<String>,
    pub rewrite: Option<RewriteOutcome>,
    pub warnings: Vec<String>,
}

impl StepTrace {
    fn new(step: usize, query: &str) -> Self {
        Self {
            step,
            query: query.to_string(),
            hybrid: RankedList::default(),
            proximal_triples: Vec::new(),
            kg_lookups: 0,
            links: Vec::new(),
            beams: Vec::new(),
            flattened: Vec::new(),
            alignments: Vec::new(),
            aligned_passages: Vec::new(),
            fused: None,
            appended: Vec::new(),
            rewrite: None,
            warnings: Vec::new(),
        }
    }
}

/// Complete record of one question's run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PipelineTrace {
    pub question: String,
    pub steps: Vec<StepTrace>,
    pub rewrite_history: Vec<String>,
    pub passage_memory: Vec<String>,
    pub triple_memory: Vec<Triple>,
    pub filtered_passages: Vec<String>,
    pub answer: Option<String>,
    pub llm_calls: usize,
    pub warnings: Vec<String>,
    pub error: Option<String>,
}

impl PipelineTrace {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace is always serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    fn sync_memory(&mut self, state: &AgentState) {
        self.rewrite_history = state.rewrite_history().to_vec();
        self.passage_memory = state.passage_memory().to_vec();
        self.triple_memory = state.triple_memory().to_vec();
    }
}

/// A failed run together with everything recorded before the failure.
#[derive(Debug, thiserror::Error)]
#[error("{source}")]
pub struct PipelineError {
    #[source]
    pub source: AgentError,
    pub trace: Box<PipelineTrace>,
}

impl<L: LlmClient> Agent<L> {
    /// Runs the full loop for `question` and returns its trace.
    pub fn run(
        &self,
        question: &str,
        corpus: &CorpusIndex,
        kg: &KgStore,
    ) -> Result<PipelineTrace, PipelineError> {
        let mut trace = PipelineTrace {
            question: question.to_string(),
            ..Default::default()
        };
        let fail = |source: AgentError, mut trace: PipelineTrace| {
            trace.error = Some(source.to_string());
            PipelineError {
                source,
                trace: Box::new(trace),
            }
        };
        if let Err(e) = self.config.validate() {
            return Err(fail(e, trace));
        }
        if corpus.is_empty() {
            return Err(fail(AgentError::Config("corpus is empty".into()), trace));
        }
        if question.trim().is_empty() {
            return Err(fail(AgentError::Config("question is empty".into()), trace));
        }

        let mut state = AgentState::new(question);
        loop {
            let mut step = StepTrace::new(state.step(), state.current_query());
            let result = self.run_step(&mut state, &mut step, &mut trace.llm_calls, corpus, kg);
            let rewrite = step.rewrite.clone();
            trace.steps.push(step);
            trace.sync_memory(&state);
            if let Err(e) = result {
                return Err(fail(e.into(), trace));
            }
            match rewrite {
                Some(RewriteOutcome {
                    next_query: Some(next),
                    ..
                }) if state.step() < self.config.max_steps => state.advance(next),
                _ => break,
            }
        }

        let filtered = {
            trace.llm_calls += usize::from(!state.passage_memory().is_empty());
            match self.filter_step(&state, corpus, &mut trace.warnings) {
                Ok(ids) => ids,
                Err(e) => return Err(fail(e.into(), trace)),
            }
        };
        trace.filtered_passages = filtered.clone();
        let passages: Vec<Passage> = filtered
            .iter()
            .filter_map(|id| corpus.get(id).cloned())
            .collect();
        if passages.is_empty() {
            trace
                .warnings
                .push("answering without passages".to_string());
        }
        trace.llm_calls += 1;
        match self.answer_step(question, &passages, state.triple_memory()) {
            Ok(a) => trace.answer = Some(a),
            Err(e) => return Err(fail(e.into(), trace)),
        }
        trace.sync_memory(&state);
        Ok(trace)
    }

    fn run_step(
        &self,
        state: &mut AgentState,
        step: &mut StepTrace,
        llm_calls: &mut usize,
        corpus: &CorpusIndex,
        kg: &KgStore,
    ) -> Result<(), crate::llm::LlmError> {
        let cfg = &self.config;
        let query = state.current_query().to_string();

        step.hybrid = corpus.hybrid_search(&query, cfg.k, &cfg.hybrid);
        let retrieved: Vec<Passage> = step
            .hybrid
            .ids()
            .filter_map(|id| corpus.get(id).cloned())
            .collect();

        *llm_calls += 1;
        step.proximal_triples = self.read_step(&retrieved, &query, &mut step.warnings)?;
        state.merge_triples(&step.proximal_triples);

        let candidates: Vec<String> = if state.step() == 1 {
            step.hybrid.ids().map(str::to_string).collect()
        } else {
            let mut seeds: Vec<Triple> = Vec::new();
            for proximal in &step.proximal_triples {
                let linked = kg.link_triple_with_floor(proximal, cfg.link_min_score);
                step.kg_lookups += 1;
                if let Some(l) = &linked {
                    if !seeds.contains(&l.triple) {
                        seeds.push(l.triple.clone());
                    }
                }
                step.links.push(LinkTrace {
                    proximal: proximal.clone(),
                    linked,
                });
            }
            if !seeds.is_empty() {
                step.kg_lookups += 1;
                step.beams = expand_beams(kg, &seeds, &query, &cfg.expansion);
            }
            step.flattened = flatten_beams(&step.beams);
            for t in &step.flattened {
                let passage = align_triple_to_chunk(corpus, t);
                if let Some(id) = &passage {
                    if !step.aligned_passages.contains(id) {
                        step.aligned_passages.push(id.clone());
                    }
                }
                step.alignments.push(AlignmentTrace {
                    triple: t.clone(),
                    passage,
                });
            }
            let aligned = RankedList::from_ranked_ids(step.aligned_passages.iter().cloned());
            let fused = rrf_fuse(&[aligned, step.hybrid.clone()], cfg.hybrid.kappa);
            let ids = fused.ids().map(str::to_string).collect();
            step.fused = Some(fused);
            ids
        };
        let before = state.passage_memory().len();
        state.append_passages(&candidates);
        step.appended = state.passage_memory()[before..].to_vec();

        *llm_calls += 1;
        step.rewrite = Some(self.rewrite_step(state, &mut step.warnings)?);
        Ok(())
    }
}

/// Runs one question with the built-in prompt templates.
pub fn run_pipeline<L: LlmClient>(
    question: &str,
    corpus: &CorpusIndex,
    kg: &KgStore,
    llm: L,
    config: AgentConfig,
) -> Result<PipelineTrace, PipelineError> {
    Agent::new(llm, config).run(question, corpus, kg)
}
