use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::kg::Triple;

/// Per-question agent memory: rewrite history, retrieved passages and
/// unique proximal triples, all in insertion order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    original_question: String,
    rewrite_history: Vec<String>,
    passage_memory: Vec<String>,
    triple_memory: Vec<Triple>,
    step: usize,
    #[serde(skip)]
    passage_set: HashSet<String>,
    #[serde(skip)]
    triple_set: HashSet<Triple>,
}

impl AgentState {
    pub fn new(question: impl Into<String>) -> Self {
        let q = question.into();
        Self {
            rewrite_history: vec![q.clone()],
            original_question: q,
            passage_memory: Vec::new(),
            triple_memory: Vec::new(),
            step: 1,
            passage_set: HashSet::new(),
            triple_set: HashSet::new(),
        }
    }

    pub fn original_question(&self) -> &str {
        &self.original_question
    }

    /// q(1)..q(n); the first entry is always the original question.
    pub fn rewrite_history(&self) -> &[String] {
        &self.rewrite_history
    }

    pub fn current_query(&self) -> &str {
        self.rewrite_history.last().expect("history is never empty")
    }

    pub fn passage_memory(&self) -> &[String] {
        &self.passage_memory
    }

    pub fn triple_memory(&self) -> &[Triple] {
        &self.triple_memory
    }

    pub fn step(&self) -> usize {
        self.step
    }

    /// Adds unseen triples in order; returns how many were new.
    pub fn merge_triples<'a, I>(&mut self, triples: I) -> usize
    where
        I: IntoIterator<Item = &'a Triple>,
    {
        let before = self.triple_memory.len();
        for t in triples {
            if self.triple_set.insert(t.clone()) {
                self.triple_memory.push(t.clone());
            }
        }
        self.triple_memory.len() - before
    }

    /// Appends unseen passage ids in order; returns how many were new.
    pub fn append_passages<I, S>(&mut self, ids: I) -> usize
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let before = self.passage_memory.len();
        for id in ids {
            let id = id.as_ref();
            if self.passage_set.insert(id.to_string()) {
                self.passage_memory.push(id.to_string());
            }
        }
        self.passage_memory.len() - before
    }

    /// Records q(n+1) and advances to step n+1.
    pub fn advance(&mut self, next_query: impl Into<String>) {
        self.rewrite_history.push(next_query.into());
        self.step += 1;
    }
}
