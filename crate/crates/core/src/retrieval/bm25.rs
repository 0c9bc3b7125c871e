//! Okapi BM25 over an in-memory inverted index.
//!
//! score(q, d) = Σ_{t ∈ q} idf(t) · tf·(k1 + 1) / (tf + k1·(1 − b + b·|d|/avgdl))
//! idf(t)      = ln(1 + (N − df + 0.5) / (df + 0.5))
//!
//! The idf variant is the non-negative one used by Lucene-family engines.
//! Query terms are deduplicated before scoring.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::text::{tokenize, unique_tokens};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Self { k1: 1.2, b: 0.75 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    pub doc: u32,
    pub tf: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Bm25Index {
    params: Bm25Params,
    postings: BTreeMap<String, Vec<Posting>>,
    doc_lengths: Vec<u32>,
    avg_doc_length: f64,
}

impl Bm25Index {
    /// Documents are numbered by iteration order.
    pub fn build<'a, I>(docs: I, params: Bm25Params) -> Self
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut postings: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
        let mut doc_lengths = Vec::new();
        for (doc, text) in docs.into_iter().enumerate() {
            let tokens = tokenize(text);
            doc_lengths.push(tokens.len() as u32);
            let mut tf: HashMap<String, u32> = HashMap::new();
            for t in tokens {
                *tf.entry(t).or_default() += 1;
            }
            for (term, tf) in tf {
                postings.entry(term).or_default().push(Posting {
                    doc: doc as u32,
                    tf,
                });
            }
        }
        // doc order inside each postings list is already ascending
        let avg_doc_length = mean(&doc_lengths);
        Self {
            params,
            postings,
            doc_lengths,
            avg_doc_length,
        }
    }

    pub fn params(&self) -> Bm25Params {
        self.params
    }

    pub fn num_docs(&self) -> usize {
        self.doc_lengths.len()
    }

    pub fn num_terms(&self) -> usize {
        self.postings.len()
    }

    pub fn avg_doc_length(&self) -> f64 {
        self.avg_doc_length
    }

    pub fn doc_length(&self, doc: u32) -> u32 {
        self.doc_lengths[doc as usize]
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.postings.get(term).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn doc_frequency(&self, term: &str) -> usize {
        self.postings(term).len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&str, &[Posting])> {
        self.postings.iter().map(|(t, p)| (t.as_str(), p.as_slice()))
    }

    pub fn idf(&self, df: usize) -> f64 {
        let n = self.num_docs() as f64;
        let df = df as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }

    /// Every document matching at least one query term, with its score, by doc number.
    pub fn score_all(&self, query: &str) -> Vec<(u32, f64)> {
        let Bm25Params { k1, b } = self.params;
        let mut acc: BTreeMap<u32, f64> = BTreeMap::new();
        for term in unique_tokens(query) {
            let list = self.postings(&term);
            if list.is_empty() {
                continue;
            }
            let idf = self.idf(list.len());
            for p in list {
                let tf = f64::from(p.tf);
                let len_norm = if self.avg_doc_length > 0.0 {
                    f64::from(self.doc_length(p.doc)) / self.avg_doc_length
                } else {
                    0.0
                };
                let w = idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * len_norm));
                *acc.entry(p.doc).or_default() += w;
            }
        }
        acc.into_iter().filter(|(_, s)| *s > 0.0).collect()
    }

    /// Checks the structural invariants; used after deserializing.
    pub(crate) fn validate(&self) -> Result<(), String> {
        let n = self.num_docs() as u32;
        for (term, list) in &self.postings {
            if let Some(p) = list.iter().find(|p| p.doc >= n || p.tf == 0) {
                return Err(format!("posting for {term:?} references doc {}", p.doc));
            }
        }
        let expected = mean(&self.doc_lengths);
        if (expected - self.avg_doc_length).abs() > 1e-9 * expected.abs().max(1.0) {
            return Err(format!(
                "avg_doc_length {} does not match mean {expected}",
                self.avg_doc_length
            ));
        }
        Ok(())
    }
}

fn mean(lengths: &[u32]) -> f64 {
    if lengths.is_empty() {
        0.0
    } else {
        lengths.iter().map(|&l| f64::from(l)).sum::<f64>() / lengths.len() as f64
    }
}
