//! Graph expansion: diverse beam search over entity-connected triple
//! sequences, and breadth-first flattening of the resulting beams.
//!
//! Search procedure for seeds S, width B and depth D:
//!
//! 1. Each distinct seed found in the store starts a beam of length 1.
//!    The seed set goes through the selection rule once.
//! 2. At every depth 1..=D each beam is replaced by all its one-triple
//!    extensions: store triples sharing an entity with the beam's last
//!    triple and not already in the beam. A beam with no extension is kept
//!    as is.
//! 3. Selection: sort candidates by score (descending), then by the
//!    sequence of verbalized triples (ascending); keep the first beam per
//!    distinct last triple, then the first B.
//!
//! A beam's score is the mean relevance of its triples under a
//! [`TripleScorer`]; the default scorer is query-term coverage.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::kg::{KgStore, Triple};
use crate::text::{tokenize, unique_tokens};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExpansionConfig {
    pub beam_width: usize,
    pub max_depth: usize,
}

impl Default for ExpansionConfig {
    fn default() -> Self {
        Self {
            beam_width: 4,
            max_depth: 2,
        }
    }
}

impl ExpansionConfig {
    pub fn new(beam_width: usize, max_depth: usize) -> Result<Self, String> {
        let cfg = Self {
            beam_width,
            max_depth,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.beam_width == 0 {
            return Err("beam_width must be at least 1".into());
        }
        if self.max_depth == 0 {
            return Err("max_depth must be at least 1".into());
        }
        Ok(())
    }
}

/// A scored, entity-connected sequence of store triples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Beam {
    pub triples: Vec<Triple>,
    pub score: f64,
}

/// Per-triple relevance used to score beams.
pub trait TripleScorer {
    fn relevance(&self, triple: &Triple) -> f64;
}

/// Fraction of the query's distinct terms that occur in the verbalized triple.
#[derive(Debug, Clone)]
pub struct QueryCoverage {
    terms: Vec<String>,
}

impl QueryCoverage {
    pub fn new(query: &str) -> Self {
        Self {
            terms: unique_tokens(query),
        }
    }
}

impl TripleScorer for QueryCoverage {
    fn relevance(&self, triple: &Triple) -> f64 {
        if self.terms.is_empty() {
            return 0.0;
        }
        let tokens: HashSet<String> = tokenize(&triple.verbalize()).into_iter().collect();
        let hits = self.terms.iter().filter(|t| tokens.contains(*t)).count();
        hits as f64 / self.terms.len() as f64
    }
}

#[derive(Debug, Clone)]
struct Candidate {
    path: Vec<usize>,
    relevances: Vec<f64>,
}

impl Candidate {
    fn score(&self) -> f64 {
        self.relevances.iter().sum::<f64>() / self.relevances.len() as f64
    }

    fn last(&self) -> usize {
        *self.path.last().expect("beams are non-empty")
    }
}

/// Beam search with the default query-coverage scorer.
pub fn expand_beams(
    store: &KgStore,
    seeds: &[Triple],
    query: &str,
    cfg: &ExpansionConfig,
) -> Vec<Beam> {
    expand_beams_with(store, seeds, &QueryCoverage::new(query), cfg)
}

pub fn expand_beams_with(
    store: &KgStore,
    seeds: &[Triple],
    scorer: &dyn TripleScorer,
    cfg: &ExpansionConfig,
) -> Vec<Beam> {
    let triples = store.triples();
    let relevance: Vec<f64> = triples.iter().map(|t| scorer.relevance(t)).collect();

    let mut seen = HashSet::new();
    let initial: Vec<Candidate> = seeds
        .iter()
        .filter_map(|s| {
            let i = store.position(s);
            if i.is_none() {
                tracing::debug!(seed = %s, "seed is not a store member; skipped");
            }
            i
        })
        .filter(|i| seen.insert(*i))
        .map(|i| Candidate {
            path: vec![i],
            relevances: vec![relevance[i]],
        })
        .collect();
    let mut beams = select(store, initial, cfg.beam_width);

    for _ in 0..cfg.max_depth {
        let mut candidates = Vec::new();
        for beam in &beams {
            let last = &triples[beam.last()];
            let frontier: BTreeSet<usize> = last
                .entities()
                .iter()
                .flat_map(|e| store.adjacent(e))
                .filter(|i| !beam.path.contains(i))
                .collect();
            if frontier.is_empty() {
                candidates.push(beam.clone());
                continue;
            }
            for next in frontier {
                let mut c = beam.clone();
                c.path.push(next);
                c.relevances.push(relevance[next]);
                candidates.push(c);
            }
        }
        beams = select(store, candidates, cfg.beam_width);
    }

    beams
        .into_iter()
        .map(|c| Beam {
            score: c.score(),
            triples: c.path.iter().map(|&i| triples[i].clone()).collect(),
        })
        .collect()
}

fn select(store: &KgStore, candidates: Vec<Candidate>, width: usize) -> Vec<Candidate> {
    let mut keyed: Vec<(f64, Vec<String>, Candidate)> = candidates
        .into_iter()
        .map(|c| {
            let key = c
                .path
                .iter()
                .map(|&i| store.triples()[i].verbalize())
                .collect();
            (c.score(), key, c)
        })
        .collect();
    keyed.sort_by(|a, b| {
        b.0.total_cmp(&a.0)
            .then_with(|| a.1.cmp(&b.1))
            .then_with(|| a.2.path.cmp(&b.2.path))
    });
    let mut last_seen = HashSet::new();
    keyed
        .into_iter()
        .filter(|(_, _, c)| last_seen.insert(c.last()))
        .take(width)
        .map(|(_, _, c)| c)
        .collect()
}

/// Position-major traversal: every beam's first triple, then every beam's
/// second, and so on. Repeated triples keep their first position.
pub fn flatten_beams(beams: &[Beam]) -> Vec<Triple> {
    let depth = beams.iter().map(|b| b.triples.len()).max().unwrap_or(0);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for pos in 0..depth {
        for beam in beams {
            if let Some(t) = beam.triples.get(pos) {
                if seen.insert(t) {
                    out.push(t.clone());
                }
            }
        }
    }
    out
}

/// Beam ordering used by [`flatten_beams`] callers: score descending, then
/// verbalized sequence.
pub fn cmp_beams(a: &Beam, b: &Beam) -> Ordering {
    b.score.total_cmp(&a.score).then_with(|| {
        a.triples
            .iter()
            .map(Triple::verbalize)
            .cmp(b.triples.iter().map(Triple::verbalize))
    })
}
