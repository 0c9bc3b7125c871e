use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{KgError, Triple};
use crate::retrieval::{Bm25Index, Bm25Params, CorpusIndex};

/// Predicate used for materialized entity aliases.
pub const ALIAS_PREDICATE: &str = "alias";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KgLoadOptions {
    /// Drop triples whose record flags the object as a string literal.
    pub literal_filter: bool,
}

impl Default for KgLoadOptions {
    fn default() -> Self {
        Self {
            literal_filter: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KgLoadReport {
    pub records: usize,
    pub rejected: usize,
    pub literal_filtered: usize,
    pub alias_triples: usize,
    /// Alias records for an entity that already contributed its alias.
    pub aliases_ignored: usize,
    pub duplicates: usize,
}

/// Result of linking a triple against the store.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleLink {
    pub index: usize,
    pub triple: Triple,
    pub score: f64,
}

/// Immutable triple store with entity adjacency and a BM25 index over
/// verbalized triples.
#[derive(Debug, Clone)]
pub struct KgStore {
    triples: Vec<Triple>,
    adjacency: BTreeMap<String, BTreeSet<usize>>,
    index: Bm25Index,
}

pub const KG_FORMAT: &str = "graphrag-kg";
pub const KG_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct KgFile {
    format: String,
    version: u32,
    triples: Vec<Triple>,
}

impl KgStore {
    /// Builds from triples in order, collapsing duplicates to their first occurrence.
    pub fn from_triples<I: IntoIterator<Item = Triple>>(triples: I) -> Self {
        Self::from_triples_counting(triples).0
    }

    fn from_triples_counting<I: IntoIterator<Item = Triple>>(triples: I) -> (Self, usize) {
        let mut seen = HashSet::new();
        let mut unique = Vec::new();
        let mut duplicates = 0;
        for t in triples {
            if seen.insert(t.clone()) {
                unique.push(t);
            } else {
                duplicates += 1;
            }
        }
        let mut adjacency: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
        for (i, t) in unique.iter().enumerate() {
            for e in t.entities() {
                adjacency.entry(e.to_string()).or_default().insert(i);
            }
        }
        let verbalized: Vec<String> = unique.iter().map(Triple::verbalize).collect();
        let index = Bm25Index::build(verbalized.iter().map(String::as_str), Bm25Params::default());
        (
            Self {
                triples: unique,
                adjacency,
                index,
            },
            duplicates,
        )
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn get(&self, index: usize) -> Option<&Triple> {
        self.triples.get(index)
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.position(t).is_some()
    }

    pub fn position(&self, t: &Triple) -> Option<usize> {
        self.adjacency
            .get(t.subject())?
            .iter()
            .copied()
            .find(|&i| &self.triples[i] == t)
    }

    /// Indices of triples with `entity` as subject or object, ascending.
    pub fn adjacent(&self, entity: &str) -> impl Iterator<Item = usize> + '_ {
        self.adjacency.get(entity).into_iter().flatten().copied()
    }

    pub fn degree(&self, entity: &str) -> usize {
        self.adjacency.get(entity).map_or(0, BTreeSet::len)
    }

    pub fn entities(&self) -> impl Iterator<Item = &str> {
        self.adjacency.keys().map(String::as_str)
    }

    pub fn sparse_index(&self) -> &Bm25Index {
        &self.index
    }

    /// Top-1 BM25 match of the verbalized proximal triple. Ties go to the
    /// earliest stored triple.
    pub fn link_triple(&self, proximal: &Triple) -> Option<TripleLink> {
        self.link_triple_with_floor(proximal, None)
    }

    /// As [`link_triple`](Self::link_triple), rejecting links scoring below `min_score`.
    pub fn link_triple_with_floor(
        &self,
        proximal: &Triple,
        min_score: Option<f64>,
    ) -> Option<TripleLink> {
        let (index, score) = self
            .index
            .score_all(&proximal.verbalize())
            .into_iter()
            .max_by(|a, b| a.1.total_cmp(&b.1).then_with(|| b.0.cmp(&a.0)))?;
        if min_score.is_some_and(|floor| score < floor) {
            return None;
        }
        let index = index as usize;
        Some(TripleLink {
            index,
            triple: self.triples[index].clone(),
            score,
        })
    }

    pub fn save<W: Write>(&self, writer: W) -> Result<(), KgError> {
        let file = KgFile {
            format: KG_FORMAT.into(),
            version: KG_FORMAT_VERSION,
            triples: self.triples.clone(),
        };
        serde_json::to_writer(writer, &file).map_err(|e| KgError::Format(e.to_string()))
    }

    pub fn load<R: Read>(reader: R) -> Result<Self, KgError> {
        let file: KgFile =
            serde_json::from_reader(reader).map_err(|e| KgError::Format(e.to_string()))?;
        if file.format != KG_FORMAT || file.version != KG_FORMAT_VERSION {
            return Err(KgError::Format(format!(
                "unsupported KG file {:?} v{}",
                file.format, file.version
            )));
        }
        Ok(Self::from_triples(file.triples))
    }
}

enum KgRecord {
    Triple { triple: Triple, literal: bool },
    Aliases { entity: String, aliases: Vec<String> },
}

fn parse_record(line: &str) -> Option<KgRecord> {
    let v: Value = serde_json::from_str(line).ok()?;
    let obj = v.as_object()?;
    if let Some(entity) = obj.get("entity") {
        let entity = entity.as_str()?.trim();
        if entity.is_empty() {
            return None;
        }
        let aliases = obj
            .get("aliases")?
            .as_array()?
            .iter()
            .map(|a| a.as_str().map(str::to_string))
            .collect::<Option<Vec<_>>>()?;
        return Some(KgRecord::Aliases {
            entity: entity.to_string(),
            aliases,
        });
    }
    let field = |k: &str| obj.get(k).and_then(Value::as_str);
    let triple = Triple::new(field("subject")?, field("predicate")?, field("object")?).ok()?;
    let literal = match obj.get("object_is_literal") {
        None | Some(Value::Null) => false,
        Some(Value::Bool(b)) => *b,
        Some(_) => return None,
    };
    Some(KgRecord::Triple { triple, literal })
}

/// Loads line-delimited KG records.
///
/// Triple records carry `subject`, `predicate`, `object` and an optional
/// `object_is_literal`. Alias records carry `entity` and `aliases`; the first
/// non-empty alias of an entity becomes `(entity, "alias", alias)`, later
/// alias records for the same entity are ignored. Malformed lines are counted
/// and skipped.
pub fn load_kg<R: BufRead>(
    source: R,
    options: KgLoadOptions,
) -> Result<(KgStore, KgLoadReport), KgError> {
    let mut report = KgLoadReport::default();
    let mut triples = Vec::new();
    let mut aliased: HashSet<String> = HashSet::new();
    for (lineno, line) in source.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        report.records += 1;
        match parse_record(&line) {
            None => {
                tracing::debug!(line = lineno + 1, "rejected malformed KG record");
                report.rejected += 1;
            }
            Some(KgRecord::Triple { literal: true, .. }) if options.literal_filter => {
                report.literal_filtered += 1;
            }
            Some(KgRecord::Triple { triple, .. }) => triples.push(triple),
            Some(KgRecord::Aliases { entity, aliases }) => {
                let Some(alias) = aliases.iter().map(|a| a.trim()).find(|a| !a.is_empty()) else {
                    continue;
                };
                if !aliased.insert(entity.clone()) {
                    report.aliases_ignored += 1;
                    continue;
                }
                triples.push(Triple::new(&entity, ALIAS_PREDICATE, alias)?);
                report.alias_triples += 1;
            }
        }
    }
    let (store, duplicates) = KgStore::from_triples_counting(triples);
    report.duplicates = duplicates;
    Ok((store, report))
}

/// Maps a triple to the passage that best matches its verbalization (top-1 BM25).
pub fn align_triple_to_chunk(corpus: &CorpusIndex, t: &Triple) -> Option<String> {
    corpus
        .sparse_search(&t.verbalize(), 1)
        .into_entries()
        .into_iter()
        .next()
        .map(|e| e.id)
}
