use std::collections::HashMap;
use std::io::{BufRead, Read, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::bm25::{Bm25Index, Bm25Params};
use super::dense::{cosine, norm, Embedder, HashedTfEmbedder};
use super::fusion::{rrf_fuse, DEFAULT_RRF_KAPPA};
use super::{RankedEntry, RankedList, RetrievalError};

/// A corpus chunk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Passage {
    pub id: String,
    pub text: String,
}

impl Passage {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            text: text.into(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub ingested: usize,
    /// Records whose text was empty after trimming.
    pub rejected_empty: usize,
}

/// Hybrid search settings. `pool_depth` is the per-retriever depth before
/// fusion; `None` means `2k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HybridParams {
    pub kappa: f64,
    pub pool_depth: Option<usize>,
}

impl Default for HybridParams {
    fn default() -> Self {
        Self {
            kappa: DEFAULT_RRF_KAPPA,
            pool_depth: None,
        }
    }
}

impl HybridParams {
    pub fn pool_for(&self, k: usize) -> usize {
        self.pool_depth.unwrap_or(2 * k).max(k)
    }
}

/// Immutable passage index holding both a BM25 inverted index and dense vectors.
#[derive(Debug, Clone)]
pub struct CorpusIndex {
    passages: Vec<Passage>,
    by_id: HashMap<String, u32>,
    sparse: Bm25Index,
    vectors: Vec<Vec<f64>>,
    norms: Vec<f64>,
    embedder: Arc<dyn Embedder>,
}

#[derive(Deserialize)]
struct CorpusRecord {
    id: String,
    text: String,
}

pub const INDEX_FORMAT: &str = "graphrag-corpus-index";
pub const INDEX_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct IndexHeader {
    format: String,
    version: u32,
}

#[derive(Serialize, Deserialize)]
struct EmbedderInfo {
    name: String,
    dim: usize,
}

#[derive(Serialize, Deserialize)]
struct IndexFile {
    #[serde(flatten)]
    header: IndexHeader,
    embedder: EmbedderInfo,
    passages: Vec<Passage>,
    sparse: Bm25Index,
}

impl CorpusIndex {
    /// Builds with default BM25 parameters and the hashed TF embedder.
    pub fn build(passages: Vec<Passage>) -> Result<Self, RetrievalError> {
        Self::build_with(
            passages,
            Bm25Params::default(),
            Arc::new(HashedTfEmbedder::default()),
        )
    }

    pub fn build_with(
        passages: Vec<Passage>,
        params: Bm25Params,
        embedder: Arc<dyn Embedder>,
    ) -> Result<Self, RetrievalError> {
        let by_id = index_ids(&passages)?;
        if let Some(p) = passages.iter().find(|p| p.text.trim().is_empty()) {
            return Err(RetrievalError::EmptyText(p.id.clone()));
        }
        let sparse = Bm25Index::build(passages.iter().map(|p| p.text.as_str()), params);
        Ok(Self::assemble(passages, by_id, sparse, embedder))
    }

    fn assemble(
        passages: Vec<Passage>,
        by_id: HashMap<String, u32>,
        sparse: Bm25Index,
        embedder: Arc<dyn Embedder>,
    ) -> Self {
        let vectors: Vec<Vec<f64>> = passages.iter().map(|p| embedder.embed(&p.text)).collect();
        let norms = vectors.iter().map(|v| norm(v)).collect();
        Self {
            passages,
            by_id,
            sparse,
            vectors,
            norms,
            embedder,
        }
    }

    pub fn len(&self) -> usize {
        self.passages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.passages.is_empty()
    }

    pub fn passages(&self) -> &[Passage] {
        &self.passages
    }

    pub fn get(&self, id: &str) -> Option<&Passage> {
        self.by_id.get(id).map(|&i| &self.passages[i as usize])
    }

    pub fn sparse_index(&self) -> &Bm25Index {
        &self.sparse
    }

    pub fn embedder(&self) -> &dyn Embedder {
        self.embedder.as_ref()
    }

    pub fn doc_length(&self, id: &str) -> Option<u32> {
        self.by_id.get(id).map(|&i| self.sparse.doc_length(i))
    }

    /// Top-k passages by BM25; only passages sharing a term with the query.
    pub fn sparse_search(&self, query: &str, k: usize) -> RankedList {
        let entries = self
            .sparse
            .score_all(query)
            .into_iter()
            .map(|(doc, score)| RankedEntry::new(self.passages[doc as usize].id.clone(), score))
            .collect();
        let mut list = RankedList::from_unsorted(entries);
        list.truncate(k);
        list
    }

    /// Top-k passages by cosine similarity; only strictly positive similarities.
    pub fn dense_search(&self, query: &str, k: usize) -> RankedList {
        let q = self.embedder.embed(query);
        let q_norm = norm(&q);
        if q_norm == 0.0 {
            return RankedList::default();
        }
        let entries = self
            .passages
            .iter()
            .zip(self.vectors.iter().zip(&self.norms))
            .filter_map(|(p, (v, &n))| {
                let s = cosine(&q, q_norm, v, n);
                (s > 0.0).then(|| RankedEntry::new(p.id.clone(), s))
            })
            .collect();
        let mut list = RankedList::from_unsorted(entries);
        list.truncate(k);
        list
    }

    /// RRF of dense and sparse results retrieved at the pool depth, truncated to k.
    pub fn hybrid_search(&self, query: &str, k: usize, params: &HybridParams) -> RankedList {
        let pool = params.pool_for(k);
        let dense = self.dense_search(query, pool);
        let sparse = self.sparse_search(query, pool);
        let mut fused = rrf_fuse(&[dense, sparse], params.kappa);
        fused.truncate(k);
        fused
    }

    /// Writes the versioned index file. Dense vectors are re-derived on load.
    pub fn save<W: Write>(&self, writer: W) -> Result<(), RetrievalError> {
        let file = IndexFile {
            header: IndexHeader {
                format: INDEX_FORMAT.into(),
                version: INDEX_FORMAT_VERSION,
            },
            embedder: EmbedderInfo {
                name: self.embedder.name().into(),
                dim: self.embedder.dim(),
            },
            passages: self.passages.clone(),
            sparse: self.sparse.clone(),
        };
        serde_json::to_writer(writer, &file).map_err(|e| RetrievalError::Format(e.to_string()))
    }

    /// Loads an index saved with the built-in hashed TF embedder.
    pub fn load<R: Read>(reader: R) -> Result<Self, RetrievalError> {
        Self::load_inner(reader, None)
    }

    /// Loads an index whose vectors come from `embedder`; its name and
    /// dimension must match the file.
    pub fn load_with_embedder<R: Read>(
        reader: R,
        embedder: Arc<dyn Embedder>,
    ) -> Result<Self, RetrievalError> {
        Self::load_inner(reader, Some(embedder))
    }

    fn load_inner<R: Read>(
        reader: R,
        embedder: Option<Arc<dyn Embedder>>,
    ) -> Result<Self, RetrievalError> {
        let file: IndexFile =
            serde_json::from_reader(reader).map_err(|e| RetrievalError::Format(e.to_string()))?;
        if file.header.format != INDEX_FORMAT {
            return Err(RetrievalError::Format(format!(
                "not a corpus index (format {:?})",
                file.header.format
            )));
        }
        if file.header.version != INDEX_FORMAT_VERSION {
            return Err(RetrievalError::Format(format!(
                "unsupported index version {} (expected {INDEX_FORMAT_VERSION})",
                file.header.version
            )));
        }
        let embedder: Arc<dyn Embedder> = match embedder {
            Some(e) => e,
            None if file.embedder.name == HashedTfEmbedder::NAME && file.embedder.dim > 0 => {
                Arc::new(HashedTfEmbedder::new(file.embedder.dim))
            }
            None => {
                return Err(RetrievalError::Format(format!(
                    "index was built with embedder {:?}; supply it explicitly",
                    file.embedder.name
                )))
            }
        };
        if embedder.name() != file.embedder.name || embedder.dim() != file.embedder.dim {
            return Err(RetrievalError::Format(format!(
                "embedder mismatch: file has {}/{}, got {}/{}",
                file.embedder.name,
                file.embedder.dim,
                embedder.name(),
                embedder.dim()
            )));
        }
        if file.sparse.num_docs() != file.passages.len() {
            return Err(RetrievalError::Format(
                "sparse index size does not match passage count".into(),
            ));
        }
        file.sparse.validate().map_err(RetrievalError::Format)?;
        let by_id = index_ids(&file.passages)?;
        Ok(Self::assemble(file.passages, by_id, file.sparse, embedder))
    }
}

fn index_ids(passages: &[Passage]) -> Result<HashMap<String, u32>, RetrievalError> {
    let mut by_id = HashMap::with_capacity(passages.len());
    for (i, p) in passages.iter().enumerate() {
        if by_id.insert(p.id.clone(), i as u32).is_some() {
            return Err(RetrievalError::DuplicateId(p.id.clone()));
        }
    }
    Ok(by_id)
}

/// Reads line-delimited JSON records (`id`, `text`; other fields ignored).
/// Blank lines are skipped, empty-text records are counted and dropped.
pub fn ingest_corpus<R: BufRead>(source: R) -> Result<(CorpusIndex, IngestReport), RetrievalError> {
    ingest_corpus_with(
        source,
        Bm25Params::default(),
        Arc::new(HashedTfEmbedder::default()),
    )
}

pub fn ingest_corpus_with<R: BufRead>(
    source: R,
    params: Bm25Params,
    embedder: Arc<dyn Embedder>,
) -> Result<(CorpusIndex, IngestReport), RetrievalError> {
    let mut passages = Vec::new();
    let mut report = IngestReport::default();
    let mut seen = std::collections::HashSet::new();
    for (lineno, line) in source.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: CorpusRecord =
            serde_json::from_str(&line).map_err(|e| RetrievalError::MalformedRecord {
                line: lineno + 1,
                reason: e.to_string(),
            })?;
        if rec.text.trim().is_empty() {
            report.rejected_empty += 1;
            continue;
        }
        if !seen.insert(rec.id.clone()) {
            return Err(RetrievalError::DuplicateId(rec.id));
        }
        passages.push(Passage::new(rec.id, rec.text));
    }
    report.ingested = passages.len();
    if report.rejected_empty > 0 {
        tracing::warn!(count = report.rejected_empty, "rejected records with empty text");
    }
    let index = CorpusIndex::build_with(passages, params, embedder)?;
    Ok((index, report))
}
