//! Passage ingestion and the base retrievers: BM25 sparse search, dense
//! cosine search, and their reciprocal-rank-fused hybrid.
//!
//! All rankings break score ties by ascending passage id so that results are
//! a pure function of (index, query, parameters).

mod bm25;
mod corpus;
mod dense;
mod fusion;
mod ranked;

pub use bm25::{Bm25Index, Bm25Params, Posting};
pub use corpus::{
    ingest_corpus, ingest_corpus_with, CorpusIndex, HybridParams, IngestReport, Passage,
    INDEX_FORMAT, INDEX_FORMAT_VERSION,
};
pub use dense::{fnv1a64, Embedder, HashedTfEmbedder, DEFAULT_EMBEDDING_DIM};
pub use fusion::{rrf_fuse, DEFAULT_RRF_KAPPA};
pub use ranked::{RankedEntry, RankedList};

#[derive(Debug, thiserror::Error)]
pub enum RetrievalError {
    #[error("duplicate passage id {0:?}")]
    DuplicateId(String),

    #[error("passage {0:?} has empty text")]
    EmptyText(String),

    #[error("malformed corpus record on line {line}: {reason}")]
    MalformedRecord { line: usize, reason: String },

    #[error("invalid ranked list: {0}")]
    InvalidRanking(String),

    #[error("index format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
