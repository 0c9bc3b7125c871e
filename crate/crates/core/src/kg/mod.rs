//! Knowledge-graph triple store: loading with literal filtering and alias
//! materialization, entity adjacency, sparse triple linking and soft
//! alignment of triples to corpus passages.

mod store;
mod triple;

pub use store::{
    align_triple_to_chunk, load_kg, KgLoadOptions, KgLoadReport, KgStore, TripleLink,
    ALIAS_PREDICATE, KG_FORMAT, KG_FORMAT_VERSION,
};
pub use triple::{verbalize_triple, Triple};

#[derive(Debug, thiserror::Error)]
pub enum KgError {
    #[error("triple {0} is empty")]
    EmptyField(&'static str),

    #[error("KG file format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
