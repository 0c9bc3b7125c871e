//! Engine configuration, the benchmark taxonomy sampler, answer/retrieval
//! metrics and batch evaluation.

mod batch;
mod config;
pub mod metrics;
mod taxonomy;

pub use batch::{
    aggregate, load_eval_records, read_traces, report_from_traces, run_batch, score_question,
    trace_file_name, write_traces, BatchOutput, BatchReport, EvalRecord, JudgeScores,
    QuestionReport,
};
pub use config::EngineConfig;
pub use taxonomy::{
    default_taxonomy, sample_combination, sample_combinations, Categorization, Category,
    Combination, TaxonomyConfig,
};

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("invalid taxonomy: {0}")]
    Taxonomy(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
