use std::collections::BTreeMap;
use std::io::BufRead;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::metrics::{exact_match, mean, recall_at_k, token_f1};
use super::EvalError;
use crate::agent::{Agent, PipelineTrace};
use crate::kg::KgStore;
use crate::llm::LlmClient;
use crate::retrieval::CorpusIndex;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub question: String,
    #[serde(default)]
    pub gold_answer: Option<String>,
    #[serde(default)]
    pub gold_passage_ids: Option<Vec<String>>,
}

/// Reads line-delimited eval records; blank lines are skipped.
pub fn load_eval_records<R: BufRead>(source: R) -> Result<Vec<EvalRecord>, EvalError> {
    let mut out = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: EvalRecord = serde_json::from_str(&line)
            .map_err(|e| EvalError::Format(format!("eval record line {}: {e}", i + 1)))?;
        if rec.question.trim().is_empty() {
            return Err(EvalError::Format(format!("eval record line {}: empty question", i + 1)));
        }
        out.push(rec);
    }
    Ok(out)
}

/// Slots for scores from an external judge model; never filled here.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct JudgeScores {
    pub correctness: Option<f64>,
    pub faithfulness: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionReport {
    pub index: usize,
    pub question: String,
    pub error: Option<String>,
    pub steps: usize,
    pub llm_calls: usize,
    /// Recall of gold passages in the first k entries of the passage memory.
    pub recall_at_k: Option<f64>,
    /// Recall of gold passages among the filtered passages.
    pub filtered_recall: Option<f64>,
    pub exact_match: Option<f64>,
    pub f1: Option<f64>,
    pub judge: JudgeScores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub k: usize,
    pub questions: usize,
    pub failures: usize,
    pub mean_recall_at_k: Option<f64>,
    pub mean_filtered_recall: Option<f64>,
    pub mean_exact_match: Option<f64>,
    pub mean_f1: Option<f64>,
    pub step_histogram: BTreeMap<usize, usize>,
    pub llm_call_histogram: BTreeMap<usize, usize>,
    pub judge: JudgeScores,
    pub per_question: Vec<QuestionReport>,
}

impl BatchReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is always serializable")
    }
}

#[derive(Debug, Clone)]
pub struct BatchOutput {
    pub report: BatchReport,
    /// One trace per input record, in input order.
    pub traces: Vec<PipelineTrace>,
}

/// Scores one question from its trace. Failed runs get no quality metrics.
pub fn score_question(
    index: usize,
    record: &EvalRecord,
    trace: &PipelineTrace,
    k: usize,
) -> QuestionReport {
    let ok = trace.error.is_none();
    let gold_ids = record.gold_passage_ids.as_deref().filter(|g| !g.is_empty());
    let answer = trace.answer.as_deref().filter(|_| ok);
    QuestionReport {
        index,
        question: record.question.clone(),
        error: trace.error.clone(),
        steps: trace.steps.len(),
        llm_calls: trace.llm_calls,
        recall_at_k: gold_ids
            .filter(|_| ok)
            .and_then(|g| recall_at_k(&trace.passage_memory, g, k)),
        filtered_recall: gold_ids
            .filter(|_| ok)
            .and_then(|g| recall_at_k(&trace.filtered_passages, g, usize::MAX)),
        exact_match: record
            .gold_answer
            .as_deref()
            .zip(answer)
            .map(|(g, a)| exact_match(a, g)),
        f1: record
            .gold_answer
            .as_deref()
            .zip(answer)
            .map(|(g, a)| token_f1(a, g)),
        judge: JudgeScores::default(),
    }
}

pub fn aggregate(k: usize, per_question: Vec<QuestionReport>) -> BatchReport {
    let mut step_histogram = BTreeMap::new();
    let mut llm_call_histogram = BTreeMap::new();
    for q in &per_question {
        *step_histogram.entry(q.steps).or_insert(0) += 1;
        *llm_call_histogram.entry(q.llm_calls).or_insert(0) += 1;
    }
    BatchReport {
        k,
        questions: per_question.len(),
        failures: per_question.iter().filter(|q| q.error.is_some()).count(),
        mean_recall_at_k: mean(per_question.iter().filter_map(|q| q.recall_at_k)),
        mean_filtered_recall: mean(per_question.iter().filter_map(|q| q.filtered_recall)),
        mean_exact_match: mean(per_question.iter().filter_map(|q| q.exact_match)),
        mean_f1: mean(per_question.iter().filter_map(|q| q.f1)),
        step_histogram,
        llm_call_histogram,
        judge: JudgeScores::default(),
        per_question,
    }
}

/// Recomputes a report from persisted traces.
pub fn report_from_traces(records: &[EvalRecord], traces: &[PipelineTrace], k: usize) -> BatchReport {
    aggregate(
        k,
        records
            .iter()
            .zip(traces)
            .enumerate()
            .map(|(i, (r, t))| score_question(i, r, t, k))
            .collect(),
    )
}

/// Runs every record through `agent` on up to `workers` threads. A failing
/// question is recorded with its partial trace and does not stop the batch.
pub fn run_batch<L: LlmClient>(
    records: &[EvalRecord],
    agent: &Agent<L>,
    corpus: &CorpusIndex,
    kg: &KgStore,
    workers: usize,
) -> BatchOutput {
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<PipelineTrace>>> = Mutex::new(vec![None; records.len()]);
    std::thread::scope(|s| {
        for _ in 0..workers.clamp(1, records.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(rec) = records.get(i) else { break };
                let trace = match agent.run(&rec.question, corpus, kg) {
                    Ok(t) => t,
                    Err(e) => {
                        tracing::warn!(index = i, error = %e.source, "question failed");
                        *e.trace
                    }
                };
                results.lock().expect("results poisoned")[i] = Some(trace);
            });
        }
    });
    let traces: Vec<PipelineTrace> = results
        .into_inner()
        .expect("results poisoned")
        .into_iter()
        .map(|t| t.expect("every question produces a trace"))
        .collect();
    let k = agent.config().k;
    BatchOutput {
        report: report_from_traces(records, &traces, k),
        traces,
    }
}

pub fn trace_file_name(index: usize) -> String {
    format!("trace-{index:04}.json")
}

/// Writes one JSON document per trace into `dir`.
pub fn write_traces(dir: &Path, traces: &[PipelineTrace]) -> Result<Vec<PathBuf>, EvalError> {
    std::fs::create_dir_all(dir)?;
    traces
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let path = dir.join(trace_file_name(i));
            std::fs::write(&path, t.to_json())?;
            Ok(path)
        })
        .collect()
}

pub fn read_traces(dir: &Path, count: usize) -> Result<Vec<PipelineTrace>, EvalError> {
    (0..count)
        .map(|i| {
            let text = std::fs::read_to_string(dir.join(trace_file_name(i)))?;
            PipelineTrace::from_json(&text).map_err(|e| EvalError::Format(e.to_string()))
        })
        .collect()
}
