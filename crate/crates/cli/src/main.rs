use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use graphrag_core::agent::Agent;
use graphrag_core::evalkit::{
    default_taxonomy, load_eval_records, run_batch, sample_combinations, trace_file_name,
    write_traces, EngineConfig, TaxonomyConfig,
};
use graphrag_core::kg::{load_kg, KgLoadOptions, KgStore};
use graphrag_core::llm::LlmClient;
use graphrag_core::retrieval::{ingest_corpus_with, CorpusIndex, HashedTfEmbedder};

#[derive(Parser)]
#[command(name = "graphrag", version, about = "Graph-enhanced agentic retrieval and QA")]
struct Cli {
    /// Engine configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Scripted mock responses (JSON); replaces the HTTP backend.
    #[arg(long, global = true)]
    mock_script: Option<PathBuf>,
    /// Directory for per-question trace documents.
    #[arg(long, global = true)]
    trace_dir: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Index a JSONL corpus (`id`, `text` per line).
    Ingest {
        corpus: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Preprocess a JSONL triples file into a KG store.
    LoadKg {
        triples: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Keep triples whose object is a literal.
        #[arg(long)]
        keep_literals: bool,
    },
    /// Answer one question.
    Ask {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        kg: PathBuf,
        question: String,
    },
    /// Evaluate a JSONL file of questions and write a report.
    Batch {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        kg: PathBuf,
        eval: PathBuf,
        /// Report path; stdout when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Draw taxonomy combinations (one JSON object per line).
    SampleTaxonomy {
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Taxonomy file (TOML); the built-in taxonomy when absent.
        #[arg(long)]
        taxonomy: Option<PathBuf>,
    },
}

enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

trait OrFail<T> {
    fn usage(self) -> Result<T, Failure>;
    fn runtime(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> OrFail<T> for Result<T, E> {
    fn usage(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Usage(e.into()))
    }
    fn runtime(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Runtime(e.into()))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("warn")),
        )
        .with_writer(std::io::stderr)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let config = match &cli.config {
        Some(path) => EngineConfig::load(path).usage()?,
        None => EngineConfig::default(),
    };
    match cli.command {
        Command::Ingest { corpus, output } => {
            let reader = open(&corpus)?;
            let (index, report) = ingest_corpus_with(
                reader,
                config.bm25,
                Arc::new(HashedTfEmbedder::default()),
            )
            .with_context(|| format!("ingesting {}", corpus.display()))
            .runtime()?;
            index.save(create(&output)?).runtime()?;
            println!("{}", serde_json::to_string(&report).runtime()?);
        }
        Command::LoadKg {
            triples,
            output,
            keep_literals,
        } => {
            let options = KgLoadOptions {
                literal_filter: !keep_literals,
            };
            let (store, report) = load_kg(open(&triples)?, options)
                .with_context(|| format!("loading {}", triples.display()))
                .runtime()?;
            store.save(create(&output)?).runtime()?;
            println!("{}", serde_json::to_string(&report).runtime()?);
        }
        Command::Ask {
            index,
            kg,
            question,
        } => {
            let agent = build_agent(&config, cli.mock_script.as_deref())?;
            let (corpus, store) = load_engine(&index, &kg)?;
            let result = agent.run(&question, &corpus, &store);
            let trace = match &result {
                Ok(t) => t.clone(),
                Err(e) => (*e.trace).clone(),
            };
            if let Some(dir) = &cli.trace_dir {
                std::fs::create_dir_all(dir).runtime()?;
                let path = dir.join(trace_file_name(0));
                std::fs::write(&path, trace.to_json()).runtime()?;
                eprintln!("trace: {}", path.display());
            }
            let trace = result.map_err(|e| anyhow!(e.source)).runtime()?;
            println!("{}", trace.answer.unwrap_or_default());
        }
        Command::Batch {
            index,
            kg,
            eval,
            output,
        } => {
            let agent = build_agent(&config, cli.mock_script.as_deref())?;
            let (corpus, store) = load_engine(&index, &kg)?;
            let records = load_eval_records(open(&eval)?)
                .with_context(|| format!("reading {}", eval.display()))
                .runtime()?;
            let out = run_batch(&records, &agent, &corpus, &store, config.batch_workers);
            if let Some(dir) = &cli.trace_dir {
                write_traces(dir, &out.traces).runtime()?;
            }
            let json = out.report.to_json();
            match output {
                Some(path) => std::fs::write(&path, json + "\n").runtime()?,
                None => println!("{json}"),
            }
        }
        Command::SampleTaxonomy { count, taxonomy } => {
            let cfg = match taxonomy {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .with_context(|| format!("reading {}", path.display()))
                        .usage()?;
                    TaxonomyConfig::from_toml(&text).usage()?
                }
                None => default_taxonomy(),
            };
            let draws = sample_combinations(&cfg, cli.seed, count).usage()?;
            let mut out = std::io::stdout().lock();
            for c in draws {
                writeln!(out, "{}", serde_json::to_string(&c).runtime()?).runtime()?;
            }
        }
    }
    Ok(())
}

fn build_agent(
    config: &EngineConfig,
    mock_script: Option<&Path>,
) -> Result<Agent<Arc<dyn LlmClient>>, Failure> {
    let llm = config.build_llm(mock_script).usage()?;
    Ok(Agent::new(llm, config.agent.clone()).with_prompts(config.prompts().usage()?))
}

fn load_engine(index: &Path, kg: &Path) -> Result<(CorpusIndex, KgStore), Failure> {
    let corpus = CorpusIndex::load(open(index)?)
        .with_context(|| format!("loading index {}", index.display()))
        .runtime()?;
    let store = KgStore::load(open(kg)?)
        .with_context(|| format!("loading KG store {}", kg.display()))
        .runtime()?;
    Ok((corpus, store))
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .with_context(|| format!("opening {}", path.display()))
        .runtime()
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .with_context(|| format!("creating {}", path.display()))
        .runtime()
}
