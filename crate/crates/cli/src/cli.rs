// Copyright 2026 The faqfuse Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//! Argument parsing and subcommand implementations.

use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use faqfuse::bm25::IndexSnapshot;
use faqfuse::config::{PipelineConfig, ScorerSpec};
use faqfuse::corpus::{
    load_corpus, load_question_pairs, question_collection, save_corpus, split_corpus, Corpus, CorpusFormat,
    SplitRatios,
};
use faqfuse::eval::{evaluate_config, matching_metrics, sweep_topics, write_sweep_csv, SplitName};
use faqfuse::knowledge::{load_triplets, triplets_from_topics, InjectionConfig, KnowledgeBase};
use faqfuse::scorer::{RelevanceScorer, RemoteScorer, TfIdfScorer};
use faqfuse::tokenize::TokenizerMode;
use faqfuse::{plsa, Bm25Params, FusionConfig, Pipeline, PlsaConfig, TopicModel};
use serde_json::json;

use crate::service;
use crate::view::RetrieveResponse;

pub const CONFIG_ENV: &str = "FAQFUSE_CONFIG";

#[derive(Debug, Parser)]
#[command(name = "faqfuse", version, about = "Hybrid BM25 + relevance FAQ retrieval")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Split a corpus into train/valid/test files.
    Split(SplitArgs),
    /// Build a BM25 index snapshot.
    Index(IndexArgs),
    /// Train a PLSA topic model.
    TrainPlsa(TrainPlsaArgs),
    /// Mine topical triplets from a topic model.
    ExtractTriplets(ExtractArgs),
    /// Retrieve answers for a query.
    Query(QueryArgs),
    /// Score question pairs.
    Match(MatchArgs),
    /// Evaluate a pipeline config on one split.
    Eval(EvalArgs),
    /// Evaluate on the validation split for several topic counts.
    Sweep(SweepArgs),
    /// Serve the pipeline over HTTP.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// jsonl or tsv; guessed from the extension when omitted.
    #[arg(long)]
    pub format: Option<CorpusFormat>,
    #[arg(long, default_value_t = TokenizerMode::Char)]
    pub tokenizer: TokenizerMode,
}

impl CorpusArgs {
    fn load(&self) -> Result<Corpus> {
        let format = self.format.unwrap_or_else(|| CorpusFormat::from_path(&self.corpus));
        Ok(load_corpus(&self.corpus, format, self.tokenizer)?)
    }
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.68)]
    pub train: f64,
    #[arg(long, default_value_t = 0.2)]
    pub valid: f64,
    #[arg(long, default_value_t = 0.12)]
    pub test: f64,
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Index the distinct questions of a labelled pair file instead.
    #[arg(long)]
    pub pairs: bool,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1.2)]
    pub k1: f64,
    #[arg(long, default_value_t = 0.75)]
    pub b: f64,
}

#[derive(Debug, Args)]
pub struct TrainPlsaArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[arg(long, default_value_t = 10)]
    pub topics: usize,
    #[arg(long, default_value_t = 200)]
    pub iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub top_l: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Index snapshot from `faqfuse index`.
    #[arg(long)]
    pub index: PathBuf,
    /// Topic model whose top words are mined for triplets.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub top_l: usize,
    /// Triplet file (head, relation, tail per line); repeatable.
    #[arg(long)]
    pub kb: Vec<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 5)]
    pub vote: usize,
    /// Take the top-ranked pair's answer instead of voting.
    #[arg(long)]
    pub no_vote: bool,
    /// baseline, none, or remote:URL.
    #[arg(long, default_value = "baseline")]
    pub scorer: ScorerSpec,
    #[arg(long, default_value_t = 10_000)]
    pub timeout_ms: u64,
    #[arg(long, default_value_t = 2)]
    pub max_triplets: usize,
    #[arg(long, default_value_t = 128)]
    pub max_length: usize,
}

impl PipelineArgs {
    pub fn assemble(&self) -> Result<Pipeline> {
        if !self.index.exists() {
            bail!("index not found: {}", self.index.display());
        }
        let snap = IndexSnapshot::<f64>::load(&self.index)
            .with_context(|| format!("loading index {}", self.index.display()))?;
        let mut parts = Vec::new();
        for p in &self.kb {
            parts.push(load_triplets(p)?);
        }
        if let Some(m) = &self.model {
            let model = TopicModel::load(m).with_context(|| format!("loading topic model {}", m.display()))?;
            parts.push(triplets_from_topics(&model, self.top_l)?);
        }
        let knowledge = parts.into_iter().reduce(|a, b| a.merge(&b));
        let scorer: Option<Box<dyn RelevanceScorer<f64>>> = match &self.scorer {
            ScorerSpec::Baseline => Some(Box::new(TfIdfScorer::fit(&snap.corpus))),
            ScorerSpec::Remote { url, .. } => Some(Box::new(RemoteScorer::for_corpus(
                url.clone(),
                &snap.corpus,
                Duration::from_millis(self.timeout_ms),
            ))),
            ScorerSpec::None => None,
        };
        let injection = InjectionConfig {
            max_triplets_per_token: self.max_triplets,
            max_sequence_length: self.max_length,
            ..InjectionConfig::default()
        };
        let fusion = FusionConfig {
            alpha: self.alpha,
            vote_m: self.vote,
            voting_enabled: !self.no_vote,
        };
        Ok(Pipeline::new(snap.corpus, snap.index, knowledge, injection, scorer, fusion)?)
    }
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[arg(long, default_value_t = service::DEFAULT_TOP_K)]
    pub top_k: usize,
    pub text: String,
}

#[derive(Debug, Args)]
pub struct MatchArgs {
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// Labelled pairs (left, right, 0/1 per line); metrics are reported too.
    #[arg(long, conflicts_with = "texts")]
    pub pairs: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// A single LEFT RIGHT pair.
    #[arg(num_args = 2, value_names = ["LEFT", "RIGHT"])]
    pub texts: Vec<String>,
}

#[derive(Debug, Args)]
pub struct ConfigArg {
    /// Pipeline config JSON; falls back to $FAQFUSE_CONFIG.
    #[arg(long)]
    pub pipeline_config: Option<PathBuf>,
}

impl ConfigArg {
    pub fn load(&self) -> Result<PipelineConfig> {
        let path = match &self.pipeline_config {
            Some(p) => p.clone(),
            None => match std::env::var_os(CONFIG_ENV) {
                Some(p) => PathBuf::from(p),
                None => bail!("no pipeline config: pass --pipeline-config or set {CONFIG_ENV}"),
            },
        };
        PipelineConfig::load(&path).with_context(|| format!("loading config {}", path.display()))
    }
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[arg(long, default_value = "test")]
    pub split: SplitName,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[arg(long, value_delimiter = ',', default_value = "1,5,10,15,20,25")]
    pub topics: Vec<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub bind: SocketAddr,
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn to_json_line<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Split(a) => split(a),
        Command::Index(a) => index(a),
        Command::TrainPlsa(a) => train_plsa(a),
        Command::ExtractTriplets(a) => extract_triplets(a),
        Command::Query(a) => query(a),
        Command::Match(a) => match_pairs(a),
        Command::Eval(a) => eval(a),
        Command::Sweep(a) => sweep(a),
        Command::Serve(a) => serve(a),
    }
}

fn split(a: SplitArgs) -> Result<()> {
    let corpus = a.corpus.load()?;
    let ratios = SplitRatios::new(a.train, a.valid, a.test)?;
    let (train, valid, test) = split_corpus(&corpus, ratios, a.seed)?;
    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    for (name, part) in [("train", &train), ("valid", &valid), ("test", &test)] {
        let path = a.out_dir.join(format!("{name}.jsonl"));
        save_corpus(part, &path, CorpusFormat::Jsonl)?;
        log::info!("{name}: {} pairs -> {}", part.len(), path.display());
    }
    Ok(())
}

fn index(a: IndexArgs) -> Result<()> {
    let corpus = if a.pairs {
        question_collection(&load_question_pairs(&a.corpus.corpus)?, a.corpus.tokenizer)?
    } else {
        a.corpus.load()?
    };
    let params = Bm25Params::new(a.k1, a.b)?;
    let index = faqfuse::Bm25Index::build(&corpus, params)?;
    log::info!(
        "indexed {} questions, {} terms, avg length {:.3}",
        index.n_questions(),
        index.vocabulary_len(),
        index.avg_len()
    );
    IndexSnapshot::new(index, corpus).save(&a.out)?;
    Ok(())
}

fn train_plsa(a: TrainPlsaArgs) -> Result<()> {
    let corpus = a.corpus.load()?;
    let config = PlsaConfig {
        max_iterations: a.iters,
        tolerance: a.tolerance,
        ..PlsaConfig::with_topics(a.topics, a.seed)
    };
    let model = plsa::train(&corpus, config)?;
    log::info!(
        "K = {}: {} iterations, log-likelihood {}",
        a.topics,
        model.log_likelihood_trace.len() - 1,
        model.final_log_likelihood
    );
    model.save(&a.out)?;
    Ok(())
}

fn extract_triplets(a: ExtractArgs) -> Result<()> {
    let model = TopicModel::load(&a.model).with_context(|| format!("loading topic model {}", a.model.display()))?;
    let kb: KnowledgeBase = triplets_from_topics(&model, a.top_l)?;
    log::info!("{} triplets", kb.len());
    kb.save(&a.out)?;
    Ok(())
}

fn query(a: QueryArgs) -> Result<()> {
    if a.top_k == 0 {
        bail!("--top-k must be positive");
    }
    let pipeline = a.pipeline.assemble()?;
    let ranked = pipeline.retrieve(&a.text)?;
    write_output(None, &to_json_line(&RetrieveResponse::new(&pipeline, &ranked, a.top_k))?)
}

fn match_pairs(a: MatchArgs) -> Result<()> {
    let pipeline = a.pipeline.assemble()?;
    let report = match (&a.pairs, a.texts.as_slice()) {
        (Some(path), _) => {
            let pairs = load_question_pairs(path)?;
            let mut outcomes = Vec::with_capacity(pairs.len());
            for p in &pairs {
                let m = pipeline.match_pair(&p.left, &p.right)?;
                outcomes.push(json!({
                    "left": p.left,
                    "right": p.right,
                    "gold": p.label,
                    "bm25_raw": m.bm25_raw,
                    "bm25_norm": m.bm25_norm,
                    "similarity": m.similarity,
                    "score": m.score,
                    "label": m.label,
                }));
            }
            let predictions: Vec<u8> = outcomes.iter().map(|o| o["label"].as_u64().unwrap_or(0) as u8).collect();
            let golds: Vec<u8> = pairs.iter().map(|p| p.label).collect();
            let metrics = matching_metrics::<f64>(&predictions, &golds)?;
            json!({ "pairs": outcomes, "metrics": metrics })
        }
        (None, [left, right]) => serde_json::to_value(pipeline.match_pair(left, right)?)?,
        _ => bail!("pass --pairs FILE or a LEFT RIGHT pair"),
    };
    write_output(a.out.as_deref(), &to_json_line(&report)?)
}

fn eval(a: EvalArgs) -> Result<()> {
    let config = a.config.load()?;
    let report = evaluate_config(&config, a.split)?;
    let m = &report.metrics;
    log::info!(
        "{:?} split, {} queries: accuracy {:.4}, F1 {:.4}",
        report.split,
        report.queries,
        m.accuracy,
        m.f1
    );
    write_output(a.out.as_deref(), &to_json_line(&report)?)
}

fn sweep(a: SweepArgs) -> Result<()> {
    let config = a.config.load()?;
    let rows = sweep_topics(&config, &a.topics)?;
    let mut buf = Vec::new();
    write_sweep_csv(&rows, &mut buf)?;
    write_output(a.out.as_deref(), std::str::from_utf8(&buf)?)
}

fn serve(a: ServeArgs) -> Result<()> {
    let config = a.config.load()?;
    let pipeline = config.assemble_for_task().context("assembling pipeline")?;
    log::info!(
        "pipeline ready: {} pairs, scorer {}",
        pipeline.corpus().len(),
        pipeline.scorer_name().unwrap_or_else(|| "none".into())
    );
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(service::serve(Arc::new(pipeline), a.bind))
}
