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
//! Retrieval and matching metrics, evaluation runs and the topic-count sweep.
//!
//! Retrieval precision, recall and F1 are macro-averaged over the gold answer
//! classes, treating the chosen answer as the predicted class. A class that is
//! never predicted has precision 0. F1 is the harmonic mean of the two macro
//! averages. MRR ranks distinct answers by their best-scoring pair.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::config::{PipelineConfig, Task, TopicalKnowledge};
use crate::corpus::{AnswerId, Corpus, QuestionPair};
use crate::error::{Error, Result};
use crate::rank::{Pipeline, RankedList};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetrievalResult {
    pub query_id: String,
    pub gold_answer_id: AnswerId,
    /// Distinct answers, best first.
    pub ranked_answer_ids: Vec<AnswerId>,
    pub chosen_answer_id: AnswerId,
}

impl RetrievalResult {
    pub fn from_ranked<F: Scalar>(query_id: impl Into<String>, gold: AnswerId, ranked: &RankedList<F>) -> Self {
        RetrievalResult {
            query_id: query_id.into(),
            gold_answer_id: gold,
            ranked_answer_ids: ranked.ranked_answers(),
            chosen_answer_id: ranked.chosen_answer.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct MetricsReport<F> {
    pub precision: F,
    pub recall: F,
    pub f1: F,
    pub accuracy: F,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mrr: Option<F>,
}

fn ratio<F: Scalar>(num: usize, den: usize) -> F {
    if den == 0 {
        F::zero()
    } else {
        F::of_usize(num) / F::of_usize(den)
    }
}

fn harmonic<F: Scalar>(p: F, r: F) -> F {
    if p + r > F::zero() {
        F::of(2.0) * p * r / (p + r)
    } else {
        F::zero()
    }
}

/// Mean reciprocal rank of the gold answer; a missing gold contributes 0.
pub fn mrr<F: Scalar>(results: &[RetrievalResult]) -> Result<F> {
    if results.is_empty() {
        return Err(Error::invalid("MRR of an empty result list"));
    }
    let total: F = results
        .iter()
        .map(|r| {
            r.ranked_answer_ids
                .iter()
                .position(|a| *a == r.gold_answer_id)
                .map_or_else(F::zero, |i| F::one() / F::of_usize(i + 1))
        })
        .sum();
    Ok(total / F::of_usize(results.len()))
}

pub fn classification_metrics<F: Scalar>(results: &[RetrievalResult]) -> Result<MetricsReport<F>> {
    if results.is_empty() {
        return Err(Error::invalid("no results to evaluate"));
    }
    // class -> (true positives, gold count); BTreeMap keeps the reduction order fixed
    let mut classes: BTreeMap<&AnswerId, (usize, usize)> = BTreeMap::new();
    let mut predicted: HashMap<&AnswerId, usize> = HashMap::new();
    let mut correct = 0;
    for r in results {
        let entry = classes.entry(&r.gold_answer_id).or_default();
        entry.1 += 1;
        if r.chosen_answer_id == r.gold_answer_id {
            entry.0 += 1;
            correct += 1;
        }
        *predicted.entry(&r.chosen_answer_id).or_default() += 1;
    }
    let n_classes = F::of_usize(classes.len());
    let mut precision = F::zero();
    let mut recall = F::zero();
    for (class, &(tp, gold)) in &classes {
        precision = precision + ratio::<F>(tp, predicted.get(class).copied().unwrap_or(0));
        recall = recall + ratio::<F>(tp, gold);
    }
    let precision = precision / n_classes;
    let recall = recall / n_classes;
    Ok(MetricsReport {
        precision,
        recall,
        f1: harmonic(precision, recall),
        accuracy: ratio(correct, results.len()),
        mrr: None,
    })
}

/// Classification metrics plus MRR.
pub fn retrieval_metrics<F: Scalar>(results: &[RetrievalResult]) -> Result<MetricsReport<F>> {
    let mut report = classification_metrics(results)?;
    report.mrr = Some(mrr(results)?);
    Ok(report)
}

/// Binary metrics on the positive class (label 1).
pub fn matching_metrics<F: Scalar>(predictions: &[u8], golds: &[u8]) -> Result<MetricsReport<F>> {
    if predictions.len() != golds.len() {
        return Err(Error::invalid(format!(
            "{} predictions for {} gold labels",
            predictions.len(),
            golds.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::invalid("no predictions to evaluate"));
    }
    let (mut tp, mut fp, mut fneg, mut correct) = (0, 0, 0, 0);
    for (&p, &g) in predictions.iter().zip(golds) {
        match (p == 1, g == 1) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fneg += 1,
            (false, false) => {}
        }
        if (p == 1) == (g == 1) {
            correct += 1;
        }
    }
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fneg);
    Ok(MetricsReport {
        precision,
        recall,
        f1: harmonic(precision, recall),
        accuracy: ratio(correct, predictions.len()),
        mrr: None,
    })
}

/// Runs every pair of `queries` through the pipeline, its question as the
/// query and its answer as the gold.
pub fn evaluate_retrieval<F: Scalar>(
    pipeline: &Pipeline<F>,
    queries: &Corpus,
) -> Result<(MetricsReport<F>, Vec<RetrievalResult>)> {
    let results = queries
        .pairs()
        .iter()
        .map(|p| {
            let ranked = pipeline.retrieve(&p.question)?;
            Ok(RetrievalResult::from_ranked(p.id.clone(), p.answer_id.clone(), &ranked))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((retrieval_metrics(&results)?, results))
}

pub fn evaluate_matching<F: Scalar>(pipeline: &Pipeline<F>, pairs: &[QuestionPair]) -> Result<MetricsReport<F>> {
    let mut predictions = Vec::with_capacity(pairs.len());
    for p in pairs {
        predictions.push(pipeline.match_pair(&p.left, &p.right)?.label);
    }
    let golds: Vec<u8> = pairs.iter().map(|p| p.label).collect();
    matching_metrics(&predictions, &golds)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitName {
    Train,
    Valid,
    Test,
}

impl std::str::FromStr for SplitName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(SplitName::Train),
            "valid" | "validation" => Ok(SplitName::Valid),
            "test" => Ok(SplitName::Test),
            other => Err(Error::invalid(format!("unknown split {other:?}"))),
        }
    }
}

fn pick<T>(parts: (T, T, T), split: SplitName) -> T {
    match split {
        SplitName::Train => parts.0,
        SplitName::Valid => parts.1,
        SplitName::Test => parts.2,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub task: Task,
    pub split: SplitName,
    pub queries: usize,
    pub metrics: MetricsReport<f64>,
    pub config_fingerprint: String,
}

/// Evaluates the configured task on one split. The pipeline is built over the
/// training split (or the configured index).
pub fn evaluate_config(config: &PipelineConfig, split: SplitName) -> Result<EvalReport> {
    let fingerprint = config.fingerprint();
    let (queries, metrics) = match config.task {
        Task::Faq => {
            let parts = config.split_corpus()?;
            let train = parts.0.clone();
            let queries = pick(parts, split);
            if queries.is_empty() {
                return Err(Error::invalid(format!("the {split:?} split is empty")));
            }
            let pipeline = config.assemble(train)?;
            (queries.len(), evaluate_retrieval(&pipeline, &queries)?.0)
        }
        Task::Match => {
            let parts = config.split_pairs()?;
            let pipeline = config.assemble(crate::corpus::question_collection(&parts.0, config.tokenizer)?)?;
            let queries = pick(parts, split);
            if queries.is_empty() {
                return Err(Error::invalid(format!("the {split:?} split is empty")));
            }
            (queries.len(), evaluate_matching(&pipeline, &queries)?)
        }
    };
    Ok(EvalReport {
        task: config.task,
        split,
        queries,
        metrics,
        config_fingerprint: fingerprint,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub k_topics: usize,
    pub metrics: Option<MetricsReport<f64>>,
    pub error: Option<String>,
}

/// For every K: train a topic model on the training split, mine topical
/// triplets, assemble the FAQ pipeline and evaluate on the validation split.
/// A failing K is recorded and the sweep moves on.
pub fn sweep_topics(config: &PipelineConfig, k_values: &[usize]) -> Result<Vec<SweepRow>> {
    if k_values.is_empty() {
        return Err(Error::invalid("no topic counts to sweep"));
    }
    if config.task != Task::Faq {
        return Err(Error::invalid("the topic sweep runs on the FAQ task"));
    }
    let (train, valid, _) = config.split_corpus()?;
    if valid.is_empty() {
        return Err(Error::invalid("the validation split is empty"));
    }
    let mut rows = Vec::with_capacity(k_values.len());
    for &k in k_values {
        let mut cfg = config.clone();
        cfg.plsa.k_topics = k;
        let top_l = cfg.knowledge.topical.as_ref().map_or(10, |t| t.top_l);
        // always mine a fresh model for this K
        cfg.knowledge.topical = Some(TopicalKnowledge { top_l, model: None });
        let outcome = cfg
            .assemble(train.clone())
            .and_then(|p| evaluate_retrieval(&p, &valid).map(|(m, _)| m));
        rows.push(match outcome {
            Ok(m) => SweepRow {
                k_topics: k,
                metrics: Some(m),
                error: None,
            },
            Err(e) => {
                log::warn!("sweep: K = {k} failed: {e}");
                SweepRow {
                    k_topics: k,
                    metrics: None,
                    error: Some(e.to_string()),
                }
            }
        });
    }
    Ok(rows)
}

/// Writes sweep rows as CSV with a header line.
pub fn write_sweep_csv(rows: &[SweepRow], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "k_topics,precision,recall,f1,accuracy,mrr,error")?;
    for r in rows {
        match &r.metrics {
            Some(m) => writeln!(
                out,
                "{},{},{},{},{},{},",
                r.k_topics,
                m.precision,
                m.recall,
                m.f1,
                m.accuracy,
                m.mrr.map(|v| v.to_string()).unwrap_or_default()
            )?,
            None => writeln!(
                out,
                "{},,,,,,\"{}\"",
                r.k_topics,
                r.error.as_deref().unwrap_or("").replace('"', "'")
            )?,
        }
    }
    Ok(())
}
