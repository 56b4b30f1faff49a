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
//! Query–answer relevance scorers.
//!
//! A scorer is fixed to an answer set at construction and maps a query to a
//! posterior over those answers. Two backends ship here: a deterministic
//! TF-IDF baseline and an HTTP client for an external model service.

use std::collections::{BTreeMap, HashMap};
use std::time::Duration;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{AnswerId, Corpus};
use crate::knowledge::InjectedSequence;
use crate::scalar::{compensated_sum, Scalar};
use crate::tokenize::{tokenize, TokenizerMode};

/// Sum-to-one tolerance for distributions produced locally.
pub const DISTRIBUTION_TOLERANCE: f64 = 1e-6;
/// Looser tolerance accepted from remote services before renormalizing.
pub const REMOTE_DISTRIBUTION_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum ScorerError {
    #[error("request to {url} timed out")]
    Timeout { url: String },
    #[error("cannot reach {url}: {message}")]
    Transport { url: String, message: String },
    #[error("{url} answered with HTTP {status}")]
    Status { url: String, status: u16 },
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error("{0}")]
    Invalid(String),
}

/// Posterior over a fixed set of distinct answers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct AnswerDistribution<F> {
    probs: IndexMap<AnswerId, F>,
}

impl<F: Scalar> AnswerDistribution<F> {
    /// Checks non-negativity and that the mass sums to one within `tolerance`.
    pub fn new(probs: IndexMap<AnswerId, F>, tolerance: f64) -> Result<Self, ScorerError> {
        if probs.is_empty() {
            return Err(ScorerError::Invalid("empty answer distribution".into()));
        }
        if let Some((id, p)) = probs.iter().find(|(_, p)| !(**p >= F::zero() && **p <= F::one())) {
            return Err(ScorerError::Invalid(format!("probability {p} for {id} is outside [0, 1]")));
        }
        let total = compensated_sum(probs.values().copied());
        if (total - F::one()).abs() > F::of(tolerance) {
            return Err(ScorerError::Invalid(format!("probabilities sum to {total}")));
        }
        Ok(AnswerDistribution { probs })
    }

    pub fn get(&self, id: &AnswerId) -> F {
        self.probs.get(id).copied().unwrap_or_else(F::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&AnswerId, F)> {
        self.probs.iter().map(|(k, v)| (k, *v))
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total(&self) -> F {
        compensated_sum(self.probs.values().copied())
    }

    /// Most probable answer, first in order on ties.
    pub fn argmax(&self) -> Option<&AnswerId> {
        let mut best: Option<(&AnswerId, F)> = None;
        for (id, p) in self.iter() {
            if best.is_none_or(|(_, b)| p > b) {
                best = Some((id, p));
            }
        }
        best.map(|(id, _)| id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct PairScore<F> {
    pub similarity: F,
}

impl<F: Scalar> PairScore<F> {
    pub fn new(similarity: F) -> Result<Self, ScorerError> {
        if !(similarity >= F::zero() && similarity <= F::one()) {
            return Err(ScorerError::Invalid(format!("similarity {similarity} outside [0, 1]")));
        }
        Ok(PairScore { similarity })
    }
}

/// A query–answer relevance model.
///
/// `injected` carries the knowledge-augmented query; backends that cannot use
/// it score the plain query text.
pub trait RelevanceScorer<F: Scalar>: Send + Sync {
    fn name(&self) -> String;

    fn answer_ids(&self) -> &[AnswerId];

    fn score_answers(
        &self,
        query: &str,
        injected: Option<&InjectedSequence>,
    ) -> Result<AnswerDistribution<F>, ScorerError>;

    fn score_pair(
        &self,
        left: &str,
        right: &str,
        injected_left: Option<&InjectedSequence>,
        injected_right: Option<&InjectedSequence>,
    ) -> Result<PairScore<F>, ScorerError>;
}

/// TF-IDF cosine between the query and each answer, turned into a
/// distribution by a unit-temperature softmax.
///
/// Term weights are `tf * idf` with `idf(w) = ln((1 + N) / (1 + df(w))) + 1`
/// over the N distinct answers; unseen terms take `df = 0`.
#[derive(Debug, Clone)]
pub struct TfIdfScorer<F> {
    tokenizer: TokenizerMode,
    answer_ids: Vec<AnswerId>,
    doc_freq: HashMap<String, usize>,
    n_docs: usize,
    /// Per answer: term -> weight, with the vector norm.
    vectors: Vec<(BTreeMap<String, F>, F)>,
}

impl<F: Scalar> TfIdfScorer<F> {
    pub fn fit(corpus: &Corpus) -> Self {
        Self::from_documents(
            corpus.tokenizer(),
            corpus.answers().iter().map(|(id, text)| (id.clone(), text.as_str())),
        )
    }

    pub fn from_documents<'a>(
        tokenizer: TokenizerMode,
        docs: impl IntoIterator<Item = (AnswerId, &'a str)>,
    ) -> Self {
        let mut answer_ids = Vec::new();
        let mut tokenized = Vec::new();
        let mut doc_freq: HashMap<String, usize> = HashMap::new();
        for (id, text) in docs {
            let tokens = tokenize(text, tokenizer);
            let mut seen: Vec<&String> = tokens.iter().collect();
            seen.sort_unstable();
            seen.dedup();
            for t in seen {
                *doc_freq.entry(t.clone()).or_default() += 1;
            }
            answer_ids.push(id);
            tokenized.push(tokens);
        }
        let mut scorer = TfIdfScorer {
            tokenizer,
            answer_ids,
            doc_freq,
            n_docs: tokenized.len(),
            vectors: Vec::new(),
        };
        scorer.vectors = tokenized.iter().map(|t| scorer.vector(t)).collect();
        scorer
    }

    pub fn idf(&self, term: &str) -> F {
        let df = self.doc_freq.get(term).copied().unwrap_or(0);
        (F::of_usize(1 + self.n_docs) / F::of_usize(1 + df)).ln() + F::one()
    }

    fn vector(&self, tokens: &[String]) -> (BTreeMap<String, F>, F) {
        let mut tf: BTreeMap<String, usize> = BTreeMap::new();
        for t in tokens {
            *tf.entry(t.clone()).or_default() += 1;
        }
        let weights: BTreeMap<String, F> = tf
            .into_iter()
            .map(|(t, c)| {
                let w = F::of_usize(c) * self.idf(&t);
                (t, w)
            })
            .collect();
        let norm = weights.values().map(|&w| w * w).sum::<F>().sqrt();
        (weights, norm)
    }

    fn cosine(a: &(BTreeMap<String, F>, F), b: &(BTreeMap<String, F>, F)) -> F {
        if a.1 == F::zero() || b.1 == F::zero() {
            return F::zero();
        }
        let (small, large) = if a.0.len() <= b.0.len() { (a, b) } else { (b, a) };
        let dot: F = small
            .0
            .iter()
            .filter_map(|(t, &w)| large.0.get(t).map(|&v| w * v))
            .sum();
        (dot / (a.1 * b.1)).max(F::zero()).min(F::one())
    }

    /// Cosine similarity of `query` with every answer, in answer order.
    pub fn cosines(&self, query: &str) -> Vec<F> {
        let q = self.vector(&tokenize(query, self.tokenizer));
        self.vectors.iter().map(|a| Self::cosine(&q, a)).collect()
    }

    pub fn similarity(&self, left: &str, right: &str) -> F {
        let l = self.vector(&tokenize(left, self.tokenizer));
        let r = self.vector(&tokenize(right, self.tokenizer));
        Self::cosine(&l, &r)
    }
}

/// Numerically stable softmax.
pub fn softmax<F: Scalar>(logits: &[F]) -> Vec<F> {
    let max = logits.iter().copied().fold(F::neg_infinity(), F::max);
    let exps: Vec<F> = logits.iter().map(|&x| (x - max).exp()).collect();
    let total = compensated_sum(exps.iter().copied());
    exps.into_iter().map(|e| e / total).collect()
}

impl<F: Scalar> RelevanceScorer<F> for TfIdfScorer<F> {
    fn name(&self) -> String {
        "tfidf-baseline".into()
    }

    fn answer_ids(&self) -> &[AnswerId] {
        &self.answer_ids
    }

    fn score_answers(
        &self,
        query: &str,
        _injected: Option<&InjectedSequence>,
    ) -> Result<AnswerDistribution<F>, ScorerError> {
        let probs = softmax(&self.cosines(query));
        AnswerDistribution::new(
            self.answer_ids.iter().cloned().zip(probs).collect(),
            DISTRIBUTION_TOLERANCE,
        )
    }

    fn score_pair(
        &self,
        left: &str,
        right: &str,
        _injected_left: Option<&InjectedSequence>,
        _injected_right: Option<&InjectedSequence>,
    ) -> Result<PairScore<F>, ScorerError> {
        PairScore::new(self.similarity(left, right))
    }
}

/// JSON bodies of the `/score` and `/health` endpoints.
pub mod protocol {
    use super::*;

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    #[serde(tag = "mode", rename_all = "lowercase")]
    pub enum ScoreRequest {
        Faq {
            query: String,
            #[serde(default)]
            injected: Option<InjectedSequence>,
            answer_ids: Vec<AnswerId>,
        },
        Match {
            left: String,
            right: String,
            #[serde(default)]
            injected_left: Option<InjectedSequence>,
            #[serde(default)]
            injected_right: Option<InjectedSequence>,
        },
    }

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct FaqResponse {
        pub probs: IndexMap<AnswerId, f64>,
    }

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct MatchResponse {
        pub similarity: f64,
    }

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct HealthResponse {
        pub status: String,
        pub model: String,
    }
}

use protocol::{FaqResponse, HealthResponse, MatchResponse, ScoreRequest};

/// Client for a scorer service speaking the `/score` protocol. No retries.
#[derive(Debug, Clone)]
pub struct RemoteScorer {
    base_url: String,
    answer_ids: Vec<AnswerId>,
    agent: ureq::Agent,
}

pub const DEFAULT_REMOTE_TIMEOUT: Duration = Duration::from_secs(10);

impl RemoteScorer {
    pub fn new(base_url: impl Into<String>, answer_ids: Vec<AnswerId>, timeout: Duration) -> Self {
        let agent = ureq::AgentBuilder::new().timeout(timeout).build();
        RemoteScorer {
            base_url: base_url.into().trim_end_matches('/').to_owned(),
            answer_ids,
            agent,
        }
    }

    pub fn for_corpus(base_url: impl Into<String>, corpus: &Corpus, timeout: Duration) -> Self {
        Self::new(base_url, corpus.answers().keys().cloned().collect(), timeout)
    }

    fn url(&self, path: &str) -> String {
        format!("{}{}", self.base_url, path)
    }

    fn map_err(&self, url: &str, err: ureq::Error) -> ScorerError {
        match err {
            ureq::Error::Status(status, _) => ScorerError::Status {
                url: url.to_owned(),
                status,
            },
            ureq::Error::Transport(t) => {
                if is_timeout(&t) {
                    ScorerError::Timeout { url: url.to_owned() }
                } else {
                    ScorerError::Transport {
                        url: url.to_owned(),
                        message: t.to_string(),
                    }
                }
            }
        }
    }

    fn post<T: serde::de::DeserializeOwned>(&self, body: &ScoreRequest) -> Result<T, ScorerError> {
        let url = self.url("/score");
        let resp = self
            .agent
            .post(&url)
            .send_json(body)
            .map_err(|e| self.map_err(&url, e))?;
        let text = resp.into_string().map_err(|e| {
            if matches!(e.kind(), std::io::ErrorKind::TimedOut | std::io::ErrorKind::WouldBlock) {
                ScorerError::Timeout { url: url.clone() }
            } else {
                ScorerError::Transport {
                    url: url.clone(),
                    message: e.to_string(),
                }
            }
        })?;
        serde_json::from_str(&text)
            .map_err(|e| ScorerError::Protocol(format!("malformed response from {url}: {e}")))
    }

    pub fn health(&self) -> Result<HealthResponse, ScorerError> {
        let url = self.url("/health");
        let resp = self.agent.get(&url).call().map_err(|e| self.map_err(&url, e))?;
        resp.into_json()
            .map_err(|e| ScorerError::Protocol(format!("malformed health response: {e}")))
    }
}

fn is_timeout(t: &ureq::Transport) -> bool {
    let mut source: Option<&(dyn std::error::Error + 'static)> = std::error::Error::source(t);
    while let Some(err) = source {
        if let Some(io) = err.downcast_ref::<std::io::Error>() {
            if matches!(io.kind(), std::io::ErrorKind::TimedOut | std::io::ErrorKind::WouldBlock) {
                return true;
            }
        }
        source = err.source();
    }
    t.to_string().contains("timed out")
}

impl<F: Scalar> RelevanceScorer<F> for RemoteScorer {
    fn name(&self) -> String {
        format!("remote:{}", self.base_url)
    }

    fn answer_ids(&self) -> &[AnswerId] {
        &self.answer_ids
    }

    fn score_answers(
        &self,
        query: &str,
        injected: Option<&InjectedSequence>,
    ) -> Result<AnswerDistribution<F>, ScorerError> {
        let req = ScoreRequest::Faq {
            query: query.to_owned(),
            injected: injected.cloned(),
            answer_ids: self.answer_ids.clone(),
        };
        let resp: FaqResponse = self.post(&req)?;
        validate_remote_probs(&self.answer_ids, resp.probs)
    }

    fn score_pair(
        &self,
        left: &str,
        right: &str,
        injected_left: Option<&InjectedSequence>,
        injected_right: Option<&InjectedSequence>,
    ) -> Result<PairScore<F>, ScorerError> {
        let req = ScoreRequest::Match {
            left: left.to_owned(),
            right: right.to_owned(),
            injected_left: injected_left.cloned(),
            injected_right: injected_right.cloned(),
        };
        let resp: MatchResponse = self.post(&req)?;
        if !(0.0..=1.0).contains(&resp.similarity) {
            return Err(ScorerError::Protocol(format!(
                "similarity {} outside [0, 1]",
                resp.similarity
            )));
        }
        Ok(PairScore {
            similarity: F::of(resp.similarity),
        })
    }
}

/// Checks a remote answer posterior against the requested ids. Mass within
/// the remote tolerance is accepted; it is renormalized only if it misses
/// the local tolerance.
pub fn validate_remote_probs<F: Scalar>(
    answer_ids: &[AnswerId],
    mut probs: IndexMap<AnswerId, f64>,
) -> Result<AnswerDistribution<F>, ScorerError> {
    let mut ordered = IndexMap::with_capacity(answer_ids.len());
    for id in answer_ids {
        let p = probs
            .swap_remove(id)
            .ok_or_else(|| ScorerError::Protocol(format!("response is missing answer id {id}")))?;
        if !(0.0..=1.0).contains(&p) {
            return Err(ScorerError::Protocol(format!("probability {p} for {id} outside [0, 1]")));
        }
        ordered.insert(id.clone(), p);
    }
    if let Some(extra) = probs.keys().next() {
        return Err(ScorerError::Protocol(format!("response has unknown answer id {extra}")));
    }
    let total = compensated_sum(ordered.values().copied());
    if (total - 1.0).abs() > REMOTE_DISTRIBUTION_TOLERANCE {
        return Err(ScorerError::Protocol(format!("probabilities sum to {total}")));
    }
    let renormalize = (total - 1.0).abs() > DISTRIBUTION_TOLERANCE;
    let converted = ordered
        .into_iter()
        .map(|(id, p)| (id, F::of(if renormalize { p / total } else { p })))
        .collect();
    AnswerDistribution::new(converted, DISTRIBUTION_TOLERANCE).map_err(|e| ScorerError::Protocol(e.to_string()))
}
