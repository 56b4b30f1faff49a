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
//! Score fusion, answer voting and the assembled retrieval pipeline.
//!
//! The ranking score of pair `n` for query `q` is
//!
//! ```text
//! rs_n = alpha * bm25(q, Q_n) / sum_n' bm25(q, Q_n') + (1 - alpha) * P(A_n | q)
//! ```
//!
//! When no question shares a term with the query the BM25 share is zero for
//! every pair and only the relevance term remains.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::bm25::Bm25Index;
use crate::corpus::{AnswerId, Corpus};
use crate::error::{Error, Result};
use crate::knowledge::{inject, InjectedSequence, InjectionConfig, KnowledgeBase};
use crate::scalar::{compensated_sum, Scalar};
use crate::scorer::{AnswerDistribution, RelevanceScorer};
use crate::tokenize::tokenize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct FusionConfig<F> {
    pub alpha: F,
    pub vote_m: usize,
    pub voting_enabled: bool,
}

impl<F: Scalar> Default for FusionConfig<F> {
    fn default() -> Self {
        FusionConfig {
            alpha: F::of(0.5),
            vote_m: 5,
            voting_enabled: true,
        }
    }
}

impl<F: Scalar> FusionConfig<F> {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= F::zero() && self.alpha <= F::one()) {
            return Err(Error::invalid("alpha must lie in [0, 1]"));
        }
        if self.vote_m == 0 {
            return Err(Error::invalid("vote_m must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct ScoredPair<F> {
    pub pair_index: usize,
    pub answer_id: AnswerId,
    pub bm25_raw: F,
    pub bm25_norm: F,
    pub relevance: F,
    pub rs: F,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct RankedList<F> {
    /// Every pair, by `rs` descending then `pair_index` ascending.
    pub entries: Vec<ScoredPair<F>>,
    pub chosen_answer: AnswerId,
    /// True when the majority rule picked the answer.
    pub vote_applied: bool,
}

impl<F: Scalar> RankedList<F> {
    /// Distinct answers in order of their best-ranked pair.
    pub fn ranked_answers(&self) -> Vec<AnswerId> {
        let mut seen = std::collections::HashSet::new();
        self.entries
            .iter()
            .filter(|e| seen.insert(e.answer_id.clone()))
            .map(|e| e.answer_id.clone())
            .collect()
    }
}

/// Fuses per-pair BM25 scores with answer relevance. `answers[n]` is the
/// answer id of pair `n`. Output is in pair order.
pub fn fuse<F: Scalar>(
    bm25_scores: &[F],
    answers: &[AnswerId],
    relevance: Option<&AnswerDistribution<F>>,
    alpha: F,
) -> Vec<ScoredPair<F>> {
    assert_eq!(bm25_scores.len(), answers.len(), "one BM25 score per pair");
    let total = compensated_sum(bm25_scores.iter().copied());
    bm25_scores
        .iter()
        .zip(answers)
        .enumerate()
        .map(|(n, (&raw, id))| {
            let bm25_norm = if total > F::zero() { raw / total } else { F::zero() };
            let relevance = relevance.map_or_else(F::zero, |d| d.get(id));
            ScoredPair {
                pair_index: n,
                answer_id: id.clone(),
                bm25_raw: raw,
                bm25_norm,
                relevance,
                rs: alpha * bm25_norm + (F::one() - alpha) * relevance,
            }
        })
        .collect()
}

pub fn sort_by_rs<F: Scalar>(pairs: &mut [ScoredPair<F>]) {
    pairs.sort_by(|a, b| {
        b.rs.partial_cmp(&a.rs)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.pair_index.cmp(&b.pair_index))
    });
}

/// Majority vote over the top `m` entries of an rs-sorted list.
///
/// An answer occurring at least `ceil(m / 2)` times wins (the earliest-ranked
/// one if several qualify); otherwise the top entry's answer is returned.
/// The flag reports whether the majority rule decided. Panics on an empty list.
pub fn vote<F: Scalar>(ranked: &[ScoredPair<F>], m: usize) -> (AnswerId, bool) {
    assert!(!ranked.is_empty(), "cannot vote on an empty ranking");
    let threshold = m.div_ceil(2);
    let mut counts: HashMap<&AnswerId, usize> = HashMap::new();
    for e in ranked.iter().take(m) {
        *counts.entry(&e.answer_id).or_default() += 1;
    }
    // walking in rank order makes the first qualifying answer the best-ranked one
    for e in ranked.iter().take(m) {
        if counts[&e.answer_id] >= threshold {
            return (e.answer_id.clone(), true);
        }
    }
    (ranked[0].answer_id.clone(), false)
}

/// Index, optional knowledge, relevance scorer and fusion settings over one
/// collection. Immutable once assembled.
pub struct Pipeline<F: Scalar> {
    corpus: Corpus,
    index: Bm25Index<F>,
    knowledge: Option<KnowledgeBase>,
    injection: InjectionConfig,
    scorer: Option<Box<dyn RelevanceScorer<F>>>,
    fusion: FusionConfig<F>,
    pair_answers: Vec<AnswerId>,
}

impl<F: Scalar> std::fmt::Debug for Pipeline<F> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Pipeline")
            .field("pairs", &self.corpus.len())
            .field("knowledge", &self.knowledge.as_ref().map(KnowledgeBase::len))
            .field("scorer", &self.scorer.as_ref().map(|s| s.name()))
            .field("fusion", &self.fusion)
            .finish()
    }
}

/// Outcome of scoring one question pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct MatchOutcome<F> {
    pub bm25_raw: F,
    pub bm25_norm: F,
    pub similarity: F,
    pub score: F,
    pub label: u8,
}

impl<F: Scalar> Pipeline<F> {
    /// Assembles a pipeline. `scorer = None` gives a BM25-only pipeline and
    /// is only accepted with `alpha = 1`.
    pub fn new(
        corpus: Corpus,
        index: Bm25Index<F>,
        knowledge: Option<KnowledgeBase>,
        injection: InjectionConfig,
        scorer: Option<Box<dyn RelevanceScorer<F>>>,
        fusion: FusionConfig<F>,
    ) -> Result<Self> {
        fusion.validate()?;
        injection.validate()?;
        if index.n_questions() != corpus.len() {
            return Err(Error::invalid(format!(
                "index covers {} questions but the corpus has {}",
                index.n_questions(),
                corpus.len()
            )));
        }
        if scorer.is_none() && fusion.alpha != F::one() {
            return Err(Error::invalid(
                "a BM25-only pipeline (no relevance scorer) requires alpha = 1",
            ));
        }
        if let Some(s) = &scorer {
            let expected: Vec<&AnswerId> = corpus.answers().keys().collect();
            let got: Vec<&AnswerId> = s.answer_ids().iter().collect();
            if expected != got {
                return Err(Error::invalid("scorer answer set differs from the corpus answers"));
            }
        }
        let pair_answers = corpus.pairs().iter().map(|p| p.answer_id.clone()).collect();
        Ok(Pipeline {
            corpus,
            index,
            knowledge,
            injection,
            scorer,
            fusion,
            pair_answers,
        })
    }

    pub fn corpus(&self) -> &Corpus {
        &self.corpus
    }

    pub fn index(&self) -> &Bm25Index<F> {
        &self.index
    }

    pub fn knowledge(&self) -> Option<&KnowledgeBase> {
        self.knowledge.as_ref()
    }

    pub fn fusion(&self) -> &FusionConfig<F> {
        &self.fusion
    }

    pub fn scorer_name(&self) -> Option<String> {
        self.scorer.as_ref().map(|s| s.name())
    }

    fn injected(&self, tokens: &[String]) -> Result<Option<InjectedSequence>> {
        match &self.knowledge {
            Some(kb) if !tokens.is_empty() => Ok(Some(inject(tokens, kb, &self.injection)?)),
            _ => Ok(None),
        }
    }

    pub fn retrieve(&self, query: &str) -> Result<RankedList<F>> {
        let tokens = tokenize(query, self.corpus.tokenizer());
        let bm25 = self.index.score_all(&tokens);
        let relevance = match &self.scorer {
            Some(s) => {
                let injected = self.injected(&tokens)?;
                Some(s.score_answers(query, injected.as_ref())?)
            }
            None => None,
        };
        let mut entries = fuse(&bm25, &self.pair_answers, relevance.as_ref(), self.fusion.alpha);
        sort_by_rs(&mut entries);
        let (chosen_answer, vote_applied) = if self.fusion.voting_enabled {
            vote(&entries, self.fusion.vote_m)
        } else {
            (entries[0].answer_id.clone(), false)
        };
        Ok(RankedList {
            entries,
            chosen_answer,
            vote_applied,
        })
    }

    /// Scores a question pair: BM25 of `left` against `right` as a
    /// one-question collection (normalized over that collection) fused with
    /// the scorer's pair similarity. Label 1 iff the score reaches 0.5.
    pub fn match_pair(&self, left: &str, right: &str) -> Result<MatchOutcome<F>> {
        let mode = self.corpus.tokenizer();
        let (lt, rt) = (tokenize(left, mode), tokenize(right, mode));
        let bm25_raw = self.index.score_against(&lt, &rt);
        // the only member of a one-question collection takes all the mass
        let bm25_norm = if bm25_raw > F::zero() { F::one() } else { F::zero() };
        let similarity = match &self.scorer {
            Some(s) => {
                let il = self.injected(&lt)?;
                let ir = self.injected(&rt)?;
                s.score_pair(left, right, il.as_ref(), ir.as_ref())?.similarity
            }
            None => F::zero(),
        };
        let alpha = self.fusion.alpha;
        let score = alpha * bm25_norm + (F::one() - alpha) * similarity;
        Ok(MatchOutcome {
            bm25_raw,
            bm25_norm,
            similarity,
            score,
            label: u8::from(score >= F::of(0.5)),
        })
    }
}
