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
//! JSON shapes shared by the `query` command and the HTTP service.

use faqfuse::corpus::AnswerId;
use faqfuse::{Pipeline, RankedList};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub pair_id: String,
    pub question: String,
    pub answer: String,
    pub answer_id: AnswerId,
    pub bm25_raw: f64,
    pub bm25_norm: f64,
    pub relevance: f64,
    pub rs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrieveResponse {
    pub answer: String,
    pub answer_id: AnswerId,
    pub vote_applied: bool,
    pub ranked: Vec<RankedEntry>,
}

impl RetrieveResponse {
    /// Resolves the top `top_k` entries of `ranked` against the pipeline's corpus.
    pub fn new(pipeline: &Pipeline, ranked: &RankedList, top_k: usize) -> Self {
        let corpus = pipeline.corpus();
        let entries = ranked
            .entries
            .iter()
            .take(top_k)
            .map(|e| {
                let pair = &corpus.pairs()[e.pair_index];
                RankedEntry {
                    pair_id: pair.id.clone(),
                    question: pair.question.clone(),
                    answer: pair.answer.clone(),
                    answer_id: e.answer_id.clone(),
                    bm25_raw: e.bm25_raw,
                    bm25_norm: e.bm25_norm,
                    relevance: e.relevance,
                    rs: e.rs,
                }
            })
            .collect();
        RetrieveResponse {
            answer: corpus
                .answer_text(&ranked.chosen_answer)
                .unwrap_or_default()
                .to_owned(),
            answer_id: ranked.chosen_answer.clone(),
            vote_applied: ranked.vote_applied,
            ranked: entries,
        }
    }
}
