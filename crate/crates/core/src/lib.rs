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

//! Hybrid FAQ retrieval and question matching.
//!
//! Question–answer pairs are ranked by a linear fusion of a BM25 query–question
//! similarity and a pluggable query–answer relevance posterior. The top of the
//! fused list can be re-decided by majority vote. Relevance backends may
//! receive the query augmented with knowledge triplets, either loaded from an
//! external dump or mined from PLSA topics trained on the collection.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the `f64` instantiation used by the CLI and service.

pub mod bm25;
pub mod config;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod knowledge;
pub mod plsa;
pub mod rank;
pub mod scalar;
pub mod scorer;
pub mod tokenize;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Bm25Params = bm25::Bm25Params<f64>;
pub type Bm25Index = bm25::Bm25Index<f64>;
pub type TopicModel = plsa::TopicModel<f64>;
pub type PlsaConfig = plsa::PlsaConfig<f64>;
pub type AnswerDistribution = scorer::AnswerDistribution<f64>;
pub type PairScore = scorer::PairScore<f64>;
pub type FusionConfig = rank::FusionConfig<f64>;
pub type ScoredPair = rank::ScoredPair<f64>;
pub type RankedList = rank::RankedList<f64>;
pub type Pipeline = rank::Pipeline<f64>;
pub type MetricsReport = eval::MetricsReport<f64>;
