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
//! Okapi BM25 query–question similarity over an inverted index of questions.
//!
//! For a query `w_1..w_L` and question `Q_n`:
//!
//! ```text
//! score(q, Q_n) = sum_l (k1 + 1) f(w_l, Q_n) / (k1 ((1 - b) + b len(Q_n) / avg_len) + f(w_l, Q_n)) * iqf(w_l)
//! iqf(w)        = ln(1 + (N - n_w + 0.5) / (n_w + 0.5))
//! ```
//!
//! The sum runs over query positions, so a repeated query token counts once
//! per occurrence. Only question text is indexed.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const SNAPSHOT_FORMAT: &str = "faqfuse-bm25-v1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct Bm25Params<F> {
    pub k1: F,
    pub b: F,
}

impl<F: Scalar> Default for Bm25Params<F> {
    fn default() -> Self {
        Bm25Params {
            k1: F::of(1.2),
            b: F::of(0.75),
        }
    }
}

impl<F: Scalar> Bm25Params<F> {
    pub fn new(k1: F, b: F) -> Result<Self> {
        let p = Bm25Params { k1, b };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k1 >= F::zero()) || !self.k1.is_finite() {
            return Err(Error::invalid("k1 must be a finite non-negative number"));
        }
        if !(self.b >= F::zero() && self.b <= F::one()) {
            return Err(Error::invalid("b must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Inverted index over the question side of a corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct Bm25Index<F> {
    /// token -> (question index, term frequency), sorted by question index.
    postings: BTreeMap<String, Vec<(u32, u32)>>,
    question_lengths: Vec<u32>,
    avg_len: F,
    iqf: BTreeMap<String, F>,
    params: Bm25Params<F>,
    n_questions: usize,
}

impl<F: Scalar> Bm25Index<F> {
    pub fn build(corpus: &Corpus, params: Bm25Params<F>) -> Result<Self> {
        Self::from_questions(corpus.pairs().iter().map(|p| p.question_tokens.as_slice()), params)
    }

    pub fn from_questions<'a>(
        questions: impl IntoIterator<Item = &'a [String]>,
        params: Bm25Params<F>,
    ) -> Result<Self> {
        params.validate()?;
        let mut postings: BTreeMap<String, Vec<(u32, u32)>> = BTreeMap::new();
        let mut question_lengths = Vec::new();
        for (n, tokens) in questions.into_iter().enumerate() {
            let mut counts: BTreeMap<&str, u32> = BTreeMap::new();
            for t in tokens {
                *counts.entry(t.as_str()).or_default() += 1;
            }
            for (t, f) in counts {
                postings.entry(t.to_owned()).or_default().push((n as u32, f));
            }
            question_lengths.push(tokens.len() as u32);
        }
        let n_questions = question_lengths.len();
        if n_questions == 0 {
            return Err(Error::EmptyCorpus);
        }
        let total: u64 = question_lengths.iter().map(|&l| l as u64).sum();
        let avg_len = F::of(total as f64) / F::of_usize(n_questions);
        let iqf = postings
            .iter()
            .map(|(t, list)| (t.clone(), iqf_value(n_questions, list.len())))
            .collect();
        Ok(Bm25Index {
            postings,
            question_lengths,
            avg_len,
            iqf,
            params,
            n_questions,
        })
    }

    pub fn n_questions(&self) -> usize {
        self.n_questions
    }

    pub fn avg_len(&self) -> F {
        self.avg_len
    }

    pub fn params(&self) -> Bm25Params<F> {
        self.params
    }

    pub fn question_len(&self, n: usize) -> usize {
        self.question_lengths[n] as usize
    }

    pub fn postings(&self, token: &str) -> Option<&[(u32, u32)]> {
        self.postings.get(token).map(Vec::as_slice)
    }

    /// Number of distinct indexed tokens.
    pub fn vocabulary_len(&self) -> usize {
        self.postings.len()
    }

    /// Inverse question frequency; tokens absent from the collection get the
    /// `n_w = 0` value.
    pub fn iqf(&self, token: &str) -> F {
        self.iqf
            .get(token)
            .copied()
            .unwrap_or_else(|| iqf_value(self.n_questions, 0))
    }

    pub fn term_frequency(&self, token: &str, n: usize) -> u32 {
        self.postings(token)
            .and_then(|list| {
                list.binary_search_by_key(&(n as u32), |&(q, _)| q)
                    .ok()
                    .map(|i| list[i].1)
            })
            .unwrap_or(0)
    }

    fn term_weight(&self, tf: u32, len: F, avg_len: F, iqf: F) -> F {
        let Bm25Params { k1, b } = self.params;
        let f = F::of(tf as f64);
        let norm = k1 * ((F::one() - b) + b * len / avg_len);
        (k1 + F::one()) * f / (norm + f) * iqf
    }

    /// BM25 score of the query against question `n`.
    ///
    /// Panics if `n` is out of range.
    pub fn score(&self, query: &[String], n: usize) -> F {
        assert!(n < self.n_questions, "question index {n} out of range");
        let len = F::of(self.question_lengths[n] as f64);
        let mut total = F::zero();
        for w in query {
            let tf = self.term_frequency(w, n);
            if tf > 0 {
                total = total + self.term_weight(tf, len, self.avg_len, self.iqf(w));
            }
        }
        total
    }

    /// Scores every question at once by walking the postings lists. Produces
    /// the same values as [`Self::score`] for each question.
    pub fn score_all(&self, query: &[String]) -> Vec<F> {
        let mut acc = vec![F::zero(); self.n_questions];
        for w in query {
            let Some(list) = self.postings.get(w) else {
                continue;
            };
            let iqf = self.iqf(w);
            for &(n, tf) in list {
                let len = F::of(self.question_lengths[n as usize] as f64);
                acc[n as usize] = acc[n as usize] + self.term_weight(tf, len, self.avg_len, iqf);
            }
        }
        acc
    }

    /// Top `top_k` questions by score, descending, ties by ascending index.
    pub fn rank(&self, query: &[String], top_k: usize) -> Vec<(usize, F)> {
        let mut scored: Vec<(usize, F)> = self.score_all(query).into_iter().enumerate().collect();
        sort_desc(&mut scored);
        scored.truncate(top_k.min(self.n_questions));
        scored
    }

    /// Scores `query` against `document` treated as a one-question
    /// collection (so its length equals the average), with IQF taken from
    /// this index. Used for pairwise question matching.
    pub fn score_against(&self, query: &[String], document: &[String]) -> F {
        if document.is_empty() {
            return F::zero();
        }
        let len = F::of_usize(document.len());
        let mut total = F::zero();
        for w in query {
            let tf = document.iter().filter(|t| *t == w).count() as u32;
            if tf > 0 {
                total = total + self.term_weight(tf, len, len, self.iqf(w));
            }
        }
        total
    }
}

fn iqf_value<F: Scalar>(n_questions: usize, containing: usize) -> F {
    let n = F::of_usize(n_questions);
    let nw = F::of_usize(containing);
    let half = F::of(0.5);
    (F::one() + (n - nw + half) / (nw + half)).ln()
}

/// Sorts `(index, score)` by score descending, then index ascending.
pub(crate) fn sort_desc<F: Scalar>(items: &mut [(usize, F)]) {
    items.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal).then(a.0.cmp(&b.0)));
}

/// On-disk index together with the collection it was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct IndexSnapshot<F> {
    pub format: String,
    pub index: Bm25Index<F>,
    pub corpus: Corpus,
}

impl<F: Scalar> IndexSnapshot<F> {
    pub fn new(index: Bm25Index<F>, corpus: Corpus) -> Self {
        IndexSnapshot {
            format: SNAPSHOT_FORMAT.to_owned(),
            index,
            corpus,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path)
            .map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
        let mut out = BufWriter::new(file);
        serde_json::to_writer(&mut out, self)?;
        out.flush()
            .map_err(|e| Error::io(format!("writing {}", path.display()), e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file =
            File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
        let snap: Self = serde_json::from_reader(BufReader::new(file))?;
        if snap.format != SNAPSHOT_FORMAT {
            return Err(Error::Format {
                expected: SNAPSHOT_FORMAT.to_owned(),
                found: snap.format,
            });
        }
        if snap.index.n_questions != snap.corpus.len() {
            return Err(Error::invalid("index and corpus sizes differ"));
        }
        Ok(snap)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::PairRecord;
    use crate::tokenize::TokenizerMode;

    fn corpus(questions: &[&str]) -> Corpus {
        Corpus::from_records(
            questions.iter().map(|q| PairRecord {
                id: None,
                question: (*q).into(),
                answer: format!("answer to {q}"),
            }),
            TokenizerMode::UnicodeWord,
        )
        .unwrap()
    }

    fn q(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_owned).collect()
    }

    #[test]
    fn basic_statistics() {
        let idx = Bm25Index::<f64>::build(&corpus(&["a b", "b c"]), Bm25Params::default()).unwrap();
        assert_eq!(idx.avg_len(), 2.0);
        assert_eq!(idx.postings("b").unwrap().len(), 2);
        assert!(idx.postings("z").is_none());
    }

    #[test]
    fn single_question_collection() {
        let idx = Bm25Index::<f64>::build(&corpus(&["x y x z"]), Bm25Params::default()).unwrap();
        assert_eq!(idx.avg_len(), 4.0);
        for t in ["x", "y", "z"] {
            assert_eq!(idx.postings(t).unwrap().len(), 1);
        }
        assert_eq!(idx.term_frequency("x", 0), 2);
    }

    #[test]
    fn empty_collection_rejected() {
        let empty = Corpus::from_records(Vec::new(), TokenizerMode::Char).unwrap();
        assert!(matches!(
            Bm25Index::<f64>::build(&empty, Bm25Params::default()),
            Err(Error::EmptyCorpus)
        ));
    }

    #[test]
    fn params_validated() {
        assert!(Bm25Params::new(-0.1_f64, 0.5).is_err());
        assert!(Bm25Params::new(1.0_f64, 1.5).is_err());
        assert!(Bm25Params::new(0.0_f64, 0.0).is_ok());
    }

    #[test]
    fn non_overlapping_and_empty_queries_score_zero() {
        let idx = Bm25Index::<f64>::build(&corpus(&["a b", "b c", "c d"]), Bm25Params::default()).unwrap();
        assert_eq!(idx.score(&q("x y"), 0), 0.0);
        assert_eq!(idx.score(&[], 1), 0.0);
    }

    // Values worked out by hand: N = 3, every question has length 2 = avg_len,
    // "b" occurs in 2 questions so iqf = ln(1 + 1.5 / 2.5) = ln 1.6, and each
    // matching term contributes 2.2 * 1 / (1.2 + 1) * ln 1.6 = ln 1.6.
    #[test]
    fn hand_evaluated_example() {
        let idx = Bm25Index::<f64>::build(&corpus(&["a b", "b c", "c d"]), Bm25Params::default()).unwrap();
        let expected = 1.6_f64.ln();
        assert!((idx.iqf("b") - expected).abs() < 1e-15);
        assert!((idx.score(&q("b"), 0) - 0.470_003_629_245_735_5).abs() < 1e-15);
        assert!((idx.score(&q("b"), 1) - expected).abs() < 1e-15);
        assert_eq!(idx.score(&q("b"), 2), 0.0);
    }

    #[test]
    fn repeated_query_tokens_count_per_occurrence() {
        let idx = Bm25Index::<f64>::build(&corpus(&["a b", "b c", "c d"]), Bm25Params::default()).unwrap();
        assert_eq!(idx.score(&q("b b"), 0), 2.0 * idx.score(&q("b"), 0));
    }

    #[test]
    fn rank_ties_by_index() {
        let idx = Bm25Index::<f64>::build(&corpus(&["a", "b", "c", "d"]), Bm25Params::default()).unwrap();
        let r = idx.rank(&q("zzz"), 3);
        assert_eq!(r.iter().map(|x| x.0).collect::<Vec<_>>(), [0, 1, 2]);
        assert_eq!(idx.rank(&q("c"), 10).len(), 4);
        assert_eq!(idx.rank(&q("c"), 10)[0].0, 2);
    }

    #[test]
    fn score_against_uses_one_document_statistics() {
        let idx = Bm25Index::<f64>::build(&corpus(&["a b", "b c", "c d"]), Bm25Params::default()).unwrap();
        // length normalisation cancels, so each matching token gives iqf * 2.2 f / (1.2 + f)
        let s = idx.score_against(&q("b"), &q("b x"));
        assert!((s - 1.6_f64.ln()).abs() < 1e-15);
        assert_eq!(idx.score_against(&q("b"), &[]), 0.0);
        assert!(idx.score_against(&q("zz"), &q("zz")) > 0.0);
    }

    #[test]
    fn f32_agrees_with_f64() {
        let c = corpus(&["a b c", "b c", "c d e f", "a a"]);
        let i32 = Bm25Index::<f32>::build(&c, Bm25Params::default()).unwrap();
        let i64 = Bm25Index::<f64>::build(&c, Bm25Params::default()).unwrap();
        for n in 0..4 {
            let a = i32.score(&q("a c f"), n) as f64;
            let b = i64.score(&q("a c f"), n);
            assert!((a - b).abs() < 1e-5 * b.max(1.0));
        }
    }

    #[test]
    fn snapshot_round_trips_bit_exactly() {
        let c = corpus(&["alpha beta", "beta gamma delta", "epsilon"]);
        let idx = Bm25Index::<f64>::build(&c, Bm25Params::new(0.9, 0.4).unwrap()).unwrap();
        let snap = IndexSnapshot::new(idx, c);
        let f = tempfile::NamedTempFile::new().unwrap();
        snap.save(f.path()).unwrap();
        let back = IndexSnapshot::<f64>::load(f.path()).unwrap();
        assert_eq!(back, snap);
        for (t, v) in &snap.index.iqf {
            assert_eq!(back.index.iqf(t).to_bits(), v.to_bits());
        }
        assert_eq!(back.index.avg_len.to_bits(), snap.index.avg_len.to_bits());
    }

    #[test]
    fn snapshot_rejects_foreign_format() {
        let c = corpus(&["a"]);
        let mut snap = IndexSnapshot::new(Bm25Index::<f64>::build(&c, Bm25Params::default()).unwrap(), c);
        snap.format = "something-else".into();
        let f = tempfile::NamedTempFile::new().unwrap();
        snap.save(f.path()).unwrap();
        assert!(matches!(IndexSnapshot::<f64>::load(f.path()), Err(Error::Format { .. })));
    }
}
