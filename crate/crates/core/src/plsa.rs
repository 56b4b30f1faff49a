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
//! PLSA topic model trained by expectation–maximization.
//!
//! Each Q–A pair is one document (question tokens followed by answer tokens)
//! and its word distribution is modelled as the mixture
//! `P(w | d) = sum_k P(w | T_k) P(T_k | d)`.
//!
//! One EM iteration:
//!
//! * E-step: `P(T_k | d, w) ∝ P(w | T_k) P(T_k | d)`
//! * M-step: `P(w | T_k) ∝ sum_d c(w, d) P(T_k | d, w)` and
//!   `P(T_k | d) ∝ sum_w c(w, d) P(T_k | d, w)`
//!
//! Both steps are fused into a single pass over the sparse count lists. The
//! log-likelihood of the current parameters falls out of the same pass.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::scalar::{compensated_sum, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct PlsaConfig<F> {
    pub k_topics: usize,
    pub max_iterations: usize,
    /// Training stops once the relative log-likelihood gain drops below this.
    pub tolerance: F,
    pub seed: u64,
    /// Added inside logarithms only; stored probabilities are never smoothed.
    pub smoothing_epsilon: F,
}

impl<F: Scalar> Default for PlsaConfig<F> {
    fn default() -> Self {
        PlsaConfig {
            k_topics: 10,
            max_iterations: 200,
            tolerance: F::of(1e-6),
            seed: 0,
            smoothing_epsilon: F::of(1e-10),
        }
    }
}

impl<F: Scalar> PlsaConfig<F> {
    pub fn with_topics(k_topics: usize, seed: u64) -> Self {
        PlsaConfig {
            k_topics,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_topics == 0 {
            return Err(Error::invalid("number of topics must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("max_iterations must be positive"));
        }
        if !(self.tolerance >= F::zero()) {
            return Err(Error::invalid("tolerance must be non-negative"));
        }
        if !(self.smoothing_epsilon > F::zero()) {
            return Err(Error::invalid("smoothing_epsilon must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct TopicModel<F> {
    pub config: PlsaConfig<F>,
    pub vocabulary: Vec<String>,
    /// K rows over the vocabulary.
    pub word_given_topic: Vec<Vec<F>>,
    /// One row of K topic weights per document.
    pub topic_given_doc: Vec<Vec<F>>,
    pub final_log_likelihood: F,
    /// Log-likelihood of the initial parameters followed by one entry per
    /// completed iteration.
    pub log_likelihood_trace: Vec<F>,
}

type SparseDoc = Vec<(usize, u32)>;

fn documents(corpus: &Corpus, vocab: &HashMap<&str, usize>) -> Vec<SparseDoc> {
    corpus
        .pairs()
        .iter()
        .map(|p| {
            let mut counts: Vec<(usize, u32)> = Vec::new();
            let mut pos: HashMap<usize, usize> = HashMap::new();
            for t in p.question_tokens.iter().chain(&p.answer_tokens) {
                // tokens outside the model vocabulary carry no probability mass
                let Some(&w) = vocab.get(t.as_str()) else {
                    counts.push((usize::MAX, 1));
                    continue;
                };
                match pos.get(&w) {
                    Some(&i) => counts[i].1 += 1,
                    None => {
                        pos.insert(w, counts.len());
                        counts.push((w, 1));
                    }
                }
            }
            counts
        })
        .collect()
}

fn mixture<F: Scalar>(word_given_topic: &[Vec<F>], doc_topics: &[F], w: usize) -> F {
    if w == usize::MAX {
        return F::zero();
    }
    let mut p = F::zero();
    for (row, &pk) in word_given_topic.iter().zip(doc_topics) {
        p = p + row[w] * pk;
    }
    p
}

fn log_likelihood_of<F: Scalar>(
    word_given_topic: &[Vec<F>],
    topic_given_doc: &[Vec<F>],
    docs: &[SparseDoc],
    eps: F,
) -> F {
    compensated_sum(docs.iter().zip(topic_given_doc).map(|(doc, theta)| {
        let mut s = F::zero();
        for &(w, c) in doc {
            s = s + F::of(c as f64) * (mixture(word_given_topic, theta, w) + eps).ln();
        }
        s
    }))
}

/// Normalizes `row` in place; an all-zero row is replaced by `fallback`.
fn normalize_row<F: Scalar>(row: &mut [F], fallback: &[F]) {
    let total = compensated_sum(row.iter().copied());
    if total > F::zero() {
        for x in row.iter_mut() {
            *x = *x / total;
        }
    } else {
        row.copy_from_slice(fallback);
    }
}

struct EmState<F> {
    word_given_topic: Vec<Vec<F>>,
    topic_given_doc: Vec<Vec<F>>,
}

impl<F: Scalar> EmState<F> {
    /// One fused E/M pass. Returns the updated parameters.
    fn step(&self, docs: &[SparseDoc], n_words: usize) -> EmState<F> {
        let k = self.word_given_topic.len();
        let mut wk = vec![vec![F::zero(); n_words]; k];
        let mut kd = vec![vec![F::zero(); k]; docs.len()];
        let mut joint = vec![F::zero(); k];
        for (d, doc) in docs.iter().enumerate() {
            let theta = &self.topic_given_doc[d];
            for &(w, c) in doc {
                if w == usize::MAX {
                    continue;
                }
                let mut denom = F::zero();
                for t in 0..k {
                    joint[t] = self.word_given_topic[t][w] * theta[t];
                    denom = denom + joint[t];
                }
                if !(denom > F::zero()) {
                    continue;
                }
                let c = F::of(c as f64);
                for t in 0..k {
                    let r = c * joint[t] / denom;
                    wk[t][w] = wk[t][w] + r;
                    kd[d][t] = kd[d][t] + r;
                }
            }
        }
        for (row, old) in wk.iter_mut().zip(&self.word_given_topic) {
            normalize_row(row, old);
        }
        for (row, old) in kd.iter_mut().zip(&self.topic_given_doc) {
            normalize_row(row, old);
        }
        EmState {
            word_given_topic: wk,
            topic_given_doc: kd,
        }
    }
}

/// Trains a topic model on `corpus`. The model vocabulary is the corpus
/// vocabulary in id order.
pub fn train<F: Scalar>(corpus: &Corpus, config: PlsaConfig<F>) -> Result<TopicModel<F>> {
    config.validate()?;
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let vocabulary = corpus.vocabulary().tokens().to_vec();
    let n_words = vocabulary.len();
    if n_words == 0 {
        return Err(Error::invalid("empty vocabulary"));
    }
    let k = config.k_topics;
    if k > n_words {
        return Err(Error::invalid(format!(
            "{k} topics requested but the vocabulary has only {n_words} words"
        )));
    }
    let lookup: HashMap<&str, usize> = vocabulary
        .iter()
        .enumerate()
        .map(|(i, t)| (t.as_str(), i))
        .collect();
    let docs = documents(corpus, &lookup);

    // Dirichlet(1) rows are normalized Exp(1) draws.
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let uniform_words = vec![F::one() / F::of_usize(n_words); n_words];
    let word_given_topic = (0..k)
        .map(|_| {
            let mut row: Vec<F> = (0..n_words)
                .map(|_| {
                    let x: f64 = Exp1.sample(&mut rng);
                    F::of(x)
                })
                .collect();
            normalize_row(&mut row, &uniform_words);
            row
        })
        .collect();
    let topic_given_doc = vec![vec![F::one() / F::of_usize(k); k]; docs.len()];
    let mut state = EmState {
        word_given_topic,
        topic_given_doc,
    };

    let eps = config.smoothing_epsilon;
    let ll = |s: &EmState<F>| log_likelihood_of(&s.word_given_topic, &s.topic_given_doc, &docs, eps);
    let mut trace = vec![ll(&state)];
    for _ in 0..config.max_iterations {
        let next = state.step(&docs, n_words);
        let prev = *trace.last().expect("trace is non-empty");
        let current = ll(&next);
        state = next;
        trace.push(current);
        let gain = (current - prev) / prev.abs().max(F::min_positive_value());
        if gain < config.tolerance {
            break;
        }
    }
    log::debug!(
        "plsa: K={k}, {} iterations, log-likelihood {}",
        trace.len() - 1,
        trace.last().unwrap()
    );
    Ok(TopicModel {
        config,
        vocabulary,
        word_given_topic: state.word_given_topic,
        topic_given_doc: state.topic_given_doc,
        final_log_likelihood: *trace.last().unwrap(),
        log_likelihood_trace: trace,
    })
}

impl<F: Scalar> TopicModel<F> {
    pub fn k_topics(&self) -> usize {
        self.word_given_topic.len()
    }

    /// `sum_d sum_w c(w, d) ln(P(w | d) + eps)` over `corpus`, whose pairs
    /// must line up with the documents the model was trained on.
    pub fn log_likelihood(&self, corpus: &Corpus) -> Result<F> {
        if corpus.len() != self.topic_given_doc.len() {
            return Err(Error::invalid(format!(
                "model has {} documents, corpus has {}",
                self.topic_given_doc.len(),
                corpus.len()
            )));
        }
        let lookup: HashMap<&str, usize> = self
            .vocabulary
            .iter()
            .enumerate()
            .map(|(i, t)| (t.as_str(), i))
            .collect();
        let docs = documents(corpus, &lookup);
        Ok(log_likelihood_of(
            &self.word_given_topic,
            &self.topic_given_doc,
            &docs,
            self.config.smoothing_epsilon,
        ))
    }

    /// The `top_l` most probable words of `topic`, ties broken by vocabulary
    /// order.
    pub fn top_words(&self, topic: usize, top_l: usize) -> Result<Vec<&str>> {
        let row = self
            .word_given_topic
            .get(topic)
            .ok_or_else(|| Error::invalid(format!("topic {topic} out of range")))?;
        if top_l > row.len() {
            return Err(Error::invalid(format!(
                "top_l = {top_l} exceeds the vocabulary size {}",
                row.len()
            )));
        }
        let mut ids: Vec<usize> = (0..row.len()).collect();
        ids.sort_by(|&a, &b| {
            row[b]
                .partial_cmp(&row[a])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        Ok(ids[..top_l].iter().map(|&i| self.vocabulary[i].as_str()).collect())
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
        let model: Self = serde_json::from_reader(BufReader::new(file))?;
        let v = model.vocabulary.len();
        if model.word_given_topic.iter().any(|r| r.len() != v)
            || model.topic_given_doc.iter().any(|r| r.len() != model.k_topics())
        {
            return Err(Error::invalid("topic model matrices have inconsistent shapes"));
        }
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::PairRecord;
    use crate::tokenize::TokenizerMode;

    fn corpus(docs: &[(&str, &str)]) -> Corpus {
        Corpus::from_records(
            docs.iter().map(|(q, a)| PairRecord {
                id: None,
                question: (*q).into(),
                answer: (*a).into(),
            }),
            TokenizerMode::UnicodeWord,
        )
        .unwrap()
    }

    fn small() -> Corpus {
        corpus(&[
            ("library book loan", "read books at the library"),
            ("mrt station taipei", "taipei mrt runs late"),
            ("book return", "return the book to the library desk"),
            ("city bus taipei", "bus and mrt in the city"),
        ])
    }

    fn assert_stochastic(rows: &[Vec<f64>]) {
        for row in rows {
            assert!(row.iter().all(|&p| p >= 0.0));
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn rows_are_distributions() {
        let m = train::<f64>(&small(), PlsaConfig::with_topics(3, 5)).unwrap();
        assert_eq!(m.k_topics(), 3);
        assert_stochastic(&m.word_given_topic);
        assert_stochastic(&m.topic_given_doc);
    }

    #[test]
    fn rows_stay_stochastic_every_iteration() {
        let c = small();
        for iters in 1..6 {
            let cfg = PlsaConfig {
                max_iterations: iters,
                tolerance: 0.0,
                ..PlsaConfig::with_topics(2, 9)
            };
            let m = train::<f64>(&c, cfg).unwrap();
            assert_eq!(m.log_likelihood_trace.len(), iters + 1);
            assert_stochastic(&m.word_given_topic);
            assert_stochastic(&m.topic_given_doc);
        }
    }

    #[test]
    fn errors_on_bad_topic_counts() {
        let c = corpus(&[("a b", "c")]);
        assert!(train::<f64>(&c, PlsaConfig::with_topics(4, 0)).is_err());
        assert!(train::<f64>(&c, PlsaConfig::with_topics(0, 0)).is_err());
        assert!(train::<f64>(&c, PlsaConfig::with_topics(3, 0)).is_ok());
    }

    #[test]
    fn one_topic_is_the_unigram_model() {
        let c = small();
        let m = train::<f64>(&c, PlsaConfig::with_topics(1, 3)).unwrap();
        let total: u64 = (0..c.vocabulary().len() as u32).map(|i| c.vocabulary().frequency(i)).sum();
        for (w, &p) in m.word_given_topic[0].iter().enumerate() {
            let expected = c.vocabulary().frequency(w as u32) as f64 / total as f64;
            assert!((p - expected).abs() < 1e-12);
        }
        assert!(m.topic_given_doc.iter().all(|r| r[0] == 1.0));
        // "the" occurs 4 times; "library" ties at 3 with later words and wins on vocabulary order
        assert_eq!(m.top_words(0, 2).unwrap(), ["the", "library"]);
    }

    #[test]
    fn final_log_likelihood_is_self_consistent() {
        let c = small();
        for k in [1, 2, 4] {
            let m = train::<f64>(&c, PlsaConfig::with_topics(k, 11)).unwrap();
            let ll = m.log_likelihood(&c).unwrap();
            assert!((ll - m.final_log_likelihood).abs() < 1e-9);
        }
    }

    #[test]
    fn uniform_model_likelihood() {
        let c = small();
        let v = c.vocabulary().len();
        let mut m = train::<f64>(&c, PlsaConfig::with_topics(2, 0)).unwrap();
        for row in &mut m.word_given_topic {
            row.iter_mut().for_each(|p| *p = 1.0 / v as f64);
        }
        for row in &mut m.topic_given_doc {
            row.iter_mut().for_each(|p| *p = 0.5);
        }
        let total: u64 = (0..v as u32).map(|i| c.vocabulary().frequency(i)).sum();
        let expected = total as f64 * (1.0 / v as f64).ln();
        assert!((m.log_likelihood(&c).unwrap() - expected).abs() < 1e-6);
    }

    #[test]
    fn relabeling_topics_preserves_likelihood() {
        let c = small();
        let m = train::<f64>(&c, PlsaConfig::with_topics(3, 2)).unwrap();
        let mut p = m.clone();
        p.word_given_topic.rotate_left(1);
        for row in &mut p.topic_given_doc {
            row.rotate_left(1);
        }
        let a = m.log_likelihood(&c).unwrap();
        let b = p.log_likelihood(&c).unwrap();
        assert!((a - b).abs() < 1e-9 * a.abs());
    }

    #[test]
    fn training_is_deterministic() {
        let c = small();
        let a = train::<f64>(&c, PlsaConfig::with_topics(3, 42)).unwrap();
        let b = train::<f64>(&c, PlsaConfig::with_topics(3, 42)).unwrap();
        assert_eq!(a, b);
        let d = train::<f64>(&c, PlsaConfig::with_topics(3, 43)).unwrap();
        assert_ne!(a.word_given_topic, d.word_given_topic);
    }

    #[test]
    fn top_words_ordering_and_bounds() {
        let c = small();
        let m = train::<f64>(&c, PlsaConfig::with_topics(2, 1)).unwrap();
        let v = c.vocabulary().len();
        let mut all = m.top_words(1, v).unwrap();
        all.sort_unstable();
        let mut vocab: Vec<&str> = c.vocabulary().tokens().iter().map(String::as_str).collect();
        vocab.sort_unstable();
        assert_eq!(all, vocab);
        assert!(m.top_words(2, 1).is_err());
        assert!(m.top_words(0, v + 1).is_err());

        let row = &m.word_given_topic[0];
        let words = m.top_words(0, 5).unwrap();
        let probs: Vec<f64> = words
            .iter()
            .map(|w| row[c.vocabulary().id(w).unwrap() as usize])
            .collect();
        assert!(probs.windows(2).all(|p| p[0] >= p[1]));
    }

    #[test]
    fn f32_training_keeps_invariants() {
        let m = train::<f32>(&small(), PlsaConfig::with_topics(2, 4)).unwrap();
        for row in m.word_given_topic.iter().chain(&m.topic_given_doc) {
            assert!((row.iter().sum::<f32>() - 1.0).abs() < 1e-5);
        }
    }

    #[test]
    fn snapshot_round_trip() {
        let m = train::<f64>(&small(), PlsaConfig::with_topics(2, 4)).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        m.save(f.path()).unwrap();
        assert_eq!(TopicModel::<f64>::load(f.path()).unwrap(), m);
    }
}
