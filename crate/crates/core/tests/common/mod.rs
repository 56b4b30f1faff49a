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
//! Independent reference computations and fixture generators shared by the
//! integration and acceptance tests. Nothing here calls into the library's
//! scoring code.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashSet};

use faqfuse::corpus::{Corpus, PairRecord};
use faqfuse::tokenize::TokenizerMode;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn words(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_owned).collect()
}

/// Direct evaluation of the BM25 sum for question `n`.
pub fn naive_bm25(questions: &[Vec<String>], query: &[String], n: usize, k1: f64, b: f64) -> f64 {
    let big_n = questions.len() as f64;
    let avg = questions.iter().map(Vec::len).sum::<usize>() as f64 / big_n;
    let len = questions[n].len() as f64;
    let mut total = 0.0;
    for w in query {
        let f = questions[n].iter().filter(|t| *t == w).count() as f64;
        if f == 0.0 {
            continue;
        }
        let nw = questions.iter().filter(|q| q.contains(w)).count() as f64;
        let iqf = (1.0 + (big_n - nw + 0.5) / (nw + 0.5)).ln();
        total += (k1 + 1.0) * f / (k1 * ((1.0 - b) + b * len / avg) + f) * iqf;
    }
    total
}

/// Naive term-count table: token -> [(question index, count)].
pub fn naive_postings(questions: &[Vec<String>]) -> BTreeMap<String, Vec<(u32, u32)>> {
    let mut table: BTreeMap<String, Vec<(u32, u32)>> = BTreeMap::new();
    let vocab: HashSet<&String> = questions.iter().flatten().collect();
    for w in vocab {
        for (n, q) in questions.iter().enumerate() {
            let c = q.iter().filter(|t| *t == w).count() as u32;
            if c > 0 {
                table.entry(w.clone()).or_default().push((n as u32, c));
            }
        }
    }
    table
}

/// TF-IDF cosine with `idf = ln((1 + N) / (1 + df)) + 1`, computed from scratch.
pub fn naive_tfidf_cosine(docs: &[Vec<String>], a: &[String], b: &[String]) -> f64 {
    let n = docs.len() as f64;
    let idf = |w: &String| {
        let df = docs.iter().filter(|d| d.contains(w)).count() as f64;
        ((1.0 + n) / (1.0 + df)).ln() + 1.0
    };
    let vec = |toks: &[String]| {
        let mut m: BTreeMap<String, f64> = BTreeMap::new();
        for t in toks {
            *m.entry(t.clone()).or_default() += 1.0;
        }
        m.into_iter().map(|(t, c)| {
            let w = c * idf(&t);
            (t, w)
        }).collect::<BTreeMap<_, _>>()
    };
    let (va, vb) = (vec(a), vec(b));
    let norm = |v: &BTreeMap<String, f64>| v.values().map(|x| x * x).sum::<f64>().sqrt();
    let (na, nb) = (norm(&va), norm(&vb));
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let dot: f64 = va.iter().filter_map(|(t, x)| vb.get(t).map(|y| x * y)).sum();
    (dot / (na * nb)).clamp(0.0, 1.0)
}

pub fn naive_softmax(xs: &[f64]) -> Vec<f64> {
    let z: f64 = xs.iter().map(|x| x.exp()).sum();
    xs.iter().map(|x| x.exp() / z).collect()
}

pub fn corpus_from(pairs: &[(String, String)]) -> Corpus {
    Corpus::from_records(
        pairs.iter().map(|(q, a)| PairRecord {
            id: None,
            question: q.clone(),
            answer: a.clone(),
        }),
        TokenizerMode::UnicodeWord,
    )
    .unwrap()
}

/// Random collection over a small vocabulary `t0..t{vocab}`.
pub fn random_corpus(seed: u64, n_pairs: usize, vocab: usize, max_len: usize) -> Corpus {
    let mut r = rng(seed);
    let pairs: Vec<(String, String)> = (0..n_pairs)
        .map(|_| {
            let mut sentence = |lo: usize| {
                let len = r.gen_range(lo..=max_len);
                (0..len).map(|_| format!("t{}", r.gen_range(0..vocab))).collect::<Vec<_>>().join(" ")
            };
            let q = sentence(1);
            let a = sentence(1);
            (q, a)
        })
        .collect();
    corpus_from(&pairs)
}

pub fn random_query(r: &mut ChaCha8Rng, vocab: usize, max_len: usize) -> Vec<String> {
    let len = r.gen_range(0..=max_len);
    // a few tokens outside the collection vocabulary on purpose
    (0..len).map(|_| format!("t{}", r.gen_range(0..vocab + 3))).collect()
}

/// 200-pair collection where every question carries three tokens of its own
/// plus two shared ones, and each answer is shared by exactly two questions.
pub fn self_retrieval_corpus(n_pairs: usize) -> Corpus {
    let mut r = rng(2024);
    let pairs: Vec<(String, String)> = (0..n_pairs)
        .map(|i| {
            let shared: Vec<String> = (0..2).map(|_| format!("common{}", r.gen_range(0..40))).collect();
            let q = format!("uniq{i}a uniq{i}b uniq{i}c {}", shared.join(" "));
            let a = format!("answer number {} for this group", i / 2);
            (q, a)
        })
        .collect();
    corpus_from(&pairs)
}

/// Fifty documents drawn from three loose word clusters.
pub fn plsa_fixture() -> Corpus {
    let mut r = rng(77);
    let pairs: Vec<(String, String)> = (0..50)
        .map(|i| {
            let cluster = i % 3;
            let mut sentence = |len: usize| {
                (0..len)
                    .map(|_| {
                        let w = if r.gen_bool(0.8) {
                            cluster * 20 + r.gen_range(0..20)
                        } else {
                            r.gen_range(0..60)
                        };
                        format!("w{w}")
                    })
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            let q = sentence(6);
            let a = sentence(10);
            (q, a)
        })
        .collect();
    corpus_from(&pairs)
}
