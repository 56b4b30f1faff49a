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
//! Question–answer collections and question-pair datasets.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use indexmap::IndexMap;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::tokenize::{normalize, tokenize, TokenizerMode};

/// Identity of a distinct answer string: a truncated SHA-256 of its NFC form,
/// so the same answer text maps to the same id in every file and split.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AnswerId(pub String);

impl AnswerId {
    pub fn for_text(answer: &str) -> Self {
        let digest = Sha256::digest(normalize(answer).as_bytes());
        AnswerId(hex::encode(&digest[..8]))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AnswerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QaPair {
    pub id: String,
    pub question: String,
    pub answer: String,
    pub question_tokens: Vec<String>,
    pub answer_tokens: Vec<String>,
    pub answer_id: AnswerId,
}

/// Token table in first-occurrence order with corpus frequencies.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    ids: HashMap<String, u32>,
    freqs: Vec<u64>,
}

impl Vocabulary {
    pub fn from_tokens(tokens: impl IntoIterator<Item = String>) -> Self {
        let mut ids = HashMap::new();
        let mut list = Vec::new();
        for t in tokens {
            if !ids.contains_key(&t) {
                ids.insert(t.clone(), list.len() as u32);
                list.push(t);
            }
        }
        Vocabulary {
            freqs: vec![0; list.len()],
            tokens: list,
            ids,
        }
    }

    fn add(&mut self, token: &str) {
        let id = match self.ids.get(token) {
            Some(&id) => id,
            None => {
                let id = self.tokens.len() as u32;
                self.ids.insert(token.to_owned(), id);
                self.tokens.push(token.to_owned());
                self.freqs.push(0);
                id
            }
        };
        self.freqs[id as usize] += 1;
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.ids.get(token).copied()
    }

    pub fn token(&self, id: u32) -> &str {
        &self.tokens[id as usize]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn frequency(&self, id: u32) -> u64 {
        self.freqs[id as usize]
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// An immutable, tokenized Q–A collection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "StoredCorpus", try_from = "StoredCorpus")]
pub struct Corpus {
    pairs: Vec<QaPair>,
    answers: IndexMap<AnswerId, String>,
    vocabulary: Vocabulary,
    tokenizer: TokenizerMode,
}

/// Raw record as read from a corpus file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub question: String,
    pub answer: String,
}

#[derive(Serialize, Deserialize)]
struct StoredCorpus {
    tokenizer: TokenizerMode,
    pairs: Vec<PairRecord>,
}

impl From<Corpus> for StoredCorpus {
    fn from(c: Corpus) -> Self {
        StoredCorpus {
            tokenizer: c.tokenizer,
            pairs: c.records(),
        }
    }
}

impl TryFrom<StoredCorpus> for Corpus {
    type Error = Error;

    fn try_from(s: StoredCorpus) -> Result<Self> {
        Corpus::from_records(s.pairs, s.tokenizer)
    }
}

impl Corpus {
    /// Builds a corpus from records in order. Missing ids become the record's
    /// zero-based position.
    pub fn from_records(
        records: impl IntoIterator<Item = PairRecord>,
        tokenizer: TokenizerMode,
    ) -> Result<Self> {
        Self::build(records.into_iter().enumerate().collect(), tokenizer, None)
    }

    fn build(
        records: Vec<(usize, PairRecord)>,
        tokenizer: TokenizerMode,
        path: Option<&Path>,
    ) -> Result<Self> {
        let err_at = |line: usize, message: String| match path {
            Some(p) => Error::Parse {
                path: p.to_path_buf(),
                line: line + 1,
                message,
            },
            None => Error::invalid(format!("record {line}: {message}")),
        };
        let mut seen = HashSet::new();
        let mut pairs = Vec::with_capacity(records.len());
        let mut answers = IndexMap::new();
        let mut vocabulary = Vocabulary::default();
        for (pos, rec) in records {
            if rec.question.trim().is_empty() {
                return Err(err_at(pos, "empty question".into()));
            }
            if rec.answer.trim().is_empty() {
                return Err(err_at(pos, "empty answer".into()));
            }
            let id = rec.id.unwrap_or_else(|| pos.to_string());
            if !seen.insert(id.clone()) {
                return Err(Error::DuplicateId { id, line: pos + 1 });
            }
            let question_tokens = tokenize(&rec.question, tokenizer);
            let answer_tokens = tokenize(&rec.answer, tokenizer);
            for t in question_tokens.iter().chain(&answer_tokens) {
                vocabulary.add(t);
            }
            let answer_id = AnswerId::for_text(&rec.answer);
            answers
                .entry(answer_id.clone())
                .or_insert_with(|| normalize(&rec.answer));
            pairs.push(QaPair {
                id,
                question: rec.question,
                answer: rec.answer,
                question_tokens,
                answer_tokens,
                answer_id,
            });
        }
        Ok(Corpus {
            pairs,
            answers,
            vocabulary,
            tokenizer,
        })
    }

    pub fn pairs(&self) -> &[QaPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Distinct answers in first-occurrence order.
    pub fn answers(&self) -> &IndexMap<AnswerId, String> {
        &self.answers
    }

    pub fn answer_text(&self, id: &AnswerId) -> Option<&str> {
        self.answers.get(id).map(String::as_str)
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn tokenizer(&self) -> TokenizerMode {
        self.tokenizer
    }

    pub fn records(&self) -> Vec<PairRecord> {
        self.pairs
            .iter()
            .map(|p| PairRecord {
                id: Some(p.id.clone()),
                question: p.question.clone(),
                answer: p.answer.clone(),
            })
            .collect()
    }

    fn subset(&self, indices: &[usize]) -> Result<Corpus> {
        let records = indices
            .iter()
            .map(|&i| {
                let p = &self.pairs[i];
                (
                    i,
                    PairRecord {
                        id: Some(p.id.clone()),
                        question: p.question.clone(),
                        answer: p.answer.clone(),
                    },
                )
            })
            .collect();
        Corpus::build(records, self.tokenizer, None)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Jsonl,
    Tsv,
}

impl CorpusFormat {
    /// Guesses the format from the file extension; anything but `.tsv` is JSONL.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("tsv") | Some("txt") => CorpusFormat::Tsv,
            _ => CorpusFormat::Jsonl,
        }
    }
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsonl" => Ok(CorpusFormat::Jsonl),
            "tsv" => Ok(CorpusFormat::Tsv),
            other => Err(Error::invalid(format!("unknown corpus format {other:?}"))),
        }
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(format!("opening {}", path.display()), e))
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: PathBuf::from(path),
        line,
        message: message.into(),
    }
}

pub fn load_corpus(path: &Path, format: CorpusFormat, tokenizer: TokenizerMode) -> Result<Corpus> {
    let mut records = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let rec = match format {
            CorpusFormat::Jsonl => serde_json::from_str::<PairRecord>(line)
                .map_err(|e| parse_err(path, i + 1, e.to_string()))?,
            CorpusFormat::Tsv => {
                let fields: Vec<&str> = line.split('\t').collect();
                if fields.len() != 2 {
                    return Err(parse_err(
                        path,
                        i + 1,
                        format!("expected 2 tab-separated fields, found {}", fields.len()),
                    ));
                }
                PairRecord {
                    id: None,
                    question: fields[0].to_owned(),
                    answer: fields[1].to_owned(),
                }
            }
        };
        records.push((i, rec));
    }
    Corpus::build(records, tokenizer, Some(path))
}

pub fn save_corpus(corpus: &Corpus, path: &Path, format: CorpusFormat) -> Result<()> {
    let file =
        File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
    let mut out = BufWriter::new(file);
    let werr = |e| Error::io(format!("writing {}", path.display()), e);
    for rec in corpus.records() {
        match format {
            CorpusFormat::Jsonl => {
                serde_json::to_writer(&mut out, &rec)?;
                out.write_all(b"\n").map_err(werr)?;
            }
            CorpusFormat::Tsv => {
                if rec.question.contains(['\t', '\n']) || rec.answer.contains(['\t', '\n']) {
                    return Err(Error::invalid("TSV fields cannot contain tabs or newlines"));
                }
                writeln!(out, "{}\t{}", rec.question, rec.answer).map_err(werr)?;
            }
        }
    }
    out.flush().map_err(werr)
}

/// Train/validation/test split proportions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub valid: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios {
            train: 0.68,
            valid: 0.20,
            test: 0.12,
        }
    }
}

impl SplitRatios {
    pub fn new(train: f64, valid: f64, test: f64) -> Result<Self> {
        let r = SplitRatios { train, valid, test };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.valid, self.test];
        if parts.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::invalid("split ratios must be non-negative"));
        }
        if (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("split ratios must sum to 1"));
        }
        Ok(())
    }

    /// Sizes `(train, valid, test)`; valid and test are floored and train
    /// takes the remainder.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        let floor = |r: f64| ((r * n as f64) + 1e-9).floor() as usize;
        let valid = floor(self.valid).min(n);
        let test = floor(self.test).min(n - valid);
        (n - valid - test, valid, test)
    }
}

/// Shuffles pair positions with a seeded ChaCha stream and cuts them into
/// three disjoint corpora. Each part keeps the original file order.
pub fn split_corpus(
    corpus: &Corpus,
    ratios: SplitRatios,
    seed: u64,
) -> Result<(Corpus, Corpus, Corpus)> {
    ratios.validate()?;
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let n = corpus.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (n_train, n_valid, _) = ratios.sizes(n);
    let mut parts = [
        order[..n_train].to_vec(),
        order[n_train..n_train + n_valid].to_vec(),
        order[n_train + n_valid..].to_vec(),
    ];
    for p in &mut parts {
        p.sort_unstable();
    }
    Ok((
        corpus.subset(&parts[0])?,
        corpus.subset(&parts[1])?,
        corpus.subset(&parts[2])?,
    ))
}

/// A labelled question pair for the matching task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionPair {
    pub left: String,
    pub right: String,
    pub label: u8,
}

pub fn load_question_pairs(path: &Path) -> Result<Vec<QuestionPair>> {
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(parse_err(
                path,
                i + 1,
                format!("expected 3 tab-separated fields, found {}", fields.len()),
            ));
        }
        let label = match fields[2].trim() {
            "0" => 0,
            "1" => 1,
            other => return Err(parse_err(path, i + 1, format!("label must be 0 or 1, got {other:?}"))),
        };
        if fields[0].trim().is_empty() || fields[1].trim().is_empty() {
            return Err(parse_err(path, i + 1, "empty question"));
        }
        out.push(QuestionPair {
            left: fields[0].to_owned(),
            right: fields[1].to_owned(),
            label,
        });
    }
    Ok(out)
}

/// Seeded split of a question-pair list, same sizing rule as [`split_corpus`].
pub fn split_question_pairs(
    pairs: &[QuestionPair],
    ratios: SplitRatios,
    seed: u64,
) -> Result<(Vec<QuestionPair>, Vec<QuestionPair>, Vec<QuestionPair>)> {
    ratios.validate()?;
    if pairs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (n_train, n_valid, _) = ratios.sizes(pairs.len());
    let take = |idx: &[usize]| {
        let mut idx = idx.to_vec();
        idx.sort_unstable();
        idx.into_iter().map(|i| pairs[i].clone()).collect::<Vec<_>>()
    };
    Ok((
        take(&order[..n_train]),
        take(&order[n_train..n_train + n_valid]),
        take(&order[n_train + n_valid..]),
    ))
}

/// Collection over the distinct questions of a pair list, used as the IQF
/// background and scorer vocabulary in matching mode. Each question stands
/// in as its own answer.
pub fn question_collection(pairs: &[QuestionPair], tokenizer: TokenizerMode) -> Result<Corpus> {
    let mut seen = HashSet::new();
    let mut records = Vec::new();
    for p in pairs {
        for q in [&p.left, &p.right] {
            let key = normalize(q);
            if seen.insert(key) {
                records.push(PairRecord {
                    id: None,
                    question: q.clone(),
                    answer: q.clone(),
                });
            }
        }
    }
    if records.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Corpus::from_records(records, tokenizer)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(contents: &str, suffix: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(suffix).tempfile().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    fn rec(q: &str, a: &str) -> PairRecord {
        PairRecord {
            id: None,
            question: q.into(),
            answer: a.into(),
        }
    }

    fn fixture(n: usize) -> Corpus {
        let recs = (0..n).map(|i| rec(&format!("question {i}"), &format!("answer {}", i % 7)));
        Corpus::from_records(recs, TokenizerMode::UnicodeWord).unwrap()
    }

    #[test]
    fn duplicate_answers_share_an_id() {
        let f = write_tmp(
            concat!(
                r#"{"id": "q1", "question": "how to borrow?", "answer": "Go to the desk."}"#, "\n",
                r#"{"id": "q2", "question": "where is it?", "answer": "Floor 2."}"#, "\n",
                r#"{"id": "q3", "question": "borrow books?", "answer": "Go to the desk."}"#, "\n",
            ),
            ".jsonl",
        );
        let c = load_corpus(f.path(), CorpusFormat::Jsonl, TokenizerMode::UnicodeWord).unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c.answers().len(), 2);
        assert_eq!(c.pairs()[0].answer_id, c.pairs()[2].answer_id);
        assert_ne!(c.pairs()[0].answer_id, c.pairs()[1].answer_id);
    }

    #[test]
    fn answer_identity_uses_nfc() {
        assert_eq!(AnswerId::for_text("cafe\u{301}"), AnswerId::for_text("café"));
        assert_ne!(AnswerId::for_text("café"), AnswerId::for_text("cafe"));
    }

    #[test]
    fn missing_field_reports_line() {
        let f = write_tmp(
            concat!(
                r#"{"question": "a", "answer": "b"}"#, "\n",
                r#"{"question": "c"}"#, "\n",
            ),
            ".jsonl",
        );
        match load_corpus(f.path(), CorpusFormat::Jsonl, TokenizerMode::Char) {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 2);
                assert!(message.contains("answer"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_ids_rejected() {
        let f = write_tmp(
            concat!(
                r#"{"id": "x", "question": "a", "answer": "b"}"#, "\n",
                r#"{"id": "x", "question": "c", "answer": "d"}"#, "\n",
            ),
            ".jsonl",
        );
        assert!(matches!(
            load_corpus(f.path(), CorpusFormat::Jsonl, TokenizerMode::Char),
            Err(Error::DuplicateId { line: 2, .. })
        ));
    }

    #[test]
    fn blank_answer_rejected() {
        let f = write_tmp("q\t   \n", ".tsv");
        assert!(matches!(
            load_corpus(f.path(), CorpusFormat::Tsv, TokenizerMode::Char),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn tsv_auto_ids_are_line_indices() {
        let f = write_tmp("q one\ta one\nq two\ta two\n", ".tsv");
        let c = load_corpus(f.path(), CorpusFormat::from_path(f.path()), TokenizerMode::UnicodeWord)
            .unwrap();
        let ids: Vec<_> = c.pairs().iter().map(|p| p.id.as_str()).collect();
        assert_eq!(ids, ["0", "1"]);
        assert_eq!(c.pairs()[1].question_tokens, ["q", "two"]);
    }

    #[test]
    fn vocabulary_covers_all_tokens() {
        let c = fixture(30);
        for p in c.pairs() {
            for t in p.question_tokens.iter().chain(&p.answer_tokens) {
                assert!(c.vocabulary().id(t).is_some());
            }
        }
        assert!(c.answers().len() <= c.len());
        let total: u64 = (0..c.vocabulary().len() as u32).map(|i| c.vocabulary().frequency(i)).sum();
        let expected: usize = c.pairs().iter().map(|p| p.question_tokens.len() + p.answer_tokens.len()).sum();
        assert_eq!(total as usize, expected);
    }

    #[test]
    fn save_then_load_round_trips() {
        let c = fixture(12);
        for format in [CorpusFormat::Jsonl, CorpusFormat::Tsv] {
            let f = tempfile::NamedTempFile::new().unwrap();
            save_corpus(&c, f.path(), format).unwrap();
            let back = load_corpus(f.path(), format, c.tokenizer()).unwrap();
            if format == CorpusFormat::Jsonl {
                assert_eq!(back, c);
            } else {
                assert_eq!(back.records().len(), c.len());
                assert_eq!(back.answers(), c.answers());
            }
        }
    }

    #[test]
    fn serde_round_trip_rebuilds_corpus() {
        let c = fixture(5);
        let json = serde_json::to_string(&c).unwrap();
        let back: Corpus = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn split_sizes_follow_ratios() {
        let c = fixture(100);
        let (tr, va, te) = split_corpus(&c, SplitRatios::default(), 7).unwrap();
        assert_eq!((tr.len(), va.len(), te.len()), (68, 20, 12));

        let all_train = SplitRatios::new(1.0, 0.0, 0.0).unwrap();
        let (tr, va, te) = split_corpus(&c, all_train, 7).unwrap();
        assert_eq!((tr.len(), va.len(), te.len()), (100, 0, 0));
        assert_eq!(tr, c);
    }

    #[test]
    fn split_remainder_goes_to_train() {
        assert_eq!(SplitRatios::default().sizes(7), (6, 1, 0));
        assert_eq!(SplitRatios::new(0.0, 0.5, 0.5).unwrap().sizes(3), (1, 1, 1));
    }

    #[test]
    fn split_seed_determinism() {
        let c = fixture(50);
        let r = SplitRatios::default();
        let ids = |c: &Corpus| c.pairs().iter().map(|p| p.id.clone()).collect::<Vec<_>>();
        let a = split_corpus(&c, r, 1).unwrap();
        let b = split_corpus(&c, r, 1).unwrap();
        let d = split_corpus(&c, r, 2).unwrap();
        assert_eq!(ids(&a.0), ids(&b.0));
        assert_eq!(ids(&a.2), ids(&b.2));
        assert_ne!(ids(&a.0), ids(&d.0));
    }

    #[test]
    fn split_rejects_bad_input() {
        assert!(SplitRatios::new(0.5, 0.5, 0.5).is_err());
        assert!(SplitRatios::new(1.2, -0.2, 0.0).is_err());
        let empty = Corpus::from_records(Vec::new(), TokenizerMode::Char).unwrap();
        assert!(matches!(
            split_corpus(&empty, SplitRatios::default(), 0),
            Err(Error::EmptyCorpus)
        ));
    }

    #[test]
    fn question_pairs_parse_and_validate() {
        let f = write_tmp("how old\twhat age\t1\nhi\tbye\t0\n", ".tsv");
        let pairs = load_question_pairs(f.path()).unwrap();
        assert_eq!(pairs.len(), 2);
        assert_eq!(pairs[0].label, 1);

        let bad = write_tmp("a\tb\t1\nc\td\t2\n", ".tsv");
        assert!(matches!(load_question_pairs(bad.path()), Err(Error::Parse { line: 2, .. })));

        let coll = question_collection(&pairs, TokenizerMode::UnicodeWord).unwrap();
        assert_eq!(coll.len(), 4);
    }

    proptest::proptest! {
        #[test]
        fn splits_partition_the_corpus(seed in proptest::prelude::any::<u64>()) {
            let c = fixture(37);
            let (tr, va, te) = split_corpus(&c, SplitRatios::default(), seed).unwrap();
            let mut ids: Vec<String> = [&tr, &va, &te]
                .iter()
                .flat_map(|s| s.pairs().iter().map(|p| p.id.clone()))
                .collect();
            proptest::prop_assert_eq!(ids.len(), 37);
            ids.sort();
            ids.dedup();
            proptest::prop_assert_eq!(ids.len(), 37);
        }
    }
}
