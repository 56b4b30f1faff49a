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
//! Knowledge triplets and their injection into a token sequence.
//!
//! A query is turned into a sentence tree: every query token stays on the
//! trunk, and each selected triplet `(head, relation, tail)` whose head is a
//! trunk token hangs off that token as a two-token branch `[relation, tail]`
//! emitted right after it. Branch tokens continue the soft position of their
//! anchor and can only see their anchor and their own branch, so injected
//! knowledge cannot leak into the rest of the sentence.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plsa::TopicModel;
use crate::scalar::Scalar;
use crate::tokenize::normalize;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triplet {
    pub head: String,
    pub relation: String,
    pub tail: String,
}

impl Triplet {
    pub fn new(
        head: impl Into<String>,
        relation: impl Into<String>,
        tail: impl Into<String>,
    ) -> Result<Self> {
        let t = Triplet {
            head: head.into(),
            relation: relation.into(),
            tail: tail.into(),
        };
        if t.head.is_empty() || t.relation.is_empty() || t.tail.is_empty() {
            return Err(Error::invalid("triplet fields must be non-empty"));
        }
        Ok(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceTag {
    External,
    Topical,
    Merged,
}

/// Deduplicated triplet set with a head-token index.
#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeBase {
    triplets: BTreeSet<Triplet>,
    by_head: HashMap<String, Vec<Triplet>>,
    source: SourceTag,
}

impl KnowledgeBase {
    pub fn new(source: SourceTag) -> Self {
        KnowledgeBase {
            triplets: BTreeSet::new(),
            by_head: HashMap::new(),
            source,
        }
    }

    pub fn from_triplets(triplets: impl IntoIterator<Item = Triplet>, source: SourceTag) -> Self {
        let triplets: BTreeSet<Triplet> = triplets.into_iter().collect();
        let mut by_head: HashMap<String, Vec<Triplet>> = HashMap::new();
        // set order is (head, relation, tail), so each head list is already
        // sorted by (relation, tail)
        for t in &triplets {
            by_head.entry(t.head.clone()).or_default().push(t.clone());
        }
        KnowledgeBase {
            triplets,
            by_head,
            source,
        }
    }

    pub fn len(&self) -> usize {
        self.triplets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triplets.is_empty()
    }

    pub fn source(&self) -> SourceTag {
        self.source
    }

    pub fn triplets(&self) -> impl Iterator<Item = &Triplet> {
        self.triplets.iter()
    }

    pub fn contains(&self, t: &Triplet) -> bool {
        self.triplets.contains(t)
    }

    /// Triplets with the given head, ordered by `(relation, tail)`.
    pub fn lookup(&self, head: &str) -> &[Triplet] {
        self.by_head.get(head).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn merge(&self, other: &KnowledgeBase) -> KnowledgeBase {
        KnowledgeBase::from_triplets(
            self.triplets.iter().chain(&other.triplets).cloned(),
            SourceTag::Merged,
        )
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path)
            .map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
        let mut out = BufWriter::new(file);
        let werr = |e| Error::io(format!("writing {}", path.display()), e);
        for t in &self.triplets {
            writeln!(out, "{}\t{}\t{}", t.head, t.relation, t.tail).map_err(werr)?;
        }
        out.flush().map_err(werr)
    }
}

/// Loads a `head<TAB>relation<TAB>tail` file. Heads and tails are NFC
/// normalized and lowercased so they line up with tokenizer output.
pub fn load_triplets(path: &Path) -> Result<KnowledgeBase> {
    let file = File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
    let mut triplets = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(parse_err(format!(
                "expected 3 tab-separated fields, found {}",
                fields.len()
            )));
        }
        let t = Triplet::new(
            normalize(fields[0].trim()).to_lowercase(),
            normalize(fields[1].trim()),
            normalize(fields[2].trim()).to_lowercase(),
        )
        .map_err(|e| parse_err(e.to_string()))?;
        triplets.push(t);
    }
    Ok(KnowledgeBase::from_triplets(triplets, SourceTag::External))
}

pub fn topic_relation(topic: usize) -> String {
    format!("relevance_T{topic}")
}

/// Symmetric topically-relevant triplets: for every topic, every ordered pair
/// of distinct words among its `top_l` most probable words.
pub fn triplets_from_topics<F: Scalar>(model: &TopicModel<F>, top_l: usize) -> Result<KnowledgeBase> {
    if top_l < 2 {
        return Err(Error::invalid("top_l must be at least 2"));
    }
    let mut triplets = Vec::new();
    for k in 0..model.k_topics() {
        let words = model.top_words(k, top_l)?;
        let relation = topic_relation(k);
        for (i, wi) in words.iter().enumerate() {
            for (j, wj) in words.iter().enumerate() {
                if i != j {
                    triplets.push(Triplet::new(*wi, relation.clone(), *wj)?);
                }
            }
        }
    }
    Ok(KnowledgeBase::from_triplets(triplets, SourceTag::Topical))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionRule {
    /// Lexicographic on `(relation, tail)`.
    #[default]
    RelationTail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InjectionConfig {
    pub max_triplets_per_token: usize,
    pub max_sequence_length: usize,
    #[serde(default)]
    pub selection_rule: SelectionRule,
}

impl Default for InjectionConfig {
    fn default() -> Self {
        InjectionConfig {
            max_triplets_per_token: 2,
            max_sequence_length: 128,
            selection_rule: SelectionRule::RelationTail,
        }
    }
}

impl InjectionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_triplets_per_token == 0 || self.max_sequence_length == 0 {
            return Err(Error::invalid("injection limits must be positive"));
        }
        Ok(())
    }
}

/// A query with knowledge branches, ready for a visibility-aware encoder.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "WireSequence", from = "WireSequence")]
pub struct InjectedSequence {
    pub tokens: Vec<String>,
    pub soft_positions: Vec<usize>,
    /// Row-major `|tokens| x |tokens|` visibility.
    pub visible: Vec<Vec<bool>>,
    pub trunk_mask: Vec<bool>,
    /// Set when the query alone exceeded the length budget and was cut.
    pub truncated: bool,
}

#[derive(Serialize, Deserialize)]
struct WireSequence {
    tokens: Vec<String>,
    soft_positions: Vec<usize>,
    visible: Vec<Vec<u8>>,
    trunk_mask: Vec<bool>,
}

impl From<InjectedSequence> for WireSequence {
    fn from(s: InjectedSequence) -> Self {
        WireSequence {
            tokens: s.tokens,
            soft_positions: s.soft_positions,
            visible: s
                .visible
                .into_iter()
                .map(|row| row.into_iter().map(u8::from).collect())
                .collect(),
            trunk_mask: s.trunk_mask,
        }
    }
}

impl From<WireSequence> for InjectedSequence {
    fn from(w: WireSequence) -> Self {
        InjectedSequence {
            tokens: w.tokens,
            soft_positions: w.soft_positions,
            visible: w
                .visible
                .into_iter()
                .map(|row| row.into_iter().map(|v| v != 0).collect())
                .collect(),
            trunk_mask: w.trunk_mask,
            truncated: false,
        }
    }
}

impl InjectedSequence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn trunk_tokens(&self) -> impl Iterator<Item = &str> {
        self.tokens
            .iter()
            .zip(&self.trunk_mask)
            .filter(|(_, &t)| t)
            .map(|(s, _)| s.as_str())
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Slot {
    Trunk,
    Branch { anchor: usize, branch: usize },
}

/// Builds the injected sequence for `query`. Branches are added left to
/// right until the next one would overflow `max_sequence_length`; the trunk
/// is only cut when it alone is too long.
pub fn inject(query: &[String], kb: &KnowledgeBase, config: &InjectionConfig) -> Result<InjectedSequence> {
    config.validate()?;
    if query.is_empty() {
        return Err(Error::invalid("cannot inject into an empty query"));
    }
    let max_len = config.max_sequence_length;
    let truncated = query.len() > max_len;
    let trunk = &query[..query.len().min(max_len)];
    let mut budget = max_len - trunk.len();
    let mut branches_open = true;

    let mut tokens = Vec::new();
    let mut soft_positions = Vec::new();
    let mut slots = Vec::new();
    let mut n_branches = 0;
    for (pos, token) in trunk.iter().enumerate() {
        let anchor = tokens.len();
        tokens.push(token.clone());
        soft_positions.push(pos);
        slots.push(Slot::Trunk);
        if !branches_open {
            continue;
        }
        for t in kb.lookup(token).iter().take(config.max_triplets_per_token) {
            if budget < 2 {
                branches_open = false;
                break;
            }
            budget -= 2;
            for (offset, tok) in [&t.relation, &t.tail].into_iter().enumerate() {
                tokens.push(tok.clone());
                soft_positions.push(pos + 1 + offset);
                slots.push(Slot::Branch {
                    anchor,
                    branch: n_branches,
                });
            }
            n_branches += 1;
        }
    }

    let n = tokens.len();
    let mut visible = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            visible[i][j] = i == j
                || match (slots[i], slots[j]) {
                    (Slot::Trunk, Slot::Trunk) => true,
                    (Slot::Branch { branch: a, .. }, Slot::Branch { branch: b, .. }) => a == b,
                    (Slot::Branch { anchor, .. }, Slot::Trunk) => anchor == j,
                    (Slot::Trunk, Slot::Branch { anchor, .. }) => anchor == i,
                };
        }
    }
    Ok(InjectedSequence {
        tokens,
        soft_positions,
        visible,
        trunk_mask: slots.iter().map(|s| *s == Slot::Trunk).collect(),
        truncated,
    })
}
