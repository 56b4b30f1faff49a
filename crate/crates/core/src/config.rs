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
//! Pipeline configuration file and assembly.
//!
//! The configuration is a single JSON document carrying `"version": 1`.
//! Relative paths inside it are resolved against the file's directory.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bm25::{Bm25Index, Bm25Params, IndexSnapshot};
use crate::corpus::{
    load_corpus, load_question_pairs, question_collection, split_corpus, split_question_pairs,
    Corpus, CorpusFormat, QuestionPair, SplitRatios,
};
use crate::error::{Error, Result};
use crate::knowledge::{load_triplets, triplets_from_topics, InjectionConfig, KnowledgeBase};
use crate::plsa::{self, PlsaConfig, TopicModel};
use crate::rank::{FusionConfig, Pipeline};
use crate::scorer::{RelevanceScorer, RemoteScorer, TfIdfScorer};
use crate::tokenize::TokenizerMode;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    /// Rank Q–A pairs for a query.
    #[default]
    Faq,
    /// Classify question pairs as same-intent or not.
    Match,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSource {
    pub path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<CorpusFormat>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicalKnowledge {
    #[serde(default = "default_top_l")]
    pub top_l: usize,
    /// Trained model to mine. Without one, a model is trained on the
    /// training split with the `plsa` settings.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<PathBuf>,
}

fn default_top_l() -> usize {
    10
}

impl Default for TopicalKnowledge {
    fn default() -> Self {
        TopicalKnowledge {
            top_l: default_top_l(),
            model: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct KnowledgeConfig {
    /// Triplet TSV files (external bases or previously extracted topical ones).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub triplets: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topical: Option<TopicalKnowledge>,
}

impl KnowledgeConfig {
    pub fn is_empty(&self) -> bool {
        self.triplets.is_empty() && self.topical.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ScorerSpec {
    Baseline,
    Remote {
        url: String,
        #[serde(default = "default_timeout_ms")]
        timeout_ms: u64,
    },
    /// No relevance model; only valid with `alpha = 1`.
    None,
}

fn default_timeout_ms() -> u64 {
    10_000
}

impl std::str::FromStr for ScorerSpec {
    type Err = Error;

    /// `baseline`, `none` or `remote:URL`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseline" => Ok(ScorerSpec::Baseline),
            "none" => Ok(ScorerSpec::None),
            _ => match s.strip_prefix("remote:") {
                Some(url) if !url.is_empty() => Ok(ScorerSpec::Remote {
                    url: url.to_owned(),
                    timeout_ms: default_timeout_ms(),
                }),
                _ => Err(Error::invalid(format!("unknown scorer {s:?}"))),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub ratios: SplitRatios,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub version: u32,
    #[serde(default)]
    pub task: Task,
    pub corpus: CorpusSource,
    #[serde(default)]
    pub tokenizer: TokenizerMode,
    #[serde(default)]
    pub bm25: Bm25Params<f64>,
    #[serde(default)]
    pub plsa: PlsaConfig<f64>,
    #[serde(default, skip_serializing_if = "KnowledgeConfig::is_empty")]
    pub knowledge: KnowledgeConfig,
    #[serde(default)]
    pub injection: InjectionConfig,
    pub scorer: ScorerSpec,
    #[serde(default)]
    pub fusion: FusionConfig<f64>,
    #[serde(default)]
    pub split: SplitConfig,
    /// Prebuilt index snapshot; its collection replaces the training split.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<PathBuf>,
    /// Directory relative paths were resolved against.
    #[serde(skip)]
    base_dir: Option<PathBuf>,
}

impl PipelineConfig {
    pub fn new(corpus: impl Into<PathBuf>, scorer: ScorerSpec) -> Self {
        PipelineConfig {
            version: CONFIG_VERSION,
            task: Task::Faq,
            corpus: CorpusSource {
                path: corpus.into(),
                format: None,
            },
            tokenizer: TokenizerMode::default(),
            bm25: Bm25Params::default(),
            plsa: PlsaConfig::default(),
            knowledge: KnowledgeConfig::default(),
            injection: InjectionConfig::default(),
            scorer,
            fusion: FusionConfig::default(),
            split: SplitConfig::default(),
            index: None,
            base_dir: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let config: PipelineConfig = serde_json::from_str(text)?;
        if config.version != CONFIG_VERSION {
            return Err(Error::invalid(format!(
                "unsupported config version {}, expected {CONFIG_VERSION}",
                config.version
            )));
        }
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Reads, validates and resolves relative paths against the file's
    /// directory, then checks that every referenced file exists.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading config {}", path.display()), e))?;
        let mut config = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.resolve_paths(base);
        config.base_dir = Some(base.to_path_buf());
        config.check_files()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.bm25.validate()?;
        self.plsa.validate()?;
        self.injection.validate()?;
        self.fusion.validate()?;
        self.split.ratios.validate()?;
        if let Some(t) = &self.knowledge.topical {
            if t.top_l < 2 {
                return Err(Error::invalid("knowledge.topical.top_l must be at least 2"));
            }
        }
        if self.scorer == ScorerSpec::None && self.fusion.alpha != 1.0 {
            return Err(Error::invalid("scorer \"none\" requires fusion.alpha = 1"));
        }
        Ok(())
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        self.map_paths(|p| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        });
    }

    fn map_paths(&mut self, mut f: impl FnMut(&mut PathBuf)) {
        f(&mut self.corpus.path);
        self.knowledge.triplets.iter_mut().for_each(&mut f);
        if let Some(m) = self.knowledge.topical.as_mut().and_then(|t| t.model.as_mut()) {
            f(m);
        }
        if let Some(i) = self.index.as_mut() {
            f(i);
        }
    }

    fn check_files(&self) -> Result<()> {
        let mut paths = vec![&self.corpus.path];
        paths.extend(&self.knowledge.triplets);
        paths.extend(self.knowledge.topical.as_ref().and_then(|t| t.model.as_ref()));
        paths.extend(self.index.as_ref());
        for p in paths {
            if !p.exists() {
                return Err(Error::invalid(format!("{} not found", p.display())));
            }
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON form, as hex. Paths under the
    /// directory a config was loaded from are hashed relative to it, so
    /// moving the directory does not change the fingerprint.
    pub fn fingerprint(&self) -> String {
        let mut relative = self.clone();
        if let Some(base) = &self.base_dir {
            relative.map_paths(|p| {
                if let Ok(rest) = p.strip_prefix(base) {
                    *p = rest.to_path_buf();
                }
            });
        }
        let canonical = serde_json::to_vec(&relative).expect("config serializes");
        hex::encode(Sha256::digest(&canonical))
    }

    fn corpus_format(&self) -> CorpusFormat {
        self.corpus
            .format
            .unwrap_or_else(|| CorpusFormat::from_path(&self.corpus.path))
    }

    pub fn load_corpus(&self) -> Result<Corpus> {
        load_corpus(&self.corpus.path, self.corpus_format(), self.tokenizer)
    }

    pub fn split_corpus(&self) -> Result<(Corpus, Corpus, Corpus)> {
        split_corpus(&self.load_corpus()?, self.split.ratios, self.split.seed)
    }

    pub fn split_pairs(&self) -> Result<(Vec<QuestionPair>, Vec<QuestionPair>, Vec<QuestionPair>)> {
        let pairs = load_question_pairs(&self.corpus.path)?;
        split_question_pairs(&pairs, self.split.ratios, self.split.seed)
    }

    /// Loads or mines the configured knowledge. `collection` is what a topic
    /// model is trained on when none is supplied.
    pub fn knowledge_base(&self, collection: &Corpus) -> Result<Option<KnowledgeBase>> {
        let mut parts = Vec::new();
        for p in &self.knowledge.triplets {
            parts.push(load_triplets(p)?);
        }
        if let Some(t) = &self.knowledge.topical {
            let model = match &t.model {
                Some(p) => TopicModel::<f64>::load(p)?,
                None => plsa::train(collection, self.plsa)?,
            };
            parts.push(triplets_from_topics(&model, t.top_l)?);
        }
        let mut parts = parts.into_iter();
        let Some(first) = parts.next() else {
            return Ok(None);
        };
        Ok(Some(parts.fold(first, |acc, kb| acc.merge(&kb))))
    }

    pub fn build_scorer(&self, collection: &Corpus) -> Option<Box<dyn RelevanceScorer<f64>>> {
        match &self.scorer {
            ScorerSpec::Baseline => Some(Box::new(TfIdfScorer::<f64>::fit(collection))),
            ScorerSpec::Remote { url, timeout_ms } => Some(Box::new(RemoteScorer::for_corpus(
                url.clone(),
                collection,
                Duration::from_millis(*timeout_ms),
            ))),
            ScorerSpec::None => None,
        }
    }

    /// Builds the pipeline over `collection` (or over the configured index
    /// snapshot when one is set).
    pub fn assemble(&self, collection: Corpus) -> Result<Pipeline<f64>> {
        let (collection, index) = match &self.index {
            Some(path) => {
                let snap = IndexSnapshot::<f64>::load(path)?;
                (snap.corpus, snap.index)
            }
            None => {
                let index = Bm25Index::build(&collection, self.bm25)?;
                (collection, index)
            }
        };
        let knowledge = self.knowledge_base(&collection)?;
        let scorer = self.build_scorer(&collection);
        Pipeline::new(collection, index, knowledge, self.injection, scorer, self.fusion)
    }

    /// FAQ pipeline over the training split.
    pub fn assemble_faq(&self) -> Result<Pipeline<f64>> {
        let (train, _, _) = self.split_corpus()?;
        self.assemble(train)
    }

    /// Matching pipeline over the distinct questions of the training pairs.
    pub fn assemble_match(&self) -> Result<Pipeline<f64>> {
        let (train, _, _) = self.split_pairs()?;
        self.assemble(question_collection(&train, self.tokenizer)?)
    }

    /// Assembles whichever pipeline the task calls for.
    pub fn assemble_for_task(&self) -> Result<Pipeline<f64>> {
        match self.task {
            Task::Faq => self.assemble_faq(),
            Task::Match => self.assemble_match(),
        }
    }
}
