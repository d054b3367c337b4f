//! Dataset ingestion, adjacency construction and padded batching.

mod adjacency;
mod batch;
mod embeddings;
mod parsed;
mod raw;
mod synthetic;
mod vocab;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use adjacency::{AdjacencyMatrix, Flavor};
pub use batch::{make_batches, Batch, BatchedExample};
pub use embeddings::{load_embeddings, PretrainedEmbeddings};
pub use parsed::{load_parsed_dataset, write_parsed_dataset, ParsedRecord};
pub use raw::{load_raw_dataset, RawRecord};
pub use synthetic::{synthetic_corpus, ASPECTS};
pub use vocab::{Vocabulary, PAD, UNK};

use crate::error::{Error, Result};

/// Sentiment class. The discriminant is the class index used everywhere.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Negative = 0,
    Neutral = 1,
    Positive = 2,
}

impl Polarity {
    pub const ALL: [Polarity; 3] = [Polarity::Negative, Polarity::Neutral, Polarity::Positive];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// Maps the raw-file encoding −1/0/1.
    pub fn from_raw(code: &str) -> Option<Self> {
        match code {
            "-1" => Some(Polarity::Negative),
            "0" => Some(Polarity::Neutral),
            "1" => Some(Polarity::Positive),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Polarity::Negative => "negative",
            Polarity::Neutral => "neutral",
            Polarity::Positive => "positive",
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Half-open, 0-based token span of the aspect term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Span {
    pub from: usize,
    pub to: usize,
}

impl Span {
    pub fn new(from: usize, to: usize) -> Self {
        Self { from, to }
    }

    pub fn len(&self) -> usize {
        self.to - self.from
    }

    pub fn is_empty(&self) -> bool {
        self.to <= self.from
    }

    pub fn contains(&self, i: usize) -> bool {
        self.from <= i && i < self.to
    }

    pub fn check(&self, n: usize) -> Result<()> {
        if self.is_empty() || self.to > n {
            return Err(Error::Bounds(format!("aspect span {}..{} in sentence of {n} tokens", self.from, self.to)));
        }
        Ok(())
    }
}

/// One labeled (sentence, aspect, parse) sample.
#[derive(Clone, Debug, PartialEq)]
pub struct Example {
    pub tokens: Vec<String>,
    /// Filled by [`Vocabulary::encode`]; empty until then.
    pub token_ids: Vec<usize>,
    /// Head index per token, `None` for the root.
    pub heads: Vec<Option<usize>>,
    pub aspect: Span,
    pub label: Polarity,
}

impl Example {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn aspect_tokens(&self) -> &[String] {
        &self.tokens[self.aspect.from..self.aspect.to]
    }

    /// Sentence text with tokens joined by single spaces.
    pub fn sentence(&self) -> String {
        self.tokens.join(" ")
    }
}

/// Per-class example counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelCounts {
    pub positive: usize,
    pub neutral: usize,
    pub negative: usize,
}

impl LabelCounts {
    pub fn of<'a>(labels: impl IntoIterator<Item = &'a Polarity>) -> Self {
        let mut c = Self::default();
        for l in labels {
            match l {
                Polarity::Positive => c.positive += 1,
                Polarity::Neutral => c.neutral += 1,
                Polarity::Negative => c.negative += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.positive + self.neutral + self.negative
    }
}

impl fmt::Display for LabelCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.positive, self.neutral, self.negative)
    }
}

/// The five benchmark collections.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetName {
    Twitter,
    Lap14,
    Rest14,
    Rest15,
    Rest16,
}

impl DatasetName {
    pub const ALL: [DatasetName; 5] =
        [DatasetName::Twitter, DatasetName::Lap14, DatasetName::Rest14, DatasetName::Rest15, DatasetName::Rest16];

    pub fn as_str(self) -> &'static str {
        match self {
            DatasetName::Twitter => "twitter",
            DatasetName::Lap14 => "lap14",
            DatasetName::Rest14 => "rest14",
            DatasetName::Rest15 => "rest15",
            DatasetName::Rest16 => "rest16",
        }
    }

    /// Published (train, test) positive/neutral/negative counts.
    pub fn reference_counts(self) -> (LabelCounts, LabelCounts) {
        let c = |positive, neutral, negative| LabelCounts { positive, neutral, negative };
        match self {
            DatasetName::Twitter => (c(1561, 3127, 1560), c(173, 346, 173)),
            DatasetName::Lap14 => (c(994, 464, 870), c(341, 169, 128)),
            DatasetName::Rest14 => (c(2164, 637, 807), c(728, 196, 196)),
            DatasetName::Rest15 => (c(912, 36, 256), c(326, 34, 182)),
            DatasetName::Rest16 => (c(1240, 69, 439), c(469, 30, 117)),
        }
    }
}

impl fmt::Display for DatasetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DatasetName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|d| d.as_str() == s.to_ascii_lowercase()).ok_or_else(|| {
            Error::Config(format!("unknown dataset `{s}` (expected twitter, lap14, rest14, rest15 or rest16)"))
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

/// `<root>/<dataset>/<split>.jsonl`
pub fn parsed_path(root: &Path, name: DatasetName, split: Split) -> PathBuf {
    root.join(name.as_str()).join(format!("{}.jsonl", split.as_str()))
}

/// `<root>/<dataset>/<split>.raw`
pub fn raw_path(root: &Path, name: DatasetName, split: Split) -> PathBuf {
    root.join(name.as_str()).join(format!("{}.raw", split.as_str()))
}

/// Train and test splits of one collection, sharing a vocabulary.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub name: DatasetName,
    pub train: Vec<Example>,
    pub test: Vec<Example>,
    pub vocab: Vocabulary,
}

impl Dataset {
    /// Loads both parsed splits and builds the vocabulary over train then test.
    pub fn load(root: &Path, name: DatasetName) -> Result<Self> {
        let mut train = load_split(root, name, Split::Train)?;
        let mut test = load_split(root, name, Split::Test)?;
        let vocab = Vocabulary::build(train.iter().chain(&test).map(|e| e.tokens.as_slice()));
        vocab.encode(&mut train);
        vocab.encode(&mut test);
        Ok(Self { name, train, test, vocab })
    }
}

/// Loads one parsed split without encoding it.
pub fn load_split(root: &Path, name: DatasetName, split: Split) -> Result<Vec<Example>> {
    let path = parsed_path(root, name, split);
    if !path.exists() {
        return Err(Error::MissingInput {
            path,
            remedy: "run the preprocessor to produce parsed splits, or point --data-dir / ASGCN_DATA at them".into(),
        });
    }
    load_parsed_dataset(&path)
}
