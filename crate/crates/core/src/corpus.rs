//! Tweet records, the JSON Lines corpus format and label shares.
//!
//! One JSON object per line:
//!
//! ```text
//! {"id":"1","text":"Read this! #cancer","doi":"10.1/x","gold":"neutral","title":"..."}
//! ```
//!
//! `doi`, `gold` and `title` are optional and omitted when absent. Text is kept
//! exactly as read; normalization happens in later stages.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Three-way sentiment category.
///
/// Ordered `Negative < Neutral < Positive`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SentimentLabel {
    Negative,
    Neutral,
    Positive,
}

impl SentimentLabel {
    /// All labels in report column order (`+`, `-`, `n`).
    pub const ALL: [SentimentLabel; 3] = [
        SentimentLabel::Positive,
        SentimentLabel::Negative,
        SentimentLabel::Neutral,
    ];

    /// Position in [`SentimentLabel::ALL`].
    pub fn index(self) -> usize {
        match self {
            SentimentLabel::Positive => 0,
            SentimentLabel::Negative => 1,
            SentimentLabel::Neutral => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SentimentLabel::Positive => "positive",
            SentimentLabel::Negative => "negative",
            SentimentLabel::Neutral => "neutral",
        }
    }
}

impl fmt::Display for SentimentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SentimentLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "positive" => Ok(SentimentLabel::Positive),
            "negative" => Ok(SentimentLabel::Negative),
            "neutral" => Ok(SentimentLabel::Neutral),
            other => Err(format!("unknown sentiment label {other:?}")),
        }
    }
}

/// A single tweet record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tweet {
    pub id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doi: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold: Option<SentimentLabel>,
    /// Inline paper title; takes precedence over metadata lookup.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
}

impl Tweet {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Tweet {
            id: id.into(),
            text: text.into(),
            doi: None,
            gold: None,
            title: None,
        }
    }

    pub fn with_doi(mut self, doi: impl Into<String>) -> Self {
        self.doi = Some(doi.into());
        self
    }

    pub fn with_gold(mut self, gold: SentimentLabel) -> Self {
        self.gold = Some(gold);
        self
    }

    pub fn with_title(mut self, title: impl Into<String>) -> Self {
        self.title = Some(title.into());
        self
    }
}

/// Ordered collection of tweets with unique ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    tweets: Vec<Tweet>,
}

impl Corpus {
    /// Builds a corpus, rejecting empty or duplicate ids.
    pub fn new(tweets: Vec<Tweet>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(tweets.len());
        for t in &tweets {
            if t.id.is_empty() {
                return Err(Error::Alignment("empty tweet id".into()));
            }
            if !seen.insert(t.id.as_str()) {
                return Err(Error::DuplicateId(t.id.clone()));
            }
        }
        Ok(Corpus { tweets })
    }

    pub fn tweets(&self) -> &[Tweet] {
        &self.tweets
    }

    pub fn len(&self) -> usize {
        self.tweets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tweets.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Tweet> {
        self.tweets.iter()
    }

    pub fn into_tweets(self) -> Vec<Tweet> {
        self.tweets
    }

    /// Maps tweet texts, keeping ids and every other field.
    pub fn map_text(&self, mut f: impl FnMut(&Tweet) -> String) -> Corpus {
        let tweets = self
            .tweets
            .iter()
            .map(|t| Tweet {
                text: f(t),
                ..t.clone()
            })
            .collect();
        Corpus { tweets }
    }

    /// Gold labels in corpus order, or the ids lacking one.
    pub fn gold_labels(&self) -> Result<Vec<SentimentLabel>> {
        let missing: Vec<String> = self
            .tweets
            .iter()
            .filter(|t| t.gold.is_none())
            .map(|t| t.id.clone())
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingGold(missing));
        }
        Ok(self.tweets.iter().filter_map(|t| t.gold).collect())
    }

    /// Parses JSON Lines text. `origin` is only used in error messages.
    pub fn parse(input: &str, origin: &Path) -> Result<Self> {
        let mut tweets = Vec::new();
        let mut seen = HashSet::new();
        for (idx, line) in input.lines().enumerate() {
            let lineno = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let tweet: Tweet = serde_json::from_str(line).map_err(|e| Error::parse(origin, lineno, e.to_string()))?;
            if tweet.id.is_empty() {
                return Err(Error::parse(origin, lineno, "empty tweet id"));
            }
            if !seen.insert(tweet.id.clone()) {
                return Err(Error::parse(
                    origin,
                    lineno,
                    format!("duplicate tweet id {:?}", tweet.id),
                ));
            }
            tweets.push(tweet);
        }
        Ok(Corpus { tweets })
    }

    /// Serializes to JSON Lines, one record per line with a trailing newline.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for t in &self.tweets {
            // Serializing a struct of strings cannot fail.
            out.push_str(&serde_json::to_string(t).expect("tweet serializes"));
            out.push('\n');
        }
        out
    }
}

impl<'a> IntoIterator for &'a Corpus {
    type Item = &'a Tweet;
    type IntoIter = std::slice::Iter<'a, Tweet>;

    fn into_iter(self) -> Self::IntoIter {
        self.tweets.iter()
    }
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Corpus::parse(&text, path)
}

pub fn save_corpus(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(corpus.to_jsonl().as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

/// Percentage share of each category.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Shares {
    pub positive: f64,
    pub negative: f64,
    pub neutral: f64,
}

impl Shares {
    pub fn get(&self, label: SentimentLabel) -> f64 {
        match label {
            SentimentLabel::Positive => self.positive,
            SentimentLabel::Negative => self.negative,
            SentimentLabel::Neutral => self.neutral,
        }
    }

    pub(crate) fn from_counts(counts: [u64; 3]) -> Self {
        let n: u64 = counts.iter().sum();
        let pct = |c: u64| 100.0 * c as f64 / n as f64;
        Shares {
            positive: pct(counts[SentimentLabel::Positive.index()]),
            negative: pct(counts[SentimentLabel::Negative.index()]),
            neutral: pct(counts[SentimentLabel::Neutral.index()]),
        }
    }
}

pub fn class_shares(labels: &[SentimentLabel]) -> Result<Shares> {
    if labels.is_empty() {
        return Err(Error::NoLabels);
    }
    let mut counts = [0u64; 3];
    for l in labels {
        counts[l.index()] += 1;
    }
    Ok(Shares::from_counts(counts))
}
