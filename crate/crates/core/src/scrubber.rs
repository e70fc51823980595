//! Title-term scrubbing: derives t_a from t_0 by deleting words of the
//! linked paper's title.
//!
//! The default mode removes each title token independently (whole-word,
//! case-insensitive, every occurrence). Short tokens and protected words are
//! kept. [`ScrubMode::Phrase`] instead removes only contiguous occurrences of
//! the complete title.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::normalizer::{collapse_whitespace, token_spans, CleanTweet};

/// Always protected from removal.
pub const NEGATION_WORDS: [&str; 5] = ["no", "not", "never", "none", "cannot"];

const BUNDLED_STOPWORDS: &str = include_str!("../data/stopwords.txt");

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScrubMode {
    #[default]
    Tokens,
    Phrase,
}

impl ScrubMode {
    fn other(self) -> Self {
        match self {
            ScrubMode::Tokens => ScrubMode::Phrase,
            ScrubMode::Phrase => ScrubMode::Tokens,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RemovalPolicy {
    pub min_token_length: usize,
    protected: BTreeSet<String>,
    pub mode: ScrubMode,
}

fn word_list(text: &str) -> impl Iterator<Item = String> + '_ {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
}

impl Default for RemovalPolicy {
    fn default() -> Self {
        RemovalPolicy::with_protected(word_list(BUNDLED_STOPWORDS))
    }
}

impl RemovalPolicy {
    /// Policy protecting `words` plus the negation words.
    pub fn with_protected<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut protected: BTreeSet<String> = words.into_iter().map(Into::into).collect();
        protected.extend(NEGATION_WORDS.iter().map(|w| w.to_string()));
        RemovalPolicy {
            min_token_length: 3,
            protected,
            mode: ScrubMode::Tokens,
        }
    }

    /// Replaces the bundled stopwords with a one-word-per-line file.
    pub fn from_stopword_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(RemovalPolicy::with_protected(word_list(&text)))
    }

    pub fn is_protected(&self, token: &str) -> bool {
        self.protected.contains(token)
    }

    /// Whether a lowercased title token is eligible for removal.
    pub fn is_removable(&self, token: &str) -> bool {
        token.chars().count() >= self.min_token_length && !self.is_protected(token)
    }

    /// Title tokens this policy would delete from a tweet.
    pub fn removable_terms(&self, title: &str) -> BTreeSet<String> {
        lowered_spans(title)
            .into_iter()
            .map(|(_, t)| t)
            .filter(|t| self.is_removable(t))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScrubbedTweet {
    pub id: String,
    pub text_ta: String,
    /// Removed title terms with occurrence counts.
    pub removed_terms: BTreeMap<String, usize>,
}

fn lowered_spans(text: &str) -> Vec<(Range<usize>, String)> {
    token_spans(text)
        .into_iter()
        .map(|r| {
            let lower = text[r.clone()].to_lowercase();
            (r, lower)
        })
        .collect()
}

fn cut(text: &str, ranges: &[Range<usize>]) -> String {
    let mut out = String::with_capacity(text.len());
    let mut last = 0;
    for r in ranges {
        out.push_str(&text[last..r.start]);
        last = r.end;
    }
    out.push_str(&text[last..]);
    collapse_whitespace(&out)
}

fn scrub_tokens(text: &str, title: &str, policy: &RemovalPolicy) -> (String, BTreeMap<String, usize>) {
    let targets = policy.removable_terms(title);
    let mut removed = BTreeMap::new();
    if targets.is_empty() {
        return (text.to_string(), removed);
    }
    let mut ranges = Vec::new();
    for (range, tok) in lowered_spans(text) {
        if targets.contains(&tok) {
            *removed.entry(tok).or_insert(0) += 1;
            ranges.push(range);
        }
    }
    if ranges.is_empty() {
        return (text.to_string(), removed);
    }
    (cut(text, &ranges), removed)
}

fn scrub_phrase(text: &str, title: &str) -> (String, BTreeMap<String, usize>) {
    let phrase: Vec<String> = lowered_spans(title).into_iter().map(|(_, t)| t).collect();
    let mut removed = BTreeMap::new();
    if phrase.is_empty() {
        return (text.to_string(), removed);
    }
    let mut current = text.to_string();
    loop {
        let spans = lowered_spans(&current);
        let mut ranges = Vec::new();
        let mut i = 0;
        while i + phrase.len() <= spans.len() {
            let window = &spans[i..i + phrase.len()];
            if window.iter().zip(&phrase).all(|((_, t), p)| t == p) {
                ranges.push(window[0].0.start..window[phrase.len() - 1].0.end);
                for p in &phrase {
                    *removed.entry(p.clone()).or_insert(0) += 1;
                }
                i += phrase.len();
            } else {
                i += 1;
            }
        }
        if ranges.is_empty() {
            return (current, removed);
        }
        // Removing one occurrence can join the halves of another.
        current = cut(&current, &ranges);
    }
}

/// Scrubs raw text; returns the new text and what was deleted.
pub fn scrub_text(text: &str, title: &str, policy: &RemovalPolicy) -> (String, BTreeMap<String, usize>) {
    match policy.mode {
        ScrubMode::Tokens => scrub_tokens(text, title, policy),
        ScrubMode::Phrase => scrub_phrase(text, title),
    }
}

pub fn scrub(clean: &CleanTweet, title: &str, policy: &RemovalPolicy) -> ScrubbedTweet {
    let (text_ta, removed_terms) = scrub_text(&clean.text_t0, title, policy);
    ScrubbedTweet {
        id: clean.id.clone(),
        text_ta,
        removed_terms,
    }
}

/// Summary of a corpus scrub.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScrubReport {
    pub mode: ScrubMode,
    pub tweets: usize,
    /// Tweets that had a title available (inline or resolved).
    pub with_title: usize,
    /// Tweets whose DOI had no resolved title; passed through unchanged.
    pub missing_title: Vec<String>,
    /// Tweets without DOI or inline title; passed through unchanged.
    pub no_doi: Vec<String>,
    pub tokens_removed: usize,
    /// Token count the other mode would have removed, for comparison.
    pub tokens_removed_other_mode: usize,
}

#[derive(Debug, Clone)]
pub struct ScrubOutcome {
    /// Input corpus with texts replaced by their scrubbed form.
    pub corpus: Corpus,
    pub scrubbed: Vec<ScrubbedTweet>,
    pub report: ScrubReport,
}

/// Scrubs every tweet of a t_0 corpus. A tweet's inline `title` wins over the
/// DOI lookup in `titles`.
pub fn scrub_corpus(corpus: &Corpus, titles: &BTreeMap<String, String>, policy: &RemovalPolicy) -> ScrubOutcome {
    let other = RemovalPolicy {
        mode: policy.mode.other(),
        ..policy.clone()
    };
    let mut report = ScrubReport {
        mode: policy.mode,
        tweets: corpus.len(),
        ..Default::default()
    };
    let mut scrubbed = Vec::with_capacity(corpus.len());

    let out = corpus.map_text(|t| {
        let title = t
            .title
            .as_deref()
            .or_else(|| t.doi.as_deref().and_then(|d| titles.get(d).map(String::as_str)));
        let Some(title) = title else {
            match &t.doi {
                Some(_) => report.missing_title.push(t.id.clone()),
                None => report.no_doi.push(t.id.clone()),
            }
            scrubbed.push(ScrubbedTweet {
                id: t.id.clone(),
                text_ta: t.text.clone(),
                removed_terms: BTreeMap::new(),
            });
            return t.text.clone();
        };
        report.with_title += 1;
        let (text, removed) = scrub_text(&t.text, title, policy);
        report.tokens_removed += removed.values().sum::<usize>();
        report.tokens_removed_other_mode += scrub_text(&t.text, title, &other).1.values().sum::<usize>();
        scrubbed.push(ScrubbedTweet {
            id: t.id.clone(),
            text_ta: text.clone(),
            removed_terms: removed,
        });
        text
    });

    ScrubOutcome {
        corpus: out,
        scrubbed,
        report,
    }
}
