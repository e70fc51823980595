//! Strength-pair sentiment classification and 0–4 scale conversion.
//!
//! Every token found in the lexicon contributes its strength. The tweet's
//! positive value is the largest positive strength (at least 1) and its
//! negative value the most negative strength (at most -1). Whichever has the
//! larger magnitude decides the label; equal magnitudes are neutral.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, SentimentLabel};
use crate::error::{Error, Result};
use crate::lexicon::Lexicon;
use crate::normalizer::tokenize;
use crate::scrubber::NEGATION_WORDS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StrengthPair {
    pub pos: i8,
    pub neg: i8,
}

impl StrengthPair {
    pub const BASELINE: StrengthPair = StrengthPair { pos: 1, neg: -1 };

    /// Returns `None` unless `pos` is in `1..=5` and `neg` in `-5..=-1`.
    pub fn new(pos: i8, neg: i8) -> Option<Self> {
        ((1..=5).contains(&pos) && (-5..=-1).contains(&neg)).then_some(StrengthPair { pos, neg })
    }
}

/// Output of an external classifier on a 0 (negative) to 4 (positive) scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct ScaleScore(u8);

impl ScaleScore {
    pub fn new(value: i64) -> Result<Self> {
        if (0..=4).contains(&value) {
            Ok(ScaleScore(value as u8))
        } else {
            Err(Error::ScaleOutOfRange(value))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

/// Lexicon terms that reached the winning strengths of a pair.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriggerTerms {
    pub positive: Vec<String>,
    pub negative: Vec<String>,
}

impl TriggerTerms {
    /// Terms responsible for a label: positive triggers for a positive
    /// label, negative triggers for a negative one, nothing for neutral.
    pub fn for_label(&self, label: SentimentLabel) -> &[String] {
        match label {
            SentimentLabel::Positive => &self.positive,
            SentimentLabel::Negative => &self.negative,
            SentimentLabel::Neutral => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub id: String,
    pub label: SentimentLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<StrengthPair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub triggers: Option<TriggerTerms>,
}

impl Prediction {
    /// A bare label, as read back from a predictions file.
    pub fn label_only(id: impl Into<String>, label: SentimentLabel) -> Self {
        Prediction {
            id: id.into(),
            label,
            pair: None,
            triggers: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreOptions {
    /// A negation word directly before a lexicon term flips that term's sign.
    pub negation: bool,
}

/// Per-token strengths as `(term, strength)`, after optional negation.
fn token_strengths<'a>(
    tokens: &'a [String],
    lexicon: &Lexicon,
    options: ScoreOptions,
) -> impl Iterator<Item = (&'a str, i8)> + 'a {
    let strengths: Vec<Option<i8>> = tokens.iter().map(|t| lexicon.get(t)).collect();
    tokens.iter().enumerate().filter_map(move |(i, tok)| {
        let mut s = strengths[i]?;
        if options.negation && i > 0 && NEGATION_WORDS.contains(&tokens[i - 1].as_str()) {
            s = -s;
        }
        Some((tok.as_str(), s))
    })
}

fn pair_and_triggers(text: &str, lexicon: &Lexicon, options: ScoreOptions) -> (StrengthPair, TriggerTerms) {
    let tokens = tokenize(text);
    let mut pair = StrengthPair::BASELINE;
    let mut pos_terms = BTreeSet::new();
    let mut neg_terms = BTreeSet::new();

    for (term, s) in token_strengths(&tokens, lexicon, options) {
        if s > 0 {
            if s > pair.pos {
                pair.pos = s;
                pos_terms.clear();
            }
            if s == pair.pos {
                pos_terms.insert(term);
            }
        } else {
            if s < pair.neg {
                pair.neg = s;
                neg_terms.clear();
            }
            if s == pair.neg {
                neg_terms.insert(term);
            }
        }
    }

    let triggers = TriggerTerms {
        positive: pos_terms.into_iter().map(str::to_string).collect(),
        negative: neg_terms.into_iter().map(str::to_string).collect(),
    };
    (pair, triggers)
}

pub fn strength_pair(text: &str, lexicon: &Lexicon) -> StrengthPair {
    pair_and_triggers(text, lexicon, ScoreOptions::default()).0
}

pub fn strength_pair_with(text: &str, lexicon: &Lexicon, options: ScoreOptions) -> StrengthPair {
    pair_and_triggers(text, lexicon, options).0
}

pub fn classify_pair(pair: StrengthPair) -> SentimentLabel {
    let neg = -i16::from(pair.neg);
    let pos = i16::from(pair.pos);
    match pos.cmp(&neg) {
        std::cmp::Ordering::Greater => SentimentLabel::Positive,
        std::cmp::Ordering::Less => SentimentLabel::Negative,
        std::cmp::Ordering::Equal => SentimentLabel::Neutral,
    }
}

pub fn classify_text(id: &str, text: &str, lexicon: &Lexicon, options: ScoreOptions) -> Prediction {
    let (pair, triggers) = pair_and_triggers(text, lexicon, options);
    Prediction {
        id: id.to_string(),
        label: classify_pair(pair),
        pair: Some(pair),
        triggers: Some(triggers),
    }
}

/// 0–1 negative, 2 neutral, 3–4 positive.
pub fn convert_scale(score: ScaleScore) -> SentimentLabel {
    match score.get() {
        0 | 1 => SentimentLabel::Negative,
        2 => SentimentLabel::Neutral,
        _ => SentimentLabel::Positive,
    }
}

/// One prediction per tweet, in corpus order.
pub fn score_corpus(corpus: &Corpus, lexicon: &Lexicon, options: ScoreOptions) -> Vec<Prediction> {
    corpus
        .iter()
        .map(|t| classify_text(&t.id, &t.text, lexicon, options))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lex(entries: &[(&str, i64)]) -> Lexicon {
        Lexicon::from_entries(entries.iter().copied()).unwrap()
    }

    #[test]
    fn cancer_pair() {
        assert_eq!(
            strength_pair("cancer", &lex(&[("cancer", -4)])),
            StrengthPair { pos: 1, neg: -4 }
        );
    }

    #[test]
    fn empty_text_is_baseline() {
        assert_eq!(strength_pair("", &lex(&[("good", 3)])), StrengthPair::BASELINE);
    }

    #[test]
    fn good_disease_pair() {
        let l = lex(&[("good", 3), ("disease", -3)]);
        assert_eq!(strength_pair("good disease", &l), StrengthPair { pos: 3, neg: -3 });
    }

    #[test]
    fn case_folded_lookup() {
        let l = lex(&[("cancer", -4)]);
        assert_eq!(strength_pair("CANCER Cancer", &l).neg, -4);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(
            classify_pair(StrengthPair { pos: 1, neg: -4 }),
            SentimentLabel::Negative
        );
        assert_eq!(classify_pair(StrengthPair::BASELINE), SentimentLabel::Neutral);
        assert_eq!(classify_pair(StrengthPair { pos: 3, neg: -3 }), SentimentLabel::Neutral);
        assert_eq!(
            classify_pair(StrengthPair { pos: 5, neg: -2 }),
            SentimentLabel::Positive
        );
    }

    #[test]
    fn cancer_triggers_negative() {
        let p = classify_text("1", "cancer", &lex(&[("cancer", -4)]), ScoreOptions::default());
        assert_eq!(p.label, SentimentLabel::Negative);
        let trig = p.triggers.unwrap();
        assert_eq!(trig.negative, ["cancer"]);
        assert!(trig.positive.is_empty());
    }

    #[test]
    fn patched_cancer_is_neutral() {
        use crate::lexicon::LexiconPatch;
        let l = lex(&[("cancer", -4), ("good", 3)]);
        let patched = l.apply_patch(&LexiconPatch::new(["cancer"], "")).unwrap();
        let p = classify_text("1", "cancer", &patched, ScoreOptions::default());
        assert_eq!(p.pair, Some(StrengthPair::BASELINE));
        assert_eq!(p.label, SentimentLabel::Neutral);
    }

    #[test]
    fn no_lexicon_words_no_triggers() {
        let p = classify_text("1", "just a link", &lex(&[("good", 3)]), ScoreOptions::default());
        assert_eq!(p.label, SentimentLabel::Neutral);
        assert_eq!(p.triggers, Some(TriggerTerms::default()));
    }

    #[test]
    fn tied_triggers_all_recorded() {
        let l = lex(&[("cancer", -4), ("death", -4), ("risk", -2)]);
        let p = classify_text("1", "death risk cancer death", &l, ScoreOptions::default());
        assert_eq!(p.triggers.unwrap().negative, ["cancer", "death"]);
    }

    #[test]
    fn negation_flips_when_enabled() {
        let l = lex(&[("good", 3)]);
        let on = ScoreOptions { negation: true };
        assert_eq!(classify_text("1", "not good", &l, on).label, SentimentLabel::Negative);
        assert_eq!(
            classify_text("1", "not good", &l, ScoreOptions::default()).label,
            SentimentLabel::Positive
        );
    }

    #[test]
    fn scale_conversion() {
        let labels: Vec<_> = (0..=4).map(|v| convert_scale(ScaleScore::new(v).unwrap())).collect();
        use SentimentLabel::*;
        assert_eq!(labels, [Negative, Negative, Neutral, Positive, Positive]);
        assert!(ScaleScore::new(5).is_err());
        assert!(ScaleScore::new(-1).is_err());
    }

    #[test]
    fn scale_conversion_is_symmetric() {
        // v and 4 - v map to mirrored labels around neutral.
        for v in 0..=4 {
            let a = convert_scale(ScaleScore::new(v).unwrap());
            let b = convert_scale(ScaleScore::new(4 - v).unwrap());
            let mirrored = match a {
                SentimentLabel::Positive => SentimentLabel::Negative,
                SentimentLabel::Negative => SentimentLabel::Positive,
                SentimentLabel::Neutral => SentimentLabel::Neutral,
            };
            assert_eq!(b, mirrored);
        }
    }

    #[test]
    fn empty_corpus_scores_empty() {
        assert!(score_corpus(&Corpus::default(), &lex(&[]), ScoreOptions::default()).is_empty());
    }
}
