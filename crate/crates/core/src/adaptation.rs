//! Lexicon adaptation: charge each misclassification to the lexicon terms
//! that decided it, rank terms by how many errors they caused, and propose a
//! removal patch for review.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, SentimentLabel};
use crate::error::{Error, Result};
use crate::evaluator::{confusion_by_id, EvalReport};
use crate::lexicon::{Lexicon, LexiconPatch};
use crate::scorer::{score_corpus, Prediction, ScoreOptions};

pub const DEFAULT_THRESHOLD: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisagreementAttribution {
    pub term: String,
    pub wrong_trigger_count: usize,
    pub affected_tweet_ids: Vec<String>,
}

/// Attributes disagreements to trigger terms.
///
/// Only tweets predicted positive or negative against a different gold label
/// count; each trigger of the winning polarity is charged once per tweet.
/// Sorted by count descending, then term.
pub fn attribute(gold: &[SentimentLabel], predictions: &[Prediction]) -> Result<Vec<DisagreementAttribution>> {
    if gold.len() != predictions.len() {
        return Err(Error::Alignment(format!(
            "{} gold labels vs {} predictions",
            gold.len(),
            predictions.len()
        )));
    }
    let mut by_term: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    for (&g, p) in gold.iter().zip(predictions) {
        let triggers = p
            .triggers
            .as_ref()
            .ok_or_else(|| Error::MissingTriggers(p.id.clone()))?;
        if p.label == g || p.label == SentimentLabel::Neutral {
            continue;
        }
        for term in triggers.for_label(p.label) {
            by_term.entry(term.as_str()).or_default().push(p.id.clone());
        }
    }
    let mut out: Vec<DisagreementAttribution> = by_term
        .into_iter()
        .map(|(term, ids)| DisagreementAttribution {
            term: term.to_string(),
            wrong_trigger_count: ids.len(),
            affected_tweet_ids: ids,
        })
        .collect();
    out.sort_by(|a, b| {
        b.wrong_trigger_count
            .cmp(&a.wrong_trigger_count)
            .then_with(|| a.term.cmp(&b.term))
    });
    Ok(out)
}

/// Every term charged at least `threshold` times.
pub fn propose_patch(attributions: &[DisagreementAttribution], threshold: usize, corpus_id: &str) -> LexiconPatch {
    let threshold = threshold.max(1);
    LexiconPatch::new(
        attributions
            .iter()
            .filter(|a| a.wrong_trigger_count >= threshold)
            .map(|a| a.term.clone()),
        format!("proposed from disagreement attribution\nthreshold={threshold}\ncorpus={corpus_id}"),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdaptationOutcome {
    pub before: EvalReport,
    pub after: EvalReport,
    pub attributions: Vec<DisagreementAttribution>,
    #[serde(serialize_with = "patch_terms")]
    pub patch: LexiconPatch,
}

fn patch_terms<S: serde::Serializer>(patch: &LexiconPatch, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(patch.terms())
}

fn report(corpus: &Corpus, predictions: &[Prediction]) -> Result<EvalReport> {
    let gold = corpus.iter().map(|t| (t.id.as_str(), t.gold.expect("gold checked")));
    let pred = predictions.iter().map(|p| (p.id.as_str(), p.label));
    EvalReport::from_matrix(confusion_by_id(gold, pred)?)
}

/// Scores with the base lexicon, proposes a patch from the disagreements,
/// re-scores with the patched lexicon and reports both. The patch is returned
/// for review, never written back into the lexicon.
pub fn adapt_and_compare(
    corpus: &Corpus,
    lexicon: &Lexicon,
    threshold: usize,
    options: ScoreOptions,
    corpus_id: &str,
) -> Result<AdaptationOutcome> {
    let gold = corpus.gold_labels()?;
    let before_preds = score_corpus(corpus, lexicon, options);
    let attributions = attribute(&gold, &before_preds)?;
    let patch = propose_patch(&attributions, threshold, corpus_id);
    let patched = lexicon.apply_patch(&patch)?;
    let after_preds = score_corpus(corpus, &patched, options);
    Ok(AdaptationOutcome {
        before: report(corpus, &before_preds)?,
        after: report(corpus, &after_preds)?,
        attributions,
        patch,
    })
}
