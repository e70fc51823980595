//! Tab-separated prediction files: `id<TAB>label` for labels and
//! `id<TAB>value` (0–4) for external scale scores. UTF-8, LF line endings.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::corpus::{Corpus, SentimentLabel};
use crate::error::{Error, Result};
use crate::scorer::{convert_scale, Prediction, ScaleScore};

fn records<'a>(text: &'a str, origin: &'a Path) -> impl Iterator<Item = Result<(usize, &'a str, &'a str)>> + 'a {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(move |(i, line)| {
            let lineno = i + 1;
            let (id, value) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(origin, lineno, "expected id<TAB>value"))?;
            if id.is_empty() {
                return Err(Error::parse(origin, lineno, "empty id"));
            }
            Ok((lineno, id, value))
        })
}

fn check_unique(seen: &mut HashSet<String>, id: &str, origin: &Path, lineno: usize) -> Result<()> {
    if !seen.insert(id.to_string()) {
        return Err(Error::parse(origin, lineno, format!("duplicate id {id:?}")));
    }
    Ok(())
}

pub fn parse_labels(text: &str, origin: &Path) -> Result<Vec<(String, SentimentLabel)>> {
    let mut seen = HashSet::new();
    records(text, origin)
        .map(|r| {
            let (lineno, id, value) = r?;
            check_unique(&mut seen, id, origin, lineno)?;
            let label = value.parse().map_err(|m: String| Error::parse(origin, lineno, m))?;
            Ok((id.to_string(), label))
        })
        .collect()
}

pub fn parse_scale_scores(text: &str, origin: &Path) -> Result<Vec<(String, ScaleScore)>> {
    let mut seen = HashSet::new();
    records(text, origin)
        .map(|r| {
            let (lineno, id, value) = r?;
            check_unique(&mut seen, id, origin, lineno)?;
            let v: i64 = value
                .trim()
                .parse()
                .map_err(|_| Error::parse(origin, lineno, format!("invalid scale value {value:?}")))?;
            let score = ScaleScore::new(v).map_err(|e| Error::parse(origin, lineno, e.to_string()))?;
            Ok((id.to_string(), score))
        })
        .collect()
}

pub fn load_labels(path: impl AsRef<Path>) -> Result<Vec<(String, SentimentLabel)>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_labels(&text, path)
}

pub fn load_scale_scores(path: impl AsRef<Path>) -> Result<Vec<(String, ScaleScore)>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scale_scores(&text, path)
}

/// Converts external 0–4 scores to label predictions.
pub fn scale_predictions(scores: &[(String, ScaleScore)]) -> Vec<Prediction> {
    scores
        .iter()
        .map(|(id, s)| Prediction::label_only(id.clone(), convert_scale(*s)))
        .collect()
}

pub fn render_labels(predictions: &[Prediction]) -> Result<String> {
    let mut out = String::new();
    for p in predictions {
        if p.id.contains(['\t', '\n', '\r']) {
            return Err(Error::Alignment(format!(
                "id {:?} cannot be written to a TSV file",
                p.id
            )));
        }
        let _ = writeln!(out, "{}\t{}", p.id, p.label);
    }
    Ok(out)
}

pub fn save_labels(predictions: &[Prediction], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, render_labels(predictions)?).map_err(|e| Error::io(path, e))
}

/// Reorders `(id, label)` predictions to corpus order. Every corpus tweet
/// needs exactly one prediction and no prediction may name an unknown id.
pub fn align_to_corpus(corpus: &Corpus, predictions: Vec<(String, SentimentLabel)>) -> Result<Vec<Prediction>> {
    let mut by_id: HashMap<String, SentimentLabel> = predictions.into_iter().collect();
    let mut out = Vec::with_capacity(corpus.len());
    let mut missing = Vec::new();
    for t in corpus {
        match by_id.remove(&t.id) {
            Some(l) => out.push(Prediction::label_only(t.id.clone(), l)),
            None => missing.push(t.id.clone()),
        }
    }
    if !missing.is_empty() {
        return Err(Error::Alignment(format!("no prediction for {}", missing.join(", "))));
    }
    if !by_id.is_empty() {
        let mut extra: Vec<_> = by_id.into_keys().collect();
        extra.sort();
        return Err(Error::Alignment(format!(
            "predictions for unknown ids {}",
            extra.join(", ")
        )));
    }
    Ok(out)
}
