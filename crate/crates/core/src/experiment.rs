//! End-to-end experiment runner: clean, optionally scrub, score under each
//! configured condition and evaluate against gold labels.
//!
//! A run is described by a TOML file:
//!
//! ```toml
//! corpus = "corpus.jsonl"
//! lexicon = "lexicon.tsv"
//! patch = "patch.txt"              # optional; proposed by adaptation if absent
//! conditions = ["t0:pair", "ta:pair", "ta:pair-patched", "t0:scale"]
//! threshold = 2
//! negation = false
//! allow_missing_titles = false
//!
//! [scrub]
//! min_token_length = 3
//! stopwords = "stopwords.txt"
//! phrase = false
//!
//! [scale_scores]
//! t0 = "external_t0.tsv"
//! ta = "external_ta.tsv"
//!
//! [metadata]
//! endpoint = "https://api.crossref.org/works/{doi}"
//! cache = ".meta-cache"
//! ```
//!
//! Relative paths are resolved against the config file's directory.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::adaptation::{adapt_and_compare, DEFAULT_THRESHOLD};
use crate::corpus::{class_shares, load_corpus, Corpus, Shares};
use crate::error::{Error, Result};
use crate::evaluator::{confusion_by_id, render_table, EvalReport, TableRow};
use crate::lexicon::{load_lexicon, load_patch, Lexicon, LexiconPatch};
use crate::metadata::{BulkResolution, MetadataClient, MetadataConfig};
use crate::normalizer::clean_corpus;
use crate::predictions::{align_to_corpus, load_scale_scores, scale_predictions};
use crate::scorer::{score_corpus, Prediction, ScoreOptions};
use crate::scrubber::{scrub_corpus, RemovalPolicy, ScrubMode, ScrubReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TextStage {
    /// Affordances stripped.
    T0,
    /// Affordances and title terms stripped.
    Ta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Pair,
    PairPatched,
    Scale,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Condition {
    pub stage: TextStage,
    pub model: ModelKind,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let stage = match self.stage {
            TextStage::T0 => "t0",
            TextStage::Ta => "ta",
        };
        let model = match self.model {
            ModelKind::Pair => "pair",
            ModelKind::PairPatched => "pair-patched",
            ModelKind::Scale => "scale",
        };
        write!(f, "{stage}:{model}")
    }
}

impl FromStr for Condition {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let (stage, model) = s
            .split_once(':')
            .ok_or_else(|| format!("condition {s:?} is not <t0|ta>:<pair|pair-patched|scale>"))?;
        let stage = match stage {
            "t0" => TextStage::T0,
            "ta" => TextStage::Ta,
            other => return Err(format!("unknown text stage {other:?}")),
        };
        let model = match model {
            "pair" => ModelKind::Pair,
            "pair-patched" => ModelKind::PairPatched,
            "scale" => ModelKind::Scale,
            other => return Err(format!("unknown model {other:?}")),
        };
        Ok(Condition { stage, model })
    }
}

impl TryFrom<String> for Condition {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Condition> for String {
    fn from(c: Condition) -> String {
        c.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScrubSettings {
    pub min_token_length: usize,
    pub stopwords: Option<PathBuf>,
    pub phrase: bool,
}

impl Default for ScrubSettings {
    fn default() -> Self {
        ScrubSettings {
            min_token_length: 3,
            stopwords: None,
            phrase: false,
        }
    }
}

impl ScrubSettings {
    pub fn policy(&self) -> Result<RemovalPolicy> {
        let mut policy = match &self.stopwords {
            Some(p) => RemovalPolicy::from_stopword_file(p)?,
            None => RemovalPolicy::default(),
        };
        policy.min_token_length = self.min_token_length;
        policy.mode = if self.phrase {
            ScrubMode::Phrase
        } else {
            ScrubMode::Tokens
        };
        Ok(policy)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetadataSettings {
    pub endpoint: Option<String>,
    pub cache: Option<PathBuf>,
    pub field_path: Option<String>,
}

impl MetadataSettings {
    /// Environment defaults overridden by explicit settings.
    pub fn to_config(&self) -> MetadataConfig {
        let mut cfg = MetadataConfig::from_env();
        if let Some(e) = &self.endpoint {
            cfg.endpoint = Some(e.clone());
        }
        if let Some(c) = &self.cache {
            cfg.cache_dir = c.clone();
        }
        if let Some(f) = &self.field_path {
            cfg.field_path = f.clone();
        }
        cfg
    }
}

fn default_threshold() -> usize {
    DEFAULT_THRESHOLD
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub corpus: PathBuf,
    #[serde(default)]
    pub lexicon: Option<PathBuf>,
    #[serde(default)]
    pub patch: Option<PathBuf>,
    pub conditions: Vec<Condition>,
    #[serde(default = "default_threshold")]
    pub threshold: usize,
    #[serde(default)]
    pub negation: bool,
    #[serde(default)]
    pub allow_missing_titles: bool,
    #[serde(default)]
    pub scrub: ScrubSettings,
    #[serde(default)]
    pub scale_scores: BTreeMap<TextStage, PathBuf>,
    #[serde(default)]
    pub metadata: MetadataSettings,
}

impl RunConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.resolve_paths(base_dir);
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        RunConfig::parse(&text, base)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.corpus);
        self.lexicon.iter_mut().for_each(fix);
        self.patch.iter_mut().for_each(fix);
        self.scrub.stopwords.iter_mut().for_each(fix);
        self.scale_scores.values_mut().for_each(fix);
        self.metadata.cache.iter_mut().for_each(fix);
    }

    pub fn validate(&self) -> Result<()> {
        if self.conditions.is_empty() {
            return Err(Error::Config("at least one condition is required".into()));
        }
        if self.threshold == 0 {
            return Err(Error::Config("threshold must be at least 1".into()));
        }
        for c in &self.conditions {
            match c.model {
                ModelKind::Pair | ModelKind::PairPatched if self.lexicon.is_none() => {
                    return Err(Error::Config(format!("condition {c} needs a lexicon")));
                }
                ModelKind::Scale if !self.scale_scores.contains_key(&c.stage) => {
                    return Err(Error::Config(format!("condition {c} needs scale_scores for its stage")));
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn score_options(&self) -> ScoreOptions {
        ScoreOptions {
            negation: self.negation,
        }
    }
}

/// Looks up titles for every DOI lacking an inline title. No client is built
/// (and so no network is touched) when inline titles cover the corpus.
pub fn resolve_titles(corpus: &Corpus, meta: &MetadataConfig) -> Result<BulkResolution> {
    let needs_lookup = corpus.iter().any(|t| t.doi.is_some() && t.title.is_none());
    if !needs_lookup {
        let mut out = BulkResolution::default();
        for t in corpus {
            if let (Some(d), Some(title)) = (&t.doi, &t.title) {
                out.titles.entry(d.clone()).or_insert_with(|| title.clone());
            }
        }
        return Ok(out);
    }
    let client = MetadataClient::new(meta.clone())?;
    Ok(client.bulk_resolve(corpus))
}

fn evaluate(corpus: &Corpus, predictions: &[Prediction]) -> Result<EvalReport> {
    let gold = corpus.iter().map(|t| (t.id.as_str(), t.gold.expect("gold checked")));
    let pred = predictions.iter().map(|p| (p.id.as_str(), p.label));
    EvalReport::from_matrix(confusion_by_id(gold, pred)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionResult {
    pub condition: Condition,
    pub report: EvalReport,
    /// Terms removed from the lexicon, for pair-patched conditions.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub patch: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub n: usize,
    pub gold_shares: Shares,
    pub conditions: Vec<ConditionResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scrub: Option<ScrubReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub title_failures: Vec<String>,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_table(&self) -> String {
        let mut rows = vec![TableRow::reference("gold", self.gold_shares)];
        rows.extend(
            self.conditions
                .iter()
                .map(|c| TableRow::evaluated(c.condition.to_string(), &c.report)),
        );
        render_table(&rows)
    }
}

/// Runs every condition of `config` on its corpus.
pub fn run_experiment(config: &RunConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let corpus = load_corpus(&config.corpus)?;
    let gold = corpus.gold_labels()?;
    let lexicon = config.lexicon.as_ref().map(load_lexicon).transpose()?;
    let patch = config.patch.as_ref().map(load_patch).transpose()?;
    run_on_corpus(config, &corpus, &gold_shares(&gold)?, lexicon.as_ref(), patch.as_ref())
}

fn gold_shares(gold: &[crate::corpus::SentimentLabel]) -> Result<Shares> {
    class_shares(gold)
}

fn run_on_corpus(
    config: &RunConfig,
    corpus: &Corpus,
    gold_shares: &Shares,
    lexicon: Option<&Lexicon>,
    patch: Option<&LexiconPatch>,
) -> Result<ExperimentReport> {
    let t0 = clean_corpus(corpus);
    let needs_ta = config.conditions.iter().any(|c| c.stage == TextStage::Ta);

    let mut scrub_report = None;
    let mut title_failures = Vec::new();
    let ta = if needs_ta {
        let resolved = resolve_titles(&t0, &config.metadata.to_config())?;
        let failed: Vec<&str> = resolved.failures.iter().map(|(d, _)| d.as_str()).collect();
        if !failed.is_empty() {
            let ids: Vec<String> = t0
                .iter()
                .filter(|t| t.title.is_none() && t.doi.as_deref().is_some_and(|d| failed.contains(&d)))
                .map(|t| t.id.clone())
                .collect();
            if !config.allow_missing_titles {
                return Err(Error::MissingTitles(ids));
            }
            title_failures = resolved.failures.iter().map(|(d, e)| format!("{d}: {e}")).collect();
        }
        let outcome = scrub_corpus(&t0, &resolved.titles, &config.scrub.policy()?);
        scrub_report = Some(outcome.report);
        Some(outcome.corpus)
    } else {
        None
    };

    let mut results = Vec::with_capacity(config.conditions.len());
    for &condition in &config.conditions {
        let text = match condition.stage {
            TextStage::T0 => &t0,
            TextStage::Ta => ta.as_ref().expect("ta corpus built"),
        };
        let options = config.score_options();
        let (report, patch_terms) = match condition.model {
            ModelKind::Pair => {
                let lex = lexicon.expect("validated");
                (evaluate(text, &score_corpus(text, lex, options))?, None)
            }
            ModelKind::PairPatched => {
                let lex = lexicon.expect("validated");
                let patch = match patch {
                    Some(p) => p.clone(),
                    None => {
                        let label = config.corpus.display().to_string();
                        adapt_and_compare(text, lex, config.threshold, options, &label)?.patch
                    }
                };
                let patched = lex.apply_patch(&patch)?;
                let terms = patch.terms().map(String::from).collect();
                (evaluate(text, &score_corpus(text, &patched, options))?, Some(terms))
            }
            ModelKind::Scale => {
                let path = &config.scale_scores[&condition.stage];
                let scores = load_scale_scores(path)?;
                let labels = scale_predictions(&scores)
                    .into_iter()
                    .map(|p| (p.id, p.label))
                    .collect();
                (evaluate(text, &align_to_corpus(text, labels)?)?, None)
            }
        };
        results.push(ConditionResult {
            condition,
            report,
            patch: patch_terms,
        });
    }

    Ok(ExperimentReport {
        n: corpus.len(),
        gold_shares: *gold_shares,
        conditions: results,
        scrub: scrub_report,
        title_failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn condition_parse_and_display() {
        for s in ["t0:pair", "ta:pair-patched", "ta:scale"] {
            assert_eq!(s.parse::<Condition>().unwrap().to_string(), s);
        }
        assert!("tb:pair".parse::<Condition>().is_err());
        assert!("t0".parse::<Condition>().is_err());
    }

    #[test]
    fn config_parse_resolves_paths() {
        let cfg = RunConfig::parse(
            r#"
corpus = "c.jsonl"
lexicon = "/abs/lex.tsv"
conditions = ["t0:pair", "ta:scale"]

[scale_scores]
ta = "s.tsv"
"#,
            Path::new("/base"),
        )
        .unwrap();
        assert_eq!(cfg.corpus, Path::new("/base/c.jsonl"));
        assert_eq!(cfg.lexicon.as_deref(), Some(Path::new("/abs/lex.tsv")));
        assert_eq!(cfg.scale_scores[&TextStage::Ta], Path::new("/base/s.tsv"));
        assert_eq!(cfg.threshold, 2);
        cfg.validate().unwrap();
    }

    #[test]
    fn empty_conditions_rejected() {
        let cfg = RunConfig::parse("corpus = \"c\"\nconditions = []\n", Path::new(".")).unwrap();
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn scale_without_scores_rejected() {
        let cfg = RunConfig::parse("corpus = \"c\"\nconditions = [\"t0:scale\"]\n", Path::new(".")).unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(RunConfig::parse("corpus = \"c\"\nconditions = []\nbogus = 1\n", Path::new(".")).is_err());
    }
}
