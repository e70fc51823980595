//! Sentiment analysis for tweets that link to scientific papers.
//!
//! The pipeline strips tweet affordances ([`normalizer`]), optionally removes
//! the linked paper's title terms ([`scrubber`], with titles from
//! [`metadata`]), classifies with a strength-pair lexicon model ([`scorer`],
//! [`lexicon`]) and measures agreement with gold labels ([`evaluator`]).
//! [`adaptation`] proposes lexicon removals from the disagreements and
//! [`experiment`] runs whole comparisons.

pub mod adaptation;
pub mod corpus;
pub mod error;
pub mod evaluator;
pub mod experiment;
pub mod lexicon;
pub mod metadata;
pub mod normalizer;
pub mod predictions;
pub mod scorer;
pub mod scrubber;

pub use adaptation::{adapt_and_compare, attribute, propose_patch, AdaptationOutcome, DisagreementAttribution};
pub use corpus::{class_shares, load_corpus, save_corpus, Corpus, SentimentLabel, Shares, Tweet};
pub use error::{Error, Result};
pub use evaluator::{
    build_report, cohens_kappa, confusion, kappa_band, per_class_recall, percent_agreement, ConfusionMatrix,
    EvalReport, KappaBand,
};
pub use experiment::{run_experiment, Condition, ExperimentReport, ModelKind, RunConfig, TextStage};
pub use lexicon::{load_lexicon, load_patch, save_lexicon, save_patch, Lexicon, LexiconPatch};
pub use metadata::{MetaCache, MetaError, MetadataClient, MetadataConfig, PaperMeta};
pub use normalizer::{clean, clean_corpus, clean_text, tokenize, CleanTweet};
pub use scorer::{
    classify_pair, classify_text, convert_scale, score_corpus, strength_pair, Prediction, ScaleScore, ScoreOptions,
    StrengthPair, TriggerTerms,
};
pub use scrubber::{scrub, scrub_corpus, RemovalPolicy, ScrubMode, ScrubbedTweet};
