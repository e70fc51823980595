//! `scitweet`: command-line front end for the tweet sentiment pipeline.
//!
//! Exit codes: 0 success, 1 invalid input or usage, 2 I/O or network failure.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::warn;

use scitweet_core::adaptation::adapt_and_compare;
use scitweet_core::evaluator::{render_table, TableRow};
use scitweet_core::experiment::{resolve_titles, MetadataSettings, ScrubSettings};
use scitweet_core::predictions::{align_to_corpus, load_labels, load_scale_scores, save_labels, scale_predictions};
use scitweet_core::{
    class_shares, clean_corpus, load_corpus, load_lexicon, load_patch, save_corpus, save_patch, score_corpus,
    scrub_corpus, Corpus, Error, EvalReport, RunConfig, ScoreOptions, Tweet,
};

#[derive(Parser)]
#[command(
    name = "scitweet",
    version,
    about = "Sentiment analysis for tweets linking to scientific papers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Pair,
    Scale,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// Strip mentions, URLs and '#' signs (writes t_0 texts).
    Clean {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Remove linked-paper title terms from t_0 texts (writes t_a texts).
    Scrub {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// URL template with a {doi} placeholder [env: SCITWEET_META_ENDPOINT]
        #[arg(long)]
        meta_endpoint: Option<String>,
        /// Title cache directory [env: SCITWEET_META_CACHE, default: ./.meta-cache]
        #[arg(long)]
        meta_cache: Option<PathBuf>,
        /// JSON path of the title in endpoint responses.
        #[arg(long)]
        meta_field: Option<String>,
        #[arg(long, default_value_t = 3)]
        min_token_length: usize,
        /// One word per line; replaces the bundled stopword list.
        #[arg(long)]
        stopwords: Option<PathBuf>,
        /// Remove only contiguous occurrences of the whole title.
        #[arg(long)]
        phrase: bool,
        /// Write the scrub report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Classify tweets and write `id<TAB>label` predictions.
    Score {
        #[arg(long, value_enum, default_value_t = Model::Pair)]
        model: Model,
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(long)]
        patch: Option<PathBuf>,
        /// Flip a term's sign when a negation word directly precedes it.
        #[arg(long)]
        negation: bool,
        /// Corpus to score (pair model); with the scale model, fixes output order.
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// External `id<TAB>0..4` scores (scale model).
        #[arg(long)]
        scores: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare predictions with gold labels.
    Eval {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        /// Also print an aligned text table.
        #[arg(long)]
        table: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Propose a lexicon patch from disagreements with gold labels.
    Adapt {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        lexicon: PathBuf,
        #[arg(long, default_value_t = 2)]
        threshold: usize,
        #[arg(long)]
        negation: bool,
        #[arg(long)]
        emit_patch: PathBuf,
        /// Write attributions and before/after reports as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run a whole experiment described by a TOML file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn write_output(path: Option<&Path>, content: &str) -> Result<(), Error> {
    match path {
        Some(p) => fs::write(p, content).map_err(|e| Error::Io {
            path: p.to_path_buf(),
            source: e,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(content.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Error::Io {
                    path: PathBuf::from("<stdout>"),
                    source: e,
                })
        }
    }
}

/// Texts from `input`, gold labels from `gold`, matched by id.
fn with_gold(input: &Corpus, gold: &Corpus) -> Result<Corpus, Error> {
    let labels: HashMap<&str, &Tweet> = gold.iter().map(|t| (t.id.as_str(), t)).collect();
    let mut missing = Vec::new();
    let tweets = input
        .iter()
        .map(|t| {
            let g = labels.get(t.id.as_str()).and_then(|g| g.gold);
            if g.is_none() {
                missing.push(t.id.clone());
            }
            Tweet { gold: g, ..t.clone() }
        })
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingGold(missing));
    }
    if input.len() != gold.len() {
        return Err(Error::Alignment(format!(
            "{} tweets to score vs {} gold tweets",
            input.len(),
            gold.len()
        )));
    }
    Corpus::new(tweets)
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Clean { input, out } => {
            let corpus = load_corpus(&input)?;
            save_corpus(&clean_corpus(&corpus), &out)
        }
        Command::Scrub {
            input,
            out,
            meta_endpoint,
            meta_cache,
            meta_field,
            min_token_length,
            stopwords,
            phrase,
            report,
        } => {
            let corpus = load_corpus(&input)?;
            let meta = MetadataSettings {
                endpoint: meta_endpoint,
                cache: meta_cache,
                field_path: meta_field,
            }
            .to_config();
            let resolved = resolve_titles(&corpus, &meta)?;
            for (doi, err) in &resolved.failures {
                warn!("{doi}: {err}");
            }
            let policy = ScrubSettings {
                min_token_length,
                stopwords,
                phrase,
            }
            .policy()?;
            let outcome = scrub_corpus(&corpus, &resolved.titles, &policy);
            if !outcome.report.missing_title.is_empty() {
                warn!(
                    "{} tweet(s) left unscrubbed for lack of a title: {}",
                    outcome.report.missing_title.len(),
                    outcome.report.missing_title.join(", ")
                );
            }
            save_corpus(&outcome.corpus, &out)?;
            if let Some(path) = report {
                let json = serde_json::to_string_pretty(&outcome.report).expect("report serializes");
                write_output(Some(&path), &(json + "\n"))?;
            }
            Ok(())
        }
        Command::Score {
            model,
            lexicon,
            patch,
            negation,
            input,
            scores,
            out,
        } => {
            let predictions = match model {
                Model::Pair => {
                    let lexicon = lexicon.ok_or_else(|| Error::Config("--model pair needs --lexicon".into()))?;
                    let input = input.ok_or_else(|| Error::Config("--model pair needs --in".into()))?;
                    let mut lex = load_lexicon(&lexicon)?;
                    if let Some(p) = patch {
                        lex = lex.apply_patch(&load_patch(&p)?)?;
                    }
                    score_corpus(&load_corpus(&input)?, &lex, ScoreOptions { negation })
                }
                Model::Scale => {
                    let scores = scores.ok_or_else(|| Error::Config("--model scale needs --scores".into()))?;
                    let preds = scale_predictions(&load_scale_scores(&scores)?);
                    match input {
                        Some(i) => {
                            let labels = preds.into_iter().map(|p| (p.id, p.label)).collect();
                            align_to_corpus(&load_corpus(&i)?, labels)?
                        }
                        None => preds,
                    }
                }
            };
            save_labels(&predictions, &out)
        }
        Command::Eval { gold, pred, table, out } => {
            let corpus = load_corpus(&gold)?;
            let gold_labels = corpus.gold_labels()?;
            let preds = align_to_corpus(&corpus, load_labels(&pred)?)?;
            let predicted: Vec<_> = preds.iter().map(|p| p.label).collect();
            let report = scitweet_core::build_report(&gold_labels, &predicted)?;
            let json = report.to_json() + "\n";
            write_output(out.as_deref(), &json)?;
            if table {
                write_output(None, &eval_table(&gold_labels, &report)?)?;
            }
            Ok(())
        }
        Command::Adapt {
            gold,
            input,
            lexicon,
            threshold,
            negation,
            emit_patch,
            report,
        } => {
            if threshold == 0 {
                return Err(Error::Config("--threshold must be at least 1".into()));
            }
            let corpus = with_gold(&load_corpus(&input)?, &load_corpus(&gold)?)?;
            let lex = load_lexicon(&lexicon)?;
            let label = input.display().to_string();
            let outcome = adapt_and_compare(&corpus, &lex, threshold, ScoreOptions { negation }, &label)?;
            save_patch(&outcome.patch, &emit_patch)?;
            if let Some(path) = report {
                let json = serde_json::to_string_pretty(&outcome).expect("outcome serializes");
                write_output(Some(&path), &(json + "\n"))?;
            }
            eprintln!(
                "proposed {} term(s); agreement {:.1}% -> {:.1}% (review {} before applying)",
                outcome.patch.len(),
                outcome.before.percent_agreement,
                outcome.after.percent_agreement,
                emit_patch.display()
            );
            Ok(())
        }
        Command::Run { config, format, out } => {
            let cfg = RunConfig::load(&config)?;
            let report = scitweet_core::run_experiment(&cfg)?;
            let text = match format {
                Format::Json => report.to_json(),
                Format::Table => report.to_table(),
            };
            write_output(out.as_deref(), &text)
        }
    }
}

fn eval_table(gold: &[scitweet_core::SentimentLabel], report: &EvalReport) -> Result<String, Error> {
    Ok(render_table(&[
        TableRow::reference("gold", class_shares(gold)?),
        TableRow::evaluated("predicted", report),
    ]))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_environmental() { 2 } else { 1 })
        }
    }
}
