//! The mechanism fixture checked against values frozen by
//! `fixtures/mechanism/compute_expected.py`.

use std::path::{Path, PathBuf};

use scitweet_core::adaptation::adapt_and_compare;
use scitweet_core::experiment::run_experiment;
use scitweet_core::scrubber::scrub_corpus;
use scitweet_core::{clean_corpus, load_corpus, load_lexicon, RunConfig, ScoreOptions, SentimentLabel};
use serde_json::Value;

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/mechanism")
}

fn expected() -> Value {
    let text = std::fs::read_to_string(fixture_dir().join("expected.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-9
}

#[test]
fn texts_match_reference() {
    let exp = expected();
    let corpus = load_corpus(fixture_dir().join("corpus.jsonl")).unwrap();
    let t0 = clean_corpus(&corpus);
    let ta = scrub_corpus(&t0, &Default::default(), &Default::default()).corpus;
    for (i, (a, b)) in t0.iter().zip(ta.iter()).enumerate() {
        assert_eq!(a.text, exp["t0"][i].as_str().unwrap(), "t0 of {}", a.id);
        assert_eq!(b.text, exp["ta"][i].as_str().unwrap(), "ta of {}", b.id);
    }
}

#[test]
fn experiment_matches_reference() {
    let exp = expected();
    let cfg = RunConfig::load(fixture_dir().join("run.toml")).unwrap();
    let report = run_experiment(&cfg).unwrap();
    assert_eq!(report.n as u64, exp["n"].as_u64().unwrap());
    assert_eq!(report.conditions.len(), 5);

    for cond in &report.conditions {
        let name = cond.condition.to_string();
        let e = &exp["conditions"][&name];
        let r = &cond.report;
        let counts: Vec<Vec<u64>> = serde_json::from_value(e["confusion"].clone()).unwrap();
        for (row, exp_row) in r.confusion.counts().iter().zip(&counts) {
            assert_eq!(row.as_slice(), exp_row.as_slice(), "{name}");
        }
        assert!(
            close(r.percent_agreement, e["percent_agreement"].as_f64().unwrap()),
            "{name}"
        );
        assert!(
            close(r.kappa, e["kappa"].as_f64().unwrap()),
            "{name}: {} vs {}",
            r.kappa,
            e["kappa"]
        );
        for label in SentimentLabel::ALL {
            let want = e["per_class_recall"][label.as_str()].as_f64();
            match (r.per_class_recall.get(label), want) {
                (Some(a), Some(b)) => assert!(close(a, b), "{name} {label}"),
                (None, None) => {}
                other => panic!("{name} {label}: {other:?}"),
            }
            assert!(close(
                r.shares_predicted.get(label),
                e["shares_predicted"][label.as_str()].as_f64().unwrap()
            ));
        }
    }
}

#[test]
fn adaptation_reproduces_reference_patch() {
    let exp = expected();
    let dir = fixture_dir();
    let corpus = load_corpus(dir.join("corpus.jsonl")).unwrap();
    let ta = scrub_corpus(&clean_corpus(&corpus), &Default::default(), &Default::default()).corpus;
    let lexicon = load_lexicon(dir.join("lexicon.tsv")).unwrap();
    let out = adapt_and_compare(&ta, &lexicon, 2, ScoreOptions::default(), "mechanism").unwrap();

    let want: Vec<String> = serde_json::from_value(exp["proposed_patch_threshold_2"].clone()).unwrap();
    let got: Vec<String> = out.patch.terms().map(String::from).collect();
    assert_eq!(got, want);

    let attrs = exp["attributions_ta"].as_array().unwrap();
    assert_eq!(out.attributions.len(), attrs.len());
    for (a, e) in out.attributions.iter().zip(attrs) {
        assert_eq!(a.term, e["term"].as_str().unwrap());
        assert_eq!(a.wrong_trigger_count as u64, e["count"].as_u64().unwrap());
        let ids: Vec<String> = serde_json::from_value(e["ids"].clone()).unwrap();
        assert_eq!(a.affected_tweet_ids, ids);
    }

    // The proposed patch equals the reviewed fixture patch.
    let reviewed = scitweet_core::load_patch(dir.join("patch.txt")).unwrap();
    assert_eq!(
        reviewed.terms().collect::<Vec<_>>(),
        out.patch.terms().collect::<Vec<_>>()
    );
    assert!(out.after.percent_agreement > out.before.percent_agreement);
    let neg = SentimentLabel::Negative;
    assert!(out.after.per_class_recall.get(neg).unwrap() <= out.before.per_class_recall.get(neg).unwrap());
}
