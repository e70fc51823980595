use std::collections::BTreeMap;
use std::hint::black_box;
use std::path::Path;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use scitweet_core::{
    clean_corpus, cohens_kappa, confusion, load_corpus, load_lexicon, score_corpus, scrub_corpus, Corpus,
    RemovalPolicy, ScoreOptions, SentimentLabel, Tweet,
};

const FIXTURE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/fixtures/mechanism");

/// The mechanism fixture repeated `copies` times under fresh ids.
fn corpus(copies: usize) -> Corpus {
    let base = load_corpus(Path::new(FIXTURE).join("corpus.jsonl")).unwrap();
    let tweets = (0..copies)
        .flat_map(|c| {
            base.iter().map(move |t| Tweet {
                id: format!("{}-{c}", t.id),
                ..t.clone()
            })
        })
        .collect();
    Corpus::new(tweets).unwrap()
}

fn pipeline(c: &mut Criterion) {
    let lexicon = load_lexicon(Path::new(FIXTURE).join("lexicon.tsv")).unwrap();
    let policy = RemovalPolicy::default();
    let no_titles = BTreeMap::new();

    let mut group = c.benchmark_group("pipeline");
    for copies in [1, 50] {
        let raw = corpus(copies);
        let t0 = clean_corpus(&raw);
        let ta = scrub_corpus(&t0, &no_titles, &policy).corpus;
        group.throughput(Throughput::Elements(raw.len() as u64));

        group.bench_with_input(BenchmarkId::new("clean", raw.len()), &raw, |b, raw| {
            b.iter(|| clean_corpus(black_box(raw)))
        });
        group.bench_with_input(BenchmarkId::new("scrub", raw.len()), &t0, |b, t0| {
            b.iter(|| scrub_corpus(black_box(t0), &no_titles, &policy))
        });
        group.bench_with_input(BenchmarkId::new("score", raw.len()), &ta, |b, ta| {
            b.iter(|| score_corpus(black_box(ta), &lexicon, ScoreOptions::default()))
        });
    }
    group.finish();
}

fn kappa(c: &mut Criterion) {
    let labels = SentimentLabel::ALL;
    let n = 10_000;
    let gold: Vec<_> = (0..n).map(|i| labels[i % 3]).collect();
    let pred: Vec<_> = (0..n).map(|i| labels[(i * 7 / 5) % 3]).collect();
    c.bench_function("confusion+kappa/10000", |b| {
        b.iter(|| cohens_kappa(&confusion(black_box(&gold), black_box(&pred)).unwrap()).unwrap())
    });
}

criterion_group!(benches, pipeline, kappa);
criterion_main!(benches);
