use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures/mechanism")
        .join(name)
}

fn scitweet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scitweet"))
        .args(args)
        .env_remove("SCITWEET_META_ENDPOINT")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = scitweet(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn run_report() -> Value {
    let out = ok(&["run", "--config", s(&fixture("run.toml"))]);
    serde_json::from_slice(&out.stdout).unwrap()
}

fn condition<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["conditions"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["condition"] == name)
        .map(|c| &c["report"])
        .unwrap()
}

#[test]
fn piped_pipeline_equals_run() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n);
    let corpus = fixture("corpus.jsonl");
    let lexicon = fixture("lexicon.tsv");

    ok(&["clean", "--in", s(&corpus), "--out", s(&p("t0.jsonl"))]);
    ok(&[
        "scrub",
        "--in",
        s(&p("t0.jsonl")),
        "--out",
        s(&p("ta.jsonl")),
        "--meta-cache",
        s(&p("cache")),
        "--report",
        s(&p("scrub.json")),
    ]);
    let scrub: Value = serde_json::from_str(&fs::read_to_string(p("scrub.json")).unwrap()).unwrap();
    assert_eq!(scrub["tweets"], 60);

    let report = run_report();
    let patch = fixture("patch.txt");
    let cases: [(&str, &str, Vec<&str>); 3] = [
        ("t0:pair", "t0.jsonl", vec![]),
        ("ta:pair", "ta.jsonl", vec![]),
        ("ta:pair-patched", "ta.jsonl", vec!["--patch", s(&patch)]),
    ];
    for (name, input, extra) in cases {
        let pred = p(&format!("{name}.tsv").replace(':', "_"));
        let input = p(input);
        let mut args = vec!["score", "--lexicon", s(&lexicon), "--in", s(&input), "--out", s(&pred)];
        args.extend(extra);
        ok(&args);
        let out = ok(&["eval", "--gold", s(&corpus), "--pred", s(&pred)]);
        let eval: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(&eval, condition(&report, name), "{name}");
    }

    for (name, scores) in [("t0:scale", "external_t0.tsv"), ("ta:scale", "external_ta.tsv")] {
        let pred = p("scale.tsv");
        ok(&[
            "score",
            "--model",
            "scale",
            "--scores",
            s(&fixture(scores)),
            "--in",
            s(&corpus),
            "--out",
            s(&pred),
        ]);
        let out = ok(&["eval", "--gold", s(&corpus), "--pred", s(&pred)]);
        let eval: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(&eval, condition(&report, name), "{name}");
    }
}

#[test]
fn run_is_byte_identical() {
    let cfg = fixture("run.toml");
    for format in ["json", "table"] {
        let a = ok(&["run", "--config", s(&cfg), "--format", format]).stdout;
        let b = ok(&["run", "--config", s(&cfg), "--format", format]).stdout;
        assert_eq!(a, b);
    }
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("report.json");
    ok(&["run", "--config", s(&cfg), "--out", s(&file)]);
    assert_eq!(fs::read(&file).unwrap(), ok(&["run", "--config", s(&cfg)]).stdout);
}

#[test]
fn table_output() {
    let out = ok(&["run", "--config", s(&fixture("run.toml")), "--format", "table"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 7);
    assert!(lines[1].starts_with("gold"));
    assert!(lines[5].starts_with("ta:pair-patched") && lines[5].contains("91.7") && lines[5].ends_with("0.77"));
}

#[test]
fn adapt_emits_reviewable_patch() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = fixture("corpus.jsonl");
    let t0 = dir.path().join("t0.jsonl");
    let ta = dir.path().join("ta.jsonl");
    let patch = dir.path().join("proposed.txt");
    let report = dir.path().join("adapt.json");
    ok(&["clean", "--in", s(&corpus), "--out", s(&t0)]);
    ok(&[
        "scrub",
        "--in",
        s(&t0),
        "--out",
        s(&ta),
        "--meta-cache",
        s(&dir.path().join("c")),
    ]);
    let out = ok(&[
        "adapt",
        "--gold",
        s(&corpus),
        "--in",
        s(&ta),
        "--lexicon",
        s(&fixture("lexicon.tsv")),
        "--emit-patch",
        s(&patch),
        "--report",
        s(&report),
    ]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("proposed 5 term(s)"));
    let text = fs::read_to_string(&patch).unwrap();
    let terms: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(terms, ["baby", "cancer", "care", "disease", "obesity"]);
    assert!(text.contains("threshold=2"));

    let json: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert!(json["after"]["percent_agreement"].as_f64() > json["before"]["percent_agreement"].as_f64());

    // The emitted patch loads back through `score --patch`.
    ok(&[
        "score",
        "--lexicon",
        s(&fixture("lexicon.tsv")),
        "--patch",
        s(&patch),
        "--in",
        s(&ta),
        "--out",
        s(&dir.path().join("p.tsv")),
    ]);
}

#[test]
fn eval_table_flag() {
    let dir = tempfile::tempdir().unwrap();
    let pred = dir.path().join("p.tsv");
    let report = dir.path().join("r.json");
    let corpus = fixture("corpus.jsonl");
    ok(&[
        "score",
        "--lexicon",
        s(&fixture("lexicon.tsv")),
        "--in",
        s(&corpus),
        "--out",
        s(&pred),
    ]);
    let out = ok(&[
        "eval",
        "--gold",
        s(&corpus),
        "--pred",
        s(&pred),
        "--table",
        "--out",
        s(&report),
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("predicted")));
    let json: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["band"], "slight");
}

#[test]
fn validation_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.toml");
    fs::write(
        &cfg,
        format!(
            "corpus = {:?}\nlexicon = {:?}\nconditions = []\n",
            fixture("corpus.jsonl"),
            fixture("lexicon.tsv")
        ),
    )
    .unwrap();
    assert_eq!(scitweet(&["run", "--config", s(&cfg)]).status.code(), Some(1));

    let bad = dir.path().join("bad.jsonl");
    fs::write(&bad, "{\"id\":\"1\",\"text\":\"a\"}\n{\"id\":\"1\",\"text\":\"b\"}\n").unwrap();
    let out = scitweet(&["clean", "--in", s(&bad), "--out", s(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));

    let scores = dir.path().join("s.tsv");
    fs::write(&scores, "1\t7\n").unwrap();
    let out = scitweet(&[
        "score",
        "--model",
        "scale",
        "--scores",
        s(&scores),
        "--out",
        s(&dir.path().join("o")),
    ]);
    assert_eq!(out.status.code(), Some(1));

    // Patch removing a term the lexicon does not have.
    let patch = dir.path().join("p.txt");
    fs::write(&patch, "notaword\n").unwrap();
    let out = scitweet(&[
        "score",
        "--lexicon",
        s(&fixture("lexicon.tsv")),
        "--patch",
        s(&patch),
        "--in",
        s(&fixture("corpus.jsonl")),
        "--out",
        s(&dir.path().join("o")),
    ]);
    assert_eq!(out.status.code(), Some(1));

    assert_eq!(scitweet(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(scitweet(&["clean"]).status.code(), Some(1));
    assert_eq!(scitweet(&["--help"]).status.code(), Some(0));
}

#[test]
fn missing_predictions_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let pred = dir.path().join("p.tsv");
    fs::write(&pred, "f01\tneutral\n").unwrap();
    let out = scitweet(&["eval", "--gold", s(&fixture("corpus.jsonl")), "--pred", s(&pred)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn io_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.jsonl");
    assert_eq!(
        scitweet(&["clean", "--in", s(&missing), "--out", s(&dir.path().join("o"))])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        scitweet(&["run", "--config", s(&dir.path().join("nope.toml"))])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn scrub_without_titles_warns_and_keeps_text() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.jsonl");
    fs::write(
        &input,
        "{\"id\":\"1\",\"text\":\"Cancer rates fall\",\"doi\":\"10.1/x\"}\n",
    )
    .unwrap();
    let out_path = dir.path().join("out.jsonl");
    let out = ok(&[
        "scrub",
        "--in",
        s(&input),
        "--out",
        s(&out_path),
        "--meta-cache",
        s(&dir.path().join("c")),
    ]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("unscrubbed"));
    assert_eq!(
        fs::read_to_string(&input).unwrap(),
        fs::read_to_string(&out_path).unwrap()
    );
}
