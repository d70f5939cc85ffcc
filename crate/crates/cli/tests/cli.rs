use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_contribmine"));
    cmd.env_remove("CONTRIBMINE_TAXONOMY");
    cmd
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SMALL: &str = concat!(
    r#"{"id":"a1","authors":["Ana Silva","Bo Chen","Cy Dee"],"contribution_text":"A.S. wrote the original draft. B.C. performed the experiments. C.D. supervised the project. All authors reviewed the manuscript."}"#,
    "\n",
    r#"{"id":"a2","authors":["Dan Evans","Eve Ford"],"contribution_text":"D.E. designed the study and analysed the data. E.F. acquired funding. Both authors edited the manuscript."}"#,
    "\n",
);

#[test]
fn pipeline_writes_the_full_output_tree() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(&[
        "pipeline",
        "--corpus",
        s(&fixture("corpus100.jsonl")),
        "--out-dir",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in [
        "assignments.jsonl",
        "resolutions.jsonl",
        "diagnostics.tsv",
        "itemsets.csv",
        "pairs.csv",
        "distribution.csv",
        "tasks_by_position.csv",
        "share_by_position.csv",
        "task_position_relation.csv",
        "disparity.csv",
        "fit.json",
    ] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let golden = std::fs::read(fixture("golden/assignments.jsonl")).unwrap();
    assert!(std::fs::read(out.join("assignments.jsonl")).unwrap() == golden);
    let fit: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("fit.json")).unwrap()).unwrap();
    assert!(fit["slope"].is_f64());
}

#[test]
fn missing_corpus_is_a_usage_error() {
    let o = run(&["pipeline", "--out-dir", "x"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let o = run(&["mine", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn duplicate_ids_are_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("dup.jsonl");
    let line = SMALL.lines().next().unwrap();
    std::fs::write(&corpus, format!("{line}\n{line}\n")).unwrap();
    let o = run(&["ingest", "--corpus", s(&corpus)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn missing_input_file_is_fatal() {
    let o = run(&["ingest", "--corpus", "/nonexistent/corpus.jsonl"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn out_of_range_min_support_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.jsonl");
    std::fs::write(&corpus, SMALL).unwrap();
    let o = run(&[
        "pipeline",
        "--corpus",
        s(&corpus),
        "--out-dir",
        s(&dir.path().join("o")),
        "--min-support",
        "1.5",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("o").exists());
}

#[test]
fn stages_compose() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n);
    std::fs::write(p("c.jsonl"), SMALL).unwrap();

    let o = run(&["ingest", "--corpus", s(&p("c.jsonl"))]);
    assert!(o.status.success());

    let o = run(&[
        "classify",
        "--corpus",
        s(&p("c.jsonl")),
        "--out",
        s(&p("a.jsonl")),
        "--resolutions",
        s(&p("r.jsonl")),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let assignments = std::fs::read_to_string(p("a.jsonl")).unwrap();
    assert!(assignments.contains(r#""category":"supervision""#));

    let o = run(&[
        "mine",
        "--assignments",
        s(&p("a.jsonl")),
        "--out",
        s(&p("i.csv")),
    ]);
    assert!(o.status.success());
    assert!(std::fs::read_to_string(p("i.csv"))
        .unwrap()
        .starts_with("items,size,support\n"));

    let o = run(&[
        "stats",
        "--assignments",
        s(&p("a.jsonl")),
        "--corpus",
        s(&p("c.jsonl")),
        "--format",
        "json",
    ]);
    assert!(o.status.success());
    let stats: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(stats["distribution"].is_array());

    std::fs::write(
        p("g.jsonl"),
        concat!(
            r#"{"article_id":"a1","gold_tasks":[[1,"writing – original draft"],[3,"supervision"]],"gold_matches":[["A.S.",1],["C.D.",3]]}"#,
            "\n"
        ),
    )
    .unwrap();
    let o = run(&[
        "eval",
        "--gold",
        s(&p("g.jsonl")),
        "--pred",
        s(&p("a.jsonl")),
        "--resolutions",
        s(&p("r.jsonl")),
        "--out",
        s(&p("e.json")),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(p("e.json")).unwrap()).unwrap();
    assert_eq!(report["tasks"]["global_accuracy"], 1.0);
    assert_eq!(report["author_matching"]["global_accuracy"], 1.0);
}

#[test]
fn predictor_commands_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n);
    let o = run(&[
        "predict",
        "features",
        "--corpus",
        s(&fixture("corpus100.jsonl")),
        "--assignments",
        s(&fixture("golden/assignments.jsonl")),
        "--out",
        s(&p("rows.csv")),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let o = run(&[
        "predict",
        "train",
        "--rows",
        s(&p("rows.csv")),
        "--model",
        "logistic",
        "--out",
        s(&p("m.bin")),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(std::fs::read(p("m.bin")).unwrap().starts_with(b"CMMODEL\0"));

    let o = run(&[
        "predict",
        "train",
        "--rows",
        s(&p("rows.csv")),
        "--model",
        "forest",
        "--out",
        s(&p("x.bin")),
    ]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(&[
        "predict",
        "eval",
        "--rows",
        s(&p("rows.csv")),
        "--out",
        s(&p("eval.csv")),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = std::fs::read_to_string(p("eval.csv")).unwrap();
    assert!(table.starts_with("category,boosted_trees,logistic,dummy\n"));
    assert_eq!(table.lines().count(), 16);
}
