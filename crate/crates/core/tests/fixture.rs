//! The bundled 100-article fixture and its pinned outputs. Regenerate the
//! corpus with `cargo run -p contribmine-core --example make_fixture` and the
//! golden files with `contribmine pipeline` + `contribmine eval`.

use std::path::{Path, PathBuf};

use contribmine::analytics::{compute_stats, PositionColumn};
use contribmine::embed::LexicalEmbedder;
use contribmine::evaluation::{author_match_accuracy, load_gold, task_accuracy};
use contribmine::hcontrib::{build_prototypes, ClassifierOptions};
use contribmine::model::{load_corpus, write_assignments};
use contribmine::names::ResolutionRecord;
use contribmine::pipeline::{process_corpus, CorpusOutput};
use contribmine::taxonomy::{CreditCategory, Taxonomy};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn run_fixture() -> CorpusOutput {
    let corpus = load_corpus(&fixtures().join("corpus100.jsonl")).unwrap();
    let provider = LexicalEmbedder::default();
    let tax = build_prototypes(&Taxonomy::default_bundled(), &provider).unwrap();
    process_corpus(&corpus, &tax, &provider, ClassifierOptions::default())
}

fn golden_eval() -> serde_json::Value {
    let text = std::fs::read_to_string(fixtures().join("golden/eval.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn fixture_has_expected_shape() {
    let corpus = load_corpus(&fixtures().join("corpus100.jsonl")).unwrap();
    assert_eq!(corpus.records.len(), 100);
    assert!(corpus.diagnostics.is_empty());
    let authors: usize = corpus.records.iter().map(|r| r.team_size()).sum();
    assert_eq!(authors, 665);
    assert!(corpus.records.iter().any(|r| r.team_size() > 20));

    let gold = load_gold(&fixtures().join("gold100.jsonl")).unwrap();
    assert_eq!(gold.iter().map(|g| g.gold_tasks.len()).sum::<usize>(), 505);
    assert_eq!(
        gold.iter().map(|g| g.gold_matches.len()).sum::<usize>(),
        665
    );
}

#[test]
fn assignments_match_golden_bytes() {
    let out = run_fixture();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("assignments.jsonl");
    write_assignments(&out.assignments, &path).unwrap();
    let got = std::fs::read(&path).unwrap();
    let want = std::fs::read(fixtures().join("golden/assignments.jsonl")).unwrap();
    assert!(got == want, "assignments differ from golden");
}

#[test]
fn resolutions_match_golden() {
    let out = run_fixture();
    let text = std::fs::read_to_string(fixtures().join("golden/resolutions.jsonl")).unwrap();
    let want: Vec<ResolutionRecord> = text
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(out.resolutions, want);
}

#[test]
fn accuracies_are_pinned() {
    let out = run_fixture();
    let gold = load_gold(&fixtures().join("gold100.jsonl")).unwrap();
    let golden = golden_eval();

    let tasks = task_accuracy(&gold, &out.assignments).unwrap();
    assert!(tasks.global_accuracy >= 0.90 && tasks.avg_per_article >= 0.90);
    assert_eq!(
        tasks.global_accuracy,
        golden["tasks"]["global_accuracy"].as_f64().unwrap()
    );
    assert_eq!(
        tasks.avg_per_article,
        golden["tasks"]["avg_per_article"].as_f64().unwrap()
    );

    let matching = author_match_accuracy(&gold, &out.resolutions).unwrap();
    assert!(matching.global_accuracy >= 0.94 && matching.avg_per_article >= 0.93);
    assert_eq!(
        matching.global_accuracy,
        golden["author_matching"]["global_accuracy"]
            .as_f64()
            .unwrap()
    );
    assert_eq!(
        matching.avg_per_article,
        golden["author_matching"]["avg_per_article"]
            .as_f64()
            .unwrap()
    );
}

#[test]
fn fixture_shows_positional_patterns() {
    let corpus = load_corpus(&fixtures().join("corpus100.jsonl")).unwrap();
    let out = run_fixture();
    let stats = compute_stats(&out.assignments, Some(&corpus.team_sizes())).unwrap();

    let top = stats
        .distribution
        .iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    assert_eq!(top.0, CreditCategory::WritingReviewEditing);

    let pooled = |pos: usize| {
        stats
            .tasks_by_position
            .iter()
            .find(|m| m.team_size.is_none() && m.position == pos)
            .unwrap()
            .mean_tasks
    };
    assert!(pooled(1) >= 1.5 * pooled(2));

    let first_shares: Vec<f64> = stats
        .share_by_position
        .iter()
        .filter(|s| s.position == 1)
        .map(|s| s.mean_share)
        .collect();
    assert!(
        first_shares.windows(2).all(|w| w[0] > w[1]),
        "{first_shares:?}"
    );

    let supervision = |col: PositionColumn| {
        stats
            .task_position_relation
            .iter()
            .find(|c| c.category == CreditCategory::Supervision && c.position == col)
            .map_or(0.0, |c| c.frequency)
    };
    assert!(supervision(PositionColumn::Last) > 10.0 * supervision(PositionColumn::At(1)));
}
