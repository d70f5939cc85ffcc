//! Accuracy of task assignments and author matching against gold labels.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::TaskAssignment;
use crate::names::ResolutionRecord;
use crate::taxonomy::CreditCategory;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoldRecord {
    pub article_id: String,
    #[serde(default)]
    pub gold_tasks: Vec<(usize, CreditCategory)>,
    #[serde(default)]
    pub gold_matches: Vec<(String, usize)>,
}

pub fn load_gold(path: &Path) -> Result<Vec<GoldRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: GoldRecord = serde_json::from_str(&line)
            .map_err(|e| Error::Invalid(format!("{}:{}: {e}", path.display(), i + 1)))?;
        out.push(rec);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ArticleScore {
    pub article_id: String,
    pub n: usize,
    pub correct: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalReport {
    pub global_accuracy: f64,
    pub avg_per_article: f64,
    pub per_article: Vec<ArticleScore>,
    /// Supplementary: fraction of predictions on gold-labelled articles
    /// that appear in the gold set. Not part of either accuracy.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision: Option<f64>,
}

fn summarize(per_article: Vec<ArticleScore>) -> Result<EvalReport> {
    let scored: Vec<&ArticleScore> = per_article.iter().filter(|s| s.n > 0).collect();
    if scored.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n: usize = scored.iter().map(|s| s.n).sum();
    let correct: usize = scored.iter().map(|s| s.correct).sum();
    let avg = scored
        .iter()
        .map(|s| s.correct as f64 / s.n as f64)
        .sum::<f64>()
        / scored.len() as f64;
    Ok(EvalReport {
        global_accuracy: correct as f64 / n as f64,
        avg_per_article: avg,
        per_article,
        precision: None,
    })
}

/// A gold task counts as correct when the identical (author, category) pair
/// was predicted. Gold articles absent from the predictions score zero.
pub fn task_accuracy(gold: &[GoldRecord], predicted: &[TaskAssignment]) -> Result<EvalReport> {
    let mut by_article: HashMap<&str, HashSet<(usize, CreditCategory)>> = HashMap::new();
    for a in predicted {
        by_article
            .entry(&a.article_id)
            .or_default()
            .insert((a.author_index, a.category));
    }
    let empty = HashSet::new();
    let mut per_article = Vec::new();
    let (mut hits, mut emitted) = (0usize, 0usize);
    for g in gold.iter().filter(|g| !g.gold_tasks.is_empty()) {
        let pred = by_article.get(g.article_id.as_str()).unwrap_or(&empty);
        let gold_set: HashSet<(usize, CreditCategory)> = g.gold_tasks.iter().copied().collect();
        per_article.push(ArticleScore {
            article_id: g.article_id.clone(),
            n: g.gold_tasks.len(),
            correct: g.gold_tasks.iter().filter(|t| pred.contains(t)).count(),
        });
        emitted += pred.len();
        hits += pred.iter().filter(|p| gold_set.contains(p)).count();
    }
    let mut report = summarize(per_article)?;
    report.precision = (emitted > 0).then(|| hits as f64 / emitted as f64);
    Ok(report)
}

/// A gold (mention, author) pair counts as correct when some resolution of
/// that mention text in the article points to exactly that author, either
/// singly or as a member of a collective phrase. Ambiguous and unmatched
/// resolutions never count.
pub fn author_match_accuracy(
    gold: &[GoldRecord],
    resolutions: &[ResolutionRecord],
) -> Result<EvalReport> {
    let mut by_article: BTreeMap<&str, HashMap<&str, HashSet<usize>>> = BTreeMap::new();
    for r in resolutions {
        let authors: Vec<usize> = match r.single_author() {
            Some(i) => vec![i],
            None => r.collective_authors(),
        };
        by_article
            .entry(&r.article_id)
            .or_default()
            .entry(r.mention.trim())
            .or_default()
            .extend(authors);
    }
    let mut per_article = Vec::new();
    for g in gold.iter().filter(|g| !g.gold_matches.is_empty()) {
        let mentions = by_article.get(g.article_id.as_str());
        let correct = g
            .gold_matches
            .iter()
            .filter(|(mention, idx)| {
                mentions
                    .and_then(|m| m.get(mention.trim()))
                    .is_some_and(|set| set.contains(idx))
            })
            .count();
        per_article.push(ArticleScore {
            article_id: g.article_id.clone(),
            n: g.gold_matches.len(),
            correct,
        });
    }
    summarize(per_article)
}
