//! Positional and disparity statistics over task assignments.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Write as _};

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::TaskAssignment;
use crate::taxonomy::CreditCategory;

/// Team sizes above this aggregate into a single bucket.
pub const TEAM_SIZE_CAP: usize = 20;

/// Team size as reported: exact up to the cap, `20+` beyond it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TeamBucket(usize);

impl TeamBucket {
    pub fn of(team_size: usize) -> TeamBucket {
        TeamBucket(team_size.min(TEAM_SIZE_CAP + 1))
    }

    pub fn is_capped(self) -> bool {
        self.0 > TEAM_SIZE_CAP
    }

    /// Exact team size, or `None` for the aggregate bucket.
    pub fn exact(self) -> Option<usize> {
        (!self.is_capped()).then_some(self.0)
    }
}

impl fmt::Display for TeamBucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exact() {
            Some(n) => write!(f, "{n}"),
            None => write!(f, "{TEAM_SIZE_CAP}+"),
        }
    }
}

impl Serialize for TeamBucket {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.exact() {
            Some(n) => s.serialize_u64(n as u64),
            None => s.collect_str(self),
        }
    }
}

/// Per-article view: distinct categories of every byline author.
#[derive(Clone, Debug, PartialEq)]
pub struct ArticleTasks {
    pub article_id: String,
    /// Index `i` holds author `i + 1`.
    pub authors: Vec<BTreeSet<CreditCategory>>,
}

impl ArticleTasks {
    pub fn team_size(&self) -> usize {
        self.authors.len()
    }

    pub fn counts(&self) -> Vec<usize> {
        self.authors.iter().map(BTreeSet::len).collect()
    }

    pub fn total(&self) -> usize {
        self.authors.iter().map(BTreeSet::len).sum()
    }
}

/// Groups assignments per article. Team sizes come from `team_sizes` when
/// given (so authors without tasks are visible), otherwise from the highest
/// author index seen. Articles without any assignment are not represented.
pub fn group_articles(
    assignments: &[TaskAssignment],
    team_sizes: Option<&HashMap<String, usize>>,
) -> Vec<ArticleTasks> {
    let mut by_article: BTreeMap<&str, Vec<&TaskAssignment>> = BTreeMap::new();
    for a in assignments {
        by_article.entry(&a.article_id).or_default().push(a);
    }
    by_article
        .into_iter()
        .map(|(id, rows)| {
            let seen = rows.iter().map(|a| a.author_index).max().unwrap_or(0);
            let size = team_sizes
                .and_then(|m| m.get(id).copied())
                .unwrap_or(seen)
                .max(seen);
            let mut authors = vec![BTreeSet::new(); size];
            for a in rows {
                authors[a.author_index - 1].insert(a.category);
            }
            ArticleTasks {
                article_id: id.to_string(),
                authors,
            }
        })
        .collect()
}

pub fn category_distribution(assignments: &[TaskAssignment]) -> Result<Vec<(CreditCategory, f64)>> {
    if assignments.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut counts = [0usize; CreditCategory::COUNT];
    for a in assignments {
        counts[a.category.index()] += 1;
    }
    let total = assignments.len() as f64;
    Ok(CreditCategory::ALL
        .iter()
        .map(|&c| (c, counts[c.index()] as f64 / total))
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PositionMean {
    /// `None` for the pooled row over all team sizes.
    pub team_size: Option<TeamBucket>,
    pub position: usize,
    pub mean_tasks: f64,
    pub n_articles: usize,
}

fn mean_rows<K: Ord + Copy>(
    acc: BTreeMap<K, (f64, usize)>,
) -> impl Iterator<Item = (K, f64, usize)> {
    acc.into_iter().map(|(k, (sum, n))| (k, sum / n as f64, n))
}

/// Mean task count per byline position, pooled over every article long
/// enough to have that position.
pub fn tasks_by_position(articles: &[ArticleTasks]) -> Vec<PositionMean> {
    let mut acc: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for art in articles {
        for (i, n) in art.counts().into_iter().enumerate() {
            let e = acc.entry(i + 1).or_default();
            e.0 += n as f64;
            e.1 += 1;
        }
    }
    mean_rows(acc)
        .map(|(position, mean_tasks, n_articles)| PositionMean {
            team_size: None,
            position,
            mean_tasks,
            n_articles,
        })
        .collect()
}

/// The same means computed separately for each team size.
pub fn tasks_by_position_teamsize(articles: &[ArticleTasks]) -> Vec<PositionMean> {
    let mut acc: BTreeMap<(TeamBucket, usize), (f64, usize)> = BTreeMap::new();
    for art in articles {
        let bucket = TeamBucket::of(art.team_size());
        for (i, n) in art.counts().into_iter().enumerate() {
            let e = acc.entry((bucket, i + 1)).or_default();
            e.0 += n as f64;
            e.1 += 1;
        }
    }
    mean_rows(acc)
        .map(
            |((bucket, position), mean_tasks, n_articles)| PositionMean {
                team_size: Some(bucket),
                position,
                mean_tasks,
                n_articles,
            },
        )
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PositionShare {
    pub position: usize,
    pub team_size: TeamBucket,
    pub mean_share: f64,
    pub n_articles: usize,
}

pub fn share_by_position_teamsize(articles: &[ArticleTasks]) -> Vec<PositionShare> {
    let mut acc: BTreeMap<(TeamBucket, usize), (f64, usize)> = BTreeMap::new();
    for art in articles {
        let total = art.total();
        if total == 0 {
            continue;
        }
        let bucket = TeamBucket::of(art.team_size());
        for (i, n) in art.counts().into_iter().enumerate() {
            let e = acc.entry((bucket, i + 1)).or_default();
            e.0 += n as f64 / total as f64;
            e.1 += 1;
        }
    }
    mean_rows(acc)
        .map(
            |((team_size, position), mean_share, n_articles)| PositionShare {
                position,
                team_size,
                mean_share,
                n_articles,
            },
        )
        .collect()
}

/// Column of the category × position table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PositionColumn {
    At(usize),
    /// The final author of multi-author articles, whatever the team size.
    Last,
}

impl fmt::Display for PositionColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PositionColumn::At(p) => write!(f, "{p}"),
            PositionColumn::Last => f.write_str("last"),
        }
    }
}

impl Serialize for PositionColumn {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            PositionColumn::At(p) => s.serialize_u64(*p as u64),
            PositionColumn::Last => s.serialize_str("last"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelationCell {
    pub category: CreditCategory,
    pub position: PositionColumn,
    pub frequency: f64,
}

/// Share of each category among the assignments held at each position.
/// Only columns with at least one assignment are emitted, and every emitted
/// column lists all 14 categories.
pub fn task_position_relation(articles: &[ArticleTasks]) -> Vec<RelationCell> {
    let mut columns: BTreeMap<PositionColumn, [usize; CreditCategory::COUNT]> = BTreeMap::new();
    for art in articles {
        let n = art.team_size();
        for (i, cats) in art.authors.iter().enumerate() {
            let mut keys = vec![PositionColumn::At(i + 1)];
            if n >= 2 && i + 1 == n {
                keys.push(PositionColumn::Last);
            }
            for key in keys {
                let col = columns.entry(key).or_insert([0; CreditCategory::COUNT]);
                for c in cats {
                    col[c.index()] += 1;
                }
            }
        }
    }
    let mut out = Vec::new();
    for (position, col) in columns {
        let total: usize = col.iter().sum();
        if total == 0 {
            continue;
        }
        for c in CreditCategory::ALL {
            out.push(RelationCell {
                category: c,
                position,
                frequency: col[c.index()] as f64 / total as f64,
            });
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DisparityPoint {
    pub team_size: TeamBucket,
    pub mean_ratio: f64,
    pub n_articles: usize,
    /// Articles where some author had no detected task; their ratio uses
    /// only the authors with at least one task.
    pub n_undefined_ratio: usize,
}

/// Max ÷ min task count over authors with at least one task.
pub fn disparity_ratio(counts: &[usize]) -> Option<f64> {
    let active = counts.iter().copied().filter(|&n| n > 0);
    let max = active.clone().max()?;
    let min = active.min()?;
    Some(max as f64 / min as f64)
}

pub fn disparity_curve(articles: &[ArticleTasks]) -> Vec<DisparityPoint> {
    let mut acc: BTreeMap<TeamBucket, (f64, usize, usize)> = BTreeMap::new();
    for art in articles.iter().filter(|a| a.team_size() >= 2) {
        let counts = art.counts();
        let Some(ratio) = disparity_ratio(&counts) else {
            continue;
        };
        let e = acc.entry(TeamBucket::of(art.team_size())).or_default();
        e.0 += ratio;
        e.1 += 1;
        if counts.contains(&0) {
            e.2 += 1;
        }
    }
    acc.into_iter()
        .map(|(team_size, (sum, n, undefined))| DisparityPoint {
            team_size,
            mean_ratio: sum / n as f64,
            n_articles: n,
            n_undefined_ratio: undefined,
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RegressionFit {
    pub intercept: f64,
    pub slope: f64,
    pub r2: f64,
}

impl RegressionFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Ordinary least squares on centered data.
pub fn fit_linear(points: &[(f64, f64)]) -> Result<RegressionFit> {
    if points.is_empty() {
        return Err(Error::DegenerateDesign);
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::DegenerateDesign);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = points
        .iter()
        .map(|&(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r2 = if syy == 0.0 {
        1.0
    } else {
        (1.0 - sse / syy).clamp(0.0, 1.0)
    };
    Ok(RegressionFit {
        intercept,
        slope,
        r2,
    })
}

/// Fit of mean disparity ratio against exact team size; the aggregate
/// `20+` bucket has no single x value and is left out.
pub fn fit_disparity(points: &[DisparityPoint]) -> Result<RegressionFit> {
    let xy: Vec<(f64, f64)> = points
        .iter()
        .filter_map(|p| p.team_size.exact().map(|n| (n as f64, p.mean_ratio)))
        .collect();
    fit_linear(&xy)
}

#[derive(Clone, Debug, Serialize)]
pub struct StatsReport {
    pub distribution: Vec<(CreditCategory, f64)>,
    pub tasks_by_position: Vec<PositionMean>,
    pub share_by_position: Vec<PositionShare>,
    pub task_position_relation: Vec<RelationCell>,
    pub disparity: Vec<DisparityPoint>,
    /// Absent when fewer than two exact team sizes are available.
    pub fit: Option<RegressionFit>,
}

pub fn compute_stats(
    assignments: &[TaskAssignment],
    team_sizes: Option<&HashMap<String, usize>>,
) -> Result<StatsReport> {
    let distribution = category_distribution(assignments)?;
    let articles = group_articles(assignments, team_sizes);
    let mut tasks = tasks_by_position(&articles);
    tasks.extend(tasks_by_position_teamsize(&articles));
    let disparity = disparity_curve(&articles);
    let fit = match fit_disparity(&disparity) {
        Ok(f) => Some(f),
        Err(Error::DegenerateDesign) => None,
        Err(e) => return Err(e),
    };
    Ok(StatsReport {
        distribution,
        tasks_by_position: tasks,
        share_by_position: share_by_position_teamsize(&articles),
        task_position_relation: task_position_relation(&articles),
        disparity,
        fit,
    })
}

impl StatsReport {
    /// File name and contents of each CSV table.
    pub fn csv_files(&self) -> Vec<(&'static str, String)> {
        let mut dist = String::from("category,fraction\n");
        for (c, f) in &self.distribution {
            let _ = writeln!(dist, "{c},{f:.6}");
        }

        let mut tasks = String::from("team_size,position,mean_tasks,n_articles\n");
        for r in &self.tasks_by_position {
            let team = r.team_size.map_or("all".to_string(), |b| b.to_string());
            let _ = writeln!(
                tasks,
                "{team},{},{:.6},{}",
                r.position, r.mean_tasks, r.n_articles
            );
        }

        let mut share = String::from("team_size,position,mean_share,n_articles\n");
        for r in &self.share_by_position {
            let _ = writeln!(
                share,
                "{},{},{:.6},{}",
                r.team_size, r.position, r.mean_share, r.n_articles
            );
        }

        let mut rel = String::from("category,position,frequency\n");
        for r in &self.task_position_relation {
            let _ = writeln!(rel, "{},{},{:.6}", r.category, r.position, r.frequency);
        }

        let mut disp = String::from("team_size,mean_ratio,n_articles,n_undefined_ratio\n");
        for r in &self.disparity {
            let _ = writeln!(
                disp,
                "{},{:.6},{},{}",
                r.team_size, r.mean_ratio, r.n_articles, r.n_undefined_ratio
            );
        }

        vec![
            ("distribution.csv", dist),
            ("tasks_by_position.csv", tasks),
            ("share_by_position.csv", share),
            ("task_position_relation.csv", rel),
            ("disparity.csv", disp),
        ]
    }

    /// `{intercept, slope, r2}`, or `null` when no fit was possible.
    pub fn fit_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.fit).expect("fit serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Layer;
    use approx::assert_abs_diff_eq;
    use CreditCategory as C;

    fn a(id: &str, author: usize, c: CreditCategory) -> TaskAssignment {
        TaskAssignment {
            article_id: id.into(),
            author_index: author,
            author_name: String::new(),
            category: c,
            layer: Layer::Keyword,
            evidence: String::new(),
        }
    }

    /// Article with `counts[i]` distinct tasks for author `i + 1`.
    fn article(id: &str, counts: &[usize]) -> Vec<TaskAssignment> {
        let mut out = Vec::new();
        for (i, &n) in counts.iter().enumerate() {
            for k in 0..n {
                out.push(a(id, i + 1, C::from_index(k).unwrap()));
            }
        }
        out
    }

    fn sizes(pairs: &[(&str, usize)]) -> HashMap<String, usize> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn distribution() {
        let rows = [
            a("x", 1, C::Methodology),
            a("x", 2, C::Methodology),
            a("x", 1, C::Software),
            a("y", 1, C::Validation),
        ];
        let d = category_distribution(&rows).unwrap();
        assert_eq!(d.len(), 14);
        assert_eq!(d[C::Methodology.index()].1, 0.5);
        assert_abs_diff_eq!(d.iter().map(|p| p.1).sum::<f64>(), 1.0, epsilon = 1e-12);

        let d = category_distribution(&rows[3..]).unwrap();
        assert_eq!(d[C::Validation.index()].1, 1.0);
        assert_eq!(d.iter().filter(|p| p.1 == 0.0).count(), 13);
        assert!(category_distribution(&[]).is_err());
    }

    #[test]
    fn position_means() {
        let arts = group_articles(&article("x", &[3, 1]), None);
        let t = tasks_by_position(&arts);
        assert_eq!(
            t.iter().map(|r| r.mean_tasks).collect::<Vec<_>>(),
            [3.0, 1.0]
        );

        let mut rows = article("x", &[3, 1]);
        rows.extend(article("y", &[1, 1]));
        let t = tasks_by_position(&group_articles(&rows, None));
        assert_eq!(
            t.iter().map(|r| r.mean_tasks).collect::<Vec<_>>(),
            [2.0, 1.0]
        );
        assert_eq!(t[0].n_articles, 2);
    }

    #[test]
    fn position_means_respect_byline_length() {
        let mut rows = article("x", &[2, 2, 2]);
        rows.extend(article("y", &[4]));
        let t = tasks_by_position(&group_articles(&rows, None));
        assert_eq!(t[0].mean_tasks, 3.0);
        assert_eq!(t[2].mean_tasks, 2.0);
        assert_eq!(t[2].n_articles, 1);
    }

    #[test]
    fn shares() {
        let s = share_by_position_teamsize(&group_articles(&article("x", &[2, 1, 1]), None));
        let got: Vec<(usize, f64)> = s.iter().map(|r| (r.position, r.mean_share)).collect();
        assert_eq!(got, [(1, 0.5), (2, 0.25), (3, 0.25)]);
        assert!(s.iter().all(|r| r.team_size == TeamBucket::of(3)));
        assert!(!s.iter().any(|r| r.team_size == TeamBucket::of(7)));
    }

    #[test]
    fn zero_task_authors_need_team_sizes() {
        let rows = article("x", &[2, 1]);
        let arts = group_articles(&rows, Some(&sizes(&[("x", 3)])));
        assert_eq!(arts[0].counts(), [2, 1, 0]);
        let d = disparity_curve(&arts);
        assert_eq!(d[0].mean_ratio, 2.0);
        assert_eq!(d[0].n_undefined_ratio, 1);
    }

    #[test]
    fn large_teams_share_one_bucket() {
        let mut rows = article("x", &[1; 25]);
        rows.extend(article("y", &[1; 21]));
        rows.extend(article("z", &[1; 20]));
        let d = disparity_curve(&group_articles(&rows, None));
        let labels: Vec<String> = d.iter().map(|p| p.team_size.to_string()).collect();
        assert_eq!(labels, ["20", "20+"]);
        assert_eq!(d[1].n_articles, 2);
    }

    #[test]
    fn relation() {
        let arts = group_articles(&[a("x", 1, C::Supervision)], None);
        let r = task_position_relation(&arts);
        assert_eq!(r.len(), 14);
        let cell = r.iter().find(|c| c.category == C::Supervision).unwrap();
        assert_eq!(
            (cell.position, cell.frequency),
            (PositionColumn::At(1), 1.0)
        );

        // Position 2 has no tasks, so that column is dropped.
        let arts = group_articles(&article("x", &[2]), Some(&sizes(&[("x", 3)])));
        let arts = [arts, group_articles(&[a("y", 3, C::Software)], None)].concat();
        let r = task_position_relation(&arts);
        let cols: BTreeSet<PositionColumn> = r.iter().map(|c| c.position).collect();
        assert_eq!(
            cols,
            BTreeSet::from([
                PositionColumn::At(1),
                PositionColumn::At(3),
                PositionColumn::Last
            ])
        );
        for col in cols {
            let sum: f64 = r
                .iter()
                .filter(|c| c.position == col)
                .map(|c| c.frequency)
                .sum();
            assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn ratios() {
        assert_eq!(disparity_ratio(&[4, 2, 1]), Some(4.0));
        assert_eq!(disparity_ratio(&[2, 2]), Some(1.0));
        assert_eq!(disparity_ratio(&[0, 0]), None);
        assert_eq!(disparity_ratio(&[3, 0]), Some(1.0));
    }

    #[test]
    fn single_author_articles_have_no_disparity() {
        assert!(disparity_curve(&group_articles(&article("x", &[3]), None)).is_empty());
    }

    #[test]
    fn ols_examples() {
        let f = fit_linear(&[(1.0, 1.0), (2.0, 2.0), (3.0, 3.0)]).unwrap();
        assert_eq!((f.slope, f.intercept, f.r2), (1.0, 0.0, 1.0));
        let f = fit_linear(&[(0.0, 1.0), (1.0, 1.0)]).unwrap();
        assert_eq!((f.slope, f.intercept), (0.0, 1.0));
        assert!(matches!(
            fit_linear(&[(2.0, 1.0), (2.0, 5.0)]),
            Err(Error::DegenerateDesign)
        ));
        assert!(fit_linear(&[]).is_err());
    }

    #[test]
    fn csv_and_fit_files() {
        let mut rows = article("x", &[2, 1]);
        rows.extend(article("y", &[4, 2, 1]));
        let report = compute_stats(&rows, None).unwrap();
        let files = report.csv_files();
        assert_eq!(files.len(), 5);
        let disp = &files[4].1;
        assert_eq!(
            disp,
            "team_size,mean_ratio,n_articles,n_undefined_ratio\n2,2.000000,1,0\n3,4.000000,1,0\n"
        );
        assert!(files[1].1.contains("all,1,3.000000,2\n"));
        assert!(files[1].1.contains("\n3,1,4.000000,1\n"));
        let fit: serde_json::Value = serde_json::from_str(&report.fit_json()).unwrap();
        assert_eq!(fit["slope"], 2.0);
        assert_eq!(fit["intercept"], -2.0);
    }

    #[test]
    fn single_team_size_has_no_fit() {
        let report = compute_stats(&article("x", &[2, 1]), None).unwrap();
        assert!(report.fit.is_none());
        assert_eq!(report.fit_json(), "null\n");
    }
}
