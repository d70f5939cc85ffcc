//! Predicting an author's roles from byline metadata.
//!
//! Each of the 14 categories gets an independent binary model over five
//! features: position, the author's task count, team size, the article's
//! total task count, and the author's share of it.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::embed::fnv1a64;
use crate::error::{Error, Result};
use crate::model::{Corpus, TaskAssignment};
use crate::taxonomy::CreditCategory;

pub const N_FEATURES: usize = 5;
pub const LOGISTIC_LEARNING_RATE: f64 = 0.1;
pub const LOGISTIC_EPOCHS: usize = 500;
pub const BOOSTING_ROUNDS: usize = 100;
pub const BOOSTING_LEARNING_RATE: f64 = 0.1;
pub const BOOSTING_MAX_DEPTH: usize = 3;
pub const BOOSTING_LAMBDA: f64 = 1.0;

const MODEL_MAGIC: &[u8; 8] = b"CMMODEL\0";
const MODEL_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub position: usize,
    pub n_tasks_author: usize,
    pub team_size: usize,
    pub total_tasks_article: usize,
    pub share: f64,
}

impl FeatureVector {
    pub fn as_array(&self) -> [f64; N_FEATURES] {
        [
            self.position as f64,
            self.n_tasks_author as f64,
            self.team_size as f64,
            self.total_tasks_article as f64,
            self.share,
        ]
    }
}

/// One indicator per category, in taxonomy order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabelVector(pub [bool; CreditCategory::COUNT]);

impl LabelVector {
    pub fn from_categories<'a>(cats: impl IntoIterator<Item = &'a CreditCategory>) -> Self {
        let mut bits = [false; CreditCategory::COUNT];
        for c in cats {
            bits[c.index()] = true;
        }
        LabelVector(bits)
    }

    pub fn get(&self, c: CreditCategory) -> bool {
        self.0[c.index()]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureRow {
    pub article_id: String,
    pub author_index: usize,
    pub features: FeatureVector,
    pub labels: LabelVector,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureExtraction {
    pub rows: Vec<FeatureRow>,
    /// Byline authors left out because no task was assigned to them.
    pub zero_task_authors: usize,
}

pub fn extract_features(
    assignments: &[TaskAssignment],
    corpus: &Corpus,
) -> Result<FeatureExtraction> {
    let mut by_article: BTreeMap<&str, BTreeMap<usize, Vec<CreditCategory>>> = BTreeMap::new();
    for a in assignments {
        by_article
            .entry(&a.article_id)
            .or_default()
            .entry(a.author_index)
            .or_default()
            .push(a.category);
    }
    let mut rows = Vec::new();
    let mut zero_task_authors = 0;
    for (id, authors) in by_article {
        let Some(article) = corpus.get(id) else {
            return Err(Error::Invalid(format!(
                "assignments reference unknown article {id}"
            )));
        };
        let team_size = article.team_size();
        if let Some((&idx, _)) = authors.iter().find(|(&i, _)| i == 0 || i > team_size) {
            return Err(Error::Invalid(format!(
                "article {id}: author index {idx} outside byline of {team_size}"
            )));
        }
        let labels: BTreeMap<usize, LabelVector> = authors
            .iter()
            .map(|(&i, cats)| (i, LabelVector::from_categories(cats)))
            .collect();
        let count = |l: &LabelVector| l.0.iter().filter(|&&b| b).count();
        let total: usize = labels.values().map(count).sum();
        zero_task_authors += team_size - labels.len();
        for (i, l) in labels {
            let n = count(&l);
            rows.push(FeatureRow {
                article_id: id.to_string(),
                author_index: i,
                features: FeatureVector {
                    position: i,
                    n_tasks_author: n,
                    team_size,
                    total_tasks_article: total,
                    share: n as f64 / total as f64,
                },
                labels: l,
            });
        }
    }
    Ok(FeatureExtraction {
        rows,
        zero_task_authors,
    })
}

const ROW_COLUMNS: [&str; 7] = [
    "article_id",
    "author_index",
    "position",
    "n_tasks_author",
    "team_size",
    "total_tasks_article",
    "share",
];

/// One line per row; label columns are 0/1 in taxonomy order.
pub fn rows_csv(rows: &[FeatureRow]) -> String {
    let mut s = ROW_COLUMNS.join(",");
    for c in CreditCategory::ALL {
        s.push(',');
        s.push_str(c.name());
    }
    s.push('\n');
    for r in rows {
        let f = &r.features;
        let _ = write!(
            s,
            "{},{},{},{},{},{},{}",
            r.article_id,
            r.author_index,
            f.position,
            f.n_tasks_author,
            f.team_size,
            f.total_tasks_article,
            f.share
        );
        for b in r.labels.0 {
            s.push_str(if b { ",1" } else { ",0" });
        }
        s.push('\n');
    }
    s
}

pub fn parse_rows_csv(text: &str) -> Result<Vec<FeatureRow>> {
    let width = ROW_COLUMNS.len() + CreditCategory::COUNT;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.split(',').count() == width => {}
        _ => {
            return Err(Error::Invalid(
                "rows file: missing or malformed header".into(),
            ))
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |what: &str| Error::Invalid(format!("rows file line {}: {what}", i + 1));
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != width {
            return Err(bad("wrong column count"));
        }
        let int = |k: usize| cells[k].parse::<usize>().map_err(|_| bad(ROW_COLUMNS[k]));
        let mut bits = [false; CreditCategory::COUNT];
        for (b, cell) in bits.iter_mut().zip(&cells[ROW_COLUMNS.len()..]) {
            *b = match *cell {
                "1" => true,
                "0" => false,
                _ => return Err(bad("label must be 0 or 1")),
            };
        }
        rows.push(FeatureRow {
            article_id: cells[0].to_string(),
            author_index: int(1)?,
            features: FeatureVector {
                position: int(2)?,
                n_tasks_author: int(3)?,
                team_size: int(4)?,
                total_tasks_article: int(5)?,
                share: cells[6].parse().map_err(|_| bad("share"))?,
            },
            labels: LabelVector(bits),
        });
    }
    Ok(rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    BoostedTrees,
    Logistic,
    Dummy,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [
        ModelKind::BoostedTrees,
        ModelKind::Logistic,
        ModelKind::Dummy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::BoostedTrees => "boosted_trees",
            ModelKind::Logistic => "logistic",
            ModelKind::Dummy => "dummy",
        }
    }
}

impl FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown model kind {s:?}")))
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// log(1 + e^z) without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Mean negative log-likelihood for labels in {0, 1} given log-odds.
pub fn log_loss(logits: &[f64], y: &[f64]) -> f64 {
    let n = logits.len() as f64;
    logits
        .iter()
        .zip(y)
        .map(|(&z, &t)| softplus(z) - t * z)
        .sum::<f64>()
        / n
}

fn dot(w: &[f64], x: &[f64]) -> f64 {
    w.iter().zip(x).map(|(a, b)| a * b).sum()
}

pub fn logistic_loss(weights: &[f64], bias: f64, x: &[Vec<f64>], y: &[f64]) -> f64 {
    let logits: Vec<f64> = x.iter().map(|xi| dot(weights, xi) + bias).collect();
    log_loss(&logits, y)
}

/// Gradient of [`logistic_loss`] with respect to the weights and the bias.
pub fn logistic_gradient(weights: &[f64], bias: f64, x: &[Vec<f64>], y: &[f64]) -> (Vec<f64>, f64) {
    let n = x.len() as f64;
    let mut gw = vec![0.0; weights.len()];
    let mut gb = 0.0;
    for (xi, &t) in x.iter().zip(y) {
        let r = sigmoid(dot(weights, xi) + bias) - t;
        for (g, v) in gw.iter_mut().zip(xi) {
            *g += r * v;
        }
        gb += r;
    }
    gw.iter_mut().for_each(|g| *g /= n);
    (gw, gb / n)
}

/// Full-batch gradient descent from zero.
pub fn train_logistic(x: &[Vec<f64>], y: &[f64], lr: f64, epochs: usize) -> (Vec<f64>, f64) {
    let dim = x.first().map_or(0, Vec::len);
    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    for _ in 0..epochs {
        let (gw, gb) = logistic_gradient(&w, b, x, y);
        for (wi, g) in w.iter_mut().zip(&gw) {
            *wi -= lr * g;
        }
        b -= lr * gb;
    }
    (w, b)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Regression tree stored as a flat node list with the root at index 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf(v) => return v,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

struct TreeBuilder<'a> {
    x: &'a [Vec<f64>],
    g: &'a [f64],
    h: &'a [f64],
    lambda: f64,
    max_depth: usize,
    nodes: Vec<Node>,
}

impl TreeBuilder<'_> {
    fn score(&self, g: f64, h: f64) -> f64 {
        g * g / (h + self.lambda)
    }

    fn best_split(&self, idx: &[usize]) -> Option<(usize, f64, f64)> {
        let gsum: f64 = idx.iter().map(|&i| self.g[i]).sum();
        let hsum: f64 = idx.iter().map(|&i| self.h[i]).sum();
        let parent = self.score(gsum, hsum);
        let mut best: Option<(usize, f64, f64)> = None;
        let dim = self.x[idx[0]].len();
        for f in 0..dim {
            let mut order = idx.to_vec();
            order.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]).then(a.cmp(&b)));
            let (mut gl, mut hl) = (0.0, 0.0);
            for k in 0..order.len() - 1 {
                gl += self.g[order[k]];
                hl += self.h[order[k]];
                let (v, next) = (self.x[order[k]][f], self.x[order[k + 1]][f]);
                if v == next {
                    continue;
                }
                let gain = self.score(gl, hl) + self.score(gsum - gl, hsum - hl) - parent;
                if gain > 1e-12 && best.is_none_or(|b| gain > b.2) {
                    best = Some((f, v + (next - v) / 2.0, gain));
                }
            }
        }
        best
    }

    fn build(&mut self, idx: &[usize], depth: usize) -> usize {
        let at = self.nodes.len();
        let gsum: f64 = idx.iter().map(|&i| self.g[i]).sum();
        let hsum: f64 = idx.iter().map(|&i| self.h[i]).sum();
        self.nodes.push(Node::Leaf(-gsum / (hsum + self.lambda)));
        if depth >= self.max_depth || idx.len() < 2 {
            return at;
        }
        if let Some((feature, threshold, _)) = self.best_split(idx) {
            let (l, r): (Vec<usize>, Vec<usize>) =
                idx.iter().partition(|&&i| self.x[i][feature] <= threshold);
            let left = self.build(&l, depth + 1);
            let right = self.build(&r, depth + 1);
            self.nodes[at] = Node::Split {
                feature,
                threshold,
                left,
                right,
            };
        }
        at
    }
}

/// Second-order tree fit to gradients `g` and hessians `h`.
pub fn fit_tree(x: &[Vec<f64>], g: &[f64], h: &[f64], max_depth: usize, lambda: f64) -> Tree {
    let mut b = TreeBuilder {
        x,
        g,
        h,
        lambda,
        max_depth,
        nodes: Vec::new(),
    };
    let all: Vec<usize> = (0..x.len()).collect();
    b.build(&all, 0);
    Tree { nodes: b.nodes }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoostedModel {
    pub base_score: f64,
    pub learning_rate: f64,
    pub trees: Vec<Tree>,
}

impl BoostedModel {
    pub fn logit(&self, x: &[f64]) -> f64 {
        self.base_score + self.learning_rate * self.trees.iter().map(|t| t.predict(x)).sum::<f64>()
    }
}

/// Gradient boosting on log loss, starting from the prior log-odds. The
/// second return value is the training loss before each round and after
/// the last one.
pub fn train_boosted(x: &[Vec<f64>], y: &[f64], rounds: usize) -> (BoostedModel, Vec<f64>) {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let base_score = (mean / (1.0 - mean)).ln();
    let mut logits = vec![base_score; x.len()];
    let mut history = vec![log_loss(&logits, y)];
    let mut trees = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        let p: Vec<f64> = logits.iter().map(|&z| sigmoid(z)).collect();
        let g: Vec<f64> = p.iter().zip(y).map(|(p, t)| p - t).collect();
        let h: Vec<f64> = p.iter().map(|p| p * (1.0 - p)).collect();
        let tree = fit_tree(x, &g, &h, BOOSTING_MAX_DEPTH, BOOSTING_LAMBDA);
        for (z, xi) in logits.iter_mut().zip(x) {
            *z += BOOSTING_LEARNING_RATE * tree.predict(xi);
        }
        history.push(log_loss(&logits, y));
        trees.push(tree);
    }
    let model = BoostedModel {
        base_score,
        learning_rate: BOOSTING_LEARNING_RATE,
        trees,
    };
    (model, history)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Scaler {
    /// Constant features keep unit scale.
    pub fn fit(x: &[Vec<f64>]) -> Scaler {
        let n = x.len() as f64;
        let dim = x.first().map_or(0, Vec::len);
        let mean: Vec<f64> = (0..dim)
            .map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n)
            .collect();
        let std = (0..dim)
            .map(|j| {
                let var = x.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n;
                if var > 0.0 {
                    var.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        Scaler { mean, std }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum LabelModel {
    /// Majority class, or the only class seen in training.
    Constant(bool),
    Logistic {
        weights: Vec<f64>,
        bias: f64,
    },
    Boosted(BoostedModel),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub kind: ModelKind,
    pub seed: u64,
    pub scaler: Option<Scaler>,
    /// One per category, in taxonomy order.
    pub labels: Vec<LabelModel>,
    /// Categories that had a single class in training.
    pub constant_fallbacks: Vec<CreditCategory>,
}

fn feature_matrix(rows: &[FeatureRow]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|r| r.features.as_array().to_vec())
        .collect()
}

/// Trains one binary model per category. Training is deterministic; the
/// seed is recorded with the model.
pub fn train(rows: &[FeatureRow], kind: ModelKind, seed: u64) -> Result<Model> {
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    let raw = feature_matrix(rows);
    let scaler = (kind == ModelKind::Logistic).then(|| Scaler::fit(&raw));
    let scaled: Vec<Vec<f64>> = match &scaler {
        Some(s) => raw.iter().map(|r| s.apply(r)).collect(),
        None => raw.clone(),
    };
    let mut labels = Vec::with_capacity(CreditCategory::COUNT);
    let mut constant_fallbacks = Vec::new();
    for c in CreditCategory::ALL {
        let y: Vec<f64> = rows
            .iter()
            .map(|r| f64::from(u8::from(r.labels.get(c))))
            .collect();
        let positives = y.iter().filter(|&&v| v == 1.0).count();
        let majority = 2 * positives > y.len();
        if kind == ModelKind::Dummy {
            labels.push(LabelModel::Constant(majority));
            continue;
        }
        if positives == 0 || positives == y.len() {
            log::warn!("{c}: single class in training data, predicting constant");
            constant_fallbacks.push(c);
            labels.push(LabelModel::Constant(majority));
            continue;
        }
        labels.push(match kind {
            ModelKind::Logistic => {
                let (weights, bias) =
                    train_logistic(&scaled, &y, LOGISTIC_LEARNING_RATE, LOGISTIC_EPOCHS);
                LabelModel::Logistic { weights, bias }
            }
            _ => LabelModel::Boosted(train_boosted(&raw, &y, BOOSTING_ROUNDS).0),
        });
    }
    Ok(Model {
        kind,
        seed,
        scaler,
        labels,
        constant_fallbacks,
    })
}

impl Model {
    pub fn predict(&self, features: &FeatureVector) -> LabelVector {
        let raw = features.as_array();
        let scaled = match &self.scaler {
            Some(s) => s.apply(&raw),
            None => raw.to_vec(),
        };
        let mut bits = [false; CreditCategory::COUNT];
        for (b, m) in bits.iter_mut().zip(&self.labels) {
            *b = match m {
                LabelModel::Constant(v) => *v,
                LabelModel::Logistic { weights, bias } => dot(weights, &scaled) + bias > 0.0,
                LabelModel::Boosted(bm) => bm.logit(&raw) > 0.0,
            };
        }
        LabelVector(bits)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = MODEL_MAGIC.to_vec();
        out.extend_from_slice(&MODEL_VERSION.to_le_bytes());
        out.extend(serde_json::to_vec(self).expect("model serializes"));
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Model> {
        let body = bytes
            .strip_prefix(MODEL_MAGIC.as_slice())
            .ok_or_else(|| Error::ModelFormat("bad magic header".into()))?;
        if body.len() < 4 {
            return Err(Error::ModelFormat("truncated header".into()));
        }
        let version = u32::from_le_bytes(body[..4].try_into().expect("4 bytes"));
        if version != MODEL_VERSION {
            return Err(Error::ModelFormat(format!("unsupported version {version}")));
        }
        serde_json::from_slice(&body[4..]).map_err(|e| Error::ModelFormat(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&self.to_bytes())
            .map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Model> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| Error::io(path, e))?;
        Model::from_bytes(&bytes)
    }
}

/// Per-category accuracy of a model on labelled rows.
pub fn label_accuracy(model: &Model, rows: &[FeatureRow]) -> [f64; CreditCategory::COUNT] {
    let mut correct = [0usize; CreditCategory::COUNT];
    for r in rows {
        let p = model.predict(&r.features);
        for (k, c) in correct.iter_mut().enumerate() {
            if p.0[k] == r.labels.0[k] {
                *c += 1;
            }
        }
    }
    correct.map(|c| c as f64 / rows.len() as f64)
}

/// Held-out rows are those whose article hashes into one of five buckets,
/// so all authors of an article land on the same side.
pub fn is_test_row(article_id: &str, seed: u64) -> bool {
    fnv1a64(seed, article_id.as_bytes()).is_multiple_of(5)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModelScores {
    pub kind: ModelKind,
    pub per_label: [f64; CreditCategory::COUNT],
    pub mean: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalTable {
    pub n_train: usize,
    pub n_test: usize,
    pub models: Vec<ModelScores>,
}

pub fn evaluate_models(rows: &[FeatureRow], seed: u64) -> Result<EvalTable> {
    if rows.len() < 10 {
        return Err(Error::Invalid(format!(
            "need at least 10 rows, got {}",
            rows.len()
        )));
    }
    let (test, train_rows): (Vec<FeatureRow>, Vec<FeatureRow>) = rows
        .iter()
        .cloned()
        .partition(|r| is_test_row(&r.article_id, seed));
    if test.len() < 2 {
        return Err(Error::Invalid(format!(
            "split left {} test rows",
            test.len()
        )));
    }
    if train_rows.is_empty() {
        return Err(Error::Invalid("split left no training rows".into()));
    }
    let mut models = Vec::new();
    for kind in ModelKind::ALL {
        let model = train(&train_rows, kind, seed)?;
        let per_label = label_accuracy(&model, &test);
        let mean = per_label.iter().sum::<f64>() / per_label.len() as f64;
        models.push(ModelScores {
            kind,
            per_label,
            mean,
        });
    }
    Ok(EvalTable {
        n_train: train_rows.len(),
        n_test: test.len(),
        models,
    })
}

impl EvalTable {
    pub fn score(&self, kind: ModelKind) -> &ModelScores {
        self.models
            .iter()
            .find(|m| m.kind == kind)
            .expect("all kinds evaluated")
    }

    /// Categories as rows, models as columns, then a mean row.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("category");
        for m in &self.models {
            s.push(',');
            s.push_str(m.kind.name());
        }
        s.push('\n');
        for c in CreditCategory::ALL {
            s.push_str(c.name());
            for m in &self.models {
                let _ = write!(s, ",{:.6}", m.per_label[c.index()]);
            }
            s.push('\n');
        }
        s.push_str("mean");
        for m in &self.models {
            let _ = write!(s, ",{:.6}", m.mean);
        }
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{parse_corpus, Layer};
    use CreditCategory as C;
    use C::*;

    fn assign(id: &str, author: usize, c: CreditCategory) -> TaskAssignment {
        TaskAssignment {
            article_id: id.into(),
            author_index: author,
            author_name: String::new(),
            category: c,
            layer: Layer::Keyword,
            evidence: String::new(),
        }
    }

    fn corpus() -> Corpus {
        parse_corpus(concat!(
            r#"{"id":"a","authors":["Ann Lee","Bo Chan"],"contribution_text":"x"}"#,
            "\n",
            r#"{"id":"b","authors":["Cy Dee"],"contribution_text":"x"}"#,
            "\n",
            r#"{"id":"c","authors":["Ed Fox","Gil Ho","Ivy Jo"],"contribution_text":"x"}"#,
        ))
        .unwrap()
    }

    #[test]
    fn features_from_assignments() {
        let rows = [
            assign("a", 1, Methodology),
            assign("a", 1, Software),
            assign("a", 1, Validation),
            assign("a", 2, Investigation),
            assign("b", 1, Resources),
            assign("c", 1, Supervision),
        ];
        let ex = extract_features(&rows, &corpus()).unwrap();
        assert_eq!(ex.rows.len(), 4);
        assert_eq!(ex.zero_task_authors, 2);
        let first = &ex.rows[0];
        assert_eq!(
            first.features,
            FeatureVector {
                position: 1,
                n_tasks_author: 3,
                team_size: 2,
                total_tasks_article: 4,
                share: 0.75
            }
        );
        assert_eq!(
            first.labels,
            LabelVector::from_categories(&[Methodology, Software, Validation])
        );
        let single = &ex.rows[2];
        assert_eq!(single.article_id, "b");
        assert_eq!((single.features.position, single.features.share), (1, 1.0));
    }

    #[test]
    fn inconsistent_assignments_rejected() {
        assert!(extract_features(&[assign("zz", 1, Software)], &corpus()).is_err());
        assert!(extract_features(&[assign("b", 2, Software)], &corpus()).is_err());
    }

    #[test]
    fn rows_csv_round_trip() {
        let rows = extract_features(
            &[
                assign("a", 1, Methodology),
                assign("a", 2, Software),
                assign("a", 2, Resources),
            ],
            &corpus(),
        )
        .unwrap()
        .rows;
        let csv = rows_csv(&rows);
        assert!(csv.starts_with("article_id,author_index,position,"));
        assert!(csv.contains("\na,2,2,2,2,3,0.6666666666666666,0,0,0,0,0,0,0,0,0,0,1,0,0,1\n"));
        assert_eq!(parse_rows_csv(&csv).unwrap(), rows);
        assert!(parse_rows_csv("a,b\n").is_err());
    }

    fn row(id: usize, f: [f64; 2], label: bool) -> FeatureRow {
        FeatureRow {
            article_id: format!("art{id}"),
            author_index: 1,
            features: FeatureVector {
                position: f[0] as usize,
                n_tasks_author: f[1] as usize,
                team_size: 20,
                total_tasks_article: 40,
                share: 0.5,
            },
            labels: LabelVector::from_categories(if label { &[Methodology][..] } else { &[][..] }),
        }
    }

    fn grid() -> impl Iterator<Item = [f64; 2]> {
        (1..=20).flat_map(|a| (1..=20).map(move |b| [a as f64, b as f64]))
    }

    fn accuracy(model: &Model, rows: &[FeatureRow]) -> f64 {
        label_accuracy(model, rows)[Methodology.index()]
    }

    #[test]
    fn logistic_fits_separable_data() {
        let rows: Vec<FeatureRow> = grid()
            .enumerate()
            .filter(|(_, f)| f[0] + f[1] != 21.0)
            .map(|(i, f)| row(i, f, f[0] + f[1] > 21.0))
            .collect();
        let m = train(&rows, ModelKind::Logistic, 42).unwrap();
        assert!(accuracy(&m, &rows) >= 0.99);
    }

    #[test]
    fn trees_capture_interactions() {
        // Off-centre thresholds: a perfectly balanced XOR gives every single
        // split zero gain, which no greedy learner can start from.
        let rows: Vec<FeatureRow> = grid()
            .enumerate()
            .map(|(i, f)| row(i, f, (f[0] > 10.0) != (f[1] > 11.0)))
            .collect();
        let boosted = train(&rows, ModelKind::BoostedTrees, 42).unwrap();
        let logistic = train(&rows, ModelKind::Logistic, 42).unwrap();
        let (acc_b, acc_l) = (accuracy(&boosted, &rows), accuracy(&logistic, &rows));
        assert!(
            acc_b >= 0.95 && acc_l <= 0.6,
            "boosted {acc_b}, logistic {acc_l}"
        );
        let LabelModel::Boosted(b) = &boosted.labels[Methodology.index()] else {
            panic!("expected a boosted model");
        };
        assert_eq!(b.trees.len(), BOOSTING_ROUNDS);
        assert!(b.trees.iter().all(|t| t.depth() <= BOOSTING_MAX_DEPTH));
        assert_eq!(boosted.constant_fallbacks.len(), 13);
    }

    #[test]
    fn dummy_predicts_majority() {
        let rows: Vec<FeatureRow> = (0..8).map(|i| row(i, [1.0, 1.0], i % 4 != 0)).collect();
        let m = train(&rows, ModelKind::Dummy, 1).unwrap();
        assert_eq!(m.labels[Methodology.index()], LabelModel::Constant(true));
        assert_eq!(accuracy(&m, &rows), 0.75);
        assert!(train(&[], ModelKind::Dummy, 1).is_err());
    }

    #[test]
    fn boosted_loss_never_increases() {
        let x: Vec<Vec<f64>> = grid().map(|f| f.to_vec()).collect();
        let y: Vec<f64> = grid()
            .map(|f| f64::from(u8::from((f[0] * 7.0 + f[1] * 3.0) as u32 % 5 < 2)))
            .collect();
        let (_, history) = train_boosted(&x, &y, 50);
        assert!(history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn model_file_round_trip() {
        let rows: Vec<FeatureRow> = grid()
            .enumerate()
            .map(|(i, f)| row(i, f, f[0] > f[1]))
            .collect();
        for kind in ModelKind::ALL {
            let m = train(&rows, kind, 7).unwrap();
            let back = Model::from_bytes(&m.to_bytes()).unwrap();
            assert_eq!(back, m);
        }
        assert!(matches!(
            Model::from_bytes(b"nope"),
            Err(Error::ModelFormat(_))
        ));
        let mut bytes = train(&rows, ModelKind::Dummy, 7).unwrap().to_bytes();
        bytes[8] = 9;
        assert!(Model::from_bytes(&bytes).is_err());
    }

    #[test]
    fn evaluation_is_deterministic() {
        let rows: Vec<FeatureRow> = grid()
            .enumerate()
            .map(|(i, f)| row(i, f, f[0] > 10.0))
            .collect();
        let a = evaluate_models(&rows, 42).unwrap();
        let b = evaluate_models(&rows, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n_train + a.n_test, rows.len());
        assert!(a.to_csv().ends_with('\n'));
        assert!(evaluate_models(&rows[..5], 42).is_err());
    }

    #[test]
    fn dummy_score_is_majority_frequency() {
        let rows: Vec<FeatureRow> = grid()
            .enumerate()
            .map(|(i, f)| row(i, f, f[0] > 7.0))
            .collect();
        let t = evaluate_models(&rows, 3).unwrap();
        let test: Vec<&FeatureRow> = rows
            .iter()
            .filter(|r| is_test_row(&r.article_id, 3))
            .collect();
        let train_pos = rows
            .iter()
            .filter(|r| !is_test_row(&r.article_id, 3) && r.labels.get(Methodology))
            .count();
        let majority = 2 * train_pos > t.n_train;
        let expected = test
            .iter()
            .filter(|r| r.labels.get(Methodology) == majority)
            .count() as f64
            / test.len() as f64;
        assert_eq!(
            t.score(ModelKind::Dummy).per_label[Methodology.index()],
            expected
        );
    }
}
