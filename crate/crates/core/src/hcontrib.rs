//! Hybrid contribution classifier: deterministic rules, then keyword
//! matching, then an embedding argmax against per-category prototypes.

use std::collections::BTreeMap;

use crate::embed::{cosine, EmbeddingProvider, EmbeddingVector};
use crate::error::{Error, Result};
use crate::model::{ArticleRecord, Layer, TaskAssignment};
use crate::names::MentionResolution;
use crate::segment::{normalize, segment, Clause, ClauseStyle};
use crate::taxonomy::{CreditCategory, Taxonomy};

/// Fills every profile's prototype with the normalized mean embedding of its
/// examples and keywords.
pub fn build_prototypes(taxonomy: &Taxonomy, provider: &dyn EmbeddingProvider) -> Result<Taxonomy> {
    let mut out = taxonomy.clone();
    let mut missing = Vec::new();
    for profile in out.profiles_mut() {
        let phrases = profile
            .examples
            .iter()
            .map(|e| normalize(e))
            .chain(profile.keywords.iter().cloned());
        let mut vectors = Vec::new();
        for phrase in phrases {
            match provider.embed(&phrase) {
                Ok(v) => vectors.push(v),
                Err(Error::ProviderUnavailable(_)) => missing.push(phrase),
                Err(e) => return Err(e),
            }
        }
        if missing.is_empty() {
            profile.prototype = Some(EmbeddingVector::mean(&vectors)?.normalized()?);
        }
    }
    if !missing.is_empty() {
        return Err(Error::PrototypeSetup(missing));
    }
    Ok(out)
}

pub const DRAFT_RULE: &str = "R1:draft";

const REVISION_STEMS: &[&str] = &["revis", "review", "edit", "proofread"];

fn words(text: &str) -> impl Iterator<Item = &str> {
    text.split([' ', '-']).filter(|w| !w.is_empty())
}

fn draft_rule_fires(text: &str) -> bool {
    words(text).any(|w| w.starts_with("draft"))
}

/// The draft rule. A clause mentioning a draft is writing – original draft;
/// it is also writing – review editing only when revision vocabulary is
/// present independently of generic writing words.
pub fn apply_rules(text: &str) -> Vec<(CreditCategory, String)> {
    if !draft_rule_fires(text) {
        return Vec::new();
    }
    let mut out = vec![(CreditCategory::WritingOriginalDraft, DRAFT_RULE.to_string())];
    if let Some(w) = words(text).find(|w| REVISION_STEMS.iter().any(|s| w.starts_with(s))) {
        out.push((CreditCategory::WritingReviewEditing, format!("R1:{w}")));
    }
    out
}

/// Byte offsets where `keyword` occurs starting at a word boundary.
pub fn keyword_positions(text: &str, keyword: &str) -> Vec<usize> {
    text.match_indices(keyword)
        .map(|(i, _)| i)
        .filter(|&i| i == 0 || matches!(text.as_bytes()[i - 1], b' ' | b'-'))
        .collect()
}

/// First matching keyword of every category (prefix-stem semantics: the
/// keyword must start at a word boundary but may continue into a longer
/// word). Writing – review editing hits are dropped when the draft rule fires.
pub fn keyword_match(text: &str, taxonomy: &Taxonomy) -> Vec<(CreditCategory, String)> {
    let suppress_review = draft_rule_fires(text);
    taxonomy
        .profiles()
        .iter()
        .filter(|p| !(suppress_review && p.category == CreditCategory::WritingReviewEditing))
        .filter_map(|p| {
            p.keywords
                .iter()
                .find(|k| !keyword_positions(text, k).is_empty())
                .map(|k| (p.category, k.clone()))
        })
        .collect()
}

/// Highest-cosine category; ties go to the lower ordinal.
pub fn semantic_assign(
    text: &str,
    taxonomy: &Taxonomy,
    provider: &dyn EmbeddingProvider,
) -> Result<(CreditCategory, f64)> {
    let v = provider.embed(text)?;
    let mut best: Option<(CreditCategory, f64)> = None;
    for profile in taxonomy.profiles() {
        let proto = profile
            .prototype
            .as_ref()
            .ok_or_else(|| Error::Config("prototypes have not been built".into()))?;
        let score = cosine(&v, proto)?;
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((profile.category, score));
        }
    }
    best.ok_or(Error::EmptyInput)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassifiedClause {
    pub clause: Clause,
    /// Empty only when the clause could not be classified.
    pub categories: Vec<(CreditCategory, Layer, String)>,
    pub unclassified: bool,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ClassifierOptions {
    /// Optional floor for the semantic layer. `None` is a pure argmax.
    pub min_similarity: Option<f64>,
}

pub fn classify_clause(
    clause: Clause,
    taxonomy: &Taxonomy,
    provider: &dyn EmbeddingProvider,
    options: ClassifierOptions,
) -> ClassifiedClause {
    let mut categories: Vec<(CreditCategory, Layer, String)> = apply_rules(&clause.text)
        .into_iter()
        .map(|(c, e)| (c, Layer::Rule, e))
        .collect();
    for (c, kw) in keyword_match(&clause.text, taxonomy) {
        if !categories.iter().any(|(have, _, _)| *have == c) {
            categories.push((c, Layer::Keyword, kw));
        }
    }
    let mut unclassified = false;
    if categories.is_empty() {
        match semantic_assign(&clause.text, taxonomy, provider) {
            Ok((c, score)) if options.min_similarity.is_none_or(|m| score >= m) => {
                categories.push((c, Layer::Semantic, format!("{score:.4}")));
            }
            Ok(_) => unclassified = true,
            Err(e) => {
                log::debug!(
                    "{}: unclassified clause {:?}: {e}",
                    clause.article_id,
                    clause.text
                );
                unclassified = true;
            }
        }
    }
    ClassifiedClause {
        clause,
        categories,
        unclassified,
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ArticleClassification {
    pub assignments: Vec<TaskAssignment>,
    pub clauses: Vec<ClassifiedClause>,
    pub unattributed: usize,
    pub unclassified: usize,
}

/// Segment, classify each clause, expand to per-author assignments and keep
/// the strongest layer per (author, category).
pub fn classify_article(
    article: &ArticleRecord,
    resolutions: &[MentionResolution],
    taxonomy: &Taxonomy,
    provider: &dyn EmbeddingProvider,
    options: ClassifierOptions,
) -> ArticleClassification {
    let clauses = segment(&article.id, &article.contribution_text, resolutions);
    let mut out = ArticleClassification::default();
    let mut best: BTreeMap<(usize, CreditCategory), (Layer, String)> = BTreeMap::new();

    for clause in clauses {
        if clause.unattributed {
            out.unattributed += 1;
        }
        let classified = classify_clause(clause, taxonomy, provider, options);
        if classified.unclassified {
            out.unclassified += 1;
        }
        let collective = classified.clause.style == ClauseStyle::Collective;
        for &author in &classified.clause.authors {
            if author == 0 || author > article.byline.len() {
                continue;
            }
            for (category, layer, evidence) in &classified.categories {
                let (layer, evidence) = if collective {
                    (
                        Layer::Collective,
                        format!("{}:{evidence}", layer_name(*layer)),
                    )
                } else {
                    (*layer, evidence.clone())
                };
                let slot = best.entry((author, *category));
                match slot {
                    std::collections::btree_map::Entry::Vacant(v) => {
                        v.insert((layer, evidence));
                    }
                    std::collections::btree_map::Entry::Occupied(mut o) => {
                        if layer.precedence() < o.get().0.precedence() {
                            o.insert((layer, evidence));
                        }
                    }
                }
            }
        }
        out.clauses.push(classified);
    }

    out.assignments = best
        .into_iter()
        .map(|((author, category), (layer, evidence))| TaskAssignment {
            article_id: article.id.clone(),
            author_index: author,
            author_name: article.byline[author - 1].raw.clone(),
            category,
            layer,
            evidence,
        })
        .collect();
    crate::model::sort_assignments(&mut out.assignments);
    out
}

fn layer_name(layer: Layer) -> &'static str {
    match layer {
        Layer::Rule => "rule",
        Layer::Keyword => "keyword",
        Layer::Semantic => "semantic",
        Layer::Collective => "collective",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::LexicalEmbedder;
    use crate::model::FullName;
    use crate::names::resolve_article;
    use crate::taxonomy::CreditCategory as C;

    fn taxonomy() -> Taxonomy {
        build_prototypes(&Taxonomy::default_bundled(), &LexicalEmbedder::default()).unwrap()
    }

    fn cats(v: &[(CreditCategory, String)]) -> Vec<CreditCategory> {
        v.iter().map(|(c, _)| *c).collect()
    }

    #[test]
    fn draft_rule() {
        assert_eq!(
            cats(&apply_rules("wrote the initial draft")),
            [C::WritingOriginalDraft]
        );
        assert_eq!(
            cats(&apply_rules("drafted and revised the manuscript")),
            [C::WritingOriginalDraft, C::WritingReviewEditing]
        );
        assert!(apply_rules("performed the experiments").is_empty());
    }

    #[test]
    fn draft_rule_suppresses_generic_writing_keywords() {
        let t = Taxonomy::default_bundled();
        let hits = keyword_match("wrote the first draft of the manuscript", &t);
        assert!(!cats(&hits).contains(&C::WritingReviewEditing), "{hits:?}");
        let hits = keyword_match("wrote the manuscript", &t);
        assert_eq!(hits, [(C::WritingReviewEditing, "manuscript".to_string())]);
    }

    #[test]
    fn keyword_examples() {
        let t = Taxonomy::default_bundled();
        assert_eq!(
            keyword_match("performed the data analysis", &t),
            [(C::FormalAnalysis, "analysis".to_string())]
        );
        assert_eq!(
            keyword_match("conceptualized the study", &t),
            [(C::Conceptualization, "concept".to_string())]
        );
        assert_eq!(
            keyword_match("designed and performed the experiments", &t),
            [(C::Investigation, "experiment".to_string())]
        );
        assert_eq!(
            keyword_match("analyzed the samples", &t),
            [(C::FormalAnalysis, "analyze".to_string())]
        );
        // Word-boundary start is required.
        assert!(keyword_match("reanalyzed nothing", &t).is_empty());
    }

    #[test]
    fn prototype_of_identical_examples_is_that_embedding() {
        let e = LexicalEmbedder::default();
        let mut v: serde_json::Value =
            serde_json::from_str(crate::taxonomy::DEFAULT_TAXONOMY_JSON).unwrap();
        v["software"]["examples"] = serde_json::json!(vec!["wrote code"; 5]);
        v["software"]["keywords"] = serde_json::json!(["wrote code"]);
        let t = Taxonomy::from_json(&v.to_string()).unwrap();
        let t = build_prototypes(&t, &e).unwrap();
        let proto = t.profile(C::Software).prototype.as_ref().unwrap();
        let direct = e.embed("wrote code").unwrap();
        for ((i, a), (j, b)) in proto.entries().iter().zip(direct.entries()) {
            assert_eq!(i, j);
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn methodology_prototype_is_mean_of_eight_phrases() {
        let e = LexicalEmbedder::default();
        let t = taxonomy();
        let profile = t.profile(C::Methodology);
        let phrases: Vec<String> = profile
            .examples
            .iter()
            .map(|x| normalize(x))
            .chain(profile.keywords.iter().cloned())
            .collect();
        assert_eq!(phrases.len(), 8);
        // Independent dense recomputation.
        let mut dense = vec![0.0f64; crate::embed::LEXICAL_DIM];
        for p in &phrases {
            for (i, v) in e.embed(p).unwrap().entries() {
                dense[*i as usize] += v / 8.0;
            }
        }
        let norm = dense.iter().map(|v| v * v).sum::<f64>().sqrt();
        let proto = profile.prototype.as_ref().unwrap().to_dense();
        for (a, b) in proto.iter().zip(&dense) {
            assert!((a - b / norm).abs() < 1e-12);
        }
        assert!((profile.prototype.as_ref().unwrap().norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn disjoint_vocabularies_give_orthogonal_prototypes() {
        // Alphabets with no shared characters cannot share a trigram bucket
        // unless hashes collide; pick a seed/dim combination and check.
        let e = LexicalEmbedder::default();
        let a = e.embed("aaa bbb").unwrap();
        let b = e.embed("xxx yyy").unwrap();
        assert!(cosine(&a, &b).unwrap().abs() < 1e-12);
    }

    struct Fixed(Vec<(String, Vec<f64>)>);
    impl EmbeddingProvider for Fixed {
        fn dim(&self) -> usize {
            2
        }
        fn embed(&self, text: &str) -> Result<EmbeddingVector> {
            self.0
                .iter()
                .find(|(t, _)| t == text)
                .map(|(_, v)| EmbeddingVector::from_dense(v).unwrap())
                .ok_or_else(|| Error::ProviderUnavailable(text.into()))
        }
    }

    fn with_prototypes(protos: &[(CreditCategory, [f64; 2])]) -> Taxonomy {
        let mut t = Taxonomy::default_bundled();
        for p in t.profiles_mut() {
            let v = protos
                .iter()
                .find(|(c, _)| *c == p.category)
                .map(|(_, v)| *v)
                .unwrap_or([0.0, -1.0]);
            p.prototype = Some(EmbeddingVector::from_dense(&v).unwrap());
        }
        t
    }

    #[test]
    fn semantic_tie_goes_to_lower_ordinal() {
        let provider = Fixed(vec![("query".into(), vec![1.0, 1.0])]);
        let t = with_prototypes(&[(C::Software, [1.0, 0.5]), (C::Validation, [0.5, 1.0])]);
        let (c, s) = semantic_assign("query", &t, &provider).unwrap();
        assert_eq!(c, C::Validation);
        assert!(
            (s - cosine(
                &EmbeddingVector::from_dense(&[1.0, 1.0]).unwrap(),
                &EmbeddingVector::from_dense(&[0.5, 1.0]).unwrap()
            )
            .unwrap())
            .abs()
                < 1e-15
        );
    }

    #[test]
    fn semantic_self_similarity_wins() {
        let provider = Fixed(vec![("example".into(), vec![1.0, 0.0])]);
        let t = with_prototypes(&[(C::Resources, [1.0, 0.0])]);
        let (c, s) = semantic_assign("example", &t, &provider).unwrap();
        assert_eq!(c, C::Resources);
        assert_eq!(s, 1.0);
    }

    #[test]
    fn semantic_layer_without_keywords() {
        let t = taxonomy();
        let (c, _) = semantic_assign(
            "compiled numerical summaries of measurements",
            &t,
            &LexicalEmbedder::default(),
        )
        .unwrap();
        assert_eq!(c, C::FormalAnalysis);
    }

    #[test]
    fn provider_failure_marks_unclassified() {
        let t = with_prototypes(&[]);
        let clause = Clause {
            article_id: "a".into(),
            authors: [1].into(),
            text: "did something unusual".into(),
            style: ClauseStyle::AuthorFirst,
            unattributed: false,
        };
        let r = classify_clause(clause, &t, &Fixed(vec![]), ClassifierOptions::default());
        assert!(r.unclassified);
        assert!(r.categories.is_empty());
    }

    fn article(id: &str, names: &[&str], text: &str) -> ArticleRecord {
        ArticleRecord {
            id: id.into(),
            title: String::new(),
            venue: String::new(),
            year: 2024,
            byline: names.iter().map(|n| FullName::parse(n).unwrap()).collect(),
            contribution_text: text.into(),
        }
    }

    fn classify(a: &ArticleRecord, t: &Taxonomy) -> ArticleClassification {
        classify_article(
            a,
            &resolve_article(a),
            t,
            &LexicalEmbedder::default(),
            ClassifierOptions::default(),
        )
    }

    #[test]
    fn three_author_example() {
        let t = taxonomy();
        let a = article(
            "x",
            &["Anna Berg", "Carl Dahl", "Eva Fors"],
            "A.B. performed the data analysis, C.D. conceptualized the study, and E.F. wrote the initial draft.",
        );
        let got: Vec<(usize, CreditCategory, Layer)> = classify(&a, &t)
            .assignments
            .iter()
            .map(|a| (a.author_index, a.category, a.layer))
            .collect();
        assert_eq!(
            got,
            [
                (1, C::FormalAnalysis, Layer::Keyword),
                (2, C::Conceptualization, Layer::Keyword),
                (3, C::WritingOriginalDraft, Layer::Rule),
            ]
        );
    }

    #[test]
    fn both_authors_writing_and_editing() {
        let t = taxonomy();
        let a = article(
            "x",
            &["Ann Bell", "Carl Dunn"],
            "Both authors designed and conducted the experiments, and contributed to writing and editing the manuscript.",
        );
        let r = classify(&a, &t);
        for author in [1, 2] {
            assert!(r
                .assignments
                .iter()
                .any(|x| x.author_index == author && x.category == C::WritingReviewEditing));
            assert!(r
                .assignments
                .iter()
                .all(|x| x.layer == Layer::Collective && x.evidence.starts_with("keyword:")));
        }
    }

    #[test]
    fn keywordless_article_is_all_semantic() {
        let t = taxonomy();
        let a = article(
            "x",
            &["Ann Bell", "Carl Dunn"],
            "A.B. oversaw everything. C.D. obtained the grant.",
        );
        let r = classify(&a, &t);
        assert!(!r.assignments.is_empty());
        assert!(r.assignments.iter().all(|x| x.layer == Layer::Semantic));
        for x in &r.assignments {
            assert_eq!(
                x.evidence.split('.').nth(1).map(str::len),
                Some(4),
                "{}",
                x.evidence
            );
        }
    }

    #[test]
    fn dedup_keeps_strongest_layer() {
        let t = taxonomy();
        let a = article(
            "x",
            &["Ann Bell", "Carl Dunn"],
            "A.B. wrote the paper. All authors reviewed the paper.",
        );
        let r = classify(&a, &t);
        let wre: Vec<(usize, Layer)> = r
            .assignments
            .iter()
            .filter(|x| x.category == C::WritingReviewEditing)
            .map(|x| (x.author_index, x.layer))
            .collect();
        assert_eq!(wre, [(1, Layer::Keyword), (2, Layer::Collective)]);
    }
}
