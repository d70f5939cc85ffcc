//! Resolve → segment → classify over a corpus, one article at a time.
//!
//! Articles are independent, so callers may run [`process_article`] in any
//! order or in parallel; [`merge`] restores the canonical output order.

use crate::embed::EmbeddingProvider;
use crate::hcontrib::{classify_article, ClassifierOptions};
use crate::model::{sort_assignments, ArticleRecord, Corpus, TaskAssignment};
use crate::names::{resolve_article, ResolutionRecord};
use crate::taxonomy::Taxonomy;

#[derive(Clone, Debug, PartialEq)]
pub struct ArticleOutput {
    pub article_id: String,
    pub assignments: Vec<TaskAssignment>,
    pub resolutions: Vec<ResolutionRecord>,
    pub unattributed: usize,
    pub unclassified: usize,
}

pub fn process_article(
    article: &ArticleRecord,
    taxonomy: &Taxonomy,
    provider: &dyn EmbeddingProvider,
    options: ClassifierOptions,
) -> ArticleOutput {
    let mentions = resolve_article(article);
    let classified = classify_article(article, &mentions, taxonomy, provider, options);
    ArticleOutput {
        article_id: article.id.clone(),
        assignments: classified.assignments,
        resolutions: mentions.iter().map(ResolutionRecord::from).collect(),
        unattributed: classified.unattributed,
        unclassified: classified.unclassified,
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CorpusOutput {
    pub assignments: Vec<TaskAssignment>,
    /// Ordered by article id, then position in the text.
    pub resolutions: Vec<ResolutionRecord>,
    /// `article_id<TAB>reason` lines for clauses that could not be used.
    pub diagnostics: Vec<String>,
}

pub fn merge(mut outputs: Vec<ArticleOutput>) -> CorpusOutput {
    outputs.sort_by(|a, b| a.article_id.cmp(&b.article_id));
    let mut out = CorpusOutput::default();
    for o in outputs {
        if o.unattributed > 0 {
            out.diagnostics.push(format!(
                "{}\tunattributed clauses: {}",
                o.article_id, o.unattributed
            ));
        }
        if o.unclassified > 0 {
            out.diagnostics.push(format!(
                "{}\tunclassified clauses: {}",
                o.article_id, o.unclassified
            ));
        }
        out.assignments.extend(o.assignments);
        out.resolutions.extend(o.resolutions);
    }
    sort_assignments(&mut out.assignments);
    out
}

/// Sequential reference run.
pub fn process_corpus(
    corpus: &Corpus,
    taxonomy: &Taxonomy,
    provider: &dyn EmbeddingProvider,
    options: ClassifierOptions,
) -> CorpusOutput {
    merge(
        corpus
            .records
            .iter()
            .map(|a| process_article(a, taxonomy, provider, options))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::LexicalEmbedder;
    use crate::hcontrib::build_prototypes;
    use crate::model::parse_corpus;

    #[test]
    fn merge_order_is_independent_of_processing_order() {
        let corpus = parse_corpus(concat!(
            r#"{"id":"b","authors":["Ann Lee","Bo Chan"],"contribution_text":"A.L. wrote the software. B.C. supervised the project."}"#,
            "\n",
            r#"{"id":"a","authors":["Cy Dee"],"contribution_text":"C.D. collected the data. Funding was obtained."}"#,
        ))
        .unwrap();
        let provider = LexicalEmbedder::default();
        let tax = build_prototypes(&Taxonomy::default_bundled(), &provider).unwrap();
        let opts = ClassifierOptions::default();
        let forward = process_corpus(&corpus, &tax, &provider, opts);
        let reversed = merge(
            corpus
                .records
                .iter()
                .rev()
                .map(|a| process_article(a, &tax, &provider, opts))
                .collect(),
        );
        assert_eq!(forward, reversed);
        assert_eq!(forward.assignments[0].article_id, "a");
        assert_eq!(forward.resolutions[0].article_id, "a");
    }
}
