//! Domain records, JSONL corpus ingestion and assignment persistence.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::taxonomy::CreditCategory;

/// One whitespace- or hyphen-delimited piece of a personal name.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NameToken {
    pub text: String,
    /// The token was joined to the next one by a hyphen ("Jean-Luc").
    pub hyphen_after: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FullName {
    pub raw: String,
    pub tokens: Vec<NameToken>,
    /// Trailing tokens treated as the surname. Defaults to the final token.
    pub surname_span: Range<usize>,
}

impl FullName {
    /// Tokenizes on whitespace and hyphens. Returns `None` for names
    /// with no letters or digits.
    pub fn parse(raw: &str) -> Option<FullName> {
        let mut tokens = Vec::new();
        for word in raw.split_whitespace() {
            let parts: Vec<&str> = word.split('-').filter(|p| !p.is_empty()).collect();
            let n = parts.len();
            for (i, part) in parts.into_iter().enumerate() {
                tokens.push(NameToken {
                    text: part.trim_matches(',').to_string(),
                    hyphen_after: i + 1 < n,
                });
            }
        }
        tokens.retain(|t| t.text.chars().any(char::is_alphanumeric));
        if let Some(last) = tokens.last_mut() {
            last.hyphen_after = false;
        }
        let n = tokens.len();
        if n == 0 {
            return None;
        }
        Some(FullName {
            raw: raw.trim().to_string(),
            tokens,
            surname_span: n - 1..n,
        })
    }

    pub fn with_surname_span(mut self, span: Range<usize>) -> FullName {
        assert!(
            span.start < span.end && span.end == self.tokens.len(),
            "surname span must be a non-empty suffix"
        );
        self.surname_span = span;
        self
    }

    pub fn given_tokens(&self) -> &[NameToken] {
        &self.tokens[..self.surname_span.start]
    }

    pub fn surname_tokens(&self) -> &[NameToken] {
        &self.tokens[self.surname_span.clone()]
    }
}

impl fmt::Display for FullName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.raw)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArticleRecord {
    pub id: String,
    pub title: String,
    pub venue: String,
    pub year: i32,
    pub byline: Vec<FullName>,
    pub contribution_text: String,
}

impl ArticleRecord {
    pub fn team_size(&self) -> usize {
        self.byline.len()
    }
}

/// Input line schema.
#[derive(Debug, Deserialize, Serialize)]
pub struct RawArticle {
    pub id: String,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub venue: String,
    #[serde(default)]
    pub year: i32,
    pub authors: Vec<String>,
    pub contribution_text: String,
}

impl RawArticle {
    fn into_record(self) -> std::result::Result<ArticleRecord, String> {
        if self.id.trim().is_empty() {
            return Err("empty id".into());
        }
        if self.authors.is_empty() {
            return Err("empty byline".into());
        }
        let mut byline = Vec::with_capacity(self.authors.len());
        for (i, a) in self.authors.iter().enumerate() {
            byline.push(
                FullName::parse(a).ok_or_else(|| format!("author {} has no name tokens", i + 1))?,
            );
        }
        if self.contribution_text.trim().is_empty() {
            return Err("empty contribution_text".into());
        }
        Ok(ArticleRecord {
            id: self.id,
            title: self.title,
            venue: self.venue,
            year: self.year,
            byline,
            contribution_text: self.contribution_text,
        })
    }
}

/// A per-line rejection reported during ingest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub line_no: usize,
    pub reason: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}", self.line_no, self.reason)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Corpus {
    pub records: Vec<ArticleRecord>,
    pub diagnostics: Vec<Diagnostic>,
    /// Non-blank input lines, including rejected ones.
    pub raw_count: usize,
}

impl Corpus {
    pub fn get(&self, id: &str) -> Option<&ArticleRecord> {
        self.records.iter().find(|r| r.id == id)
    }

    /// Article id → byline length.
    pub fn team_sizes(&self) -> HashMap<String, usize> {
        self.records
            .iter()
            .map(|r| (r.id.clone(), r.team_size()))
            .collect()
    }
}

pub fn parse_corpus(text: &str) -> Result<Corpus> {
    let mut corpus = Corpus::default();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        corpus.raw_count += 1;
        let raw: RawArticle = match serde_json::from_str(line) {
            Ok(raw) => raw,
            Err(e) => {
                corpus.diagnostics.push(Diagnostic {
                    line_no,
                    reason: format!("malformed record: {e}"),
                });
                continue;
            }
        };
        if let Some(&first_line) = seen.get(&raw.id) {
            return Err(Error::DuplicateId {
                id: raw.id,
                first_line,
                second_line: line_no,
            });
        }
        seen.insert(raw.id.clone(), line_no);
        match raw.into_record() {
            Ok(record) => corpus.records.push(record),
            Err(reason) => corpus.diagnostics.push(Diagnostic { line_no, reason }),
        }
    }
    Ok(corpus)
}

pub fn load_corpus(path: &Path) -> Result<Corpus> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(&text)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layer {
    Rule,
    Keyword,
    Semantic,
    /// The clause named its authors with a collective phrase ("all authors").
    Collective,
}

impl Layer {
    /// Lower is stronger when deduplicating (author, category) pairs.
    pub fn precedence(self) -> u8 {
        match self {
            Layer::Rule => 0,
            Layer::Keyword => 1,
            Layer::Semantic => 2,
            Layer::Collective => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskAssignment {
    pub article_id: String,
    /// 1-based byline position.
    pub author_index: usize,
    pub author_name: String,
    pub category: CreditCategory,
    pub layer: Layer,
    pub evidence: String,
}

impl TaskAssignment {
    fn sort_key(&self) -> (&str, usize, usize) {
        (&self.article_id, self.author_index, self.category.ordinal())
    }
}

pub fn sort_assignments(assignments: &mut [TaskAssignment]) {
    assignments.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
}

/// Writes JSONL sorted by (article, author, category order).
pub fn write_assignments(assignments: &[TaskAssignment], path: &Path) -> Result<()> {
    let mut sorted: Vec<&TaskAssignment> = assignments.iter().collect();
    sorted.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for a in sorted {
        let line = serde_json::to_string(a).expect("assignment serializes");
        writeln!(out, "{line}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn read_assignments(path: &Path) -> Result<Vec<TaskAssignment>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let a: TaskAssignment = serde_json::from_str(&line)
            .map_err(|e| Error::Invalid(format!("{}:{}: {e}", path.display(), i + 1)))?;
        out.push(a);
    }
    Ok(out)
}
