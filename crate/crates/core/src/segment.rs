//! Splits a contribution paragraph into clauses, each attached to the byline
//! indices it describes.
//!
//! Two sentence shapes are recognized:
//!
//! * author-first: `A.B. performed the analysis and wrote the draft`
//! * role-first: `Conceptualization: A.B., C.D.`
//!
//! A third, `A.B.: methodology, software`, is read as author-first with a
//! comma-separated list of roles.

use std::collections::BTreeSet;
use std::ops::Range;

use serde::Serialize;

use crate::names::{MentionResolution, Resolved};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClauseStyle {
    AuthorFirst,
    RoleFirst,
    Collective,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    pub article_id: String,
    pub authors: BTreeSet<usize>,
    /// Lowercased, punctuation stripped (intra-word hyphens kept), single spaces.
    pub text: String,
    pub style: ClauseStyle,
    /// No author could be attached to this clause.
    pub unattributed: bool,
}

#[derive(Serialize)]
pub struct ClauseRecord<'a> {
    pub article_id: &'a str,
    pub authors: Vec<usize>,
    pub style: ClauseStyle,
    pub text: &'a str,
}

impl<'a> From<&'a Clause> for ClauseRecord<'a> {
    fn from(c: &'a Clause) -> Self {
        ClauseRecord {
            article_id: &c.article_id,
            authors: c.authors.iter().copied().collect(),
            style: c.style,
            text: &c.text,
        }
    }
}

/// Lowercases and replaces punctuation with spaces; hyphens survive only
/// between two alphanumerics.
pub fn normalize(text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    for (i, &c) in chars.iter().enumerate() {
        let keep = c.is_alphanumeric()
            || (c == '-'
                && i > 0
                && i + 1 < chars.len()
                && chars[i - 1].is_alphanumeric()
                && chars[i + 1].is_alphanumeric());
        if keep {
            out.extend(c.to_lowercase());
        } else {
            out.push(' ');
        }
    }
    out.split_whitespace().collect::<Vec<_>>().join(" ")
}

const ABBREVIATIONS: &[&str] = &[
    "al", "approx", "ca", "cf", "dr", "eg", "etc", "fig", "figs", "ie", "mr", "mrs", "ms", "no",
    "prof", "resp", "vs",
];

/// Words that open a predicate even though they are not past-tense forms.
const PREDICATE_HEADS: &[&str] = &[
    "also",
    "are",
    "brought",
    "built",
    "co-wrote",
    "critically",
    "did",
    "drew",
    "each",
    "equally",
    "gave",
    "got",
    "had",
    "has",
    "have",
    "held",
    "is",
    "jointly",
    "led",
    "made",
    "oversaw",
    "ran",
    "read",
    "sought",
    "substantially",
    "taught",
    "together",
    "took",
    "undertook",
    "was",
    "were",
    "won",
    "wrote",
];

const NOT_VERBS: &[&str] = &[
    "based", "bed", "detailed", "hundred", "indeed", "limited", "need", "red", "related", "seed",
    "speed",
];

fn is_predicate_head(word: &str) -> bool {
    let w = word.to_lowercase();
    let w = w.trim_matches(|c: char| !c.is_alphanumeric() && c != '-');
    if PREDICATE_HEADS.contains(&w) {
        return true;
    }
    w.len() > 3 && w.ends_with("ed") && !NOT_VERBS.contains(&w)
}

/// Sentence ranges (character offsets). Splits at `.` and `;` outside of
/// `protected` spans; a mention ending in `.` and followed by a capitalized
/// word that is not itself a mention also closes the sentence.
pub fn split_sentences(chars: &[char], protected: &[Range<usize>]) -> Vec<Range<usize>> {
    let n = chars.len();
    let inside = |i: usize| protected.iter().any(|r| r.contains(&i));
    let starts_mention = |i: usize| protected.iter().any(|r| r.start == i);

    let mut out = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < n {
        if let Some(r) = protected.iter().find(|r| r.start == i && r.end > r.start) {
            let end = r.end.min(n);
            if chars[end - 1] == '.' {
                let mut j = end;
                while j < n && chars[j].is_whitespace() {
                    j += 1;
                }
                let closes = j >= n || (j > end && chars[j].is_uppercase() && !starts_mention(j));
                if closes {
                    out.push(start..end);
                    start = end;
                }
            }
            i = end;
            continue;
        }
        let c = chars[i];
        let boundary = match c {
            ';' => !inside(i),
            '.' => {
                !inside(i)
                    && !chars.get(i + 1).is_some_and(|c| c.is_alphanumeric())
                    && !follows_abbreviation(chars, i)
            }
            _ => false,
        };
        if boundary {
            out.push(start..i + 1);
            start = i + 1;
        }
        i += 1;
    }
    if start < n {
        out.push(start..n);
    }
    out.retain(|r| chars[r.clone()].iter().any(|c| c.is_alphanumeric()));
    out
}

fn follows_abbreviation(chars: &[char], i: usize) -> bool {
    let mut j = i;
    while j > 0 && (chars[j - 1].is_alphabetic() || chars[j - 1] == '.') {
        j -= 1;
    }
    let word: String = chars[j..i]
        .iter()
        .filter(|c| c.is_alphabetic())
        .flat_map(|c| c.to_lowercase())
        .collect();
    ABBREVIATIONS.contains(&word.as_str())
}

struct Mention<'a> {
    span: Range<usize>,
    res: &'a MentionResolution,
}

/// Connective text allowed between mentions of one group.
fn is_group_glue(s: &str) -> bool {
    s.split(|c: char| c.is_whitespace() || c == ',' || c == '&')
        .filter(|w| !w.is_empty())
        .all(|w| w.eq_ignore_ascii_case("and"))
}

/// Text that may precede a subject group inside a sentence.
fn opens_subject(before: &str) -> bool {
    let t = before.trim_end();
    if t.is_empty() {
        return true;
    }
    if t.ends_with(',') {
        return true;
    }
    let last = t
        .rsplit(|c: char| c.is_whitespace() || c == ',')
        .find(|w| !w.is_empty())
        .unwrap_or("")
        .to_lowercase();
    matches!(last.as_str(), "and" | "while" | "whereas" | "&")
}

fn first_word(s: &str) -> Option<&str> {
    s.split(|c: char| c.is_whitespace() || c == ',')
        .find(|w| w.chars().any(char::is_alphanumeric))
}

/// Text of `range` with mention spans blanked out.
fn text_without_mentions(chars: &[char], range: Range<usize>, mentions: &[Mention]) -> String {
    range
        .map(|i| {
            if mentions.iter().any(|m| m.span.contains(&i)) {
                ' '
            } else {
                chars[i]
            }
        })
        .collect()
}

/// Splits a predicate at `,` / `and` when the next word opens a new
/// predicate and the left part already has an object ("performed X and
/// wrote Y"), but not between bare verbs sharing an object ("designed and
/// conducted the experiments").
fn split_predicates(text: &str) -> Vec<String> {
    #[derive(PartialEq)]
    enum Tok<'a> {
        Word(&'a str),
        Comma,
    }
    let mut toks = Vec::new();
    for piece in text.split_whitespace() {
        let mut rest = piece;
        while let Some(stripped) = rest.strip_prefix(',') {
            toks.push(Tok::Comma);
            rest = stripped;
        }
        let trailing = rest.len() - rest.trim_end_matches(',').len();
        let word = rest.trim_end_matches(',');
        if !word.is_empty() {
            toks.push(Tok::Word(word));
        }
        for _ in 0..trailing {
            toks.push(Tok::Comma);
        }
    }

    let mut out: Vec<Vec<&str>> = vec![Vec::new()];
    let mut i = 0;
    while i < toks.len() {
        let sep_end = {
            // Separator: a comma, "and", or ", and".
            let mut j = i;
            let mut saw = false;
            while j < toks.len() {
                match toks[j] {
                    Tok::Comma => {
                        saw = true;
                        j += 1;
                    }
                    Tok::Word(w) if w.eq_ignore_ascii_case("and") => {
                        saw = true;
                        j += 1;
                    }
                    _ => break,
                }
            }
            saw.then_some(j)
        };
        if let Some(j) = sep_end {
            let next_is_head = matches!(toks.get(j), Some(Tok::Word(w)) if is_predicate_head(w));
            let current = out.last().unwrap();
            if next_is_head && current.len() >= 2 {
                out.push(Vec::new());
            } else {
                for t in &toks[i..j] {
                    if let Tok::Word(w) = t {
                        out.last_mut().unwrap().push(w);
                    }
                }
            }
            i = j;
            continue;
        }
        if let Tok::Word(w) = toks[i] {
            out.last_mut().unwrap().push(w);
        }
        i += 1;
    }
    out.into_iter()
        .map(|ws| ws.join(" "))
        .filter(|s| !normalize(s).is_empty())
        .collect()
}

fn style_of(group: &[&Mention]) -> ClauseStyle {
    if group
        .iter()
        .all(|m| matches!(m.res.resolved, Resolved::Collective { .. }))
    {
        ClauseStyle::Collective
    } else {
        ClauseStyle::AuthorFirst
    }
}

fn authors_of(group: &[&Mention]) -> BTreeSet<usize> {
    group
        .iter()
        .flat_map(|m| m.res.resolved.attributed().iter().copied())
        .collect()
}

fn make_clause(
    article_id: &str,
    authors: BTreeSet<usize>,
    raw: &str,
    style: ClauseStyle,
) -> Option<Clause> {
    let text = normalize(raw);
    if text.is_empty() {
        return None;
    }
    Some(Clause {
        article_id: article_id.to_string(),
        unattributed: authors.is_empty(),
        authors,
        text,
        style,
    })
}

fn segment_sentence(
    article_id: &str,
    chars: &[char],
    range: Range<usize>,
    mentions: &[Mention],
    out: &mut Vec<Clause>,
) {
    let local: Vec<&Mention> = mentions
        .iter()
        .filter(|m| m.span.start >= range.start && m.span.end <= range.end)
        .collect();
    let whole = |out: &mut Vec<Clause>| {
        let raw = text_without_mentions(chars, range.clone(), mentions);
        let authors: BTreeSet<usize> = local
            .iter()
            .flat_map(|m| m.res.resolved.attributed().iter().copied())
            .collect();
        if let Some(c) = make_clause(article_id, authors, &raw, ClauseStyle::AuthorFirst) {
            out.push(c);
        }
    };

    let colon = range
        .clone()
        .find(|&i| chars[i] == ':' && !local.iter().any(|m| m.span.contains(&i)));
    if let Some(colon) = colon {
        let left: Vec<&Mention> = local
            .iter()
            .copied()
            .filter(|m| m.span.end <= colon)
            .collect();
        let right: Vec<&Mention> = local
            .iter()
            .copied()
            .filter(|m| m.span.start > colon)
            .collect();
        match (left.is_empty(), right.is_empty()) {
            (true, false) => {
                let raw: String = chars[range.start..colon].iter().collect();
                let style = match style_of(&right) {
                    ClauseStyle::Collective => ClauseStyle::Collective,
                    _ => ClauseStyle::RoleFirst,
                };
                if let Some(c) = make_clause(article_id, authors_of(&right), &raw, style) {
                    out.push(c);
                }
            }
            (false, true) => {
                let authors = authors_of(&left);
                let style = style_of(&left);
                let roles: String = chars[colon + 1..range.end].iter().collect();
                for role in roles.split(',') {
                    if let Some(c) = make_clause(article_id, authors.clone(), role, style) {
                        out.push(c);
                    }
                }
            }
            _ => {
                let raw = text_without_mentions(chars, range.clone(), mentions);
                if let Some(c) =
                    make_clause(article_id, BTreeSet::new(), &raw, ClauseStyle::AuthorFirst)
                {
                    out.push(c);
                }
            }
        }
        return;
    }

    if local.is_empty() {
        whole(out);
        return;
    }

    // Group adjacent mentions ("A.B., C.D. and E.F.").
    let mut groups: Vec<Vec<&Mention>> = Vec::new();
    for m in &local {
        match groups.last_mut() {
            Some(g) => {
                let prev_end = g.last().unwrap().span.end;
                let between: String = chars[prev_end..m.span.start].iter().collect();
                if is_group_glue(&between) {
                    g.push(m);
                } else {
                    groups.push(vec![m]);
                }
            }
            None => groups.push(vec![m]),
        }
    }

    // A group is a subject if it opens the sentence or follows a clause
    // separator, and a predicate head follows it.
    let mut subjects: Vec<usize> = Vec::new();
    for (gi, g) in groups.iter().enumerate() {
        let start = g[0].span.start;
        let end = g.last().unwrap().span.end;
        let before_from = if gi == 0 {
            range.start
        } else {
            groups[gi - 1].last().unwrap().span.end
        };
        let before: String = chars[before_from..start].iter().collect();
        let next_start = groups
            .get(gi + 1)
            .map(|n| n[0].span.start)
            .unwrap_or(range.end);
        let after: String = chars[end..next_start].iter().collect();
        let Some(word) = first_word(&after) else {
            continue;
        };
        let sentence_opening = gi == 0 && normalize(&before).is_empty();
        if sentence_opening || (opens_subject(&before) && is_predicate_head(word)) {
            subjects.push(gi);
        }
    }

    if subjects.is_empty() {
        // Passive or object-only mentions ("The study was conceived by A.B.").
        whole(out);
        return;
    }

    for (k, &gi) in subjects.iter().enumerate() {
        let group = &groups[gi];
        let pred_start = group.last().unwrap().span.end;
        let pred_end = subjects
            .get(k + 1)
            .map(|&next| groups[next][0].span.start)
            .unwrap_or(range.end);
        let raw = text_without_mentions(chars, pred_start..pred_end, mentions);
        let authors = authors_of(group);
        let style = style_of(group);
        for predicate in split_predicates(trim_connectives(&raw)) {
            if let Some(c) = make_clause(article_id, authors.clone(), &predicate, style) {
                out.push(c);
            }
        }
    }
}

fn trim_connectives(s: &str) -> &str {
    let mut t = s.trim_matches(|c: char| c.is_whitespace() || c == ',' || c == '.' || c == ';');
    loop {
        let lower = t.to_lowercase();
        if lower.ends_with(" and") {
            t = t[..t.len() - 4].trim_end_matches(|c: char| c.is_whitespace() || c == ',');
        } else if lower.ends_with(" while") {
            t = t[..t.len() - 6].trim_end_matches(|c: char| c.is_whitespace() || c == ',');
        } else {
            return t;
        }
    }
}

/// Segments `text` into clauses. `resolutions` must come from the same text.
pub fn segment(article_id: &str, text: &str, resolutions: &[MentionResolution]) -> Vec<Clause> {
    let chars: Vec<char> = text.chars().collect();
    let mentions: Vec<Mention> = resolutions
        .iter()
        .filter(|r| r.span.end <= chars.len())
        .map(|r| Mention {
            span: r.span.clone(),
            res: r,
        })
        .collect();
    let protected: Vec<Range<usize>> = mentions.iter().map(|m| m.span.clone()).collect();
    let mut out = Vec::new();
    for sentence in split_sentences(&chars, &protected) {
        segment_sentence(article_id, &chars, sentence, &mentions, &mut out);
    }
    out
}
