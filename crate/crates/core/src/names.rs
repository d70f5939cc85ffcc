//! Initial/acronym candidate generation for byline names and resolution of
//! author mentions inside contribution statements.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::model::{ArticleRecord, FullName, NameToken};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NameOrder {
    GivenFirst,
    SurnameFirst,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MiddleNames {
    Included,
    Omitted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Punctuation {
    Dots,
    None,
    Spaced,
    Hyphenated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Casing {
    Upper,
    Lower,
    Mixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Variant {
    pub ordering: NameOrder,
    pub middle: MiddleNames,
    pub punctuation: Punctuation,
    pub casing: Casing,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AcronymCandidate {
    pub surface: String,
    pub variant: Variant,
    /// False for forms that drop part of the name (omitted middle names,
    /// alternative surname readings). Specific forms win ties at a span.
    pub specific: bool,
}

const SURNAME_PARTICLES: &[&str] = &[
    "al", "bin", "da", "das", "de", "del", "della", "den", "der", "di", "do", "dos", "du", "el",
    "ibn", "la", "le", "st", "ten", "ter", "van", "von", "y", "zu",
];

/// Lowercase compact forms that collide with ordinary words.
const LOWERCASE_STOPWORDS: &[&str] = &[
    "all", "and", "are", "but", "can", "did", "for", "got", "had", "has", "its", "led", "may",
    "new", "not", "one", "our", "per", "ran", "see", "set", "the", "two", "use", "via", "was",
    "who",
];

#[derive(Clone, Debug)]
struct Part {
    full: String,
    initial: char,
    hyphen_after: bool,
}

impl Part {
    fn from_token(t: &NameToken) -> Option<Part> {
        let initial = t.text.chars().find(|c| c.is_alphanumeric())?;
        let bare: String = t.text.trim_matches('.').to_string();
        // A byline token that is itself an initial ("John D. Smith").
        let full = if bare.chars().count() == 1 {
            format!("{bare}.")
        } else {
            bare
        };
        Some(Part {
            full,
            initial: initial.to_uppercase().next().unwrap_or(initial),
            hyphen_after: t.hyphen_after,
        })
    }
}

/// One way of splitting a name into given names and surname.
struct Reading {
    given: Vec<Part>,
    particles: Vec<Part>,
    core: Vec<Part>,
    specific: bool,
}

fn is_particle(t: &NameToken) -> bool {
    let lower = t.text.to_lowercase();
    t.text == lower && SURNAME_PARTICLES.contains(&lower.trim_end_matches('.'))
}

fn readings(name: &FullName) -> Vec<Reading> {
    let tokens = &name.tokens;
    let parts =
        |r: Range<usize>| -> Vec<Part> { tokens[r].iter().filter_map(Part::from_token).collect() };

    let mut start = name.surname_span.start;
    // Absorb a hyphenated surname group ("Smith-Jones").
    let mut hyphen_absorbed = false;
    while start > 1 && tokens[start - 1].hyphen_after {
        start -= 1;
        hyphen_absorbed = true;
    }
    // Absorb lowercase particles ("de la Cruz"), keeping at least one given name.
    while start > 1 && is_particle(&tokens[start - 1]) {
        start -= 1;
    }

    let n = tokens.len();
    let split_surname = |from: usize| -> (Vec<Part>, Vec<Part>) {
        let mut particles = Vec::new();
        let mut core = Vec::new();
        for t in &tokens[from..n] {
            let Some(p) = Part::from_token(t) else {
                continue;
            };
            if core.is_empty() && is_particle(t) {
                particles.push(p);
            } else {
                core.push(p);
            }
        }
        (particles, core)
    };

    let mut out = Vec::new();
    let (particles, core) = split_surname(start);
    let has_particles = !particles.is_empty();
    out.push(Reading {
        given: parts(0..start),
        particles,
        core,
        specific: true,
    });
    if hyphen_absorbed {
        out.push(Reading {
            given: parts(0..start),
            particles: Vec::new(),
            core: parts(n - 1..n),
            specific: false,
        });
        // Only the first half abbreviated ("M.G." for García-López).
        let mut first = parts(start..start + 1);
        first.iter_mut().for_each(|p| p.hyphen_after = false);
        out.push(Reading {
            given: parts(0..start),
            particles: Vec::new(),
            core: first,
            specific: false,
        });
    }
    if !has_particles && !hyphen_absorbed && n >= 3 && start == n - 1 {
        // Two-part surname reading ("Maria Garcia Lopez").
        let (particles, core) = split_surname(n - 2);
        out.push(Reading {
            given: parts(0..n - 2),
            particles,
            core,
            specific: false,
        });
    }
    out
}

fn classify_punctuation(surface: &str) -> Punctuation {
    if surface.contains('.') {
        Punctuation::Dots
    } else if surface.contains('-') {
        Punctuation::Hyphenated
    } else if surface.contains(' ') {
        Punctuation::Spaced
    } else {
        Punctuation::None
    }
}

fn classify_casing(surface: &str) -> Casing {
    if surface == surface.to_lowercase() {
        Casing::Lower
    } else if surface == surface.to_uppercase() {
        Casing::Upper
    } else {
        Casing::Mixed
    }
}

struct CandidateSet {
    by_surface: BTreeMap<String, (Variant, bool)>,
}

impl CandidateSet {
    fn add(&mut self, surface: String, ordering: NameOrder, middle: MiddleNames, specific: bool) {
        let surface = surface.trim().to_string();
        if surface.is_empty() {
            return;
        }
        let lower = surface.to_lowercase();
        self.insert(surface.clone(), ordering, middle, specific);
        if lower != surface {
            let letters = lower.chars().filter(|c| c.is_alphanumeric()).count();
            let plain = lower.chars().all(char::is_alphanumeric);
            let too_wordlike =
                (plain && letters <= 2) || LOWERCASE_STOPWORDS.contains(&lower.as_str());
            if !too_wordlike && letters >= 2 {
                self.insert(lower, ordering, middle, specific);
            }
        }
    }

    fn insert(
        &mut self,
        surface: String,
        ordering: NameOrder,
        middle: MiddleNames,
        specific: bool,
    ) {
        let variant = Variant {
            ordering,
            middle,
            punctuation: classify_punctuation(&surface),
            casing: classify_casing(&surface),
        };
        match self.by_surface.get_mut(&surface) {
            Some(existing) if !existing.1 && specific => *existing = (variant, specific),
            Some(_) => {}
            None => {
                self.by_surface.insert(surface, (variant, specific));
            }
        }
    }
}

fn join_initials(parts: &[Part], sep: &str, dot: bool, keep_hyphens: bool) -> String {
    let mut s = String::new();
    for (i, p) in parts.iter().enumerate() {
        s.push(p.initial);
        if dot {
            s.push('.');
        }
        if i + 1 < parts.len() {
            if keep_hyphens && p.hyphen_after {
                s.push('-');
            } else {
                s.push_str(sep);
            }
        }
    }
    s
}

fn join_full(parts: &[Part]) -> String {
    let mut s = String::new();
    for (i, p) in parts.iter().enumerate() {
        s.push_str(&p.full);
        if i + 1 < parts.len() {
            s.push(if p.hyphen_after { '-' } else { ' ' });
        }
    }
    s
}

fn lower_initials(parts: &[Part]) -> Vec<Part> {
    parts
        .iter()
        .map(|p| Part {
            initial: p.initial.to_lowercase().next().unwrap_or(p.initial),
            ..p.clone()
        })
        .collect()
}

/// Every plausible way the name may be abbreviated or reordered in free text.
/// Sorted by surface, duplicate-free.
pub fn generate_acronym_candidates(name: &FullName) -> Vec<AcronymCandidate> {
    use MiddleNames::{Included, Omitted};
    use NameOrder::{GivenFirst, SurnameFirst};

    let mut set = CandidateSet {
        by_surface: BTreeMap::new(),
    };

    for reading in readings(name) {
        if reading.core.is_empty() {
            continue;
        }
        let surname_core = join_full(&reading.core);
        let mut surnames = vec![surname_core.clone()];
        if !reading.particles.is_empty() {
            surnames.insert(
                0,
                format!("{} {}", join_full(&reading.particles), surname_core),
            );
        }

        if reading.given.is_empty() {
            // Mononym.
            let p = &reading.core[0];
            set.add(
                p.initial.to_string(),
                GivenFirst,
                Included,
                reading.specific,
            );
            set.add(
                format!("{}.", p.initial),
                GivenFirst,
                Included,
                reading.specific,
            );
            set.add(surname_core.clone(), GivenFirst, Included, reading.specific);
            continue;
        }

        let mut given_choices: Vec<(Vec<Part>, MiddleNames, bool)> =
            vec![(reading.given.clone(), Included, reading.specific)];
        if reading.given.len() > 1 {
            given_choices.push((reading.given[..1].to_vec(), Omitted, false));
        }

        let mut surname_initials = vec![reading.core.clone()];
        if !reading.particles.is_empty() {
            let mut with = lower_initials(&reading.particles);
            with.extend(reading.core.iter().cloned());
            surname_initials.push(with);
        }

        for (given, middle, specific) in &given_choices {
            let (middle, specific) = (*middle, *specific);

            // Initials only.
            for si in &surname_initials {
                let mut all = given.clone();
                all.extend(si.iter().cloned());
                let g_compact = join_initials(given, "", false, false);
                let s_compact = join_initials(si, "", false, false);
                set.add(
                    join_initials(&all, "", false, false),
                    GivenFirst,
                    middle,
                    specific,
                );
                set.add(
                    join_initials(&all, "", true, false),
                    GivenFirst,
                    middle,
                    specific,
                );
                set.add(
                    join_initials(&all, "", true, true),
                    GivenFirst,
                    middle,
                    specific,
                );
                set.add(
                    join_initials(&all, " ", true, false),
                    GivenFirst,
                    middle,
                    specific,
                );
                set.add(
                    join_initials(&all, " ", false, false),
                    GivenFirst,
                    middle,
                    specific,
                );
                set.add(
                    join_initials(&all, "-", false, false),
                    GivenFirst,
                    middle,
                    specific,
                );
                set.add(
                    join_initials(&all, "", false, true),
                    GivenFirst,
                    middle,
                    specific,
                );
                set.add(
                    format!("{}-{}", join_initials(given, " ", false, false), s_compact),
                    GivenFirst,
                    middle,
                    specific,
                );
                set.add(
                    format!("{g_compact}-{s_compact}"),
                    GivenFirst,
                    middle,
                    specific,
                );
            }

            // Abbreviated given names with a written-out surname.
            let g_dots_spaced = join_initials(given, " ", true, false);
            let g_dots = join_initials(given, "", true, false);
            let g_dots_hyph = join_initials(given, "", true, true);
            let g_compact = join_initials(given, "", false, false);
            let g_spaced = join_initials(given, " ", false, false);
            for surname in &surnames {
                for g in [&g_dots_spaced, &g_dots, &g_dots_hyph, &g_compact, &g_spaced] {
                    set.add(format!("{g} {surname}"), GivenFirst, middle, specific);
                    set.add(format!("{surname} {g}"), SurnameFirst, middle, specific);
                    set.add(format!("{surname}, {g}"), SurnameFirst, middle, specific);
                }
                set.add(format!("{g_dots}{surname}"), GivenFirst, middle, specific);
                set.add(
                    format!("{g_compact}.{surname}"),
                    GivenFirst,
                    middle,
                    specific,
                );
                let g_dotted_open = g_dots.trim_end_matches('.').to_string();
                set.add(
                    format!("{surname}.{g_dotted_open}"),
                    SurnameFirst,
                    middle,
                    specific,
                );
            }

            // Written-out first name with abbreviated remainder.
            let first = &given[0].full;
            let middles = &given[1..];
            let s_init = join_initials(&reading.core, "", false, false);
            let s_dots = join_initials(&reading.core, "", true, false);
            if middles.is_empty() {
                set.add(format!("{first} {s_dots}"), GivenFirst, middle, specific);
                set.add(format!("{first} {s_init}"), GivenFirst, middle, specific);
            } else {
                let m_dots = join_initials(middles, "", true, false);
                let m_dots_spaced = join_initials(middles, " ", true, false);
                let m_compact = join_initials(middles, "", false, false);
                set.add(
                    format!("{first} {m_dots_spaced} {s_dots}"),
                    GivenFirst,
                    middle,
                    specific,
                );
                set.add(
                    format!("{first} {m_dots}{s_dots}"),
                    GivenFirst,
                    middle,
                    specific,
                );
                set.add(
                    format!("{first} {m_compact}{s_init}"),
                    GivenFirst,
                    middle,
                    specific,
                );
                set.add(
                    format!("{first} {m_dots} {surname_core}"),
                    GivenFirst,
                    middle,
                    specific,
                );
                set.add(
                    format!("{first} {m_compact} {surname_core}"),
                    GivenFirst,
                    middle,
                    specific,
                );
                for surname in &surnames {
                    set.add(
                        format!("{surname} {first} {m_dots}"),
                        SurnameFirst,
                        middle,
                        specific,
                    );
                    set.add(
                        format!("{surname} {first} {m_compact}"),
                        SurnameFirst,
                        middle,
                        specific,
                    );
                }
            }

            // Fully written names.
            let given_full = join_full(given);
            for surname in &surnames {
                set.add(
                    format!("{given_full} {surname}"),
                    GivenFirst,
                    middle,
                    specific,
                );
                set.add(
                    format!("{surname} {given_full}"),
                    SurnameFirst,
                    middle,
                    specific,
                );
                set.add(
                    format!("{surname}, {given_full}"),
                    SurnameFirst,
                    middle,
                    specific,
                );
            }
        }
    }

    if let Some(first) = name.tokens.first() {
        if name.tokens.len() > 1 || first.text.chars().count() > 1 {
            set.add(
                name.raw.clone(),
                NameOrder::GivenFirst,
                MiddleNames::Included,
                true,
            );
        }
    }

    set.by_surface
        .into_iter()
        .map(|(surface, (variant, specific))| AcronymCandidate {
            surface,
            variant,
            specific,
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CollectiveMarker {
    All,
    Both,
    Remaining,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Resolved {
    Author(usize),
    /// Two or more authors share the matched form.
    Ambiguous(Vec<usize>),
    Collective {
        marker: CollectiveMarker,
        authors: Vec<usize>,
    },
    /// Looked like initials but matched nobody.
    Unmatched,
}

impl Resolved {
    /// Byline indices this mention attributes work to. Ambiguous and
    /// unmatched mentions attribute nothing.
    pub fn attributed(&self) -> &[usize] {
        match self {
            Resolved::Author(i) => std::slice::from_ref(i),
            Resolved::Collective { authors, .. } => authors,
            Resolved::Ambiguous(_) | Resolved::Unmatched => &[],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Fallback,
    Collective,
    Unmatched,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MentionResolution {
    pub article_id: String,
    /// Character (not byte) offsets into the contribution text.
    pub span: Range<usize>,
    pub mention: String,
    pub resolved: Resolved,
    pub method: Method,
}

/// Debug dump line.
#[derive(Clone, Serialize, Deserialize, Debug, PartialEq)]
pub struct ResolutionRecord {
    pub article_id: String,
    pub span: [usize; 2],
    pub mention: String,
    pub resolved: serde_json::Value,
    pub method: Method,
}

impl From<&MentionResolution> for ResolutionRecord {
    fn from(r: &MentionResolution) -> Self {
        use serde_json::json;
        let resolved = match &r.resolved {
            Resolved::Author(i) => json!(i),
            Resolved::Ambiguous(set) => json!(set),
            Resolved::Unmatched => json!([]),
            Resolved::Collective { marker, authors } => {
                json!({ "collective": marker, "authors": authors })
            }
        };
        ResolutionRecord {
            article_id: r.article_id.clone(),
            span: [r.span.start, r.span.end],
            mention: r.mention.clone(),
            resolved,
            method: r.method,
        }
    }
}

impl ResolutionRecord {
    /// Single author index if the record resolved to exactly one author.
    pub fn single_author(&self) -> Option<usize> {
        match self.method {
            Method::Exact | Method::Fallback => self.resolved.as_u64().map(|i| i as usize),
            _ => None,
        }
    }

    pub fn collective_authors(&self) -> Vec<usize> {
        if self.method != Method::Collective {
            return Vec::new();
        }
        self.resolved["authors"]
            .as_array()
            .map(|a| {
                a.iter()
                    .filter_map(|v| v.as_u64())
                    .map(|v| v as usize)
                    .collect()
            })
            .unwrap_or_default()
    }
}

const COLLECTIVE_PHRASES: &[(&str, CollectiveMarker)] = &[
    ("all authors", CollectiveMarker::All),
    ("all the authors", CollectiveMarker::All),
    ("all of the authors", CollectiveMarker::All),
    ("all co-authors", CollectiveMarker::All),
    ("all coauthors", CollectiveMarker::All),
    ("each author", CollectiveMarker::All),
    ("every author", CollectiveMarker::All),
    ("both authors", CollectiveMarker::Both),
    ("both the authors", CollectiveMarker::Both),
    ("both of the authors", CollectiveMarker::Both),
    ("remaining authors", CollectiveMarker::Remaining),
    ("the remaining authors", CollectiveMarker::Remaining),
    ("the other authors", CollectiveMarker::Remaining),
    ("all other authors", CollectiveMarker::Remaining),
    ("other authors", CollectiveMarker::Remaining),
    ("the rest of the authors", CollectiveMarker::Remaining),
];

struct Pattern {
    chars: Vec<char>,
    author: usize,
    specific: bool,
}

/// Precomputed candidate index for one byline.
pub struct NameResolver {
    team_size: usize,
    patterns: Vec<Pattern>,
    /// Normalized initials key → authors having it.
    fallback_keys: BTreeMap<String, BTreeSet<usize>>,
    collective: Vec<(Vec<char>, CollectiveMarker)>,
}

fn fallback_key(s: &str) -> String {
    s.chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

impl NameResolver {
    pub fn new(byline: &[FullName]) -> Self {
        let mut patterns = Vec::new();
        let mut fallback_keys: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
        for (i, name) in byline.iter().enumerate() {
            let idx = i + 1;
            for cand in generate_acronym_candidates(name) {
                let is_initials = cand
                    .surface
                    .split(|c: char| !c.is_alphanumeric())
                    .all(|w| w.chars().count() <= 1);
                if is_initials {
                    fallback_keys
                        .entry(fallback_key(&cand.surface))
                        .or_default()
                        .insert(idx);
                }
                patterns.push(Pattern {
                    chars: cand.surface.chars().collect(),
                    author: idx,
                    specific: cand.specific,
                });
            }
        }
        // Longest first; ties keep generation order.
        patterns.sort_by_key(|p| std::cmp::Reverse(p.chars.len()));
        let mut collective: Vec<(Vec<char>, CollectiveMarker)> = COLLECTIVE_PHRASES
            .iter()
            .map(|(p, m)| (p.chars().collect(), *m))
            .collect();
        collective.sort_by_key(|c| std::cmp::Reverse(c.0.len()));
        NameResolver {
            team_size: byline.len(),
            patterns,
            fallback_keys,
            collective,
        }
    }

    pub fn resolve(&self, text: &str) -> Vec<MentionResolution> {
        let chars: Vec<char> = text.chars().collect();
        let n = chars.len();
        let mut out = Vec::new();
        let mut sentence_seen: BTreeSet<usize> = BTreeSet::new();
        let mut paragraph_seen: BTreeSet<usize> = BTreeSet::new();

        let boundary_after = |end: usize| end >= n || !is_word_char(chars[end]);

        let mut pos = 0;
        while pos < n {
            let c = chars[pos];
            if (c == '.' || c == ';') && (pos + 1 >= n || chars[pos + 1].is_whitespace()) {
                sentence_seen.clear();
            }
            let word_start = is_word_char(c) && (pos == 0 || !is_word_char(chars[pos - 1]));
            if !word_start {
                pos += 1;
                continue;
            }

            if let Some((len, marker)) = self.match_collective(&chars, pos) {
                let authors: Vec<usize> = match marker {
                    CollectiveMarker::All | CollectiveMarker::Both => {
                        (1..=self.team_size).collect()
                    }
                    CollectiveMarker::Remaining => {
                        let exclude = if sentence_seen.is_empty() {
                            &paragraph_seen
                        } else {
                            &sentence_seen
                        };
                        (1..=self.team_size)
                            .filter(|i| !exclude.contains(i))
                            .collect()
                    }
                };
                sentence_seen.extend(authors.iter().copied());
                paragraph_seen.extend(authors.iter().copied());
                out.push(MentionResolution {
                    article_id: String::new(),
                    span: pos..pos + len,
                    mention: chars[pos..pos + len].iter().collect(),
                    resolved: Resolved::Collective { marker, authors },
                    method: Method::Collective,
                });
                pos += len;
                continue;
            }

            if let Some((len, authors)) = self.match_exact(&chars, pos, &boundary_after) {
                let resolved = if authors.len() == 1 {
                    Resolved::Author(authors[0])
                } else {
                    Resolved::Ambiguous(authors)
                };
                let attributed = resolved.attributed().to_vec();
                sentence_seen.extend(attributed.iter().copied());
                paragraph_seen.extend(attributed);
                out.push(MentionResolution {
                    article_id: String::new(),
                    span: pos..pos + len,
                    mention: chars[pos..pos + len].iter().collect(),
                    resolved,
                    method: Method::Exact,
                });
                pos += len;
                continue;
            }

            if let Some((len, resolved, method)) = self.match_fallback(&chars, pos) {
                let attributed = resolved.attributed().to_vec();
                sentence_seen.extend(attributed.iter().copied());
                paragraph_seen.extend(attributed);
                out.push(MentionResolution {
                    article_id: String::new(),
                    span: pos..pos + len,
                    mention: chars[pos..pos + len].iter().collect(),
                    resolved,
                    method,
                });
                pos += len;
                continue;
            }

            while pos < n && is_word_char(chars[pos]) {
                pos += 1;
            }
        }
        out
    }

    fn match_collective(&self, chars: &[char], pos: usize) -> Option<(usize, CollectiveMarker)> {
        for (phrase, marker) in &self.collective {
            let end = pos + phrase.len();
            if end > chars.len() || (end < chars.len() && is_word_char(chars[end])) {
                continue;
            }
            let matches = chars[pos..end]
                .iter()
                .zip(phrase)
                .all(|(a, b)| a.to_lowercase().eq(b.to_lowercase()));
            if matches {
                return Some((phrase.len(), *marker));
            }
        }
        None
    }

    /// Longest exact candidate match starting at `pos`; among authors sharing
    /// that surface, specific readings beat partial ones.
    fn match_exact(
        &self,
        chars: &[char],
        pos: usize,
        boundary_after: &dyn Fn(usize) -> bool,
    ) -> Option<(usize, Vec<usize>)> {
        let mut best_len = 0;
        let mut hits: Vec<(usize, bool)> = Vec::new();
        for p in &self.patterns {
            let len = p.chars.len();
            if len < best_len {
                break;
            }
            let end = pos + len;
            if end > chars.len() || chars[pos..end] != p.chars[..] || !boundary_after(end) {
                continue;
            }
            best_len = len;
            hits.push((p.author, p.specific));
        }
        if hits.is_empty() {
            return None;
        }
        let any_specific = hits.iter().any(|(_, s)| *s);
        let authors: BTreeSet<usize> = hits
            .into_iter()
            .filter(|(_, s)| *s || !any_specific)
            .map(|(a, _)| a)
            .collect();
        Some((best_len, authors.into_iter().collect()))
    }

    /// Case-insensitive, punctuation-stripped comparison of an initials-like
    /// token against every author's initials.
    fn match_fallback(&self, chars: &[char], pos: usize) -> Option<(usize, Resolved, Method)> {
        let mut end = pos;
        while end < chars.len()
            && (is_word_char(chars[end]) || chars[end] == '.' || chars[end] == '-')
        {
            end += 1;
        }
        // A trailing dot is only part of the token if it closes an initial.
        let token: String = chars[pos..end].iter().collect();
        let token = token.trim_end_matches('-');
        let mut len = token.chars().count();
        if !looks_like_initials(token) {
            return None;
        }
        let key = fallback_key(token);
        if token.ends_with('.') {
            let core = token.trim_end_matches('.');
            let last_seg = core.rsplit(['.', '-']).next().unwrap_or("");
            if last_seg.chars().count() > 1 {
                len -= 1;
            }
        }
        let matched: String = chars[pos..pos + len].iter().collect();
        debug_assert!(!matched.is_empty());
        Some(match self.fallback_keys.get(&key) {
            Some(set) if set.len() == 1 => (
                len,
                Resolved::Author(*set.first().unwrap()),
                Method::Fallback,
            ),
            Some(set) => (
                len,
                Resolved::Ambiguous(set.iter().copied().collect()),
                Method::Fallback,
            ),
            None => (len, Resolved::Unmatched, Method::Unmatched),
        })
    }
}

/// Two to five letters that are either mostly capitals ("JDS", "JDs") or
/// dot-separated single letters ("j.d.s").
fn looks_like_initials(token: &str) -> bool {
    let letters: Vec<char> = token.chars().filter(|c| c.is_alphanumeric()).collect();
    if !(2..=5).contains(&letters.len()) || letters.iter().any(|c| c.is_numeric()) {
        return false;
    }
    let upper = letters.iter().filter(|c| c.is_uppercase()).count();
    let dotted_singles = token.contains('.')
        && token
            .split(['.', '-'])
            .filter(|s| !s.is_empty())
            .all(|s| s.chars().count() == 1);
    upper >= 2 || dotted_singles
}

/// Resolve every author mention in `text` against `byline`.
pub fn resolve_mentions(text: &str, byline: &[FullName]) -> Vec<MentionResolution> {
    NameResolver::new(byline).resolve(text)
}

pub fn resolve_article(article: &ArticleRecord) -> Vec<MentionResolution> {
    let mut out = resolve_mentions(&article.contribution_text, &article.byline);
    for r in &mut out {
        r.article_id = article.id.clone();
    }
    out
}
