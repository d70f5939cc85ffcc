//! Regenerates the bundled 100-article evaluation fixture.
//!
//! cargo run -p contribmine-core --example make_fixture -- tests/fixtures
//!
//! Every article gets a byline and a contribution statement built from the
//! roles planned for each author. The plan is the ground truth: gold task
//! labels are a seeded sample of 505 planned (author, role) pairs, and the
//! gold mention of every author is the surface form written in the text.
//!
//! Positional trends built into the plan:
//! - first author: drafting plus three more roles
//! - second author: two roles
//! - middle authors: one role
//! - last author (teams of two or more): supervision plus one role
//! - every multi-author article has a collective review/editing sentence
//!
//! Some articles carry deliberate hard cases: two authors with the same
//! initials, nicknames, surname-only mentions, and role phrases with no
//! taxonomy keyword.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use contribmine::evaluation::GoldRecord;
use contribmine::taxonomy::CreditCategory::{self, *};

const SEED: u64 = 0x00C0_FFEE_2024;
const GOLD_TASKS: usize = 505;

/// (team size, number of articles); 100 articles, 665 authors.
const TEAM_SIZES: &[(usize, usize)] = &[
    (1, 4),
    (2, 11),
    (3, 12),
    (4, 12),
    (5, 12),
    (6, 10),
    (7, 8),
    (8, 7),
    (9, 5),
    (10, 5),
    (12, 4),
    (14, 3),
    (16, 3),
    (20, 2),
    (25, 2),
];

const GIVEN: &[&str] = &[
    "John",
    "Mary",
    "Wei",
    "Anna",
    "Lukas",
    "Sofia",
    "Mateo",
    "Yuki",
    "Hiroshi",
    "Priya",
    "Arjun",
    "Fatima",
    "Omar",
    "Chinedu",
    "Amara",
    "Elena",
    "Ivan",
    "Olga",
    "Pierre",
    "Camille",
    "Jean-Luc",
    "Marie-Claire",
    "Xiao-Ming",
    "Hye-Jin",
    "Ji-Woo",
    "Sara",
    "Lars",
    "Ingrid",
    "Giulia",
    "Marco",
    "Kofi",
    "Noor",
    "Leila",
    "Tomás",
    "Paulo",
    "Beatriz",
    "David",
    "Rachel",
    "Michael",
    "Sarah",
    "Daniel",
    "Laura",
    "Thomas",
    "Emma",
    "James",
    "Olivia",
    "Elizabeth",
    "Benjamin",
    "Charlotte",
    "Samuel",
    "Hannah",
    "Nikolai",
    "Svetlana",
    "Kenji",
    "Aiko",
    "Ravi",
    "Deepa",
    "Mohammed",
    "Aisha",
    "Carlos",
    "Lucía",
    "Diego",
    "Valentina",
    "Felix",
    "Greta",
    "Jonas",
    "Oskar",
    "Freya",
    "Henrik",
    "Astrid",
    "Zeynep",
    "Emre",
    "Chiara",
    "Bruno",
    "Ines",
    "Hugo",
    "Nadia",
    "Rui",
];

const MIDDLE: &[&str] = &["Anne", "Marie", "Lee", "Paul", "Rose", "Kim", "Ray", "Jane"];

const SURNAMES: &[&str] = &[
    "Smith",
    "Müller",
    "García",
    "Nakamura",
    "Kowalski",
    "Okafor",
    "Johansson",
    "Rossi",
    "Novak",
    "Chen",
    "Wang",
    "Zhang",
    "Kim",
    "Park",
    "Nguyen",
    "Dubois",
    "Schmidt",
    "Fischer",
    "Silva",
    "Santos",
    "Costa",
    "Ivanova",
    "Petrov",
    "Hansen",
    "Larsen",
    "O'Brien",
    "MacLeod",
    "van Dijk",
    "de Vries",
    "de la Cruz",
    "García-López",
    "Ben-David",
    "Al-Farsi",
    "Tanaka",
    "Suzuki",
    "Sato",
    "Kumar",
    "Singh",
    "Patel",
    "Sharma",
    "Haddad",
    "Mensah",
    "Adeyemi",
    "Eriksson",
    "Lindqvist",
    "Bianchi",
    "Romano",
    "Moreau",
    "Laurent",
    "Fournier",
    "Becker",
    "Wagner",
    "Hoffmann",
    "Horvat",
    "Yilmaz",
    "Demir",
    "Cohen",
    "Levi",
    "Friedman",
    "Walsh",
    "Murphy",
    "Kelly",
    "Byrne",
    "Thompson",
    "Roberts",
    "Carter",
    "Phillips",
    "Evans",
    "Collins",
    "Edwards",
    "Stewart",
    "Morris",
    "Rogers",
    "Reed",
    "Cook",
    "Morgan",
    "Bell",
    "Bailey",
    "Cooper",
    "Richardson",
    "Cox",
    "Howard",
    "Ward",
    "Torres",
    "Peterson",
    "Gray",
    "Ramirez",
    "Watson",
    "Brooks",
    "Sanders",
    "Price",
    "Bennett",
    "Wood",
    "Barnes",
    "Ross",
    "Henderson",
    "Coleman",
    "Jenkins",
    "Perry",
    "Powell",
    "Hughes",
    "Flores",
    "Butler",
    "Simmons",
    "Foster",
    "Bryant",
    "Russell",
    "Griffin",
    "Diaz",
    "Hayes",
    "Quinn",
    "Lopes",
    "Ferreira",
    "Almeida",
    "Varga",
    "Nagy",
    "Dvořák",
];

/// (formal given name, nickname used in the text).
const NICKNAMES: &[(&str, &str)] = &[
    ("William", "Bill"),
    ("Robert", "Bob"),
    ("Katherine", "Kate"),
    ("Alexander", "Alex"),
    ("Margaret", "Peggy"),
];

/// Verb phrases per role. The second list holds phrasings that contain no
/// taxonomy keyword.
fn phrases(c: CreditCategory) -> (&'static [&'static str], &'static [&'static str]) {
    match c {
        Conceptualization => (
            &[
                "conceived the study",
                "developed the original idea",
                "conceived the project",
                "contributed to the study design",
            ],
            &[
                "came up with the research question",
                "proposed the original hypothesis",
                "formulated the research goals",
            ],
        ),
        Methodology => (
            &[
                "developed the methodology",
                "designed the algorithm",
                "developed the theoretical model",
                "refined the methodology",
            ],
            &[
                "developed the methods used in the study",
                "devised the analytical approach",
            ],
        ),
        Investigation => (
            &[
                "performed the experiments",
                "carried out the field work",
                "recruited the patients",
                "ran the simulations",
                "conducted the investigation",
            ],
            &[
                "carried out the assays",
                "performed the laboratory measurements",
                "conducted the interviews",
            ],
        ),
        FormalAnalysis => (
            &[
                "analyzed the data",
                "performed the statistical analysis",
                "carried out the formal analysis",
                "did the computational analysis",
            ],
            &["analysed the data", "evaluated the results quantitatively"],
        ),
        DataCuration => (
            &[
                "was responsible for data collection",
                "managed the database",
                "handled data curation",
                "did the data cleaning",
            ],
            &[
                "collected the data",
                "maintained the research data",
                "organized the raw data files",
            ],
        ),
        WritingOriginalDraft => (
            &[
                "drafted the manuscript",
                "wrote the first draft",
                "wrote the original draft",
                "prepared the draft of the paper",
            ],
            &[],
        ),
        Supervision => (
            &[
                "provided supervision",
                "was in charge of supervision",
                "provided overall supervision",
            ],
            &[
                "supervised the project",
                "oversaw the research",
                "supervised the work",
            ],
        ),
        Validation => (
            &[
                "performed the validation",
                "carried out the verification of the results",
                "was responsible for validation",
            ],
            &["validated the results", "verified the findings"],
        ),
        ProjectAdministration => (
            &[
                "handled project administration",
                "was responsible for project coordination",
                "provided project leadership",
            ],
            &["coordinated the project", "managed the project"],
        ),
        Resources => (
            &[
                "provided the materials",
                "contributed reagents and materials",
                "provided resources",
                "provided analysis tools",
            ],
            &["provided the samples", "provided laboratory equipment"],
        ),
        FundingAcquisition => (
            &[
                "acquired the funding",
                "secured funding for the project",
                "was responsible for funding",
            ],
            &["obtained the grant", "secured financial support"],
        ),
        Visualization => (
            &[
                "prepared the figures",
                "created the visualizations",
                "produced the charts",
                "made the graphs",
            ],
            &["prepared the plots", "drew the maps"],
        ),
        Software => (
            &[
                "wrote the code",
                "developed the software",
                "wrote the analysis software",
                "did the programming",
            ],
            &["implemented the pipeline", "wrote the scripts"],
        ),
        WritingReviewEditing => (
            &[
                "reviewed and edited the manuscript",
                "revised the paper",
                "critically reviewed the manuscript",
            ],
            &["polished the language of the text"],
        ),
    }
}

fn label(c: CreditCategory) -> &'static str {
    match c {
        Conceptualization => "Conceptualization",
        Methodology => "Methodology",
        Investigation => "Investigation",
        FormalAnalysis => "Formal analysis",
        DataCuration => "Data curation",
        WritingOriginalDraft => "Writing – original draft",
        Supervision => "Supervision",
        Validation => "Validation",
        ProjectAdministration => "Project administration",
        Resources => "Resources",
        FundingAcquisition => "Funding acquisition",
        Visualization => "Visualization",
        Software => "Software",
        WritingReviewEditing => "Writing – review & editing",
    }
}

const FIRST_POOL: &[CreditCategory] = &[
    Conceptualization,
    Methodology,
    Investigation,
    FormalAnalysis,
    DataCuration,
    Software,
    Visualization,
];
const SECOND_POOL: &[CreditCategory] = &[
    Investigation,
    DataCuration,
    FormalAnalysis,
    Software,
    Validation,
    Methodology,
    Visualization,
];
const MIDDLE_POOL: &[CreditCategory] = &[
    Investigation,
    Resources,
    DataCuration,
    Validation,
    Software,
    FormalAnalysis,
    Investigation,
];
const LAST_POOL: &[CreditCategory] = &[
    FundingAcquisition,
    ProjectAdministration,
    Conceptualization,
    Resources,
];

#[derive(Clone, Debug)]
struct Person {
    given: Vec<String>,
    surname: String,
    /// Given name as written in the text, when it differs from the byline.
    nickname: Option<String>,
}

impl Person {
    fn full(&self) -> String {
        format!("{} {}", self.given.join(" "), self.surname)
    }

    fn given_initials(&self, dots: bool) -> String {
        let mut out = String::new();
        for g in &self.given {
            let parts: Vec<String> = g
                .split('-')
                .map(|p| {
                    let c = p.chars().next().unwrap();
                    if dots {
                        format!("{c}.")
                    } else {
                        c.to_string()
                    }
                })
                .collect();
            out.push_str(&parts.join("-"));
        }
        out
    }

    fn surname_initial(&self) -> char {
        self.surname
            .split(' ')
            .next_back()
            .unwrap()
            .chars()
            .next()
            .unwrap()
    }

    fn initials_key(&self) -> String {
        format!("{}{}", self.given_initials(false), self.surname_initial())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum MentionStyle {
    Dotted,
    Compact,
    Full,
    Abbreviated,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum HardCase {
    None,
    Nickname,
    SurnameOnly,
}

fn mention(p: &Person, style: MentionStyle, hard: HardCase) -> String {
    match hard {
        HardCase::Nickname => {
            return format!("{} {}", p.nickname.as_deref().unwrap(), p.surname);
        }
        HardCase::SurnameOnly => return format!("Dr. {}", p.surname),
        HardCase::None => {}
    }
    match style {
        MentionStyle::Dotted => format!("{}{}.", p.given_initials(true), p.surname_initial()),
        MentionStyle::Compact => format!("{}{}", p.given_initials(false), p.surname_initial()),
        MentionStyle::Full => p.full(),
        MentionStyle::Abbreviated => format!("{} {}", p.given_initials(true), p.surname),
    }
}

fn join_list(items: &[String]) -> String {
    match items.len() {
        0 => String::new(),
        1 => items[0].clone(),
        n => format!("{} and {}", items[..n - 1].join(", "), items[n - 1]),
    }
}

struct Article {
    id: String,
    people: Vec<Person>,
    mentions: Vec<String>,
    text: String,
    tasks: Vec<BTreeSet<CreditCategory>>,
}

struct Generator {
    rng: ChaCha8Rng,
    plain_phrases: usize,
    keywordless_phrases: usize,
}

impl Generator {
    fn person(&mut self) -> Person {
        let given = if self.rng.gen_bool(0.2) {
            vec![
                GIVEN.choose(&mut self.rng).unwrap().to_string(),
                MIDDLE.choose(&mut self.rng).unwrap().to_string(),
            ]
        } else {
            vec![GIVEN.choose(&mut self.rng).unwrap().to_string()]
        };
        Person {
            given,
            surname: SURNAMES.choose(&mut self.rng).unwrap().to_string(),
            nickname: None,
        }
    }

    fn nicknamed(&mut self) -> Person {
        let (formal, nick) = *NICKNAMES.choose(&mut self.rng).unwrap();
        Person {
            given: vec![formal.to_string()],
            surname: SURNAMES.choose(&mut self.rng).unwrap().to_string(),
            nickname: Some(nick.to_string()),
        }
    }

    fn pick(
        &mut self,
        pool: &[CreditCategory],
        n: usize,
        taken: &BTreeSet<CreditCategory>,
    ) -> Vec<CreditCategory> {
        let mut options: Vec<CreditCategory> = pool
            .iter()
            .copied()
            .filter(|c| !taken.contains(c))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        options.shuffle(&mut self.rng);
        options.truncate(n);
        options
    }

    fn plan_tasks(&mut self, n: usize) -> Vec<BTreeSet<CreditCategory>> {
        let mut tasks = vec![BTreeSet::new(); n];
        for (i, t) in tasks.iter_mut().enumerate() {
            let pos = i + 1;
            if pos == 1 {
                t.insert(WritingOriginalDraft);
                let extra = self.pick(FIRST_POOL, 3, t);
                t.extend(extra);
            } else if pos == n {
                t.insert(Supervision);
                let extra = self.pick(LAST_POOL, 1, t);
                t.extend(extra);
            } else if pos == 2 {
                let extra = self.pick(SECOND_POOL, 2, t);
                t.extend(extra);
            } else {
                let extra = self.pick(MIDDLE_POOL, 1, t);
                t.extend(extra);
            }
        }
        tasks
    }

    fn phrase(&mut self, c: CreditCategory) -> String {
        let (plain, keywordless) = phrases(c);
        if !keywordless.is_empty() && self.rng.gen_bool(0.12) {
            self.keywordless_phrases += 1;
            keywordless.choose(&mut self.rng).unwrap().to_string()
        } else {
            self.plain_phrases += 1;
            plain.choose(&mut self.rng).unwrap().to_string()
        }
    }

    fn byline(&mut self, n: usize, same_initials: bool, nickname_at: Option<usize>) -> Vec<Person> {
        let mut people: Vec<Person> = Vec::with_capacity(n);
        while people.len() < n {
            let i = people.len();
            let p = if Some(i) == nickname_at {
                self.nicknamed()
            } else {
                self.person()
            };
            let clash = people
                .iter()
                .any(|q| q.initials_key() == p.initials_key() || q.surname == p.surname);
            if !clash {
                people.push(p);
            }
        }
        if same_initials && n >= 3 {
            // Two co-authors whose initials coincide, e.g. Jian Sun and Jing Song.
            let a = people[1].clone();
            let key_given = a.given_initials(false);
            let initial = a.surname_initial();
            for _ in 0..10_000 {
                let g = GIVEN.choose(&mut self.rng).unwrap();
                let s = SURNAMES.choose(&mut self.rng).unwrap();
                let cand = Person {
                    given: a
                        .given
                        .iter()
                        .enumerate()
                        .map(|(k, x)| if k == 0 { g.to_string() } else { x.clone() })
                        .collect(),
                    surname: s.to_string(),
                    nickname: None,
                };
                if cand.given_initials(false) == key_given
                    && cand.surname_initial() == initial
                    && cand.surname != a.surname
                    && cand.given[0] != a.given[0]
                    && !people.iter().any(|q| q.surname == cand.surname)
                {
                    let last = n - 2;
                    people[last.max(2)] = cand;
                    break;
                }
            }
        }
        people
    }

    fn article(&mut self, id: String, n: usize) -> Article {
        let style = match self.rng.gen_range(0..20) {
            0..=10 => MentionStyle::Dotted,
            11..=13 => MentionStyle::Compact,
            14..=16 => MentionStyle::Full,
            _ => MentionStyle::Abbreviated,
        };
        let same_initials = style == MentionStyle::Dotted && n >= 4 && self.rng.gen_bool(0.12);
        let hard_at = (n >= 3 && self.rng.gen_bool(0.09)).then(|| self.rng.gen_range(1..n));
        let hard = if hard_at.is_some() && self.rng.gen_bool(0.5) {
            HardCase::Nickname
        } else {
            HardCase::SurnameOnly
        };
        let nickname_at = hard_at.filter(|_| hard == HardCase::Nickname);
        let people = self.byline(n, same_initials, nickname_at);
        let mentions: Vec<String> = people
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let h = if Some(i) == hard_at {
                    hard
                } else {
                    HardCase::None
                };
                mention(p, style, h)
            })
            .collect();
        let mut tasks = self.plan_tasks(n);

        let role_first = n >= 2 && self.rng.gen_bool(0.3);
        let collective = n >= 2;
        let mut sentences = Vec::new();

        if role_first {
            let mut by_role: BTreeMap<CreditCategory, Vec<usize>> = BTreeMap::new();
            for (i, t) in tasks.iter().enumerate() {
                for &c in t {
                    by_role.entry(c).or_default().push(i);
                }
            }
            for (c, who) in by_role {
                let names: Vec<String> = who.iter().map(|&i| mentions[i].clone()).collect();
                sentences.push(format!("{}: {}", label(c), join_list(&names)));
            }
            if collective {
                let all = if n == 2 && self.rng.gen_bool(0.5) {
                    "both authors"
                } else {
                    "all authors"
                };
                sentences.push(format!("{}: {all}", label(WritingReviewEditing)));
            }
            // A closing period is not doubled after a dotted initial.
            let semicolons = self.rng.gen_bool(0.5);
            let mut text = String::new();
            for (k, s) in sentences.iter().enumerate() {
                if k > 0 {
                    text.push_str(if semicolons { "; " } else { " " });
                }
                text.push_str(s);
                let last = k + 1 == sentences.len();
                if !s.ends_with('.') && (last || !semicolons) {
                    text.push('.');
                }
            }
            return self.finish(id, people, mentions, text, tasks, collective);
        }

        // Author-first. Middle authors sharing a single role are grouped.
        let mut grouped: BTreeMap<CreditCategory, Vec<usize>> = BTreeMap::new();
        for (i, t) in tasks.iter().enumerate() {
            let middle = i > 1 && i + 1 < n;
            if middle && t.len() == 1 && n >= 6 {
                grouped
                    .entry(*t.iter().next().unwrap())
                    .or_default()
                    .push(i);
                continue;
            }
            let mut roles: Vec<CreditCategory> = t.iter().copied().collect();
            roles.shuffle(&mut self.rng);
            if n == 1 {
                roles.push(WritingReviewEditing);
            }
            let ps: Vec<String> = roles.iter().map(|&c| self.phrase(c)).collect();
            sentences.push(format!("{} {}.", mentions[i], join_list(&ps)));
        }
        if n == 1 {
            tasks[0].insert(WritingReviewEditing);
        }
        for (c, who) in grouped {
            let names: Vec<String> = who.iter().map(|&i| mentions[i].clone()).collect();
            let phrase = self.phrase(c);
            sentences.push(format!("{} {phrase}.", join_list(&names)));
        }
        if collective {
            let s = match (n, self.rng.gen_range(0..4)) {
                (2, 0) => "Both authors reviewed and edited the manuscript.",
                (_, 0) | (_, 1) => "All authors reviewed and edited the manuscript.",
                (_, 2) => "All authors read and approved the final manuscript.",
                _ => "All authors contributed to the writing and revision of the paper.",
            };
            sentences.push(s.to_string());
        }
        let text = sentences.join(" ");
        self.finish(id, people, mentions, text, tasks, collective)
    }

    fn finish(
        &mut self,
        id: String,
        people: Vec<Person>,
        mentions: Vec<String>,
        text: String,
        mut tasks: Vec<BTreeSet<CreditCategory>>,
        collective: bool,
    ) -> Article {
        if collective {
            for t in tasks.iter_mut() {
                t.insert(WritingReviewEditing);
            }
        }
        Article {
            id,
            people,
            mentions,
            text,
            tasks,
        }
    }
}

const VENUES: &[&str] = &[
    "PLOS ONE",
    "Scientific Reports",
    "eLife",
    "BMJ Open",
    "Frontiers in Psychology",
    "PeerJ",
];
const TOPICS: &[&str] = &[
    "soil microbiome",
    "sleep quality",
    "river sediment",
    "protein folding",
    "urban heat",
    "gut bacteria",
    "reading fluency",
    "coral bleaching",
    "insulin response",
    "crop yield",
];

fn main() {
    let out_dir = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "tests/fixtures".into()),
    );
    fs::create_dir_all(&out_dir).expect("create output dir");

    let mut g = Generator {
        rng: ChaCha8Rng::seed_from_u64(SEED),
        plain_phrases: 0,
        keywordless_phrases: 0,
    };
    let mut sizes: Vec<usize> = TEAM_SIZES
        .iter()
        .flat_map(|&(size, count)| std::iter::repeat_n(size, count))
        .collect();
    sizes.shuffle(&mut g.rng);

    let articles: Vec<Article> = sizes
        .iter()
        .enumerate()
        .map(|(k, &n)| g.article(format!("fx{:03}", k + 1), n))
        .collect();

    // Gold tasks: a uniform sample of the planned (author, role) pairs.
    let mut pairs: Vec<(usize, usize, CreditCategory)> = Vec::new();
    for (a, art) in articles.iter().enumerate() {
        for (i, t) in art.tasks.iter().enumerate() {
            pairs.extend(t.iter().map(|&c| (a, i + 1, c)));
        }
    }
    let mut chosen: Vec<usize> = (0..pairs.len()).collect();
    chosen.shuffle(&mut g.rng);
    chosen.truncate(GOLD_TASKS);
    chosen.sort_unstable();

    let mut corpus = String::new();
    let mut gold = String::new();
    for (a, art) in articles.iter().enumerate() {
        let topic = TOPICS[a % TOPICS.len()];
        let line = json!({
            "id": art.id,
            "title": format!("A study of {topic} ({})", a + 1),
            "venue": VENUES[a % VENUES.len()],
            "year": 2016 + (a % 8) as i64,
            "authors": art.people.iter().map(Person::full).collect::<Vec<_>>(),
            "contribution_text": art.text,
        });
        corpus.push_str(&line.to_string());
        corpus.push('\n');

        let rec = GoldRecord {
            article_id: art.id.clone(),
            gold_tasks: chosen
                .iter()
                .filter(|&&k| pairs[k].0 == a)
                .map(|&k| (pairs[k].1, pairs[k].2))
                .collect(),
            gold_matches: art
                .mentions
                .iter()
                .enumerate()
                .map(|(i, m)| (m.clone(), i + 1))
                .collect(),
        };
        gold.push_str(&serde_json::to_string(&rec).unwrap());
        gold.push('\n');
    }
    fs::write(out_dir.join("corpus100.jsonl"), corpus).expect("write corpus");
    fs::write(out_dir.join("gold100.jsonl"), gold).expect("write gold");
    eprintln!(
        "{} articles, {} authors, {} planned pairs, {} gold tasks, phrases {} plain / {} keywordless",
        articles.len(),
        articles.iter().map(|a| a.people.len()).sum::<usize>(),
        pairs.len(),
        GOLD_TASKS,
        g.plain_phrases,
        g.keywordless_phrases
    );
}
